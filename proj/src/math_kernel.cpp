#include "fixprice/math_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/lambert_w.hpp>

namespace fixprice {

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi) || !std::isfinite(lo)) {
    throw DomainError("Interval requires finite lo < hi, got [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  if (std::isinf(hi) && hi < 0) {
    throw DomainError("Interval upper end may only be +infinity");
  }
}

double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("ln_gamma requires x > 0, got " + std::to_string(x));
  }
  return boost::math::lgamma(x);
}

double gamma_fn(double x) {
  if (!(x > 0.0)) {
    throw DomainError("gamma_fn requires x > 0, got " + std::to_string(x));
  }
  if (x > 171.0) return kInfinity;
  return boost::math::tgamma(x);
}

double poisson_cdf(double y, long k) {
  if (!(y >= 0.0)) throw DomainError("poisson_cdf requires y >= 0, got " + std::to_string(y));
  if (k < 0) throw DomainError("poisson_cdf requires k >= 0");
  if (y == 0.0) return 1.0;
  return boost::math::gamma_q(static_cast<double>(k) + 1.0, y);
}

double poisson_sf(double y, long k) {
  if (!(y >= 0.0)) throw DomainError("poisson_sf requires y >= 0, got " + std::to_string(y));
  if (k < 0) throw DomainError("poisson_sf requires k >= 0");
  if (y == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(k) + 1.0, y);
}

double lambert_w_minus1(double z) {
  const double branch = -std::exp(-1.0);
  // One ulp of slack at the branch point: -1/e is not representable exactly.
  if (!(z >= branch - 1e-16) || !(z < 0.0)) {
    throw DomainError("lambert_w_minus1 requires z in [-1/e, 0), got " + std::to_string(z));
  }
  if (z <= branch) return -1.0;
  double w = boost::math::lambert_wm1(z);
  // One Halley step on w e^w - z; a no-op unless the library result is a few
  // ulps off.
  const double ew = std::exp(w);
  const double r = w * ew - z;
  const double wp1 = w + 1.0;
  if (r != 0.0 && std::abs(wp1) > 1e-6) {
    const double step = r / (ew * wp1 - (w + 2.0) * r / (2.0 * wp1));
    const double candidate = w - step;
    if (std::abs(candidate * std::exp(candidate) - z) < std::abs(r)) w = candidate;
  }
  return w;
}

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod15(const RealFunction& g, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double fc = g(centr);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> fv1{};
  std::array<double, 7> fv2{};
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;
    const double absc = hlgth * kXgk[jtw];
    const double f1 = g(centr - absc);
    const double f2 = g(centr + absc);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double absc = hlgth * kXgk[jtwm1];
    const double f1 = g(centr - absc);
    const double f2 = g(centr + absc);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }
  const double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  const double result = resk * hlgth;
  resabs *= std::abs(hlgth);
  resasc *= std::abs(hlgth);
  double abserr = std::abs((resk - resg) * hlgth);
  if (resasc != 0.0 && abserr != 0.0) {
    abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
  }
  if (resabs > uflow / (50.0 * eps)) abserr = std::max(eps * 50.0 * resabs, abserr);
  return {a, b, result, abserr};
}

bool splittable(double a, double b) {
  const double mid = 0.5 * (a + b);
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return mid > a && mid < b && (b - a) > 1e3 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace

QuadratureResult integrate_detailed(const RealFunction& f, const Interval& domain,
                                    const QuadratureOptions& options) {
  if (!(options.abs_tol > 0.0) && !(options.rel_tol > 0.0)) {
    throw DomainError("integrate requires a positive tolerance");
  }

  RealFunction g;
  double a = domain.lo();
  double b = domain.hi();
  if (domain.semi_infinite()) {
    const double lo = domain.lo();
    g = [&f, lo](double t) {
      const double s = 1.0 - t;
      const double value = f(lo + t / s);
      return value == 0.0 ? 0.0 : value / (s * s);
    };
    a = 0.0;
    b = 1.0;
  } else {
    g = f;
  }

  std::priority_queue<Segment> queue;
  std::vector<Segment> frozen;
  queue.push(kronrod15(g, a, b));
  int subdivisions = 0;

  auto totals = [&]() {
    double value = 0.0;
    double error = 0.0;
    auto copy = queue;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
    for (const auto& s : frozen) {
      value += s.value;
      error += s.error;
    }
    return std::pair{value, error};
  };

  double value = queue.top().value;
  double error = queue.top().error;
  while (true) {
    if (!std::isfinite(value) || !std::isfinite(error)) {
      throw ConvergenceError("integrate: non-finite integrand values", value, error);
    }
    const double target = std::max(options.abs_tol, options.rel_tol * std::abs(value));
    if (error <= target) break;
    if (queue.empty()) break;
    if (subdivisions >= options.max_subdivisions) break;

    const Segment worst = queue.top();
    queue.pop();
    if (!splittable(worst.a, worst.b)) {
      frozen.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = kronrod15(g, worst.a, mid);
    const Segment right = kronrod15(g, mid, worst.b);
    queue.push(left);
    queue.push(right);
    ++subdivisions;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    if (subdivisions % 64 == 0) std::tie(value, error) = totals();
  }
  std::tie(value, error) = totals();
  const double target = std::max(options.abs_tol, options.rel_tol * std::abs(value));
  if (!(error <= target)) {
    throw ConvergenceError("integrate: tolerance not reached after " +
                               std::to_string(subdivisions) + " subdivisions (error estimate " +
                               std::to_string(error) + ")",
                           value, error);
  }
  return {value, error, subdivisions};
}

double integrate(const RealFunction& f, const Interval& domain, double tol) {
  return integrate_detailed(f, domain, QuadratureOptions{tol, 0.0}).value;
}

double integrate(const RealFunction& f, const Interval& domain, const QuadratureOptions& options) {
  return integrate_detailed(f, domain, options).value;
}

namespace {

constexpr int kScanPoints = 256;

std::vector<double> scan_grid(const Interval& domain) {
  std::vector<double> grid;
  grid.reserve(kScanPoints);
  const double lo = domain.lo();
  if (domain.semi_infinite()) {
    // Offsets 1e-8 .. 1e8 from lo.
    for (int i = 0; i < kScanPoints; ++i) {
      const double exponent = -8.0 + 16.0 * i / (kScanPoints - 1);
      grid.push_back(lo + std::pow(10.0, exponent));
    }
  } else {
    const double w = domain.width();
    const int half = kScanPoints / 2;
    for (int i = 0; i < half; ++i) {
      grid.push_back(lo + w * (i + 0.5) / half);
    }
    for (int i = 0; i < half; ++i) {
      const double exponent = -12.0 + 12.0 * i / (half - 1);
      grid.push_back(lo + w * 0.995 * std::pow(10.0, exponent));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  grid.erase(std::remove_if(grid.begin(), grid.end(),
                            [&](double x) { return !(x > lo) || !(x < domain.hi()); }),
             grid.end());
  return grid;
}

double safe_eval(const RealFunction& f, double x) {
  const double v = f(x);
  return std::isnan(v) ? -kInfinity : v;
}

}  // namespace

Extremum maximize_1d(const RealFunction& f, const Interval& domain, double tol) {
  if (!(tol > 0.0)) throw DomainError("maximize_1d requires tol > 0");
  const std::vector<double> grid = scan_grid(domain);
  if (grid.size() < 3) throw DomainError("maximize_1d: domain too narrow to scan");

  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = safe_eval(f, grid[i]);

  const auto best_it = std::max_element(values.begin(), values.end());
  const std::size_t best = static_cast<std::size_t>(best_it - values.begin());
  const double vmax = *best_it;
  double vmin = kInfinity;
  for (double v : values) {
    if (std::isfinite(v)) vmin = std::min(vmin, v);
  }
  if (!std::isfinite(vmax) || vmax - vmin <= tol * std::max(1.0, std::abs(vmax))) {
    throw FlatFunctionError("maximize_1d: objective is flat (or non-finite) across the scan");
  }

  double a = best > 0 ? grid[best - 1] : domain.lo();
  double b;
  if (best + 1 < grid.size()) {
    b = grid[best + 1];
  } else {
    b = domain.semi_infinite() ? domain.lo() + 2.0 * (grid.back() - domain.lo()) : domain.hi();
  }

  Extremum incumbent{grid[best], vmax};
  auto consider = [&](double x, double v) {
    if (v > incumbent.value) incumbent = {x, v};
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = safe_eval(f, c);
  double fd = safe_eval(f, d);
  consider(c, fc);
  consider(d, fd);
  for (int iter = 0; iter < 400; ++iter) {
    const double scale = std::max(1.0, std::abs(incumbent.arg));
    if (b - a <= tol * scale) break;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = safe_eval(f, c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = safe_eval(f, d);
      consider(d, fd);
    }
  }
  return incumbent;
}

Extremum minimize_1d(const RealFunction& f, const Interval& domain, double tol) {
  const Extremum e = maximize_1d([&f](double x) { return -f(x); }, domain, tol);
  return {e.arg, -e.value};
}

double find_root(const RealFunction& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw DomainError("find_root requires tol > 0");
  double a = lo;
  double b = hi;
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::isnan(fa) || std::isnan(fb) || (fa > 0.0) == (fb > 0.0)) {
    throw NoSignChangeError("find_root: no sign change on [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
  }

  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < 500; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(fb) <= tol || std::abs(xm) <= tol1 || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

}  // namespace fixprice
