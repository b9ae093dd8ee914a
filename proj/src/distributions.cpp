#include "fixprice/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

namespace fixprice {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be a positive finite number");
  }
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw DomainError(std::string(what) + " must be finite");
}

void require_probability(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw DomainError("probability must lie in [0, 1], got " + std::to_string(q));
  }
}

}  // namespace

std::string_view to_string(EvtFamily family) {
  switch (family) {
    case EvtFamily::Frechet:
      return "Frechet";
    case EvtFamily::Gumbel:
      return "Gumbel";
    case EvtFamily::ReversedWeibull:
      return "ReversedWeibull";
  }
  return "unknown";
}

Distribution::Distribution(Params params) : params_(params) {
  std::visit(Overloaded{
                 [](const Pareto& p) { require_positive(p.alpha, "pareto alpha"); },
                 [](const Exponential& p) { require_positive(p.rate, "exp rate"); },
                 [](const Uniform& p) {
                   require_finite(p.a, "uniform a");
                   require_finite(p.b, "uniform b");
                   if (!(p.a < p.b)) throw DomainError("uniform requires a < b");
                 },
                 [](const Frechet& p) {
                   require_finite(p.m, "frechet m");
                   require_positive(p.s, "frechet s");
                   require_positive(p.alpha, "frechet alpha");
                 },
                 [](const Gumbel& p) {
                   require_finite(p.location, "gumbel loc");
                   require_positive(p.scale, "gumbel scale");
                 },
                 [](const BoundedPower& p) {
                   require_positive(p.omega, "bpower omega");
                   require_positive(p.alpha, "bpower alpha");
                 },
             },
             params_);
}

std::string Distribution::spec() const {
  std::ostringstream out;
  out << std::setprecision(12);
  std::visit(Overloaded{
                 [&](const Pareto& p) { out << "pareto:alpha=" << p.alpha; },
                 [&](const Exponential& p) { out << "exp:rate=" << p.rate; },
                 [&](const Uniform& p) { out << "uniform:a=" << p.a << ",b=" << p.b; },
                 [&](const Frechet& p) {
                   out << "frechet:m=" << p.m << ",s=" << p.s << ",alpha=" << p.alpha;
                 },
                 [&](const Gumbel& p) {
                   out << "gumbel:loc=" << p.location << ",scale=" << p.scale;
                 },
                 [&](const BoundedPower& p) {
                   out << "bpower:omega=" << p.omega << ",alpha=" << p.alpha;
                 },
             },
             params_);
  return out.str();
}

double Distribution::cdf(double t) const {
  return std::visit(
      Overloaded{
          [t](const Pareto& p) { return t <= 1.0 ? 0.0 : -std::expm1(-p.alpha * std::log(t)); },
          [t](const Exponential& p) { return t <= 0.0 ? 0.0 : -std::expm1(-p.rate * t); },
          [t](const Uniform& p) {
            if (t <= p.a) return 0.0;
            if (t >= p.b) return 1.0;
            return (t - p.a) / (p.b - p.a);
          },
          [t](const Frechet& p) {
            if (t <= p.m) return 0.0;
            return std::exp(-std::pow((t - p.m) / p.s, -p.alpha));
          },
          [t](const Gumbel& p) { return std::exp(-std::exp(-(t - p.location) / p.scale)); },
          [t](const BoundedPower& p) {
            if (t <= 0.0) return 0.0;
            if (t >= p.omega) return 1.0;
            return -std::expm1(p.alpha * std::log((p.omega - t) / p.omega));
          },
      },
      params_);
}

double Distribution::survival(double t) const {
  return std::visit(
      Overloaded{
          [t](const Pareto& p) { return t <= 1.0 ? 1.0 : std::pow(t, -p.alpha); },
          [t](const Exponential& p) { return t <= 0.0 ? 1.0 : std::exp(-p.rate * t); },
          [t](const Uniform& p) {
            if (t <= p.a) return 1.0;
            if (t >= p.b) return 0.0;
            return (p.b - t) / (p.b - p.a);
          },
          [t](const Frechet& p) {
            if (t <= p.m) return 1.0;
            return -std::expm1(-std::pow((t - p.m) / p.s, -p.alpha));
          },
          [t](const Gumbel& p) { return -std::expm1(-std::exp(-(t - p.location) / p.scale)); },
          [t](const BoundedPower& p) {
            if (t <= 0.0) return 1.0;
            if (t >= p.omega) return 0.0;
            return std::pow((p.omega - t) / p.omega, p.alpha);
          },
      },
      params_);
}

double Distribution::pdf(double t) const {
  return std::visit(
      Overloaded{
          [t](const Pareto& p) { return t < 1.0 ? 0.0 : p.alpha * std::pow(t, -p.alpha - 1.0); },
          [t](const Exponential& p) { return t < 0.0 ? 0.0 : p.rate * std::exp(-p.rate * t); },
          [t](const Uniform& p) { return (t < p.a || t > p.b) ? 0.0 : 1.0 / (p.b - p.a); },
          [t](const Frechet& p) {
            if (t <= p.m) return 0.0;
            const double z = (t - p.m) / p.s;
            const double zpow = std::pow(z, -p.alpha);
            return p.alpha / p.s * zpow / z * std::exp(-zpow);
          },
          [t](const Gumbel& p) {
            const double e = std::exp(-(t - p.location) / p.scale);
            return e * std::exp(-e) / p.scale;
          },
          [t](const BoundedPower& p) {
            if (t < 0.0 || t > p.omega) return 0.0;
            return p.alpha / p.omega * std::pow((p.omega - t) / p.omega, p.alpha - 1.0);
          },
      },
      params_);
}

double Distribution::quantile(double q) const {
  require_probability(q);
  const Support sup = support();
  if (q == 0.0) {
    if (!std::isfinite(sup.lo)) throw DomainError("quantile(0) is -infinity for this model");
    return sup.lo;
  }
  if (q == 1.0) {
    if (!std::isfinite(sup.hi)) throw DomainError("quantile(1) is +infinity for this model");
    return sup.hi;
  }
  return std::visit(
      Overloaded{
          [q](const Pareto& p) { return std::exp(-std::log1p(-q) / p.alpha); },
          [q](const Exponential& p) { return -std::log1p(-q) / p.rate; },
          [q](const Uniform& p) { return p.a + q * (p.b - p.a); },
          [q](const Frechet& p) { return p.m + p.s * std::pow(-std::log(q), -1.0 / p.alpha); },
          [q](const Gumbel& p) { return p.location - p.scale * std::log(-std::log(q)); },
          [q](const BoundedPower& p) {
            return p.omega * -std::expm1(std::log1p(-q) / p.alpha);
          },
      },
      params_);
}

double Distribution::upper_quantile(double s) const {
  require_probability(s);
  if (s == 1.0) return quantile(0.0);
  if (s == 0.0) return quantile(1.0);
  return std::visit(
      Overloaded{
          [s](const Pareto& p) { return std::exp(-std::log(s) / p.alpha); },
          [s](const Exponential& p) { return -std::log(s) / p.rate; },
          [s](const Uniform& p) { return p.b - s * (p.b - p.a); },
          [s](const Frechet& p) {
            return p.m + p.s * std::pow(-std::log1p(-s), -1.0 / p.alpha);
          },
          [s](const Gumbel& p) { return p.location - p.scale * std::log(-std::log1p(-s)); },
          [s](const BoundedPower& p) { return p.omega * -std::expm1(std::log(s) / p.alpha); },
      },
      params_);
}

Support Distribution::support() const {
  return std::visit(Overloaded{
                        [](const Pareto&) { return Support{1.0, kInfinity}; },
                        [](const Exponential&) { return Support{0.0, kInfinity}; },
                        [](const Uniform& p) { return Support{p.a, p.b}; },
                        [](const Frechet& p) { return Support{p.m, kInfinity}; },
                        [](const Gumbel&) { return Support{-kInfinity, kInfinity}; },
                        [](const BoundedPower& p) { return Support{0.0, p.omega}; },
                    },
                    params_);
}

EvtIndex Distribution::evt_index() const {
  return std::visit(
      Overloaded{
          [](const Pareto& p) { return EvtIndex{1.0 / p.alpha, EvtFamily::Frechet}; },
          [](const Exponential&) { return EvtIndex{0.0, EvtFamily::Gumbel}; },
          [](const Uniform&) { return EvtIndex{-1.0, EvtFamily::ReversedWeibull}; },
          [](const Frechet& p) { return EvtIndex{1.0 / p.alpha, EvtFamily::Frechet}; },
          [](const Gumbel&) { return EvtIndex{0.0, EvtFamily::Gumbel}; },
          [](const BoundedPower& p) {
            return EvtIndex{-1.0 / p.alpha, EvtFamily::ReversedWeibull};
          },
      },
      params_);
}

Distribution parse_distribution(std::string_view text) {
  const auto colon = text.find(':');
  const std::string name(text.substr(0, colon));
  std::map<std::string, double> values;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        throw ParseError("distribution '" + std::string(text) + "': expected key=value, got '" +
                         std::string(item) + "'");
      }
      const std::string key(item.substr(0, eq));
      const std::string_view raw = item.substr(eq + 1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
      if (ec != std::errc() || ptr != raw.data() + raw.size() || raw.empty()) {
        throw ParseError("distribution '" + std::string(text) + "': key '" + key +
                         "' has non-numeric value '" + std::string(raw) + "'");
      }
      if (!values.emplace(key, value).second) {
        throw ParseError("distribution '" + std::string(text) + "': key '" + key +
                         "' given twice");
      }
    }
  }

  struct Key {
    const char* name;
    bool required;
    double fallback;
  };
  auto take = [&](std::initializer_list<Key> keys) {
    std::vector<double> out;
    for (const Key& k : keys) {
      const auto it = values.find(k.name);
      if (it == values.end()) {
        if (k.required) {
          throw ParseError("distribution '" + std::string(text) + "': missing key '" + k.name +
                           "'");
        }
        out.push_back(k.fallback);
      } else {
        out.push_back(it->second);
        values.erase(it);
      }
    }
    if (!values.empty()) {
      throw ParseError("distribution '" + std::string(text) + "': unknown key '" +
                       values.begin()->first + "'");
    }
    return out;
  };

  try {
    if (name == "pareto") {
      const auto v = take({{"alpha", true, 0.0}});
      return Distribution::pareto(v[0]);
    }
    if (name == "exp") {
      const auto v = take({{"rate", false, 1.0}});
      return Distribution::exponential(v[0]);
    }
    if (name == "uniform") {
      const auto v = take({{"a", false, 0.0}, {"b", false, 1.0}});
      return Distribution::uniform(v[0], v[1]);
    }
    if (name == "frechet") {
      const auto v = take({{"m", false, 0.0}, {"s", true, 0.0}, {"alpha", true, 0.0}});
      return Distribution::frechet(v[0], v[1], v[2]);
    }
    if (name == "gumbel") {
      const auto v = take({{"loc", false, 0.0}, {"scale", false, 1.0}});
      return Distribution::gumbel(v[0], v[1]);
    }
    if (name == "bpower") {
      const auto v = take({{"omega", false, 1.0}, {"alpha", true, 0.0}});
      return Distribution::bounded_power(v[0], v[1]);
    }
  } catch (const DomainError& e) {
    throw ParseError("distribution '" + std::string(text) + "': " + e.what());
  }
  throw ParseError("distribution '" + std::string(text) + "': unknown family '" + name + "'");
}

NormalizingSequences normalizing_sequences(const Distribution& d) {
  auto check_n = [](double n) {
    if (!(n >= 1.0)) throw DomainError("normalizing sequences are defined for n >= 1");
  };
  const EvtIndex index = d.evt_index();
  switch (index.family) {
    case EvtFamily::Frechet:
      return {[d, check_n](double n) {
                check_n(n);
                return d.upper_quantile(1.0 / n);
              },
              [check_n](double n) {
                check_n(n);
                return 0.0;
              }};
    case EvtFamily::Gumbel: {
      // b_n = F^-1(1 - 1/n); a_n is the auxiliary function at b_n, which is
      // constant for both built-in Gumbel-domain models.
      double aux = 0.0;
      if (const auto* e = std::get_if<Exponential>(&d.params())) {
        aux = 1.0 / e->rate;
      } else if (const auto* g = std::get_if<Gumbel>(&d.params())) {
        aux = g->scale;
      } else {
        throw DomainError("normalizing_sequences: no auxiliary function known for " + d.spec());
      }
      return {[aux, check_n](double n) {
                check_n(n);
                return aux;
              },
              [d, check_n](double n) {
                check_n(n);
                if (const auto* e = std::get_if<Exponential>(&d.params())) {
                  return std::log(n) / e->rate;
                }
                return d.upper_quantile(1.0 / n);
              }};
    }
    case EvtFamily::ReversedWeibull: {
      const double top = d.support().hi;
      return {[d, top, check_n](double n) {
                check_n(n);
                return top - d.upper_quantile(1.0 / n);
              },
              [top, check_n](double n) {
                check_n(n);
                return top;
              }};
    }
  }
  throw DomainError("normalizing_sequences: unsupported model " + d.spec());
}

double binomial_upper_tail(long n, long j, double p, double q) {
  if (n < 0) throw DomainError("binomial_upper_tail requires n >= 0");
  if (j <= 0) return 1.0;
  if (j > n) return 0.0;
  if (!(p > 0.0)) return 0.0;
  if (!(q > 0.0)) return 1.0;

  const double log_p = p < 0.5 ? std::log(p) : std::log1p(-q);
  const double log_q = q < 0.5 ? std::log(q) : std::log1p(-p);
  if (j == 1) return -std::expm1(static_cast<double>(n) * log_q);
  if (j == n) return std::exp(static_cast<double>(n) * log_p);

  if (n <= 1000 && static_cast<double>(j) <= static_cast<double>(n) * p) {
    // Below the mean the tail is near 1: sum the small lower part instead.
    const double dn = static_cast<double>(n);
    double log_term = dn * log_q;
    double lower = 0.0;
    for (long i = 0; i < j; ++i) {
      lower += std::exp(log_term);
      log_term += std::log((dn - static_cast<double>(i)) / static_cast<double>(i + 1)) + log_p - log_q;
    }
    return std::max(0.0, 1.0 - lower);
  }
  if (n <= 1000) {
    const double dn = static_cast<double>(n);
    double log_term = std::lgamma(dn + 1.0) - std::lgamma(j + 1.0) - std::lgamma(dn - j + 1.0) +
                      j * log_p + (dn - j) * log_q;
    double sum = 0.0;
    for (long i = j; i <= n; ++i) {
      sum += std::exp(log_term);
      log_term += std::log(static_cast<double>(n - i) / static_cast<double>(i + 1)) + log_p - log_q;
    }
    return std::min(sum, 1.0);
  }
  const double a = static_cast<double>(j);
  const double b = static_cast<double>(n - j + 1);
  return p < 0.5 ? boost::math::ibeta(a, b, p) : boost::math::ibetac(b, a, q);
}

double order_statistic_tail(const Distribution& d, long n, long j, double T) {
  if (n < 1 || j < 1 || j > n) {
    throw DomainError("order_statistic_tail requires 1 <= j <= n");
  }
  return binomial_upper_tail(n, j, d.survival(T), d.cdf(T));
}

namespace {

/// Point the power-law tail of a Frechet-type model is measured from.
std::optional<double> power_tail_origin(const Distribution& d) {
  if (std::holds_alternative<Pareto>(d.params())) return 0.0;
  if (const auto* f = std::get_if<Frechet>(&d.params())) return f->m;
  return std::nullopt;
}

}  // namespace

double integrate_upper(const Distribution& d, const RealFunction& g, double from,
                       double tail_scale, const QuadratureOptions& options) {
  const Support sup = d.support();
  if (from >= sup.hi) return 0.0;
  const EvtIndex index = d.evt_index();

  std::vector<double> cuts;
  if (std::isfinite(sup.lo) && sup.lo > from) cuts.push_back(sup.lo);
  const double s_from = d.survival(from);
  for (int e = 2; e >= -4; --e) {
    const double s = tail_scale * std::pow(10.0, e);
    if (s > 0.0 && s < 1.0 && s < s_from) {
      const double x = d.upper_quantile(s);
      if (x > from && x < sup.hi) cuts.push_back(x);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> nodes{from};
  nodes.insert(nodes.end(), cuts.begin(), cuts.end());
  nodes.push_back(sup.hi);

  QuadratureOptions piece = options;
  piece.abs_tol = options.abs_tol / static_cast<double>(nodes.size() - 1);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    if (!(b > a)) continue;
    if (std::isfinite(b)) {
      total += integrate(g, Interval(a, b), piece);
    } else if (const auto origin = power_tail_origin(d); origin && a > *origin && index.gamma < 1.0) {
      // Integrands here decay like (x - origin)^(-1/gamma). With
      // x = origin + (a - origin)(1 - t)^(-q), q = 2 gamma / (1 - gamma), the
      // transformed integrand vanishes linearly at t = 1 instead of carrying an
      // integrable singularity when 1/gamma < 2.
      const double c = a - *origin;
      const double q = 2.0 * index.gamma / (1.0 - index.gamma);
      const double x0 = *origin;
      total += integrate(
          [&g, c, q, x0](double t) {
            const double stretch = std::pow(1.0 - t, -q);
            const double x = x0 + c * stretch;
            if (!std::isfinite(x)) return 0.0;
            const double v = g(x);
            return v == 0.0 ? 0.0 : v * c * q * stretch / (1.0 - t);
          },
          Interval(0.0, 1.0), piece);
    } else {
      const double h = a > from ? a - from : std::max(1.0, std::abs(a));
      total += integrate([&g, a, h](double u) { return h * g(a + h * u); }, Interval(0.0, kInfinity),
                         piece);
    }
  }
  return total;
}

namespace {

void require_finite_mean(const Distribution& d, const char* op) {
  const EvtIndex index = d.evt_index();
  if (index.family == EvtFamily::Frechet && index.gamma >= 1.0) {
    throw DivergenceError(std::string(op) + ": infinite mean for " + d.spec());
  }
}

}  // namespace

double tail_integral(const Distribution& d, double T) {
  require_finite_mean(d, "tail_integral");
  const Support sup = d.support();
  if (T >= sup.hi) return 0.0;
  double head = 0.0;
  double from = T;
  if (std::isfinite(sup.lo) && T < sup.lo) {
    head = sup.lo - T;
    from = sup.lo;
  }
  const double s = d.survival(from);
  const QuadratureOptions options{1e-15 * std::max(s, 1e-300) * std::max(1.0, std::abs(from)),
                                  1e-12, 4000};
  return head + integrate_upper(d, [&d](double x) { return d.survival(x); }, from, s, options);
}

double conditional_mean_above(const Distribution& d, double T) {
  const double s = d.survival(T);
  if (!(s > 0.0)) {
    throw DomainError("conditional_mean_above requires F(T) < 1 (T = " + std::to_string(T) + ")");
  }
  require_finite_mean(d, "conditional_mean_above");
  return T + tail_integral(d, T) / s;
}

double order_statistic_mean(const Distribution& d, long n, long j) {
  if (n < 1 || j < 1 || j > n) {
    throw DomainError("order_statistic_mean requires 1 <= j <= n");
  }
  const EvtIndex index = d.evt_index();
  if (index.family == EvtFamily::Frechet && static_cast<double>(j) <= index.gamma) {
    throw DivergenceError("order_statistic_mean: E(M_n^j) diverges for j <= gamma (" + d.spec() +
                          ")");
  }
  const Support sup = d.support();
  const QuadratureOptions options{1e-10, 1e-11, 4000};
  const double scale = static_cast<double>(j) / static_cast<double>(n);

  auto tail = [&d, n, j](double t) { return order_statistic_tail(d, n, j, t); };
  const double start = std::max(0.0, sup.lo);
  double mean = start;
  if (start < sup.hi) mean += integrate_upper(d, tail, start, scale, options);

  if (sup.lo < 0.0) {
    // P(M_n^j <= t): at least n - j + 1 draws at or below t.
    auto below = [&d, n, j](double t) {
      return binomial_upper_tail(n, n - j + 1, d.cdf(t), d.survival(t));
    };
    const double top = std::min(0.0, sup.hi);
    if (std::isfinite(sup.lo)) {
      mean -= integrate(below, Interval(sup.lo, top), options);
    } else {
      mean -= integrate([&below, top](double u) { return below(top - u); },
                        Interval(0.0, kInfinity), options);
    }
    if (sup.hi < 0.0) mean -= -sup.hi;
  }
  return mean;
}

double virtual_valuation(const Distribution& d, double t) {
  const double density = d.pdf(t);
  if (!(density > 0.0)) {
    throw DomainError("virtual_valuation: zero density at t = " + std::to_string(t));
  }
  return t - d.survival(t) / density;
}

double virtual_tail_ratio(const Distribution& d, double t) {
  const Support sup = d.support();
  if (!(t >= sup.lo) || !(t < sup.hi)) {
    throw DomainError("virtual_tail_ratio: t must lie in the support below its upper end");
  }
  // phi(x) <= x, so phi^-1(t) >= t.
  double hi;
  if (std::isfinite(sup.hi)) {
    hi = sup.hi - (sup.hi - t) * 1e-9;
  } else {
    double step = std::max(1.0, std::abs(t));
    hi = t + step;
    for (int i = 0; i < 200 && virtual_valuation(d, hi) < t; ++i) {
      step *= 2.0;
      hi = t + step;
    }
  }
  const auto phi = [&d](double x) { return virtual_valuation(d, x); };
  if (phi(hi) < t) throw DomainError("virtual_tail_ratio: could not bracket phi^-1(t)");

  constexpr int kProbe = 64;
  double previous = phi(t);
  for (int i = 1; i <= kProbe; ++i) {
    const double x = t + (hi - t) * i / kProbe;
    const double value = phi(x);
    if (value < previous - 1e-12 * std::max(1.0, std::abs(previous))) {
      throw DomainError("virtual_tail_ratio: virtual valuation is not monotone above t = " +
                        std::to_string(t));
    }
    previous = value;
  }

  const double root =
      find_root([&](double x) { return phi(x) - t; }, t, hi, 1e-14 * std::max(1.0, std::abs(t)));
  return d.survival(root) / d.survival(t);
}

}  // namespace fixprice
