#include "fixprice/guarantees.hpp"

#include <cmath>
#include <string>

namespace fixprice {

namespace {

constexpr double kAlphaSearchCap = 50.0;

void require_alpha(double alpha, const char* op) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw DomainError(std::string(op) + " requires alpha > 1 (finite mean), got " +
                      std::to_string(alpha));
  }
}

void require_k(long k, const char* op) {
  if (k < 1) throw DomainError(std::string(op) + " requires k >= 1");
}

/// Gamma(k) / Gamma(k + 1 - 1/alpha).
double gamma_ratio(long k, double alpha) {
  const double dk = static_cast<double>(k);
  return std::exp(ln_gamma(dk) - ln_gamma(dk + 1.0 - 1.0 / alpha));
}

}  // namespace

double phi_k_objective(double alpha, long k, double x) {
  if (!(x > 0.0)) return 0.0;
  const double log_y = -alpha * std::log(x);
  const double y = std::exp(log_y);
  if (y == 0.0) return 0.0;
  if (!std::isfinite(y)) return x * static_cast<double>(k);

  // Q_m = P(N > m). Start from Q_{k-1} and walk down with Q_{m-1} = Q_m + P(N = m);
  // every step adds a nonnegative term.
  double q = poisson_sf(y, k - 1);
  double sum = q;
  for (long m = k - 1; m >= 1; --m) {
    const double dm = static_cast<double>(m);
    q += std::exp(dm * log_y - y - std::lgamma(dm + 1.0));
    sum += std::min(q, 1.0);
  }
  return x * sum;
}

GuaranteeResult phi_k(double alpha, long k) {
  require_alpha(alpha, "phi_k");
  require_k(k, "phi_k");
  const Extremum best = maximize_1d([alpha, k](double x) { return phi_k_objective(alpha, k, x); },
                                    Interval(0.0, kInfinity));
  const double value = gamma_ratio(k, alpha) * best.value;
  return {k, alpha, value, best.arg, GuaranteeMethod::NumericMax};
}

GuaranteeResult guarantee_for(const EvtIndex& index, long k) {
  require_k(k, "guarantee_for");
  if (index.family == EvtFamily::Frechet) return phi_k(1.0 / index.gamma, k);
  return {k, std::nan(""), 1.0, std::nan(""), GuaranteeMethod::ClosedForm};
}

double u_star(double alpha) {
  require_alpha(alpha, "u_star");
  const double inv = 1.0 / alpha;
  const double w = lambert_w_minus1(-inv * std::exp(-inv));
  return std::pow(-inv * (alpha * w + 1.0), -inv);
}

double phi_1_closed(double alpha) {
  require_alpha(alpha, "phi_1_closed");
  const double u = u_star(alpha);
  return alpha / gamma_fn(2.0 - 1.0 / alpha) * u / (std::pow(u, alpha) + alpha);
}

AlphaValue minimize_phi_1() {
  const Extremum e = minimize_1d(phi_1_closed, Interval(1.0, kAlphaSearchCap));
  return {e.arg, e.value};
}

double sqrt_bound(long k) {
  require_k(k, "sqrt_bound");
  return 1.0 - 1.0 / std::sqrt(2.0 * M_PI * static_cast<double>(k));
}

double kennedy_kertz_nu(double alpha) {
  require_alpha(alpha, "kennedy_kertz_nu");
  const double e = 1.0 - 1.0 / alpha;
  return std::pow(e, e) / gamma_fn(2.0 - 1.0 / alpha);
}

AlphaValue adaptivity_gap() {
  const Extremum e = maximize_1d(
      [](double alpha) { return kennedy_kertz_nu(alpha) / phi_1_closed(alpha); },
      Interval(1.0, kAlphaSearchCap));
  return {e.arg, e.value};
}

double alpha2_derivative(long k, double v) {
  return static_cast<double>(k) * poisson_sf(v, k) - v * poisson_cdf(v, k - 1);
}

double x_k_root(long k) {
  require_k(k, "x_k_root");
  const double dk = static_cast<double>(k);
  const double v = find_root([k](double vv) { return alpha2_derivative(k, vv); }, dk, dk + 1.0,
                             1e-13);
  return 1.0 / std::sqrt(v);
}

double phi_k_alpha2_closed(long k) {
  const double x = x_k_root(k);
  const double v = 1.0 / (x * x);
  const double dk = static_cast<double>(k);
  const double inner = poisson_cdf(v, k - 1) / x + dk * x * poisson_sf(v, k);
  return gamma_ratio(k, 2.0) * inner;
}

}  // namespace fixprice
