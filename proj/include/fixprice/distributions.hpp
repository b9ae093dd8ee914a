#pragma once

// Parametric valuation distributions together with the extreme-value
// metadata (index, normalizing sequences) and the order-statistic functionals
// the welfare and competition analyses are built on.

#include <functional>
#include <string>
#include <string_view>
#include <variant>

#include "fixprice/math_kernel.hpp"

namespace fixprice {

/// F(t) = 1 - t^-alpha on [1, inf).
struct Pareto {
  double alpha;
};

struct Exponential {
  double rate;
};

struct Uniform {
  double a;
  double b;
};

/// F(t) = exp(-((t - m) / s)^-alpha) for t > m.
struct Frechet {
  double m;
  double s;
  double alpha;
};

/// F(t) = exp(-exp(-(t - location) / scale)), supported on the whole line.
struct Gumbel {
  double location;
  double scale;
};

/// F(t) = 1 - ((omega - t) / omega)^alpha on [0, omega]; Uniform(0, 1) is
/// omega = alpha = 1.
struct BoundedPower {
  double omega;
  double alpha;
};

enum class EvtFamily { Frechet, Gumbel, ReversedWeibull };

std::string_view to_string(EvtFamily family);

/// Extreme-value index: gamma = 1/alpha (Frechet), 0 (Gumbel), -1/alpha
/// (reversed Weibull).
struct EvtIndex {
  double gamma;
  EvtFamily family;
};

/// Support endpoints omega_0 <= omega_1; either may be infinite.
struct Support {
  double lo;
  double hi;
};

class Distribution {
 public:
  using Params = std::variant<Pareto, Exponential, Uniform, Frechet, Gumbel, BoundedPower>;

  /// Throws DomainError on non-positive shapes/scales or a >= b.
  explicit Distribution(Params params);

  static Distribution pareto(double alpha) { return Distribution(Pareto{alpha}); }
  static Distribution exponential(double rate) { return Distribution(Exponential{rate}); }
  static Distribution uniform(double a, double b) { return Distribution(Uniform{a, b}); }
  static Distribution frechet(double m, double s, double alpha) {
    return Distribution(Frechet{m, s, alpha});
  }
  static Distribution gumbel(double location, double scale) {
    return Distribution(Gumbel{location, scale});
  }
  static Distribution bounded_power(double omega, double alpha) {
    return Distribution(BoundedPower{omega, alpha});
  }

  const Params& params() const noexcept { return params_; }

  /// Canonical specification string, e.g. "pareto:alpha=2".
  std::string spec() const;

  double cdf(double t) const;
  /// 1 - F(t), evaluated without cancellation in the upper tail.
  double survival(double t) const;
  double pdf(double t) const;

  /// Generalized inverse inf{t : F(t) >= q}. Endpoints q = 0 or 1 are allowed
  /// only when the corresponding support endpoint is finite.
  double quantile(double q) const;

  /// inf{t : 1 - F(t) <= s}, i.e. quantile(1 - s) evaluated accurately for
  /// small s.
  double upper_quantile(double s) const;

  Support support() const;
  EvtIndex evt_index() const;

 private:
  Params params_;
};

/// Parses "pareto:alpha=2", "exp:rate=1", "uniform:a=0,b=1",
/// "frechet:m=0,s=289,alpha=2.24", "gumbel:loc=0,scale=1",
/// "bpower:omega=1,alpha=2". Errors name the offending key.
Distribution parse_distribution(std::string_view text);

/// Scaling (a_n) and shifting (b_n) sequences, evaluated at real n >= 1.
struct NormalizingSequences {
  std::function<double(double)> a_of_n;
  std::function<double(double)> b_of_n;
};

NormalizingSequences normalizing_sequences(const Distribution& d);

/// P(Binomial(n, p) >= j). Both p and q = 1 - p are taken so that callers can
/// hand over whichever of F(T), 1 - F(T) they computed accurately.
double binomial_upper_tail(long n, long j, double p, double q);

/// P(M_n^j > T): probability that the j-th largest of n draws exceeds T.
double order_statistic_tail(const Distribution& d, long n, long j, double T);

/// E(M_n^j), the mean of the j-th largest of n draws.
double order_statistic_mean(const Distribution& d, long n, long j);

/// E(X | X > T) = T + (1 / (1 - F(T))) * integral_T^inf (1 - F(s)) ds.
double conditional_mean_above(const Distribution& d, double T);

/// integral_T^{omega_1} (1 - F(s)) ds.
double tail_integral(const Distribution& d, double T);

/// phi_F(t) = t - (1 - F(t)) / f(t).
double virtual_valuation(const Distribution& d, double t);

/// (1 - F_phi(t)) / (1 - F(t)) where 1 - F_phi(t) = P(phi_F(X) > t).
double virtual_tail_ratio(const Distribution& d, double t);

/// Integrates g over [from, omega_1) after splitting at upper quantiles
/// 1 - F = tail_scale * 10^e, e in {2, ..., -4}, so that mass concentrated
/// near the tail scale is resolved. The last infinite piece is rescaled
/// before the standard semi-infinite mapping.
double integrate_upper(const Distribution& d, const RealFunction& g, double from,
                       double tail_scale, const QuadratureOptions& options);

}  // namespace fixprice
