#pragma once

// Optimal dynamic posted-price policy for a single item, the expected maximum
// it is compared against, and the large-market competition complexity.

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "fixprice/distributions.hpp"

namespace fixprice {

/// G_0 = 0, G_{n+1} = G_n + integral_{G_n}^{omega_1} (1 - F(u)) du.
/// Single writer; readers of the computed prefix may run concurrently.
class PolicySequence {
 public:
  /// Throws DivergenceError when the model has an infinite mean.
  explicit PolicySequence(Distribution d);

  const Distribution& distribution() const noexcept { return dist_; }

  /// Largest index computed so far.
  long size() const noexcept { return static_cast<long>(values_.size()) - 1; }

  /// Fills values through G_{up_to}. No-op when already computed.
  void extend_to(long up_to);

  /// G_n, extending the sequence if needed.
  double value(long n);

  std::span<const double> values() const noexcept { return values_; }

 private:
  double step(double g) const;

  Distribution dist_;
  std::vector<double> values_;
};

/// Functional form of PolicySequence::extend_to. Requires up_to >= seq.size().
PolicySequence extend_policy(PolicySequence seq, long up_to);

/// E(max of n draws). Throws DivergenceError for gamma >= 1.
double expected_max(const Distribution& d, long n);

struct CompetitionRecord {
  long n;
  long m_star;
  double empirical_ratio;
  double theoretical;
  double gamma;
};

/// Smallest integer m with G_m >= E_n, walking forward from the cached
/// sequence. Throws ConvergenceError past m = 10 n C(F).
CompetitionRecord empirical_competition_complexity(PolicySequence& seq, long n);
CompetitionRecord empirical_competition_complexity(const Distribution& d, long n);

/// (1 - gamma) Gamma(1 - gamma)^(1/gamma); e^{Euler gamma} near gamma = 0.
double theoretical_cc(double gamma);

/// Range of C(F) over each extreme-value family.
std::pair<double, double> cc_family_bounds(EvtFamily family);

/// F^-1(1 - (1 - gamma) / (n + 1)), an approximation of G_n.
double quantile_policy_approx(const Distribution& d, long n);

/// Family-specific approximation of E_n built from F^-1(1 - 1/n).
double expected_max_approx(const Distribution& d, long n);

/// CSV with header n,m_star,empirical_ratio,theoretical,gamma.
void write_competition_csv(std::ostream& out, std::span<const CompetitionRecord> rows);

}  // namespace fixprice
