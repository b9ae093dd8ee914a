#pragma once

// Large-market welfare guarantees of fixed-price policies for the k-unit
// problem, plus the comparison quantities for the optimal dynamic policy.

#include "fixprice/distributions.hpp"

namespace fixprice {

enum class GuaranteeMethod { ClosedForm, NumericMax };

struct GuaranteeResult {
  long k;
  double alpha;  // NaN for the Gumbel/reversed-Weibull constant guarantee
  double value;
  double argmax_x;
  GuaranteeMethod method;
};

/// x * sum_{j=1..k} P(Poisson(x^-alpha) >= j), the inner objective of phi_k.
double phi_k_objective(double alpha, long k, double x);

/// Guarantee phi_k(alpha) for a Frechet-type tail with shape alpha > 1,
/// obtained by numerically maximizing phi_k_objective over x in (0, inf).
GuaranteeResult phi_k(double alpha, long k);

/// Guarantee for a distribution with the given extreme-value index: phi_k for
/// the Frechet family, the constant 1 otherwise.
GuaranteeResult guarantee_for(const EvtIndex& index, long k);

/// Maximizer U*(alpha) of x (1 - exp(-x^-alpha)), via the W_{-1} branch.
double u_star(double alpha);

double phi_1_closed(double alpha);

struct AlphaValue {
  double alpha;
  double value;
};

/// Interior minimum of phi_1 over alpha in (1, 50).
AlphaValue minimize_phi_1();

/// 1 - 1 / sqrt(2 pi k).
double sqrt_bound(long k);

/// Asymptotic ratio of the optimal dynamic policy to the prophet for a
/// Frechet(alpha) tail: (1 - 1/alpha)^(1 - 1/alpha) / Gamma(2 - 1/alpha).
double kennedy_kertz_nu(double alpha);

/// Maximum of nu(alpha) / phi_1(alpha) over alpha in (1, 50).
AlphaValue adaptivity_gap();

/// Derivative of the alpha = 2 objective, written in v = y^-2:
/// k (1 - P(v, k)) - v P(v, k - 1).
double alpha2_derivative(long k, double v);

/// Unique maximizer x_k of the alpha = 2 objective, located in
/// [(k+1)^-1/2, k^-1/2].
double x_k_root(long k);

/// phi_k(2) evaluated in closed form at x_k.
double phi_k_alpha2_closed(long k);

}  // namespace fixprice
