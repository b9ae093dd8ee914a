#pragma once

// Special functions and one-dimensional numerical routines shared by every
// other module. Everything here is a pure function of its arguments.

#include <functional>
#include <limits>

#include "fixprice/errors.hpp"

namespace fixprice {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultTol = 1e-10;
inline constexpr double kEulerGamma = 0.577215664901532860606512090082;

using RealFunction = std::function<double(double)>;

/// Closed interval [lo, hi] on the real line; hi may be +infinity.
class Interval {
 public:
  Interval(double lo, double hi);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  bool semi_infinite() const noexcept { return hi_ == kInfinity; }
  double width() const noexcept { return hi_ - lo_; }

 private:
  double lo_;
  double hi_;
};

/// log Gamma(x) for x > 0.
double ln_gamma(double x);

/// Gamma(x) for x > 0 (overflows to +inf past x ~ 171).
double gamma_fn(double x);

/// P(N <= k) for N ~ Poisson(y), via the regularized upper incomplete gamma
/// function Q(k + 1, y).
double poisson_cdf(double y, long k);

/// P(N > k) = 1 - poisson_cdf(y, k), computed directly (no cancellation).
double poisson_sf(double y, long k);

/// Lower real branch W_{-1}(z) of the Lambert function, z in [-1/e, 0).
double lambert_w_minus1(double z);

struct QuadratureOptions {
  double abs_tol = kDefaultTol;
  double rel_tol = 0.0;
  int max_subdivisions = 4000;
};

struct QuadratureResult {
  double value;
  double abs_error;
  int subdivisions;
};

/// Adaptive Gauss-Kronrod (7/15) quadrature. A semi-infinite domain [lo, inf)
/// is mapped onto [0, 1) with x = lo + t / (1 - t).
///
/// Converges when the estimated absolute error is at most
/// max(abs_tol, rel_tol * |value|); otherwise throws ConvergenceError carrying
/// the best estimate.
QuadratureResult integrate_detailed(const RealFunction& f, const Interval& domain,
                                    const QuadratureOptions& options);

double integrate(const RealFunction& f, const Interval& domain, double tol = kDefaultTol);
double integrate(const RealFunction& f, const Interval& domain, const QuadratureOptions& options);

struct Extremum {
  double arg;
  double value;
};

/// Maximizes a unimodal f over the interior of `domain`: a 256-point bracketing
/// scan (geometric offsets from lo; finite domains also get a uniform grid)
/// followed by golden-section refinement down to width tol * max(1, |x|).
/// Non-finite evaluations count as -infinity.
Extremum maximize_1d(const RealFunction& f, const Interval& domain, double tol = kDefaultTol);

/// Same as maximize_1d applied to -f.
Extremum minimize_1d(const RealFunction& f, const Interval& domain, double tol = kDefaultTol);

/// Brent's bracketed root finder. Stops once |f(x)| <= tol or the bracket is
/// narrower than tol.
double find_root(const RealFunction& f, double lo, double hi, double tol = kDefaultTol);

}  // namespace fixprice
