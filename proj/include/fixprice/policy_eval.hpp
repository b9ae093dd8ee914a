#pragma once

// Fixed-price (single threshold) policies for selling k units to n buyers
// arriving in sequence: exact expected welfare, the prophet benchmark, the
// best threshold, and a Monte Carlo harness to cross-check the exact formula.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fixprice/distributions.hpp"

namespace fixprice {

inline constexpr std::uint64_t kDefaultSeed = 0x5eed2024c0ffee11ULL;

struct PolicyEvaluation {
  long n;
  long k;
  double threshold;
  double fp_value;
  double prophet_value;
  double ratio;
};

struct SimulationConfig {
  long replications = 100000;
  std::uint64_t seed = kDefaultSeed;
  int parallel_chunks = 1;
};

struct MonteCarloEstimate {
  double mean;
  double std_error;
  long replications;
};

/// E(X | X > T) * sum_{j=1..k} P(M_n^j > T).
double fixed_price_value_exact(const Distribution& d, long n, long k, double T);

/// sum_{j=1..k} E(M_n^j).
double prophet_value(const Distribution& d, long n, long k);

/// Evaluates one threshold against the prophet benchmark.
PolicyEvaluation evaluate_threshold(const Distribution& d, long n, long k, double T);

/// Threshold maximizing the fixed-price value, searched over
/// (omega_0, F^-1(1 - 1e-12)).
PolicyEvaluation best_fixed_price(const Distribution& d, long n, long k);

/// a_n U + b_n for Frechet- and Gumbel-type models; (1 - U) omega_1 for
/// bounded support, where U plays the role of the slack epsilon.
double theory_threshold(const Distribution& d, long n, double U);

/// Simulates `cfg.replications` markets of n arrivals; each sells to the
/// first min(k, #{X_i > T}) buyers above T. Replication r draws from its own
/// substream derived from (seed, r), so the result does not depend on
/// cfg.parallel_chunks.
MonteCarloEstimate monte_carlo_evaluate(const Distribution& d, long n, long k, double T,
                                        const SimulationConfig& cfg);

/// `count` i.i.d. draws by inversion, from the substream of `seed` used for
/// replication 0 of monte_carlo_evaluate.
std::vector<double> draw_sample(const Distribution& d, long count, std::uint64_t seed);

enum class ThresholdMode { BestT, TheoryT };

struct ConvergenceMode {
  ThresholdMode mode = ThresholdMode::BestT;
  double u = 0.0;  // used by TheoryT only
};

std::vector<PolicyEvaluation> convergence_table(const Distribution& d, long k,
                                                std::span<const long> n_grid,
                                                ConvergenceMode mode);

/// CSV with header n,k,threshold,fp_value,prophet_value,ratio.
void write_evaluation_csv(std::ostream& out, std::span<const PolicyEvaluation> rows);

}  // namespace fixprice
