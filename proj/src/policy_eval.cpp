#include "fixprice/policy_eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>

#include "fixprice/format.hpp"

namespace fixprice {

namespace {

void require_market(long n, long k, const char* op) {
  if (n < 1) throw DomainError(std::string(op) + " requires n >= 1");
  if (k < 1) throw DomainError(std::string(op) + " requires k >= 1");
  if (k > n) {
    throw DomainError(std::string(op) + " requires k <= n (got k = " + std::to_string(k) +
                      ", n = " + std::to_string(n) + ")");
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform on the open interval (0, 1).
double open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

struct BlockStats {
  long count = 0;
  double mean = 0.0;
  double m2 = 0.0;
};

void merge(BlockStats& into, const BlockStats& other) {
  if (other.count == 0) return;
  if (into.count == 0) {
    into = other;
    return;
  }
  const double total = static_cast<double>(into.count + other.count);
  const double delta = other.mean - into.mean;
  into.mean += delta * static_cast<double>(other.count) / total;
  into.m2 += other.m2 + delta * delta * static_cast<double>(into.count) *
                            static_cast<double>(other.count) / total;
  into.count += other.count;
}

constexpr long kBlockSize = 1024;

std::uint64_t substream(std::uint64_t seed, long replication) {
  std::uint64_t state = seed;
  return splitmix64(state) ^ (static_cast<std::uint64_t>(replication) * 0xd1b54a32d192ed03ULL);
}

}  // namespace

double fixed_price_value_exact(const Distribution& d, long n, long k, double T) {
  require_market(n, k, "fixed_price_value_exact");
  double expected_sales = 0.0;
  for (long j = 1; j <= k; ++j) expected_sales += order_statistic_tail(d, n, j, T);
  if (expected_sales == 0.0) return 0.0;
  return conditional_mean_above(d, T) * expected_sales;
}

double prophet_value(const Distribution& d, long n, long k) {
  require_market(n, k, "prophet_value");
  double total = 0.0;
  for (long j = 1; j <= k; ++j) total += order_statistic_mean(d, n, j);
  return total;
}

PolicyEvaluation evaluate_threshold(const Distribution& d, long n, long k, double T) {
  const double fp = fixed_price_value_exact(d, n, k, T);
  const double prophet = prophet_value(d, n, k);
  return {n, k, T, fp, prophet, fp / prophet};
}

PolicyEvaluation best_fixed_price(const Distribution& d, long n, long k) {
  require_market(n, k, "best_fixed_price");
  const Support sup = d.support();
  const double lo = std::isfinite(sup.lo) ? sup.lo : d.quantile(1e-12);
  const double hi = d.upper_quantile(1e-12);
  const double prophet = prophet_value(d, n, k);
  const Extremum best = maximize_1d(
      [&](double T) { return fixed_price_value_exact(d, n, k, T); }, Interval(lo, hi));
  return {n, k, best.arg, best.value, prophet, best.value / prophet};
}

double theory_threshold(const Distribution& d, long n, double U) {
  if (n < 1) throw DomainError("theory_threshold requires n >= 1");
  const EvtIndex index = d.evt_index();
  const double dn = static_cast<double>(n);
  if (index.family == EvtFamily::ReversedWeibull) return (1.0 - U) * d.support().hi;
  const NormalizingSequences seq = normalizing_sequences(d);
  return seq.a_of_n(dn) * U + seq.b_of_n(dn);
}

MonteCarloEstimate monte_carlo_evaluate(const Distribution& d, long n, long k, double T,
                                        const SimulationConfig& cfg) {
  require_market(n, k, "monte_carlo_evaluate");
  if (cfg.replications < 100) {
    throw DomainError("monte_carlo_evaluate requires replications >= 100");
  }

  const long reps = cfg.replications;
  const long blocks = (reps + kBlockSize - 1) / kBlockSize;
  std::vector<BlockStats> stats(static_cast<std::size_t>(blocks));

  auto run_block = [&](long b) {
    BlockStats s;
    const long first = b * kBlockSize;
    const long last = std::min(reps, first + kBlockSize);
    for (long r = first; r < last; ++r) {
      std::uint64_t state = substream(cfg.seed, r);
      double payoff = 0.0;
      long sold = 0;
      for (long i = 0; i < n && sold < k; ++i) {
        const double x = d.quantile(open_unit(splitmix64(state)));
        if (x > T) {
          payoff += x;
          ++sold;
        }
      }
      ++s.count;
      const double delta = payoff - s.mean;
      s.mean += delta / static_cast<double>(s.count);
      s.m2 += delta * (payoff - s.mean);
    }
    stats[static_cast<std::size_t>(b)] = s;
  };

  const long workers = std::clamp<long>(cfg.parallel_chunks, 1, blocks);
  if (workers == 1) {
    for (long b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (long w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (long b = w; b < blocks; b += workers) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }

  BlockStats total;
  for (const auto& s : stats) merge(total, s);
  const double variance = total.count > 1 ? total.m2 / static_cast<double>(total.count - 1) : 0.0;
  return {total.mean, std::sqrt(variance / static_cast<double>(total.count)), total.count};
}

std::vector<double> draw_sample(const Distribution& d, long count, std::uint64_t seed) {
  if (count < 0) throw DomainError("draw_sample requires count >= 0");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  std::uint64_t state = substream(seed, 0);
  for (long i = 0; i < count; ++i) out.push_back(d.quantile(open_unit(splitmix64(state))));
  return out;
}

std::vector<PolicyEvaluation> convergence_table(const Distribution& d, long k,
                                                std::span<const long> n_grid,
                                                ConvergenceMode mode) {
  if (n_grid.empty()) throw DomainError("convergence_table: empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw DomainError("convergence_table: n grid must increase");
  }
  if (k > n_grid.front()) throw DomainError("convergence_table: k exceeds the smallest n");

  std::vector<PolicyEvaluation> rows;
  rows.reserve(n_grid.size());
  for (long n : n_grid) {
    if (mode.mode == ThresholdMode::BestT) {
      rows.push_back(best_fixed_price(d, n, k));
    } else {
      rows.push_back(evaluate_threshold(d, n, k, theory_threshold(d, n, mode.u)));
    }
  }
  return rows;
}

void write_evaluation_csv(std::ostream& out, std::span<const PolicyEvaluation> rows) {
  out << "n,k,threshold,fp_value,prophet_value,ratio\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.k << ',' << format_real(r.threshold) << ',' << format_real(r.fp_value)
        << ',' << format_real(r.prophet_value) << ',' << format_real(r.ratio) << '\n';
  }
}

}  // namespace fixprice
