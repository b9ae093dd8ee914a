#include "fixprice/competition.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "fixprice/format.hpp"

namespace fixprice {

namespace {

constexpr double kGammaZeroBand = 1e-8;

void require_finite_mean(const Distribution& d, const char* op) {
  const EvtIndex index = d.evt_index();
  if (index.family == EvtFamily::Frechet && index.gamma >= 1.0) {
    throw DivergenceError(std::string(op) + ": infinite mean for " + d.spec());
  }
}

void require_n(long n, const char* op) {
  if (n < 1) throw DomainError(std::string(op) + " requires n >= 1");
}

}  // namespace

PolicySequence::PolicySequence(Distribution d) : dist_(std::move(d)), values_{0.0} {
  require_finite_mean(dist_, "PolicySequence");
}

double PolicySequence::step(double g) const {
  const Support sup = dist_.support();
  if (g >= sup.hi) return g;
  const double s = dist_.survival(g);
  if (s <= 0.0) return g;

  QuadratureOptions opts;
  opts.abs_tol = s < 1e-6 ? 1e-12 : 1e-10;
  opts.rel_tol = 0.0;

  double increment = 0.0;
  double from = g;
  if (g < sup.lo) {
    // 1 - F = 1 below the support.
    increment += sup.lo - g;
    from = sup.lo;
  }
  increment += integrate_upper(dist_, [this](double u) { return dist_.survival(u); }, from,
                               dist_.survival(from), opts);
  return g + std::max(increment, 0.0);
}

void PolicySequence::extend_to(long up_to) {
  if (up_to < 0) throw DomainError("PolicySequence::extend_to requires up_to >= 0");
  values_.reserve(static_cast<std::size_t>(up_to) + 1);
  while (size() < up_to) values_.push_back(step(values_.back()));
}

double PolicySequence::value(long n) {
  extend_to(n);
  return values_[static_cast<std::size_t>(n)];
}

PolicySequence extend_policy(PolicySequence seq, long up_to) {
  if (up_to < seq.size()) {
    throw DomainError("extend_policy: up_to " + std::to_string(up_to) +
                      " is below the current length " + std::to_string(seq.size()));
  }
  seq.extend_to(up_to);
  return seq;
}

double expected_max(const Distribution& d, long n) {
  require_n(n, "expected_max");
  require_finite_mean(d, "expected_max");
  return order_statistic_mean(d, n, 1);
}

CompetitionRecord empirical_competition_complexity(PolicySequence& seq, long n) {
  require_n(n, "empirical_competition_complexity");
  const Distribution& d = seq.distribution();
  const double gamma = d.evt_index().gamma;
  const double theory = theoretical_cc(gamma);
  const double target = expected_max(d, n);
  const long cap = static_cast<long>(std::ceil(10.0 * static_cast<double>(n) * theory));

  for (long m = 1; m <= cap; ++m) {
    if (seq.value(m) >= target) {
      return {n, m, static_cast<double>(m) / static_cast<double>(n), theory, gamma};
    }
  }
  throw ConvergenceError("empirical_competition_complexity: G_m stayed below E_n through m = " +
                             std::to_string(cap),
                         seq.value(cap), target - seq.value(cap));
}

CompetitionRecord empirical_competition_complexity(const Distribution& d, long n) {
  PolicySequence seq(d);
  return empirical_competition_complexity(seq, n);
}

double theoretical_cc(double gamma) {
  if (!(gamma < 1.0)) throw DomainError("theoretical_cc requires gamma < 1");
  if (std::abs(gamma) <= kGammaZeroBand) return std::exp(kEulerGamma);
  return (1.0 - gamma) * std::exp(ln_gamma(1.0 - gamma) / gamma);
}

std::pair<double, double> cc_family_bounds(EvtFamily family) {
  const double gumbel = std::exp(kEulerGamma);
  switch (family) {
    case EvtFamily::Frechet:
      return {1.0, gumbel};
    case EvtFamily::Gumbel:
      return {gumbel, gumbel};
    case EvtFamily::ReversedWeibull:
      return {gumbel, std::exp(1.0)};
  }
  throw DomainError("cc_family_bounds: unknown family");
}

double quantile_policy_approx(const Distribution& d, long n) {
  require_n(n, "quantile_policy_approx");
  require_finite_mean(d, "quantile_policy_approx");
  const double gamma = d.evt_index().gamma;
  return d.upper_quantile((1.0 - gamma) / (static_cast<double>(n) + 1.0));
}

double expected_max_approx(const Distribution& d, long n) {
  require_n(n, "expected_max_approx");
  require_finite_mean(d, "expected_max_approx");
  const EvtIndex index = d.evt_index();
  const double dn = static_cast<double>(n);
  switch (index.family) {
    case EvtFamily::Frechet:
      return gamma_fn(1.0 - index.gamma) * d.upper_quantile(1.0 / dn);
    case EvtFamily::Gumbel:
      return d.upper_quantile(std::exp(-kEulerGamma) / dn);
    case EvtFamily::ReversedWeibull: {
      const double omega = d.support().hi;
      return omega - gamma_fn(1.0 - index.gamma) * (omega - d.upper_quantile(1.0 / dn));
    }
  }
  throw DomainError("expected_max_approx: unknown family");
}

void write_competition_csv(std::ostream& out, std::span<const CompetitionRecord> rows) {
  out << "n,m_star,empirical_ratio,theoretical,gamma\n";
  for (const auto& r : rows) {
    out << r.n << ',' << r.m_star << ',' << format_real(r.empirical_ratio) << ','
        << format_real(r.theoretical) << ',' << format_real(r.gamma) << '\n';
  }
}

}  // namespace fixprice
