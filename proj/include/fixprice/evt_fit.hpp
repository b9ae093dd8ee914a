#pragma once

// Fitting a Frechet valuation model to auction bids: ingestion, reduction to
// one valuation per bidder, Hill shape estimate, moment-matched scale, and the
// resulting fixed-price threshold and guarantee.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fixprice {

struct BidRecord {
  std::string bidder_id;
  double amount;
};

struct CsvColumns {
  std::string id_column = "bidder";
  std::string bid_column = "bid";
};

/// Reads a header row followed by data rows; fields may be double-quoted.
/// Blank lines are skipped. Errors (ParseError) carry the 1-based line number.
std::vector<BidRecord> ingest_bids(std::istream& in, const CsvColumns& columns = {});

/// Highest amount per distinct bidder, sorted ascending.
std::vector<double> per_bidder_max(std::span<const BidRecord> bids);

/// Hill estimate of the shape alpha from the top k log-spacings of an
/// ascending sample. Requires 2 <= k < n.
double hill_estimate(std::span<const double> sorted, long k);

struct HillRow {
  long k;
  double alpha_hat;
};

/// hill_estimate for every k in [k_lo, k_hi].
std::vector<HillRow> hill_stability_scan(std::span<const double> sorted, long k_lo, long k_hi);

/// k at the centre of the `window`-row stretch of the scan with the smallest
/// standard deviation of alpha_hat. A suggestion for the operator only.
long suggest_hill_k(std::span<const HillRow> rows, long window = 10);

/// (s Gamma(1 - 1/a) - mean)^2 + (s^2 (Gamma(1 - 2/a) - Gamma(1 - 1/a)^2) - var)^2.
double scale_loss(double s, double alpha_hat, double mean, double variance);

struct ScaleFit {
  double s_hat;
  double loss;
};

/// Minimizes scale_loss over s in (0, 10 mean) with the sample mean and the
/// (n - 1)-normalized sample variance. Requires alpha_hat > 2.
ScaleFit fit_scale(std::span<const double> values, double alpha_hat);

/// Same, for precomputed moments.
ScaleFit fit_scale_moments(double mean, double variance, double alpha_hat);

struct FitOptions {
  std::optional<long> k_hill;   // default: suggest_hill_k over the top fifth of the sample
  std::optional<double> m_hat;  // default: 0, which needs a nonnegative sample
};

struct FitResult {
  double m_hat;
  double s_hat;
  double alpha_hat;
  long k_hill;
  double loss;
  long n_valuations;
};

/// Fits Frechet(m, s, alpha) to an ascending sample of valuations. The shape
/// and scale are estimated on the shifted values x - m.
FitResult fit_frechet(std::span<const double> sorted, const FitOptions& options = {});

struct GuaranteeReport {
  FitResult fit;
  long n;
  double u;
  double threshold;
  double guarantee;
  double variance_margin;  // alpha_hat - 2
  std::optional<double> realized_max;
  std::optional<double> realized_ratio;
};

/// U = u_star(alpha), T_n = U F^-1(1 - 1/n) under the fitted model, the
/// single-unit guarantee, and T_n / realized_max when supplied.
GuaranteeReport guarantee_report(const FitResult& fit, long n,
                                 std::optional<double> realized_max = std::nullopt);

struct HistogramBin {
  double lo;
  double hi;
  double relative_frequency;
};

/// Left-closed bins [i w, (i + 1) w) from 0 through the largest value.
std::vector<HistogramBin> histogram_export(std::span<const double> values, double bin_width);

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);
void write_hill_csv(std::ostream& out, std::span<const HillRow> rows);

}  // namespace fixprice
