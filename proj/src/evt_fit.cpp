#include "fixprice/evt_fit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "fixprice/distributions.hpp"
#include "fixprice/errors.hpp"
#include "fixprice/format.hpp"
#include "fixprice/guarantees.hpp"
#include "fixprice/policy_eval.hpp"

namespace fixprice {

namespace {

std::string line_prefix(long line) { return "line " + std::to_string(line) + ": "; }

std::vector<std::string> split_csv_line(const std::string& line, long line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError(line_prefix(line_no) + "unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_amount(const std::string& text, long line_no) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError(line_prefix(line_no) + "bid amount \"" + text + "\" is not a number");
  }
  if (value < 0.0) throw ParseError(line_prefix(line_no) + "negative bid amount " + text);
  return value;
}

double gamma_moment(double order, double alpha) { return gamma_fn(1.0 - order / alpha); }

}  // namespace

std::vector<BidRecord> ingest_bids(std::istream& in, const CsvColumns& columns) {
  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = split_csv_line(line, line_no);
    break;
  }
  if (header.empty()) throw ParseError("empty bid file: no header row");

  const auto column_index = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw ParseError("missing column \"" + name + "\" in header");
  };
  const std::size_t id_col = column_index(columns.id_column);
  const std::size_t bid_col = column_index(columns.bid_column);

  std::vector<BidRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() <= std::max(id_col, bid_col)) {
      throw ParseError(line_prefix(line_no) + "expected at least " +
                       std::to_string(std::max(id_col, bid_col) + 1) + " fields, found " +
                       std::to_string(fields.size()));
    }
    std::string id = trim(fields[id_col]);
    if (id.empty()) throw ParseError(line_prefix(line_no) + "empty bidder id");
    records.push_back({std::move(id), parse_amount(trim(fields[bid_col]), line_no)});
  }
  if (records.empty()) throw ParseError("bid file has a header but no data rows");
  return records;
}

std::vector<double> per_bidder_max(std::span<const BidRecord> bids) {
  std::map<std::string, double> best;
  for (const auto& b : bids) {
    auto [it, inserted] = best.emplace(b.bidder_id, b.amount);
    if (!inserted) it->second = std::max(it->second, b.amount);
  }
  std::vector<double> out;
  out.reserve(best.size());
  for (const auto& [id, amount] : best) out.push_back(amount);
  std::sort(out.begin(), out.end());
  return out;
}

double hill_estimate(std::span<const double> sorted, long k) {
  const long n = static_cast<long>(sorted.size());
  if (k < 2 || k >= n) {
    throw DomainError("hill_estimate requires 2 <= k < n (k = " + std::to_string(k) +
                      ", n = " + std::to_string(n) + ")");
  }
  const double base = sorted[static_cast<std::size_t>(n - k - 1)];
  if (!(base > 0.0)) throw DomainError("hill_estimate: top k+1 values must be positive");
  const double log_base = std::log(base);
  double sum = 0.0;
  for (long i = 1; i <= k; ++i) sum += std::log(sorted[static_cast<std::size_t>(n - i)]) - log_base;
  const double gamma_hat = sum / static_cast<double>(k);
  if (!(gamma_hat > 0.0)) {
    throw DomainError("hill_estimate: nonpositive tail index estimate (top values all equal?)");
  }
  return 1.0 / gamma_hat;
}

std::vector<HillRow> hill_stability_scan(std::span<const double> sorted, long k_lo, long k_hi) {
  if (k_lo > k_hi) throw DomainError("hill_stability_scan: empty k range");
  std::vector<HillRow> rows;
  rows.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
  for (long k = k_lo; k <= k_hi; ++k) rows.push_back({k, hill_estimate(sorted, k)});
  return rows;
}

long suggest_hill_k(std::span<const HillRow> rows, long window) {
  if (rows.empty()) throw DomainError("suggest_hill_k: empty scan");
  if (window < 2) throw DomainError("suggest_hill_k requires window >= 2");
  const long count = static_cast<long>(rows.size());
  if (count <= window) return rows[static_cast<std::size_t>(count / 2)].k;

  long best_start = 0;
  double best_sd = kInfinity;
  for (long start = 0; start + window <= count; ++start) {
    double mean = 0.0;
    for (long i = 0; i < window; ++i) mean += rows[static_cast<std::size_t>(start + i)].alpha_hat;
    mean /= static_cast<double>(window);
    double ss = 0.0;
    for (long i = 0; i < window; ++i) {
      const double dev = rows[static_cast<std::size_t>(start + i)].alpha_hat - mean;
      ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(window - 1));
    if (sd < best_sd) {
      best_sd = sd;
      best_start = start;
    }
  }
  return rows[static_cast<std::size_t>(best_start + window / 2)].k;
}

double scale_loss(double s, double alpha_hat, double mean, double variance) {
  const double g1 = gamma_moment(1.0, alpha_hat);
  const double g2 = gamma_moment(2.0, alpha_hat);
  const double first = s * g1 - mean;
  const double second = s * s * (g2 - g1 * g1) - variance;
  return first * first + second * second;
}

ScaleFit fit_scale_moments(double mean, double variance, double alpha_hat) {
  if (!(alpha_hat > 2.0)) {
    throw DomainError("fit_scale requires alpha_hat > 2: the variance term Gamma(1 - 2/alpha) "
                      "is infinite otherwise (alpha_hat = " + std::to_string(alpha_hat) + ")");
  }
  if (!(mean > 0.0)) throw DomainError("fit_scale requires a positive sample mean");
  const Extremum best = minimize_1d(
      [&](double s) { return scale_loss(s, alpha_hat, mean, variance); },
      Interval(0.0, 10.0 * mean), 1e-13);
  return {best.arg, best.value};
}

ScaleFit fit_scale(std::span<const double> values, double alpha_hat) {
  if (values.size() < 2) throw DomainError("fit_scale requires at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return fit_scale_moments(mean, ss / (n - 1.0), alpha_hat);
}

FitResult fit_frechet(std::span<const double> sorted, const FitOptions& options) {
  if (sorted.size() < 3) throw DomainError("fit_frechet requires at least three valuations");
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    throw DomainError("fit_frechet expects an ascending sample");
  }
  const double m_hat = options.m_hat.value_or(0.0);
  if (!options.m_hat && sorted.front() < 0.0) {
    throw DomainError("fit_frechet: negative valuations present; supply the location m explicitly");
  }

  std::vector<double> shifted(sorted.begin(), sorted.end());
  for (double& v : shifted) v -= m_hat;

  const long n = static_cast<long>(shifted.size());
  long k = 0;
  if (options.k_hill) {
    k = *options.k_hill;
  } else {
    long first_positive = 0;
    while (first_positive < n && !(shifted[static_cast<std::size_t>(first_positive)] > 0.0)) {
      ++first_positive;
    }
    // Scan the top fifth of the positive values; deeper k reaches the body, where
    // consecutive estimates are smooth but biased.
    const long positive = n - first_positive;
    const long k_max = std::min(positive - 1, std::max(2L, positive / 5));
    if (k_max < 2) throw DomainError("fit_frechet: too few positive valuations for the Hill scan");
    const auto rows = hill_stability_scan(shifted, std::min(10L, k_max), k_max);
    k = suggest_hill_k(rows);
  }
  const double alpha_hat = hill_estimate(shifted, k);
  const ScaleFit scale = fit_scale(shifted, alpha_hat);
  return {m_hat, scale.s_hat, alpha_hat, k, scale.loss, n};
}

GuaranteeReport guarantee_report(const FitResult& fit, long n, std::optional<double> realized_max) {
  if (!(fit.alpha_hat > 1.0)) throw DomainError("guarantee_report requires alpha_hat > 1");
  if (realized_max && !(*realized_max > 0.0)) {
    throw DomainError("guarantee_report: realized maximum must be positive");
  }
  const Distribution model = Distribution::frechet(fit.m_hat, fit.s_hat, fit.alpha_hat);
  GuaranteeReport report{fit, n, u_star(fit.alpha_hat), 0.0, phi_1_closed(fit.alpha_hat),
                         fit.alpha_hat - 2.0, realized_max, std::nullopt};
  report.threshold = theory_threshold(model, n, report.u);
  if (realized_max) report.realized_ratio = report.threshold / *realized_max;
  return report;
}

std::vector<HistogramBin> histogram_export(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw DomainError("histogram_export requires a positive bin width");
  }
  if (values.empty()) return {};
  const double largest = *std::max_element(values.begin(), values.end());
  for (double v : values) {
    if (v < 0.0 || !std::isfinite(v)) throw DomainError("histogram_export: values must be finite and >= 0");
  }
  const auto bins = static_cast<std::size_t>(std::floor(largest / bin_width)) + 1;
  std::vector<long> counts(bins, 0);
  for (double v : values) {
    const auto i = std::min(bins - 1, static_cast<std::size_t>(std::floor(v / bin_width)));
    ++counts[i];
  }
  const double total = static_cast<double>(values.size());
  std::vector<HistogramBin> out;
  out.reserve(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double lo = static_cast<double>(i) * bin_width;
    out.push_back({lo, lo + bin_width, static_cast<double>(counts[i]) / total});
  }
  return out;
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_lo,bin_hi,relative_frequency\n";
  for (const auto& b : bins) {
    out << format_real(b.lo) << ',' << format_real(b.hi) << ',' << format_real(b.relative_frequency)
        << '\n';
  }
}

void write_hill_csv(std::ostream& out, std::span<const HillRow> rows) {
  out << "k,alpha_hat\n";
  for (const auto& r : rows) out << r.k << ',' << format_real(r.alpha_hat) << '\n';
}

}  // namespace fixprice
