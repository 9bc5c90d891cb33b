#include "onebm/selection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "onebm/errors.hpp"

namespace onebm {

namespace {

// Unifies all NaN payloads and the two signed zeros so identical-looking
// columns hash and compare identically.
uint64_t canonical_bits(double v) {
  if (std::isnan(v)) return 0x7ff8000000000000ULL;
  if (v == 0.0) return 0;
  return std::bit_cast<uint64_t>(v);
}

bool columns_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++)
    if (canonical_bits(a[i]) != canonical_bits(b[i])) return false;
  return true;
}

uint64_t column_hash(const std::vector<double>& col) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : col) {
    h ^= canonical_bits(v);
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_constant(const std::vector<double>& col) {
  bool seen = false;
  uint64_t first = 0;
  for (double v : col) {
    if (std::isnan(v)) continue;
    uint64_t bits = canonical_bits(v);
    if (!seen) {
      seen = true;
      first = bits;
    } else if (bits != first) {
      return false;
    }
  }
  return true;  // all null counts as constant
}

FeatureMatrix keep_columns(FeatureMatrix matrix, const std::vector<bool>& keep) {
  FeatureMatrix out;
  out.entity_count = matrix.entity_count;
  for (size_t j = 0; j < matrix.names.size(); j++) {
    if (!keep[j]) continue;
    out.names.push_back(std::move(matrix.names[j]));
    out.columns.push_back(std::move(matrix.columns[j]));
  }
  return out;
}

}  // namespace

SelectionOutcome remove_duplicates(FeatureMatrix matrix) {
  size_t width = matrix.names.size();
  std::vector<bool> keep(width, true);
  SelectionOutcome out;

  for (size_t j = 0; j < width; j++) {
    if (is_constant(matrix.columns[j])) {
      keep[j] = false;
      out.report.removed.push_back(Removal{matrix.names[j], "constant"});
    }
  }

  // Group the survivors by content; the smallest name represents each group.
  std::unordered_map<uint64_t, std::vector<size_t>> buckets;
  for (size_t j = 0; j < width; j++) {
    if (!keep[j]) continue;
    auto& bucket = buckets[column_hash(matrix.columns[j])];
    bool matched = false;
    for (size_t other : bucket) {
      if (!columns_equal(matrix.columns[j], matrix.columns[other])) continue;
      matched = true;
      if (matrix.names[j] < matrix.names[other]) {
        keep[other] = false;
        out.report.removed.push_back(Removal{matrix.names[other], "duplicate"});
        bucket.erase(std::find(bucket.begin(), bucket.end(), other));
        bucket.push_back(j);
      } else {
        keep[j] = false;
        out.report.removed.push_back(Removal{matrix.names[j], "duplicate"});
      }
      break;
    }
    if (!matched) bucket.push_back(j);
  }

  for (size_t j = 0; j < width; j++)
    if (keep[j]) out.report.kept.push_back(matrix.names[j]);
  out.matrix = keep_columns(std::move(matrix), keep);
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) i++;
    while (j < b.size() && b[j] <= x) j++;
    d = std::max(d, std::fabs(double(i) / double(a.size()) - double(j) / double(b.size())));
  }
  return d;
}

SelectionReport detect_drift(const FeatureMatrix& matrix, const std::vector<double>& order_values,
                             const std::vector<bool>& is_train, const SelectionConfig& cfg) {
  SelectionReport report;
  std::vector<size_t> train;
  for (size_t e = 0; e < matrix.entity_count; e++)
    if (e < is_train.size() && is_train[e]) train.push_back(e);
  std::stable_sort(train.begin(), train.end(),
                   [&](size_t a, size_t b) { return order_values[a] < order_values[b]; });
  size_t head = size_t(std::floor(cfg.train_fraction * double(train.size())));

  for (size_t j = 0; j < matrix.names.size(); j++) {
    std::vector<double> early, late;
    for (size_t i = 0; i < train.size(); i++) {
      double v = matrix.columns[j][train[i]];
      if (std::isnan(v)) continue;
      (i < head ? early : late).push_back(v);
    }
    double d = ks_statistic(std::move(early), std::move(late));
    if (d > cfg.ks_threshold)
      report.removed.push_back(Removal{matrix.names[j], "drift", d, true});
    else
      report.kept.push_back(matrix.names[j]);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Chi-square machinery
// ---------------------------------------------------------------------------

namespace {

constexpr int kNullBin = -1;

// Equal-frequency bin edges over the sorted non-null sample; duplicates in
// the data collapse edges, so fewer than max_bins bins can come out.
std::vector<double> frequency_edges(std::vector<double> values, int max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> edges;
  size_t n = values.size();
  for (int i = 1; i < max_bins; i++) {
    size_t at = size_t(std::floor(double(i) * double(n) / double(max_bins)));
    if (at >= n) break;
    double edge = values[at];
    if (edges.empty() || edge > edges.back()) edges.push_back(edge);
  }
  return edges;
}

int bin_of(double v, const std::vector<double>& edges) {
  if (std::isnan(v)) return kNullBin;
  return int(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

// ln Gamma via the Lanczos approximation.
double log_gamma(double x) {
  static const double coeffs[6] = {76.18009172947146,  -86.50532032941677, 24.01409824083091,
                                   -1.231739572450155, 0.1208650973866179e-2,
                                   -0.5395239384953e-5};
  double y = x;
  double tmp = x + 5.5;
  tmp -= (x + 0.5) * std::log(tmp);
  double ser = 1.000000000190015;
  for (double c : coeffs) ser += c / ++y;
  return -tmp + std::log(2.5066282746310005 * ser / x);
}

// Lower regularized incomplete gamma by series expansion (x < a + 1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; i++) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Upper regularized incomplete gamma by continued fraction (x >= a + 1).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; i++) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) return 1.0;
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_pvalue(double statistic, double degrees_of_freedom) {
  return gamma_q(degrees_of_freedom / 2.0, statistic / 2.0);
}

SelectionReport chi_square_filter(const FeatureMatrix& matrix, const TargetColumn& target,
                                  const SelectionConfig& cfg) {
  SelectionReport report;
  std::vector<size_t> train;
  for (size_t e = 0; e < matrix.entity_count; e++)
    if (e < target.is_train.size() && target.is_train[e]) train.push_back(e);

  // Target bins are fixed across features: classes, or equal-frequency bins
  // of the numeric target.
  std::vector<int> target_bin(train.size());
  int target_bins = 0;
  if (target.task == TargetColumn::Task::classification) {
    std::unordered_map<int32_t, int> pos;
    for (size_t j = 0; j < target.class_order.size(); j++)
      pos[target.class_order[j]] = int(j);
    for (size_t i = 0; i < train.size(); i++) target_bin[i] = pos.at(target.classes[train[i]]);
    target_bins = int(target.class_order.size());
  } else {
    std::vector<double> values;
    values.reserve(train.size());
    for (size_t e : train) values.push_back(target.numeric[e]);
    std::vector<double> edges = frequency_edges(values, cfg.max_bins);
    for (size_t i = 0; i < train.size(); i++)
      target_bin[i] = bin_of(target.numeric[train[i]], edges);
    target_bins = int(edges.size()) + 1;
  }

  for (size_t j = 0; j < matrix.names.size(); j++) {
    const std::vector<double>& col = matrix.columns[j];
    std::vector<double> non_null;
    for (size_t e : train)
      if (!std::isnan(col[e])) non_null.push_back(col[e]);
    std::vector<double> edges = frequency_edges(non_null, cfg.max_bins);
    bool has_null = non_null.size() < train.size();
    int feature_bins = int(edges.size()) + 1 + (has_null ? 1 : 0);
    int null_bin = int(edges.size()) + 1;

    std::vector<uint64_t> table(size_t(feature_bins) * size_t(target_bins), 0);
    for (size_t i = 0; i < train.size(); i++) {
      int fb = bin_of(col[train[i]], edges);
      if (fb == kNullBin) fb = null_bin;
      table[size_t(fb) * size_t(target_bins) + size_t(target_bin[i])]++;
    }

    // Drop empty rows/columns; the test runs on the populated table.
    std::vector<uint64_t> row_totals(size_t(feature_bins), 0),
        col_totals(size_t(target_bins), 0);
    uint64_t total = 0;
    for (int r = 0; r < feature_bins; r++)
      for (int c = 0; c < target_bins; c++) {
        uint64_t o = table[size_t(r) * size_t(target_bins) + size_t(c)];
        row_totals[size_t(r)] += o;
        col_totals[size_t(c)] += o;
        total += o;
      }
    int rows = 0, cols = 0;
    for (uint64_t t : row_totals) rows += t > 0;
    for (uint64_t t : col_totals) cols += t > 0;

    if (rows < 2 || cols < 2 || total == 0) {
      report.removed.push_back(Removal{matrix.names[j], "constant"});
      continue;
    }

    double stat = 0.0;
    for (int r = 0; r < feature_bins; r++) {
      if (row_totals[size_t(r)] == 0) continue;
      for (int c = 0; c < target_bins; c++) {
        if (col_totals[size_t(c)] == 0) continue;
        double expected =
            double(row_totals[size_t(r)]) * double(col_totals[size_t(c)]) / double(total);
        double observed = double(table[size_t(r) * size_t(target_bins) + size_t(c)]);
        stat += (observed - expected) * (observed - expected) / expected;
      }
    }
    double df = double((rows - 1) * (cols - 1));
    double p = chi_square_pvalue(stat, df);
    if (p > cfg.chi_alpha)
      report.removed.push_back(Removal{matrix.names[j], "independent", p, true});
    else
      report.kept.push_back(matrix.names[j]);
  }
  return report;
}

SelectionOutcome select(FeatureMatrix matrix, const TargetColumn* target,
                        const std::vector<double>* order_values, const SelectionConfig& cfg) {
  SelectionOutcome out = remove_duplicates(std::move(matrix));

  if (order_values && target) {
    SelectionReport drift = detect_drift(out.matrix, *order_values, target->is_train, cfg);
    if (!drift.removed.empty()) {
      std::vector<bool> keep(out.matrix.names.size(), true);
      for (const Removal& r : drift.removed) {
        for (size_t j = 0; j < out.matrix.names.size(); j++)
          if (out.matrix.names[j] == r.name) keep[j] = false;
        out.report.removed.push_back(r);
      }
      out.matrix = keep_columns(std::move(out.matrix), keep);
    }
  }

  if (target) {
    SelectionReport chi = chi_square_filter(out.matrix, *target, cfg);
    if (!chi.removed.empty()) {
      std::vector<bool> keep(out.matrix.names.size(), true);
      for (const Removal& r : chi.removed) {
        for (size_t j = 0; j < out.matrix.names.size(); j++)
          if (out.matrix.names[j] == r.name) keep[j] = false;
        out.report.removed.push_back(r);
      }
      out.matrix = keep_columns(std::move(out.matrix), keep);
    }
  }

  out.report.kept = out.matrix.names;
  return out;
}

}  // namespace onebm
