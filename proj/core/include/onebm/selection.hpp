#pragma once

#include <string>
#include <vector>

#include "onebm/transforms.hpp"

namespace onebm {

// Assembled feature columns for every main row. A NaN is a null.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;  // aligned with names
  size_t entity_count = 0;
};

struct SelectionConfig {
  double ks_threshold = 0.2;   // drift: remove when D exceeds this
  double chi_alpha = 0.05;     // independence: remove when p exceeds this
  int max_bins = 10;           // equal-frequency bins for chi-square
  double train_fraction = 0.8; // drift: ordered training split
};

struct Removal {
  std::string name;
  std::string reason;  // duplicate | constant | drift | independent
  double statistic = 0.0;
  bool has_statistic = false;
};

struct SelectionReport {
  std::vector<std::string> kept;
  std::vector<Removal> removed;
};

struct SelectionOutcome {
  FeatureMatrix matrix;
  SelectionReport report;
};

// Drops constant columns (at most one distinct non-null value), then keeps
// only the lexicographically smallest name of each group of identical
// columns (nulls compare equal to each other, -0 equals 0).
SelectionOutcome remove_duplicates(FeatureMatrix matrix);

// Flags features whose distribution shifts along the declared order column:
// training rows are sorted by `order_values`, split train_fraction / rest,
// and a feature drifts when the two-sample Kolmogorov-Smirnov statistic over
// its non-null values exceeds ks_threshold.
SelectionReport detect_drift(const FeatureMatrix& matrix, const std::vector<double>& order_values,
                             const std::vector<bool>& is_train, const SelectionConfig& cfg);

// Flags features statistically independent of the target on training rows:
// feature and numeric target are cut into at most max_bins equal-frequency
// bins (nulls bin separately; classification targets use their classes), and
// a feature is removed when the chi-square independence p-value exceeds
// chi_alpha. Features yielding fewer than two populated bins on either axis
// are removed as constant.
SelectionReport chi_square_filter(const FeatureMatrix& matrix, const TargetColumn& target,
                                  const SelectionConfig& cfg);

// remove_duplicates, then detect_drift (when an order column exists), then
// chi_square_filter (when a target exists), in that precedence. The report
// covers every input feature exactly once.
SelectionOutcome select(FeatureMatrix matrix, const TargetColumn* target,
                        const std::vector<double>* order_values, const SelectionConfig& cfg);

// Two-sample Kolmogorov-Smirnov statistic: the largest absolute difference
// between the samples' empirical CDFs. Zero when either sample is empty.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Regularized upper incomplete gamma Q(a, x); the chi-square survival
// function is Q(df/2, x/2).
double gamma_q(double a, double x);

// Survival function of the chi-square distribution.
double chi_square_pvalue(double statistic, double degrees_of_freedom);

}  // namespace onebm
