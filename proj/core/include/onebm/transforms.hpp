#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "onebm/collector.hpp"
#include "onebm/database.hpp"

namespace onebm {

struct TransformConfig {
  int recent_k = 5;          // recent.0 .. recent.(k-1)
  int fft_coeffs = 5;        // leading DFT magnitudes
  int dwt_coeffs = 5;        // leading Haar cascade coefficients
  int autocorr_lags = 3;     // lags 1..autocorr_lags
  int top_items = 10;        // correlated items / subsequences kept
  double min_abs_corr = 0.05;
  int max_subseq_len = 3;    // contiguous n-grams of lengths 2..max_subseq_len
  double smoothing_alpha = 10.0;
  std::vector<int> nested_depths = {0};  // group_by depths that emit features
};

// All fields optional; absent fields keep their defaults.
TransformConfig transform_config_from_json(const std::string& json_text);
TransformConfig load_transform_config(const std::string& path);

// The prediction target, fitted state for target-aware transforms. Training
// entities are the main rows whose target is non-null.
struct TargetColumn {
  enum class Task : uint8_t { regression, classification };
  Task task = Task::regression;
  std::vector<bool> is_train;        // per main row
  std::vector<double> numeric;       // regression value per row (NaN otherwise)
  std::vector<int32_t> classes;      // classification category id per row (-1 otherwise)
  std::vector<int32_t> class_order;  // classes by descending training frequency

  size_t train_count() const {
    size_t n = 0;
    for (bool b : is_train) n += b;
    return n;
  }
};

// Builds the target from the main table's target-role column; nullopt when
// no target is declared (target-aware transforms then degrade).
std::optional<TargetColumn> resolve_target(const Database& db);

// Named numeric columns for every main row. A NaN value is a null. Columns
// flagged zero_fill are counts: an entity without data reads 0, not null.
struct FeatureVector {
  std::vector<std::string> names;
  std::vector<bool> zero_fill;
  std::vector<double> values;  // entity-major, main rows × names.size()
  size_t entity_count = 0;

  double at(size_t entity, size_t feature) const {
    return values[entity * names.size() + feature];
  }
};

double null_value();
bool is_null(double v);

// (mean, population variance, max, min, sum, count) over non-null values;
// the empty multiset yields five nulls and count 0.
std::array<double, 6> transform_number_multiset(const std::vector<double>& values);

// Magnitudes of the first `coeffs` DFT bins after zero-padding the input to
// the next power of two; bins past the padded length are null.
std::vector<double> dft_magnitudes(const std::vector<double>& values, size_t coeffs);

// Full Haar cascade over the zero-padded input, laid out as the final
// approximation coefficient, then detail coefficients from the coarsest
// level down; the first `coeffs` entries are returned, nulls past the end.
std::vector<double> haar_coefficients(const std::vector<double>& values, size_t coeffs);

// Lag-h autocorrelation with the lag-corrected numerator,
//   sum((x_t - m)(x_{t+h} - m)) / (n - h)  over  sum((x_t - m)^2) / n,
// null when n <= lag or the variance is 0.
double autocorrelation(const std::vector<double>& values, size_t lag);

// Multiset statistics, then recent.0..k-1 (latest first), DFT magnitudes,
// Haar coefficients, and autocorrelations at lags 1..L, over a series
// already ordered by event time (oldest first).
std::vector<double> transform_time_series(const std::vector<double>& ordered_values,
                                          const TransformConfig& cfg);

// (year, month, day, hour, minute, weekday 0=Monday, is_weekend, day of year).
std::array<double, 8> transform_timestamp_scalar(int64_t epoch_seconds);

// Lowercased alphanumeric token runs, in source order.
std::vector<std::string> tokenize_text(std::string_view text);

// Pearson correlation; NaN when either side has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Ranks candidate keys (items or n-grams) by the largest absolute Pearson
// correlation between their per-entity counts and the target over training
// entities (one-vs-rest per class for classification). Keys below
// min_abs_corr are dropped; at most top_items survive, ties broken by name.
std::vector<std::string> select_correlated_keys(
    const std::vector<std::unordered_map<std::string, double>>& counts_per_entity,
    const TargetColumn& target, const TransformConfig& cfg);

// Smoothed target statistics per category, fitted on training entities.
struct CategoryEncoding {
  TargetColumn::Task task = TargetColumn::Task::classification;
  double alpha = 10.0;
  std::vector<int32_t> class_ids;  // frequency-ordered (classification)
  std::vector<double> priors;      // training class fractions
  double global_mean = 0.0;        // regression
  // per category id: class counts (classification) or (target sum, count).
  std::unordered_map<int32_t, std::vector<double>> stats;
};

// `category_ids` holds one category per main row; a null category (-1) is a
// category of its own.
CategoryEncoding fit_category_encoding(const std::vector<int32_t>& category_ids,
                                       const TargetColumn& target, double alpha);

// Classification: per class j, the raw training count jT and the smoothed
// share jT.norm = (count + alpha * prior_j) / (category total + alpha);
// unseen categories read (0, prior_j). Regression: smoothed category mean
// and category count.
std::vector<double> apply_category_encoding(const CategoryEncoding& encoding,
                                            int32_t category_id);

// Per-entity plugin input: the entity's collected values in source order
// with their event times.
struct PluginEntityInput {
  const std::vector<CellValue>& values;
  const std::vector<std::optional<int64_t>>& times;
  const StringPool& pool;
};

using PluginTags = std::function<std::vector<std::string>(const TransformConfig&)>;
using PluginExtract =
    std::function<std::vector<double>(const PluginEntityInput&, const TransformConfig&)>;

// Removes the plugin when destroyed.
class PluginRegistration {
 public:
  PluginRegistration() = default;
  explicit PluginRegistration(std::string name) : name_(std::move(name)) {}
  PluginRegistration(PluginRegistration&& other) noexcept : name_(std::move(other.name_)) {
    other.name_.clear();
  }
  PluginRegistration& operator=(PluginRegistration&& other) noexcept;
  ~PluginRegistration();

 private:
  std::string name_;
};

// Registers a per-entity extractor appended after the built-in features of
// `ctype`. Its features are tagged "<name>.<subtag>". Registering an
// already-registered name raises DuplicateRegistration.
PluginRegistration register_plugin(CollectedType ctype, std::string name, PluginTags tags,
                                   PluginExtract extract);

// Applies the type-appropriate transformation to every main entity,
// producing named feature columns. `target` may be null (no target column):
// correlation selection and categorical encodings are then skipped.
FeatureVector transform(const CollectedColumn& col, const Database& db,
                        const TargetColumn* target, const TransformConfig& cfg);

}  // namespace onebm
