#include "onebm/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "onebm/errors.hpp"
#include "onebm/feature_name.hpp"
#include "onebm/time.hpp"

namespace onebm {

double null_value() { return std::numeric_limits<double>::quiet_NaN(); }
bool is_null(double v) { return std::isnan(v); }

TransformConfig transform_config_from_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw OnebmError(std::string("transform config is not valid JSON: ") + e.what());
  }
  TransformConfig cfg;
  auto read_int = [&](const char* key, int& out, int lo) {
    if (auto it = doc.find(key); it != doc.end()) {
      out = it->get<int>();
      if (out < lo)
        throw OnebmError(std::string("transform config: ") + key + " must be >= " +
                         std::to_string(lo));
    }
  };
  read_int("recent_k", cfg.recent_k, 1);
  read_int("fft_coeffs", cfg.fft_coeffs, 1);
  read_int("dwt_coeffs", cfg.dwt_coeffs, 1);
  read_int("autocorr_lags", cfg.autocorr_lags, 1);
  read_int("top_items", cfg.top_items, 1);
  read_int("max_subseq_len", cfg.max_subseq_len, 2);
  if (auto it = doc.find("min_abs_corr"); it != doc.end()) {
    cfg.min_abs_corr = it->get<double>();
    if (cfg.min_abs_corr < 0 || cfg.min_abs_corr > 1)
      throw OnebmError("transform config: min_abs_corr must be in [0,1]");
  }
  if (auto it = doc.find("smoothing_alpha"); it != doc.end()) {
    cfg.smoothing_alpha = it->get<double>();
    if (cfg.smoothing_alpha < 0)
      throw OnebmError("transform config: smoothing_alpha must be >= 0");
  }
  if (auto it = doc.find("nested_depths"); it != doc.end()) {
    cfg.nested_depths.clear();
    for (const auto& d : *it) {
      int depth = d.get<int>();
      if (depth < 0) throw OnebmError("transform config: nested_depths must be >= 0");
      cfg.nested_depths.push_back(depth);
    }
    std::sort(cfg.nested_depths.begin(), cfg.nested_depths.end());
    cfg.nested_depths.erase(std::unique(cfg.nested_depths.begin(), cfg.nested_depths.end()),
                            cfg.nested_depths.end());
  }
  return cfg;
}

TransformConfig load_transform_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OnebmError("cannot open transform config \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return transform_config_from_json(buf.str());
}

std::optional<TargetColumn> resolve_target(const Database& db) {
  const LoadedTable& main = db.main();
  int target_col = -1;
  for (size_t c = 0; c < main.spec.columns.size(); c++) {
    if (main.spec.columns[c].has_role(ColumnRole::target)) target_col = int(c);
  }
  if (target_col < 0) return std::nullopt;

  const ColumnData& col = main.columns[size_t(target_col)];
  TargetColumn target;
  target.task = (col.type == ColumnType::numerical || col.type == ColumnType::timestamp)
                    ? TargetColumn::Task::regression
                    : TargetColumn::Task::classification;
  target.is_train.assign(main.row_count, false);
  target.numeric.assign(main.row_count, null_value());
  target.classes.assign(main.row_count, -1);

  std::unordered_map<int32_t, size_t> class_counts;
  for (size_t row = 0; row < main.row_count; row++) {
    if (col.nulls[row]) continue;
    target.is_train[row] = true;
    if (target.task == TargetColumn::Task::regression) {
      target.numeric[row] =
          col.type == ColumnType::numerical ? col.numbers[row] : double(col.timestamps[row]);
    } else {
      target.classes[row] = col.strings[row];
      class_counts[col.strings[row]]++;
    }
  }
  if (target.task == TargetColumn::Task::classification) {
    for (const auto& [id, count] : class_counts) target.class_order.push_back(id);
    std::sort(target.class_order.begin(), target.class_order.end(),
              [&](int32_t a, int32_t b) {
                size_t ca = class_counts[a], cb = class_counts[b];
                if (ca != cb) return ca > cb;
                return db.pool.view(a) < db.pool.view(b);
              });
  }
  return target;
}

std::array<double, 6> transform_number_multiset(const std::vector<double>& values) {
  if (values.empty())
    return {null_value(), null_value(), null_value(), null_value(), null_value(), 0.0};
  double sum = 0, mx = values[0], mn = values[0];
  for (double v : values) {
    sum += v;
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  double mean = sum / double(values.size());
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= double(values.size());
  return {mean, var, mx, mn, sum, double(values.size())};
}

namespace {

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<double> dft_magnitudes(const std::vector<double>& values, size_t coeffs) {
  std::vector<double> out(coeffs, null_value());
  if (values.empty()) return out;
  size_t n = next_pow2(values.size());
  constexpr double kTau = 6.283185307179586476925286766559;
  for (size_t k = 0; k < coeffs && k < n; k++) {
    double re = 0, im = 0;
    for (size_t t = 0; t < values.size(); t++) {  // padded zeros contribute nothing
      double angle = -kTau * double(k) * double(t) / double(n);
      re += values[t] * std::cos(angle);
      im += values[t] * std::sin(angle);
    }
    out[k] = std::hypot(re, im);
  }
  return out;
}

std::vector<double> haar_coefficients(const std::vector<double>& values, size_t coeffs) {
  std::vector<double> out(coeffs, null_value());
  if (values.empty()) return out;
  std::vector<double> level(values);
  level.resize(next_pow2(values.size()), 0.0);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<std::vector<double>> details;  // per level, finest first
  while (level.size() > 1) {
    std::vector<double> approx(level.size() / 2), detail(level.size() / 2);
    for (size_t i = 0; i < approx.size(); i++) {
      approx[i] = (level[2 * i] + level[2 * i + 1]) * inv_sqrt2;
      detail[i] = (level[2 * i] - level[2 * i + 1]) * inv_sqrt2;
    }
    details.push_back(std::move(detail));
    level = std::move(approx);
  }

  // Final approximation first, then details from the coarsest level down.
  size_t at = 0;
  auto put = [&](double v) {
    if (at < coeffs) out[at] = v;
    at++;
  };
  put(level[0]);
  for (auto it = details.rbegin(); it != details.rend(); ++it)
    for (double v : *it) put(v);
  return out;
}

double autocorrelation(const std::vector<double>& values, size_t lag) {
  size_t n = values.size();
  if (lag == 0 || n <= lag) return null_value();
  double mean = 0;
  for (double v : values) mean += v;
  mean /= double(n);
  double var_sum = 0;
  for (double v : values) var_sum += (v - mean) * (v - mean);
  if (var_sum == 0) return null_value();
  double num = 0;
  for (size_t t = 0; t + lag < n; t++) num += (values[t] - mean) * (values[t + lag] - mean);
  num /= double(n - lag);
  return num / (var_sum / double(n));
}

std::vector<double> transform_time_series(const std::vector<double>& ordered_values,
                                          const TransformConfig& cfg) {
  std::vector<double> out;
  auto stats = transform_number_multiset(ordered_values);
  out.insert(out.end(), stats.begin(), stats.end());
  size_t n = ordered_values.size();
  for (int i = 0; i < cfg.recent_k; i++)
    out.push_back(size_t(i) < n ? ordered_values[n - 1 - size_t(i)] : null_value());
  auto fft = dft_magnitudes(ordered_values, size_t(cfg.fft_coeffs));
  out.insert(out.end(), fft.begin(), fft.end());
  auto dwt = haar_coefficients(ordered_values, size_t(cfg.dwt_coeffs));
  out.insert(out.end(), dwt.begin(), dwt.end());
  for (int lag = 1; lag <= cfg.autocorr_lags; lag++)
    out.push_back(autocorrelation(ordered_values, size_t(lag)));
  return out;
}

std::array<double, 8> transform_timestamp_scalar(int64_t epoch_seconds) {
  CivilTime c = civil_from_epoch(epoch_seconds);
  return {double(c.year),        double(c.month),
          double(c.day),         double(c.hour),
          double(c.minute),      double(c.day_of_week),
          c.day_of_week >= 5 ? 1.0 : 0.0, double(c.day_of_year)};
}

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
    bool token_char = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c >= 0x80;
    if (token_char) {
      current += char(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  size_t n = std::min(x.size(), y.size());
  if (n == 0) return null_value();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; i++) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < n; i++) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return null_value();
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::string> select_correlated_keys(
    const std::vector<std::unordered_map<std::string, double>>& counts_per_entity,
    const TargetColumn& target, const TransformConfig& cfg) {
  std::vector<size_t> train;
  for (size_t e = 0; e < counts_per_entity.size(); e++)
    if (e < target.is_train.size() && target.is_train[e]) train.push_back(e);
  if (train.empty()) return {};

  // Candidates come from training entities only, in sorted order so the
  // final ranking is reproducible.
  std::vector<std::string> candidates;
  {
    std::unordered_map<std::string, bool> seen;
    for (size_t e : train)
      for (const auto& [key, count] : counts_per_entity[e])
        if (seen.emplace(key, true).second) candidates.push_back(key);
    std::sort(candidates.begin(), candidates.end());
  }

  // Target vectors: the raw value for regression, one-vs-rest indicators per
  // class for classification; the score is the best absolute correlation.
  std::vector<std::vector<double>> targets;
  if (target.task == TargetColumn::Task::regression) {
    std::vector<double> y;
    y.reserve(train.size());
    for (size_t e : train) y.push_back(target.numeric[e]);
    targets.push_back(std::move(y));
  } else {
    for (int32_t cls : target.class_order) {
      std::vector<double> y;
      y.reserve(train.size());
      for (size_t e : train) y.push_back(target.classes[e] == cls ? 1.0 : 0.0);
      targets.push_back(std::move(y));
    }
  }

  std::vector<std::pair<double, std::string>> scored;
  std::vector<double> x(train.size());
  for (const std::string& key : candidates) {
    for (size_t i = 0; i < train.size(); i++) {
      const auto& counts = counts_per_entity[train[i]];
      auto it = counts.find(key);
      x[i] = it == counts.end() ? 0.0 : it->second;
    }
    double score = 0;
    for (const auto& y : targets) {
      double corr = pearson(x, y);
      if (!is_null(corr)) score = std::max(score, std::fabs(corr));
    }
    if (score >= cfg.min_abs_corr && score > 0) scored.emplace_back(score, key);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (scored.size() > size_t(cfg.top_items)) scored.resize(size_t(cfg.top_items));

  std::vector<std::string> keys;
  keys.reserve(scored.size());
  for (auto& [score, key] : scored) keys.push_back(std::move(key));
  return keys;
}

CategoryEncoding fit_category_encoding(const std::vector<int32_t>& category_ids,
                                       const TargetColumn& target, double alpha) {
  CategoryEncoding enc;
  enc.task = target.task;
  enc.alpha = alpha;
  size_t train_count = 0;

  if (target.task == TargetColumn::Task::classification) {
    enc.class_ids = target.class_order;
    std::unordered_map<int32_t, size_t> class_pos;
    for (size_t j = 0; j < enc.class_ids.size(); j++) class_pos[enc.class_ids[j]] = j;
    enc.priors.assign(enc.class_ids.size(), 0.0);
    for (size_t e = 0; e < category_ids.size(); e++) {
      if (e >= target.is_train.size() || !target.is_train[e]) continue;
      train_count++;
      size_t j = class_pos.at(target.classes[e]);
      enc.priors[j] += 1.0;
      auto& counts = enc.stats[category_ids[e]];
      if (counts.empty()) counts.assign(enc.class_ids.size(), 0.0);
      counts[j] += 1.0;
    }
    if (train_count > 0)
      for (double& p : enc.priors) p /= double(train_count);
  } else {
    double sum = 0;
    for (size_t e = 0; e < category_ids.size(); e++) {
      if (e >= target.is_train.size() || !target.is_train[e]) continue;
      train_count++;
      sum += target.numeric[e];
      auto& s = enc.stats[category_ids[e]];
      if (s.empty()) s.assign(2, 0.0);
      s[0] += target.numeric[e];
      s[1] += 1.0;
    }
    enc.global_mean = train_count > 0 ? sum / double(train_count) : 0.0;
  }
  return enc;
}

std::vector<double> apply_category_encoding(const CategoryEncoding& enc, int32_t category_id) {
  auto it = enc.stats.find(category_id);
  if (enc.task == TargetColumn::Task::classification) {
    std::vector<double> out;
    out.reserve(enc.class_ids.size() * 2);
    double total = 0;
    if (it != enc.stats.end())
      for (double c : it->second) total += c;
    for (size_t j = 0; j < enc.class_ids.size(); j++) {
      double count = it != enc.stats.end() ? it->second[j] : 0.0;
      double denom = total + enc.alpha;
      double norm = denom > 0 ? (count + enc.alpha * enc.priors[j]) / denom : enc.priors[j];
      out.push_back(count);
      out.push_back(norm);
    }
    return out;
  }
  double sum = it != enc.stats.end() ? it->second[0] : 0.0;
  double count = it != enc.stats.end() ? it->second[1] : 0.0;
  double denom = count + enc.alpha;
  double mean = denom > 0 ? (sum + enc.alpha * enc.global_mean) / denom : enc.global_mean;
  return {mean, count};
}

// ---------------------------------------------------------------------------
// Plugin registry
// ---------------------------------------------------------------------------

namespace {

struct PluginEntry {
  CollectedType ctype;
  std::string name;
  PluginTags tags;
  PluginExtract extract;
};

std::mutex& plugin_mutex() {
  static std::mutex m;
  return m;
}

std::vector<PluginEntry>& plugin_registry() {
  static std::vector<PluginEntry> entries;
  return entries;
}

void unregister_plugin(const std::string& name) {
  std::lock_guard<std::mutex> lock(plugin_mutex());
  auto& entries = plugin_registry();
  entries.erase(std::remove_if(entries.begin(), entries.end(),
                               [&](const PluginEntry& e) { return e.name == name; }),
                entries.end());
}

}  // namespace

PluginRegistration& PluginRegistration::operator=(PluginRegistration&& other) noexcept {
  if (this != &other) {
    if (!name_.empty()) unregister_plugin(name_);
    name_ = std::move(other.name_);
    other.name_.clear();
  }
  return *this;
}

PluginRegistration::~PluginRegistration() {
  if (!name_.empty()) unregister_plugin(name_);
}

PluginRegistration register_plugin(CollectedType ctype, std::string name, PluginTags tags,
                                   PluginExtract extract) {
  std::lock_guard<std::mutex> lock(plugin_mutex());
  for (const PluginEntry& e : plugin_registry()) {
    if (e.name == name)
      throw FeatureError(FeatureErrorKind::duplicate_registration,
                         "plugin \"" + name + "\" is already registered");
  }
  plugin_registry().push_back(PluginEntry{ctype, name, std::move(tags), std::move(extract)});
  return PluginRegistration(std::move(name));
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

namespace {

struct EntitySpan {
  size_t begin = 0;
  size_t end = 0;
};

std::vector<EntitySpan> entity_spans(const CollectedColumn& col, size_t entity_count) {
  std::vector<EntitySpan> spans(entity_count);
  size_t i = 0;
  while (i < col.tuples.size()) {
    size_t j = i + 1;
    uint32_t entity = col.tuples[i].entity_row;
    while (j < col.tuples.size() && col.tuples[j].entity_row == entity) j++;
    spans[entity] = EntitySpan{i, j};
    i = j;
  }
  return spans;
}

// Tuple order within an entity: ascending event time, nulls (no time) first,
// ties by source position.
std::vector<size_t> time_ordered(const CollectedColumn& col, const EntitySpan& span) {
  std::vector<size_t> order;
  order.reserve(span.end - span.begin);
  for (size_t i = span.begin; i < span.end; i++) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    int64_t ta = col.tuples[a].event_time.value_or(std::numeric_limits<int64_t>::min());
    int64_t tb = col.tuples[b].event_time.value_or(std::numeric_limits<int64_t>::min());
    return ta < tb;
  });
  return order;
}

double cell_as_number(const CellValue& v) {
  switch (v.kind) {
    case CellKind::number:
      return v.number;
    case CellKind::timestamp:
      return double(v.ts);
    default:
      return null_value();
  }
}

// Feature column being assembled: name, count-ness, and per-entity values.
struct Builder {
  FeatureVector vec;
  size_t width = 0;

  explicit Builder(size_t entity_count) { vec.entity_count = entity_count; }

  void add_feature(std::string name, bool zero_fill) {
    vec.names.push_back(std::move(name));
    vec.zero_fill.push_back(zero_fill);
    width++;
  }
  void finish_names() { vec.values.assign(vec.entity_count * width, null_value()); }
  void set(size_t entity, size_t feature, double value) {
    vec.values[entity * width + feature] = value;
  }
};

}  // namespace

FeatureVector transform(const CollectedColumn& col, const Database& db,
                        const TargetColumn* target, const TransformConfig& cfg) {
  size_t entity_count = db.main().row_count;
  std::vector<EntitySpan> spans = entity_spans(col, entity_count);
  const JoiningPath& path = col.path;
  Builder b(entity_count);

  const auto stat_tags = std::array<const char*, 6>{"mean", "variance", "max",
                                                    "min",  "sum",      "count"};

  switch (col.ctype) {
    case CollectedType::numeric_scalar: {
      b.add_feature(name_feature(db, path, ""), false);
      b.finish_names();
      for (size_t e = 0; e < entity_count; e++) {
        const EntitySpan& s = spans[e];
        if (s.end > s.begin) b.set(e, 0, cell_as_number(col.tuples[s.begin].value));
      }
      break;
    }
    case CollectedType::timestamp_scalar: {
      const std::array<const char*, 8> tags = {"year",   "month", "day",     "hour",
                                               "minute", "dow",   "weekend", "yday"};
      for (const char* tag : tags) b.add_feature(name_feature(db, path, tag), false);
      b.finish_names();
      for (size_t e = 0; e < entity_count; e++) {
        const EntitySpan& s = spans[e];
        if (s.end == s.begin) continue;
        const CellValue& v = col.tuples[s.begin].value;
        if (v.kind != CellKind::timestamp) continue;
        auto parts = transform_timestamp_scalar(v.ts);
        for (size_t j = 0; j < parts.size(); j++) b.set(e, j, parts[j]);
      }
      break;
    }
    case CollectedType::category_scalar: {
      if (!target) break;  // encodings need a target
      std::vector<int32_t> category(entity_count, -1);
      for (size_t e = 0; e < entity_count; e++) {
        const EntitySpan& s = spans[e];
        if (s.end > s.begin && col.tuples[s.begin].value.kind == CellKind::category)
          category[e] = col.tuples[s.begin].value.str_id;
      }
      CategoryEncoding enc = fit_category_encoding(category, *target, cfg.smoothing_alpha);
      if (target->task == TargetColumn::Task::classification) {
        for (size_t j = 0; j < enc.class_ids.size(); j++) {
          b.add_feature(name_feature(db, path, std::to_string(j) + "T"), false);
          b.add_feature(name_feature(db, path, std::to_string(j) + "T", std::nullopt, true),
                        false);
        }
      } else {
        b.add_feature(name_feature(db, path, "Tmean"), false);
        b.add_feature(name_feature(db, path, "Tcount"), false);
      }
      b.finish_names();
      for (size_t e = 0; e < entity_count; e++) {
        std::vector<double> encoded = apply_category_encoding(enc, category[e]);
        for (size_t j = 0; j < encoded.size(); j++) b.set(e, j, encoded[j]);
      }
      break;
    }
    case CollectedType::number_multiset:
    case CollectedType::time_series: {
      bool series = col.ctype == CollectedType::time_series;
      for (const char* tag : stat_tags)
        b.add_feature(name_feature(db, path, tag), std::string(tag) == "count");
      if (series) {
        for (int i = 0; i < cfg.recent_k; i++)
          b.add_feature(name_feature(db, path, "recent", i), false);
        for (int i = 0; i < cfg.fft_coeffs; i++)
          b.add_feature(name_feature(db, path, "fft", i), false);
        for (int i = 0; i < cfg.dwt_coeffs; i++)
          b.add_feature(name_feature(db, path, "dwt", i), false);
        for (int lag = 1; lag <= cfg.autocorr_lags; lag++)
          b.add_feature(name_feature(db, path, "autocorr", lag), false);
      }

      // Two-stage aggregation over ancestry groups, when configured.
      struct NestedBlock {
        int depth;
        size_t base;
      };
      std::vector<NestedBlock> nested;
      int max_group_depth = int(path.hops.size()) - 1;
      for (int depth : cfg.nested_depths) {
        if (depth == 0 || depth > max_group_depth) continue;
        NestedBlock block{depth, b.width};
        for (const char* inner : {"count", "mean"})
          for (const char* outer : {"mean", "min", "max"})
            b.add_feature(
                name_feature(db, path, "d" + std::to_string(depth) + "." + inner + "." + outer),
                false);
        nested.push_back(block);
      }
      b.finish_names();

      for (size_t e = 0; e < entity_count; e++) {
        std::vector<double> values;
        if (series) {
          for (size_t i : time_ordered(col, spans[e])) {
            double v = cell_as_number(col.tuples[i].value);
            if (!is_null(v)) values.push_back(v);
          }
          std::vector<double> feats = transform_time_series(values, cfg);
          for (size_t j = 0; j < feats.size(); j++) b.set(e, j, feats[j]);
        } else {
          for (size_t i = spans[e].begin; i < spans[e].end; i++) {
            double v = cell_as_number(col.tuples[i].value);
            if (!is_null(v)) values.push_back(v);
          }
          auto stats = transform_number_multiset(values);
          for (size_t j = 0; j < stats.size(); j++) b.set(e, j, stats[j]);
        }
      }
      for (const NestedBlock& block : nested) {
        auto grouped = group_by(col, entity_count, block.depth);
        for (size_t e = 0; e < entity_count; e++) {
          std::vector<double> counts, means;
          for (const auto& group : grouped[e]) {
            size_t non_null = 0;
            double sum = 0;
            for (const CellValue& v : group) {
              double x = cell_as_number(v);
              if (is_null(x)) continue;
              non_null++;
              sum += x;
            }
            counts.push_back(double(non_null));
            if (non_null > 0) means.push_back(sum / double(non_null));
          }
          size_t slot = block.base;
          for (const auto* xs : {&counts, &means}) {
            auto agg = transform_number_multiset(*xs);
            b.set(e, slot++, agg[0]);  // mean
            b.set(e, slot++, agg[3]);  // min
            b.set(e, slot++, agg[2]);  // max
          }
        }
      }
      break;
    }
    case CollectedType::item_multiset:
    case CollectedType::sequence:
    case CollectedType::text_scalar:
    case CollectedType::text_set: {
      bool sequential = col.ctype == CollectedType::sequence;
      bool textual =
          col.ctype == CollectedType::text_scalar || col.ctype == CollectedType::text_set;

      // Per-entity token list: category items (time-ordered for sequences)
      // or text tokens concatenated in source order.
      std::vector<std::vector<std::string>> tokens(entity_count);
      for (size_t e = 0; e < entity_count; e++) {
        if (textual) {
          for (size_t i = spans[e].begin; i < spans[e].end; i++) {
            const CellValue& v = col.tuples[i].value;
            if (v.is_null()) continue;
            for (std::string& tok : tokenize_text(db.pool.view(v.str_id)))
              tokens[e].push_back(std::move(tok));
          }
        } else if (sequential) {
          for (size_t i : time_ordered(col, spans[e])) {
            const CellValue& v = col.tuples[i].value;
            if (!v.is_null()) tokens[e].push_back(std::string(db.pool.view(v.str_id)));
          }
        } else {
          for (size_t i = spans[e].begin; i < spans[e].end; i++) {
            const CellValue& v = col.tuples[i].value;
            if (!v.is_null()) tokens[e].push_back(std::string(db.pool.view(v.str_id)));
          }
        }
      }

      // Candidate keys: the items themselves for plain multisets, contiguous
      // n-grams for ordered data.
      bool grams = sequential || textual;
      std::vector<std::unordered_map<std::string, double>> counts(entity_count);
      for (size_t e = 0; e < entity_count; e++) {
        const auto& toks = tokens[e];
        if (grams) {
          for (int len = 2; len <= cfg.max_subseq_len; len++) {
            if (toks.size() < size_t(len)) break;
            for (size_t i = 0; i + size_t(len) <= toks.size(); i++) {
              std::string key = toks[i];
              for (size_t j = 1; j < size_t(len); j++) {
                key += '_';
                key += toks[i + j];
              }
              counts[e][key] += 1.0;
            }
          }
        } else {
          for (const std::string& tok : toks) counts[e][tok] += 1.0;
        }
      }

      std::vector<std::string> selected =
          target ? select_correlated_keys(counts, *target, cfg) : std::vector<std::string>{};

      b.add_feature(name_feature(db, path, "count"), true);
      b.add_feature(name_feature(db, path, "distinct"), true);
      for (const std::string& key : selected)
        b.add_feature(name_feature(db, path, "COR-" + key), true);
      b.finish_names();

      for (size_t e = 0; e < entity_count; e++) {
        const auto& toks = tokens[e];
        std::unordered_map<std::string_view, bool> distinct;
        for (const std::string& tok : toks) distinct.emplace(tok, true);
        b.set(e, 0, double(toks.size()));
        b.set(e, 1, double(distinct.size()));
        for (size_t j = 0; j < selected.size(); j++) {
          auto it = counts[e].find(selected[j]);
          b.set(e, 2 + j, it == counts[e].end() ? 0.0 : it->second);
        }
      }
      break;
    }
  }

  // Plugin features are appended after the built-ins, in registration order.
  std::vector<PluginEntry> plugins;
  {
    std::lock_guard<std::mutex> lock(plugin_mutex());
    for (const PluginEntry& e : plugin_registry())
      if (e.ctype == col.ctype) plugins.push_back(e);
  }
  if (!plugins.empty()) {
    FeatureVector base = std::move(b.vec);
    size_t base_width = base.names.size();
    Builder full(entity_count);
    full.vec.names = std::move(base.names);
    full.vec.zero_fill = std::move(base.zero_fill);
    full.width = base_width;

    std::vector<size_t> plugin_widths;
    for (const PluginEntry& plugin : plugins) {
      std::vector<std::string> subtags = plugin.tags(cfg);
      plugin_widths.push_back(subtags.size());
      for (const std::string& subtag : subtags)
        full.add_feature(name_feature(db, path, plugin.name + "." + subtag), false);
    }
    full.finish_names();
    for (size_t e = 0; e < entity_count; e++) {
      for (size_t j = 0; j < base_width; j++)
        full.set(e, j, base_width > 0 && !base.values.empty()
                           ? base.values[e * base_width + j]
                           : null_value());
      std::vector<CellValue> values;
      std::vector<std::optional<int64_t>> times;
      for (size_t i = spans[e].begin; i < spans[e].end; i++) {
        values.push_back(col.tuples[i].value);
        times.push_back(col.tuples[i].event_time);
      }
      size_t slot = base_width;
      for (size_t p = 0; p < plugins.size(); p++) {
        PluginEntityInput input{values, times, db.pool};
        std::vector<double> out = plugins[p].extract(input, cfg);
        if (out.size() != plugin_widths[p])
          throw FeatureError(FeatureErrorKind::plugin_width_mismatch,
                             "plugin \"" + plugins[p].name + "\" declared " +
                                 std::to_string(plugin_widths[p]) + " features but produced " +
                                 std::to_string(out.size()));
        for (double v : out) full.set(e, slot++, v);
      }
    }
    return std::move(full.vec);
  }

  return std::move(b.vec);
}

}  // namespace onebm
