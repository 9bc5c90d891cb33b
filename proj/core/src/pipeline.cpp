#include "onebm/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <utility>

#include "onebm/errors.hpp"
#include "onebm/ingest.hpp"
#include "onebm/time.hpp"

namespace onebm {

namespace {

std::string render_number(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string render_cell(const CellValue& v, const StringPool& pool) {
  switch (v.kind) {
    case CellKind::null:
      return "";
    case CellKind::number:
      return render_number(v.number);
    case CellKind::category:
    case CellKind::text:
      return std::string(pool.view(v.str_id));
    case CellKind::timestamp:
      return format_timestamp(v.ts);
  }
  return "";
}

CollectedType scalar_type_for(ColumnType type) {
  switch (type) {
    case ColumnType::numerical:
      return CollectedType::numeric_scalar;
    case ColumnType::categorical:
      return CollectedType::category_scalar;
    case ColumnType::text:
      return CollectedType::text_scalar;
    case ColumnType::timestamp:
      return CollectedType::timestamp_scalar;
  }
  return CollectedType::numeric_scalar;
}

// The declared order column as doubles (timestamps as epoch seconds); nulls
// sort before everything. nullopt when no usable order column exists.
std::optional<std::vector<double>> order_column_values(const Database& db,
                                                       std::vector<std::string>& warnings) {
  const LoadedTable& main = db.main();
  for (size_t c = 0; c < main.spec.columns.size(); ++c) {
    if (!main.spec.columns[c].has_role(ColumnRole::order)) continue;
    const ColumnData& col = main.columns[c];
    if (col.type != ColumnType::numerical && col.type != ColumnType::timestamp) {
      warnings.push_back("order column '" + main.spec.columns[c].name +
                         "' is not numerical or timestamp; drift detection disabled");
      return std::nullopt;
    }
    std::vector<double> out(main.row_count);
    for (size_t r = 0; r < main.row_count; ++r) {
      if (col.nulls[r]) {
        out[r] = -std::numeric_limits<double>::infinity();
      } else if (col.type == ColumnType::numerical) {
        out[r] = col.numbers[r];
      } else {
        out[r] = static_cast<double>(col.timestamps[r]);
      }
    }
    return out;
  }
  return std::nullopt;
}

void write_matrix_csv(const std::string& path, const Database& db, const FeatureMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OnebmError("cannot open output file: " + path);

  const LoadedTable& main = db.main();
  int pk = main.column_index(*main.spec.primary_key);

  std::vector<size_t> order(matrix.names.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return matrix.names[a] < matrix.names[b]; });

  out << csv_escape(main.spec.columns[pk].name);
  for (size_t j : order) out << ',' << csv_escape(matrix.names[j]);
  out << '\n';
  for (size_t r = 0; r < matrix.entity_count; ++r) {
    out << csv_escape(render_cell(main.columns[pk].cell(static_cast<uint32_t>(r)), db.pool));
    for (size_t j : order) {
      double v = matrix.columns[j][r];
      out << ',';
      if (!is_null(v)) out << render_number(v);
    }
    out << '\n';
  }
  if (!out) throw OnebmError("failed writing output file: " + path);
}

void write_report_csv(const std::string& path, const SelectionReport& report) {
  struct Row {
    std::string name;
    std::string reason;
    std::string statistic;
  };
  std::vector<Row> rows;
  rows.reserve(report.kept.size() + report.removed.size());
  for (const std::string& name : report.kept) rows.push_back({name, "kept", ""});
  for (const Removal& r : report.removed)
    rows.push_back({r.name, r.reason, r.has_statistic ? render_number(r.statistic) : ""});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.name < b.name; });

  std::ofstream out(path, std::ios::binary);
  if (!out) throw OnebmError("cannot open report file: " + path);
  out << "feature,reason,statistic\n";
  for (const Row& r : rows)
    out << csv_escape(r.name) << ',' << csv_escape(r.reason) << ',' << r.statistic << '\n';
  if (!out) throw OnebmError("failed writing report file: " + path);
}

}  // namespace

FeatureMatrix assemble_matrix(const std::vector<FeatureVector>& vectors, size_t entity_count) {
  FeatureMatrix matrix;
  matrix.entity_count = entity_count;
  std::set<std::string> seen;
  for (const FeatureVector& vec : vectors) {
    std::vector<size_t> order(vec.names.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return vec.names[a] < vec.names[b]; });
    for (size_t j : order) {
      if (!seen.insert(vec.names[j]).second)
        throw FeatureError(FeatureErrorKind::name_collision,
                           "feature name collision: " + vec.names[j]);
      std::vector<double> column(entity_count, vec.zero_fill[j] ? 0.0 : null_value());
      size_t filled = std::min(entity_count, vec.entity_count);
      for (size_t e = 0; e < filled; ++e) column[e] = vec.at(e, j);
      matrix.names.push_back(vec.names[j]);
      matrix.columns.push_back(std::move(column));
    }
  }
  return matrix;
}

std::vector<CollectedColumn> main_scalar_columns(const Database& db) {
  const LoadedTable& main = db.main();
  std::optional<std::string> cutoff = resolve_cutoff_column(main.spec);
  std::vector<CollectedColumn> out;
  for (size_t c = 0; c < main.spec.columns.size(); ++c) {
    const ColumnSpec& spec = main.spec.columns[c];
    if (spec.has_role(ColumnRole::target)) continue;
    if (cutoff && spec.name == *cutoff) continue;
    CollectedColumn col;
    col.path.collected_column = static_cast<int>(c);
    col.ctype = scalar_type_for(main.columns[c].type);
    col.tuples.reserve(main.row_count);
    for (size_t r = 0; r < main.row_count; ++r) {
      RelationalTuple t;
      t.entity_row = static_cast<uint32_t>(r);
      t.value = main.columns[c].cell(static_cast<uint32_t>(r));
      col.tuples.push_back(std::move(t));
    }
    out.push_back(std::move(col));
  }
  return out;
}

std::string report_path_for(const std::string& output_path) {
  std::filesystem::path p(output_path);
  std::filesystem::path r = p.parent_path() / (p.stem().string() + ".report.csv");
  return r.string();
}

PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream& log) {
  PipelineResult result;
  auto warn = [&](std::string msg) {
    log << "warning: " << msg << '\n';
    result.warnings.push_back(std::move(msg));
  };

  Database db = load_database(cfg.schema_path, cfg.data_dir);
  for (const std::string& w : db.warnings) warn(w);
  result.rows = db.main().row_count;

  std::optional<TargetColumn> target = resolve_target(db);
  if (!target)
    warn("no target column declared; target-aware transforms and statistical selection disabled");

  PathPlan plan = enumerate_paths(db, cfg.max_depth, cfg.mode);

  if (cfg.explain_only) {
    log << plan_listing(db, plan);
    CollectStats stats = dfs_collect(plan, db, cfg.policy, [](CollectedColumn&&) {});
    for (const PathStats& ps : stats.per_path) {
      log << "# " << ps.path << " :: tuples=" << ps.tuple_count
          << " estimate=" << ps.estimated_size << " ratio=" << render_number(ps.sampling_ratio);
      if (!ps.error.empty()) log << " :: error=" << ps.error;
      log << '\n';
    }
    return result;
  }

  const TargetColumn* target_ptr = target ? &*target : nullptr;
  std::vector<FeatureVector> vectors;
  for (const CollectedColumn& col : main_scalar_columns(db)) {
    try {
      vectors.push_back(transform(col, db, target_ptr, cfg.transform_cfg));
    } catch (const FeatureError&) {
      throw;  // misconfiguration, not a data problem
    } catch (const std::exception& e) {
      warn("skipped main column '" + db.main().spec.columns[col.path.collected_column].name +
           "': " + e.what());
    }
  }
  CollectStats stats = dfs_collect(plan, db, cfg.policy, [&](CollectedColumn&& col) {
    std::string rendered = describe_path(db, col.path);
    try {
      vectors.push_back(transform(col, db, target_ptr, cfg.transform_cfg));
    } catch (const FeatureError&) {
      throw;
    } catch (const std::exception& e) {
      warn("skipped path " + rendered + ": " + e.what());
    }
  });
  for (const PathStats& ps : stats.per_path)
    if (!ps.error.empty()) warn("skipped path " + ps.path + ": " + ps.error);

  FeatureMatrix matrix = assemble_matrix(vectors, db.main().row_count);
  std::vector<std::string> order_warnings;
  std::optional<std::vector<double>> order = order_column_values(db, order_warnings);
  for (std::string& w : order_warnings) warn(std::move(w));

  SelectionOutcome outcome =
      select(std::move(matrix), target_ptr, order ? &*order : nullptr, cfg.selection_cfg);
  result.features = outcome.matrix.names.size();

  write_matrix_csv(cfg.output_path, db, outcome.matrix);
  if (cfg.emit_report) write_report_csv(report_path_for(cfg.output_path), outcome.report);
  return result;
}

}  // namespace onebm
