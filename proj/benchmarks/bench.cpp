// Microbenchmarks for the hot paths: joining-path collection, subsampling,
// the series transforms, and statistical selection.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <string>
#include <vector>

#include "onebm/collector.hpp"
#include "onebm/database.hpp"
#include "onebm/ingest.hpp"
#include "onebm/rng.hpp"
#include "onebm/selection.hpp"
#include "onebm/transforms.hpp"

using namespace onebm;

namespace {

ColumnData number_column(std::vector<double> values) {
  ColumnData col;
  col.type = ColumnType::numerical;
  col.nulls.assign(values.size(), false);
  col.numbers = std::move(values);
  return col;
}

ColumnData timestamp_column(std::vector<int64_t> values) {
  ColumnData col;
  col.type = ColumnType::timestamp;
  col.nulls.assign(values.size(), false);
  col.timestamps = std::move(values);
  return col;
}

// main(id) 1:N child(cid, v, et): `fanout` child rows per main row.
Database join_database(size_t entities, size_t fanout) {
  DatabaseSchema schema;
  schema.main_table = "main";
  schema.tables = {
      TableSpec{"main", "main.csv", "id", {{"id", ColumnType::numerical, {}}}},
      TableSpec{"child",
                "child.csv",
                std::nullopt,
                {{"cid", ColumnType::numerical, {}},
                 {"v", ColumnType::numerical, {}},
                 {"et", ColumnType::timestamp, {ColumnRole::event_time}}}},
  };
  schema.relations = {{"main", "id", "child", "cid", "id"}};

  std::vector<double> ids;
  for (size_t e = 0; e < entities; e++) ids.push_back(double(e));
  std::vector<double> cids, values;
  std::vector<int64_t> times;
  Rng rng(7);
  for (size_t e = 0; e < entities; e++)
    for (size_t i = 0; i < fanout; i++) {
      cids.push_back(double(e));
      values.push_back(double(rng.below(100000)));
      times.push_back(int64_t(1480000000 + i * 60));
    }

  std::vector<LoadedTable> tables(2);
  tables[0].spec = schema.tables[0];
  tables[0].row_count = entities;
  tables[0].columns = {number_column(std::move(ids))};
  tables[1].spec = schema.tables[1];
  tables[1].row_count = entities * fanout;
  tables[1].columns = {number_column(std::move(cids)), number_column(std::move(values)),
                       timestamp_column(std::move(times))};
  return validate_schema(std::move(schema), std::move(tables), StringPool{});
}

void bm_collect(benchmark::State& state) {
  Database db = join_database(size_t(state.range(0)), size_t(state.range(1)));
  PathPlan plan = enumerate_paths(db, 1, TraversalMode::forward_only);
  SamplingPolicy policy;
  for (auto _ : state) {
    size_t tuples = 0;
    dfs_collect(plan, db, policy,
                [&](CollectedColumn&& col) { tuples += col.tuples.size(); });
    benchmark::DoNotOptimize(tuples);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}

void bm_sample_tuples(benchmark::State& state) {
  size_t n = size_t(state.range(0));
  std::vector<RelationalTuple> tuples(n);
  Rng rng(11);
  for (size_t i = 0; i < n; i++) {
    tuples[i].entity_row = uint32_t(i % 1000);
    tuples[i].value = CellValue::from_number(double(i));
    tuples[i].event_time = int64_t(i);
  }
  SamplingPolicy policy;
  policy.max_joined_size = n / 10;
  for (auto _ : state) {
    auto copy = tuples;
    auto kept = sample_tuples(std::move(copy), n, policy, true);
    benchmark::DoNotOptimize(kept.size());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_time_series(benchmark::State& state) {
  size_t n = size_t(state.range(0));
  Rng rng(13);
  std::vector<double> series;
  for (size_t i = 0; i < n; i++) series.push_back(double(rng.below(10000)));
  TransformConfig cfg;
  for (auto _ : state) {
    auto feats = transform_time_series(series, cfg);
    benchmark::DoNotOptimize(feats.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void bm_selection(benchmark::State& state) {
  size_t rows = size_t(state.range(0)), cols = size_t(state.range(1));
  Rng rng(17);
  TargetColumn target;
  target.task = TargetColumn::Task::regression;
  for (size_t i = 0; i < rows; i++) {
    target.numeric.push_back(double(rng.below(1000)));
    target.is_train.push_back(true);
  }
  std::vector<double> order;
  for (size_t i = 0; i < rows; i++) order.push_back(double(i));

  FeatureMatrix matrix;
  matrix.entity_count = rows;
  for (size_t j = 0; j < cols; j++) {
    matrix.names.push_back("f" + std::to_string(j));
    std::vector<double> col;
    for (size_t i = 0; i < rows; i++)
      col.push_back(j % 3 == 0 ? target.numeric[i] + double(rng.below(50))
                               : double(rng.below(100000)));
    matrix.columns.push_back(std::move(col));
  }

  SelectionConfig cfg;
  for (auto _ : state) {
    FeatureMatrix copy = matrix;
    SelectionOutcome out = select(std::move(copy), &target, &order, cfg);
    benchmark::DoNotOptimize(out.matrix.names.size());
  }
  state.SetItemsProcessed(state.iterations() * rows * cols);
}

}  // namespace

BENCHMARK(bm_collect)->Args({1000, 50})->Args({1000, 500});
BENCHMARK(bm_sample_tuples)->Arg(100000)->Arg(1000000);
BENCHMARK(bm_time_series)->Arg(64)->Arg(1024)->Arg(8192);
BENCHMARK(bm_selection)->Args({2000, 50})->Args({5000, 200});

BENCHMARK_MAIN();
