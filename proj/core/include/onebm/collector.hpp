#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "onebm/database.hpp"
#include "onebm/path_enum.hpp"

namespace onebm {

// What a joining path yields per entity, before transformation.
enum class CollectedType : uint8_t {
  numeric_scalar,
  category_scalar,
  text_scalar,
  timestamp_scalar,
  number_multiset,
  item_multiset,
  text_set,
  time_series,
  sequence,
};

std::string to_string(CollectedType type);

// One collected leaf: the entity it belongs to, the join rows at intermediate
// depths (group_ids, one per hop except the last), the value, and the event
// time taken from the deepest event_time column on the path.
struct RelationalTuple {
  uint32_t entity_row = 0;
  std::vector<uint32_t> group_ids;
  CellValue value = CellValue::null_value();
  std::optional<int64_t> event_time;
};

struct CollectedColumn {
  JoiningPath path;
  CollectedType ctype = CollectedType::number_multiset;
  std::vector<RelationalTuple> tuples;  // contiguous by entity, main row order
};

struct SamplingPolicy {
  uint64_t max_joined_size = 10'000'000;
  uint64_t seed = 0;
};

struct PathStats {
  std::string path;             // rendered path line
  uint64_t tuple_count = 0;     // emitted tuples after sampling and cutoff
  uint64_t estimated_size = 0;  // hop-composed joined-size estimate
  double sampling_ratio = 1.0;  // product of per-hop retention ratios
  std::string error;            // non-empty when the path was skipped
};

struct CollectStats {
  size_t max_cache_size = 0;  // peak number of cached join indices
  std::vector<PathStats> per_path;
};

// Streams one CollectedColumn per plan entry, in plan order, reusing cached
// join indices across paths that share a hop prefix. The cache holds at most
// max_depth entries at any time. Joined-size estimates beyond
// policy.max_joined_size trigger per-entity subsampling of the affected hop.
// Tuples with an event time at or past their entity's cutoff are dropped.
// Per-path failures are recorded in the stats and do not abort the stream.
CollectStats dfs_collect(const PathPlan& plan, const Database& db, const SamplingPolicy& policy,
                         const std::function<void(CollectedColumn&&)>& sink);

// Values of one entity grouped by join ancestry: one group per distinct
// group_ids prefix (a single group holding everything at depth 0).
using GroupedValues = std::vector<std::vector<CellValue>>;

// Grouped leaves per main-table row. Depth 0 gives every entity exactly one
// (possibly empty) group; depth d > 0 gives one group per distinct ancestry
// prefix of length d, in first-appearance order.
std::vector<GroupedValues> group_by(const CollectedColumn& col, size_t main_row_count, int depth);

// Keeps tuples whose event_time is strictly before their entity's cutoff.
// Tuples without an event time, and entities without a cutoff, pass through.
std::vector<RelationalTuple> apply_cutoff_filter(
    std::vector<RelationalTuple> tuples,
    const std::vector<std::optional<int64_t>>& cutoff_by_entity);

// Predicted row count of a join between two key histograms: sum over shared
// keys of the two frequencies' product.
uint64_t estimate_join_size(const std::unordered_map<uint64_t, uint64_t>& left,
                            const std::unordered_map<uint64_t, uint64_t>& right);

// Per-entity stratified subsampling. Identity when estimated_size fits the
// cap; otherwise each entity keeps max(1, ceil(r * n_e)) tuples where
// r = cap / estimated_size — the most recent ones when has_time, else a
// seeded uniform draw. Surviving tuples keep their input order.
std::vector<RelationalTuple> sample_tuples(std::vector<RelationalTuple> tuples,
                                           uint64_t estimated_size, const SamplingPolicy& policy,
                                           bool has_time);

CollectedType identify_collected_type(PathKind kind, ColumnType ctype, bool has_time_on_path);

// Deepest table position (0 = main) on the path carrying an event_time
// column, or -1 when there is none.
int event_time_source(const Database& db, const JoiningPath& path);

// Cutoff timestamps per main row, resolved from the main table's cutoff
// column; entities with a null cutoff get nullopt (no filtering).
std::vector<std::optional<int64_t>> cutoff_by_entity(const Database& db);

}  // namespace onebm
