#include "onebm/collector.hpp"

#include <algorithm>
#include <cmath>

#include "onebm/errors.hpp"
#include "onebm/ingest.hpp"
#include "onebm/rng.hpp"

namespace onebm {

std::string to_string(CollectedType type) {
  switch (type) {
    case CollectedType::numeric_scalar:
      return "numeric_scalar";
    case CollectedType::category_scalar:
      return "category_scalar";
    case CollectedType::text_scalar:
      return "text_scalar";
    case CollectedType::timestamp_scalar:
      return "timestamp_scalar";
    case CollectedType::number_multiset:
      return "number_multiset";
    case CollectedType::item_multiset:
      return "item_multiset";
    case CollectedType::text_set:
      return "text_set";
    case CollectedType::time_series:
      return "time_series";
    case CollectedType::sequence:
      return "sequence";
  }
  return "number_multiset";
}

namespace {

int event_column(const LoadedTable& table) {
  for (size_t c = 0; c < table.spec.columns.size(); c++)
    if (table.spec.columns[c].has_role(ColumnRole::event_time)) return int(c);
  return -1;
}

uint64_t chain_seed(uint64_t a, uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

// Picks `budget` of `n` local positions, returned in ascending order so the
// survivors keep their source order. With `times` present the most recent
// win (null time = oldest; ties prefer later positions); otherwise the draw
// is uniform without replacement.
std::vector<uint32_t> select_positions(size_t n, size_t budget,
                                       const std::vector<std::optional<int64_t>>* times, Rng& rng) {
  std::vector<uint32_t> positions(n);
  for (size_t i = 0; i < n; i++) positions[i] = uint32_t(i);
  if (budget >= n) return positions;

  if (times) {
    std::sort(positions.begin(), positions.end(), [&](uint32_t a, uint32_t b) {
      const auto& ta = (*times)[a];
      const auto& tb = (*times)[b];
      if (ta.has_value() != tb.has_value()) return ta.has_value();
      if (ta && tb && *ta != *tb) return *ta > *tb;
      return a > b;
    });
  } else {
    for (size_t i = 0; i < budget; i++) {
      size_t j = i + size_t(rng.below(uint64_t(n - i)));
      std::swap(positions[i], positions[j]);
    }
  }
  positions.resize(budget);
  std::sort(positions.begin(), positions.end());
  return positions;
}

size_t entity_budget(double ratio, size_t n) {
  return std::max<size_t>(1, size_t(std::ceil(ratio * double(n))));
}

// Cached join result for one hop prefix: per match, the entity row and the
// visited row at every depth so far (stride = depth). Only row indices are
// stored, never attribute data.
struct JoinIndex {
  int depth = 0;
  std::vector<uint32_t> entities;
  std::vector<uint32_t> rows;
  uint64_t prefix_hash = 0;
  uint64_t estimate = 0;  // joined-size estimate of the extension that built this
  double ratio = 1.0;     // cumulative retention after per-hop subsampling
};

// Event time for one match of `index`, read from the path's deepest
// event_time table at position `source` (0 = the main table itself).
std::optional<int64_t> match_event_time(const Database& db, const std::vector<int>& path_tables,
                                        int source, uint32_t entity, const uint32_t* ancestry) {
  if (source < 0) return std::nullopt;
  const LoadedTable& table = db.table(path_tables[size_t(source)]);
  const ColumnData& col = table.columns[size_t(event_column(table))];
  uint32_t row = source == 0 ? entity : ancestry[source - 1];
  if (col.nulls[row]) return std::nullopt;
  return col.timestamps[row];
}

// Joins one more hop onto `parent` (nullptr = start from the main table),
// subsampling per entity when the exact size estimate exceeds the cap.
JoinIndex extend_index(const Database& db, const JoinIndex* parent, const PathHop& hop,
                       const std::vector<int>& path_tables, const SamplingPolicy& policy) {
  int src_table = db.hop_source_table(hop);
  int src_col = db.hop_source_column(hop);
  int dst_table = db.hop_dest_table(hop);
  int dst_col = db.hop_dest_column(hop);
  const ColumnData& src_data = db.table(src_table).columns[size_t(src_col)];
  const KeyIndex& dst_index = db.key_index(dst_table, dst_col);

  int parent_depth = parent ? parent->depth : 0;
  size_t parent_count = parent ? parent->entities.size() : db.main().row_count;

  auto parent_entity = [&](size_t i) {
    return parent ? parent->entities[i] : uint32_t(i);
  };
  auto source_row = [&](size_t i) {
    return parent ? parent->rows[i * size_t(parent_depth) + size_t(parent_depth) - 1]
                  : uint32_t(i);
  };
  auto matches_of = [&](size_t i) -> const std::vector<uint32_t>* {
    uint32_t row = source_row(i);
    if (src_data.nulls[row]) return nullptr;
    auto it = dst_index.find(encode_key(src_data.cell(row)));
    return it == dst_index.end() ? nullptr : &it->second;
  };

  uint64_t estimate = 0;
  for (size_t i = 0; i < parent_count; i++) {
    if (const auto* m = matches_of(i)) estimate += m->size();
  }
  double ratio = estimate > policy.max_joined_size
                     ? double(policy.max_joined_size) / double(estimate)
                     : 1.0;

  JoinIndex out;
  out.depth = parent_depth + 1;
  out.prefix_hash = chain_seed(parent ? parent->prefix_hash : 0x9044f7ab7312c0ddULL,
                               uint64_t(hop.relation) * 2 + (hop.from_left ? 1 : 0));
  out.estimate = estimate;
  out.ratio = (parent ? parent->ratio : 1.0) * ratio;

  // The deepest event_time table visible at the new depth orders recency.
  int event_source = -1;
  for (int j = out.depth; j >= 0; j--) {
    if (event_column(db.table(path_tables[size_t(j)])) >= 0) {
      event_source = j;
      break;
    }
  }

  size_t stride = size_t(out.depth);
  std::vector<uint32_t> seg_entities;  // per-entity staging
  std::vector<uint32_t> seg_rows;
  size_t begin = 0;
  while (begin < parent_count) {
    size_t end = begin + 1;
    while (end < parent_count && parent_entity(end) == parent_entity(begin)) end++;
    uint32_t entity = parent_entity(begin);

    seg_entities.clear();
    seg_rows.clear();
    for (size_t i = begin; i < end; i++) {
      const auto* m = matches_of(i);
      if (!m) continue;
      for (uint32_t dst_row : *m) {
        seg_entities.push_back(entity);
        if (parent) {
          const uint32_t* ancestry = &parent->rows[i * size_t(parent_depth)];
          seg_rows.insert(seg_rows.end(), ancestry, ancestry + parent_depth);
        }
        seg_rows.push_back(dst_row);
      }
    }

    size_t n = seg_entities.size();
    size_t budget = ratio < 1.0 && n > 0 ? entity_budget(ratio, n) : n;
    if (budget >= n) {
      out.entities.insert(out.entities.end(), seg_entities.begin(), seg_entities.end());
      out.rows.insert(out.rows.end(), seg_rows.begin(), seg_rows.end());
    } else {
      std::vector<std::optional<int64_t>> times;
      if (event_source >= 0) {
        times.reserve(n);
        for (size_t i = 0; i < n; i++)
          times.push_back(
              match_event_time(db, path_tables, event_source, entity, &seg_rows[i * stride]));
      }
      Rng rng(chain_seed(chain_seed(policy.seed, out.prefix_hash), entity));
      std::vector<uint32_t> keep =
          select_positions(n, budget, event_source >= 0 ? &times : nullptr, rng);
      for (uint32_t pos : keep) {
        out.entities.push_back(entity);
        const uint32_t* r = &seg_rows[size_t(pos) * stride];
        out.rows.insert(out.rows.end(), r, r + stride);
      }
    }
    begin = end;
  }
  return out;
}

}  // namespace

int event_time_source(const Database& db, const JoiningPath& path) {
  std::vector<int> tables = db.path_tables(path);
  for (int j = int(tables.size()) - 1; j >= 0; j--) {
    if (event_column(db.table(tables[size_t(j)])) >= 0) return j;
  }
  return -1;
}

std::vector<std::optional<int64_t>> cutoff_by_entity(const Database& db) {
  const LoadedTable& main = db.main();
  std::vector<std::optional<int64_t>> out(main.row_count);
  std::optional<std::string> name = resolve_cutoff_column(main.spec);
  if (!name) return out;
  int col_idx = main.column_index(*name);
  const ColumnData& col = main.columns[size_t(col_idx)];
  for (size_t row = 0; row < main.row_count; row++) {
    if (!col.nulls[row]) out[row] = col.timestamps[row];
  }
  return out;
}

CollectedType identify_collected_type(PathKind kind, ColumnType ctype, bool has_time_on_path) {
  if (kind == PathKind::one_to_one) {
    switch (ctype) {
      case ColumnType::numerical:
        return CollectedType::numeric_scalar;
      case ColumnType::categorical:
        return CollectedType::category_scalar;
      case ColumnType::text:
        return CollectedType::text_scalar;
      case ColumnType::timestamp:
        return CollectedType::timestamp_scalar;
    }
  }
  switch (ctype) {
    case ColumnType::numerical:
    case ColumnType::timestamp:  // epoch seconds behave as numbers in bulk
      return has_time_on_path ? CollectedType::time_series : CollectedType::number_multiset;
    case ColumnType::categorical:
      return has_time_on_path ? CollectedType::sequence : CollectedType::item_multiset;
    case ColumnType::text:
      return CollectedType::text_set;
  }
  return CollectedType::number_multiset;
}

uint64_t estimate_join_size(const std::unordered_map<uint64_t, uint64_t>& left,
                            const std::unordered_map<uint64_t, uint64_t>& right) {
  const auto& small = left.size() <= right.size() ? left : right;
  const auto& large = left.size() <= right.size() ? right : left;
  uint64_t total = 0;
  for (const auto& [key, count] : small) {
    auto it = large.find(key);
    if (it != large.end()) total += count * it->second;
  }
  return total;
}

std::vector<RelationalTuple> apply_cutoff_filter(
    std::vector<RelationalTuple> tuples,
    const std::vector<std::optional<int64_t>>& cutoff_by_entity) {
  std::vector<RelationalTuple> kept;
  kept.reserve(tuples.size());
  for (RelationalTuple& t : tuples) {
    const std::optional<int64_t>& cutoff =
        t.entity_row < cutoff_by_entity.size() ? cutoff_by_entity[t.entity_row] : std::nullopt;
    if (!cutoff || !t.event_time || *t.event_time < *cutoff) kept.push_back(std::move(t));
  }
  return kept;
}

std::vector<RelationalTuple> sample_tuples(std::vector<RelationalTuple> tuples,
                                           uint64_t estimated_size, const SamplingPolicy& policy,
                                           bool has_time) {
  if (estimated_size <= policy.max_joined_size) return tuples;
  double ratio = double(policy.max_joined_size) / double(estimated_size);

  std::vector<RelationalTuple> out;
  out.reserve(size_t(std::ceil(ratio * double(tuples.size()))) + 1);
  size_t begin = 0;
  while (begin < tuples.size()) {
    size_t end = begin + 1;
    while (end < tuples.size() && tuples[end].entity_row == tuples[begin].entity_row) end++;
    size_t n = end - begin;
    size_t budget = entity_budget(ratio, n);
    if (budget >= n) {
      for (size_t i = begin; i < end; i++) out.push_back(std::move(tuples[i]));
    } else {
      std::vector<std::optional<int64_t>> times;
      if (has_time) {
        times.reserve(n);
        for (size_t i = begin; i < end; i++) times.push_back(tuples[i].event_time);
      }
      Rng rng(chain_seed(policy.seed, tuples[begin].entity_row));
      for (uint32_t pos : select_positions(n, budget, has_time ? &times : nullptr, rng))
        out.push_back(std::move(tuples[begin + pos]));
    }
    begin = end;
  }
  return out;
}

std::vector<GroupedValues> group_by(const CollectedColumn& col, size_t main_row_count, int depth) {
  int max_group_depth = int(col.path.hops.size()) - 1;
  if (depth < 0 || depth > max_group_depth)
    throw FeatureError(FeatureErrorKind::depth_out_of_range,
                       "group depth " + std::to_string(depth) + " exceeds " +
                           std::to_string(max_group_depth) + " for a " +
                           std::to_string(col.path.hops.size()) + "-hop path");

  std::vector<GroupedValues> out(main_row_count);
  if (depth == 0) {
    for (auto& groups : out) groups.emplace_back();
    for (const RelationalTuple& t : col.tuples) out[t.entity_row][0].push_back(t.value);
    return out;
  }

  // Tuples arrive grouped by ancestry, so a change in the length-`depth`
  // prefix of group_ids opens a new group.
  const RelationalTuple* last = nullptr;
  for (const RelationalTuple& t : col.tuples) {
    bool new_group = !last || last->entity_row != t.entity_row ||
                     !std::equal(last->group_ids.begin(), last->group_ids.begin() + depth,
                                 t.group_ids.begin());
    if (new_group) out[t.entity_row].emplace_back();
    out[t.entity_row].back().push_back(t.value);
    last = &t;
  }
  return out;
}

CollectStats dfs_collect(const PathPlan& plan, const Database& db, const SamplingPolicy& policy,
                         const std::function<void(CollectedColumn&&)>& sink) {
  CollectStats stats;
  std::vector<std::optional<int64_t>> cutoffs = cutoff_by_entity(db);

  struct StackEntry {
    PathHop hop;
    JoinIndex index;
  };
  std::vector<StackEntry> stack;

  for (const JoiningPath& path : plan.paths) {
    PathStats pstat;
    pstat.path = describe_path(db, path);
    try {
      size_t common = 0;
      while (common < stack.size() && common < path.hops.size() &&
             stack[common].hop == path.hops[common])
        common++;
      stack.resize(common);  // abandon branches the plan has moved past

      std::vector<int> tables = db.path_tables(path);
      for (size_t i = common; i < path.hops.size(); i++) {
        const JoinIndex* parent = stack.empty() ? nullptr : &stack.back().index;
        std::vector<int> prefix_tables(tables.begin(), tables.begin() + long(i) + 2);
        stack.push_back(
            StackEntry{path.hops[i], extend_index(db, parent, path.hops[i], prefix_tables, policy)});
        stats.max_cache_size = std::max(stats.max_cache_size, stack.size());
      }

      const JoinIndex& index = stack.back().index;
      size_t hops = path.hops.size();
      int terminal = tables.back();
      const ColumnData& collected = db.table(terminal).columns[size_t(path.collected_column)];
      int event_source = event_time_source(db, path);

      std::vector<RelationalTuple> tuples;
      tuples.reserve(index.entities.size());
      for (size_t i = 0; i < index.entities.size(); i++) {
        const uint32_t* ancestry = &index.rows[i * hops];
        RelationalTuple t;
        t.entity_row = index.entities[i];
        t.group_ids.assign(ancestry, ancestry + hops - 1);
        t.value = collected.cell(ancestry[hops - 1]);
        t.event_time = match_event_time(db, tables, event_source, t.entity_row, ancestry);
        tuples.push_back(std::move(t));
      }
      tuples = apply_cutoff_filter(std::move(tuples), cutoffs);

      CollectedColumn out;
      out.path = path;
      out.ctype = identify_collected_type(classify_path(db, path), collected.type,
                                          event_source >= 0);
      out.tuples = std::move(tuples);

      pstat.tuple_count = out.tuples.size();
      pstat.estimated_size = index.estimate;
      pstat.sampling_ratio = index.ratio;
      sink(std::move(out));
    } catch (const std::exception& e) {
      pstat.error = e.what();
    }
    stats.per_path.push_back(std::move(pstat));
  }
  return stats;
}

}  // namespace onebm
