#include "onebm/path_enum.hpp"

#include <deque>
#include <unordered_set>

#include "onebm/errors.hpp"

namespace onebm {

std::string to_string(TraversalMode mode) {
  return mode == TraversalMode::forward_only ? "forward-only" : "full";
}

TraversalMode traversal_mode_from_string(const std::string& s) {
  if (s == "forward-only" || s == "forward_only") return TraversalMode::forward_only;
  if (s == "full") return TraversalMode::full;
  throw SchemaError(SchemaErrorKind::invalid_role, "unknown traversal mode \"" + s + "\"");
}

NodeDepths compute_node_depths(const Database& db) {
  NodeDepths depths(db.tables.size(), -1);
  depths[size_t(db.main_table)] = 0;
  std::deque<int> frontier{db.main_table};
  while (!frontier.empty()) {
    int at = frontier.front();
    frontier.pop_front();
    for (const Relation& rel : db.schema.relations) {
      int lt = db.schema.table_index(rel.left_table);
      int rt = db.schema.table_index(rel.right_table);
      for (int next : {lt == at ? rt : -1, rt == at ? lt : -1}) {
        if (next >= 0 && depths[size_t(next)] < 0) {
          depths[size_t(next)] = depths[size_t(at)] + 1;
          frontier.push_back(next);
        }
      }
    }
  }
  return depths;
}

bool is_forward_hop(int from_depth, int to_depth) { return from_depth < to_depth; }

namespace {

std::string path_key(const JoiningPath& path) {
  std::string key;
  for (const PathHop& hop : path.hops) {
    key += std::to_string(hop.relation);
    key += hop.from_left ? 'L' : 'R';
  }
  key += '#';
  key += std::to_string(path.collected_column);
  return key;
}

struct Enumerator {
  const Database& db;
  const NodeDepths& depths;
  int max_depth;
  TraversalMode mode;
  PathPlan& plan;
  std::vector<PathHop> hops;
  std::vector<bool> visited;
  std::unordered_set<std::string> seen;

  void emit_columns(int table_index) {
    if (hops.empty()) return;  // the main table's own columns are not paths
    const LoadedTable& table = db.table(table_index);
    int terminal_key = db.hop_dest_column(hops.back());
    for (size_t c = 0; c < table.spec.columns.size(); c++) {
      if (int(c) == terminal_key) continue;
      JoiningPath path{hops, int(c)};
      // Only canonical paths survive; a reducible path duplicates the
      // information of its (also enumerated) canonical form.
      if (canonicalize_path(db, path) != path) continue;
      if (!seen.insert(path_key(path)).second) continue;
      plan.paths.push_back(std::move(path));
    }
  }

  void visit(int table_index) {
    emit_columns(table_index);
    if (int(hops.size()) >= max_depth) return;
    for (size_t r = 0; r < db.schema.relations.size(); r++) {
      const Relation& rel = db.schema.relations[r];
      int lt = db.schema.table_index(rel.left_table);
      int rt = db.schema.table_index(rel.right_table);
      for (bool from_left : {true, false}) {
        int src = from_left ? lt : rt;
        int dst = from_left ? rt : lt;
        if (src != table_index || visited[size_t(dst)]) continue;
        if (mode == TraversalMode::forward_only &&
            !is_forward_hop(depths[size_t(src)], depths[size_t(dst)]))
          continue;
        hops.push_back(PathHop{int(r), from_left});
        visited[size_t(dst)] = true;
        visit(dst);
        visited[size_t(dst)] = false;
        hops.pop_back();
      }
    }
  }
};

}  // namespace

PathPlan enumerate_paths(const Database& db, int max_depth, TraversalMode mode) {
  PathPlan plan;
  plan.mode = mode;
  plan.max_depth = max_depth;
  NodeDepths depths = compute_node_depths(db);
  Enumerator e{db, depths, max_depth, mode, plan, {}, std::vector<bool>(db.tables.size(), false),
               {}};
  e.visited[size_t(db.main_table)] = true;
  e.visit(db.main_table);
  return plan;
}

std::string plan_listing(const Database& db, const PathPlan& plan) {
  std::string out;
  for (const JoiningPath& path : plan.paths) {
    out += describe_path(db, path);
    out += '\n';
  }
  return out;
}

}  // namespace onebm
