#pragma once

#include <string>
#include <vector>

#include "onebm/database.hpp"

namespace onebm {

enum class TraversalMode : uint8_t { forward_only, full };

std::string to_string(TraversalMode mode);
TraversalMode traversal_mode_from_string(const std::string& s);

// BFS hop distance from the main table per table index; -1 when unreachable.
using NodeDepths = std::vector<int>;

NodeDepths compute_node_depths(const Database& db);

// A hop is forward when it strictly increases BFS depth; equal-depth lateral
// hops count as backward.
bool is_forward_hop(int from_depth, int to_depth);

struct PathPlan {
  std::vector<JoiningPath> paths;  // DFS pre-order
  TraversalMode mode = TraversalMode::forward_only;
  int max_depth = 2;
};

// Enumerates every simple joining path from the main table with at most
// max_depth hops, expanded by each collectible column of the terminal table
// (the terminal hop's join key is never collected). DFS children follow
// schema declaration order: a table's columns first, then its relations.
// forward_only drops hops that do not strictly descend the BFS depths.
// Paths that are not their own canonical form are dropped — their canonical
// equivalent is always enumerated separately.
PathPlan enumerate_paths(const Database& db, int max_depth, TraversalMode mode);

// One line per path, terminated by '\n':
//   main-[key]->table-[key]->table :: column :: kind
std::string plan_listing(const Database& db, const PathPlan& plan);

}  // namespace onebm
