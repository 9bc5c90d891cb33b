#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "onebm/cell.hpp"
#include "onebm/schema.hpp"
#include "onebm/table.hpp"

namespace onebm {

enum class EdgeKind : uint8_t { one_to_one, one_to_many, many_to_one, many_to_many };
enum class PathKind : uint8_t { one_to_one, multiple };

std::string to_string(EdgeKind kind);

// One traversal step: a schema relation plus the direction it is crossed in.
struct PathHop {
  int relation = -1;
  bool from_left = true;  // true: left_table -> right_table

  bool operator==(const PathHop&) const = default;
};

// A joining path from the main table: hop sequence plus the collected column
// (index into the terminal table's columns). An empty hop list denotes the
// main table itself, used for its own scalar columns.
struct JoiningPath {
  std::vector<PathHop> hops;
  int collected_column = -1;

  bool operator==(const JoiningPath&) const = default;
};

// Rows per encoded key value for one join column.
using KeyIndex = std::unordered_map<uint64_t, std::vector<uint32_t>>;

// A schema plus loaded tables whose declared invariants have been verified.
class Database {
 public:
  DatabaseSchema schema;
  std::vector<LoadedTable> tables;
  StringPool pool;
  int main_table = -1;
  std::vector<std::string> warnings;

  const LoadedTable& table(int index) const { return tables[size_t(index)]; }
  const LoadedTable& main() const { return tables[size_t(main_table)]; }

  // Prebuilt index for a relation endpoint column; throws if the column is
  // not a relation endpoint.
  const KeyIndex& key_index(int table_index, int column_index) const;

  // Source/destination table of a hop, and the join column on each side.
  int hop_source_table(const PathHop& hop) const;
  int hop_dest_table(const PathHop& hop) const;
  int hop_source_column(const PathHop& hop) const;
  int hop_dest_column(const PathHop& hop) const;

  // Table sequence visited by a path, starting at main (length hops+1).
  std::vector<int> path_tables(const JoiningPath& path) const;
  int terminal_table(const JoiningPath& path) const;

  friend Database validate_schema(DatabaseSchema schema, std::vector<LoadedTable> tables,
                                  StringPool pool);

 private:
  std::unordered_map<uint64_t, KeyIndex> key_indexes_;  // (table << 32) | column
};

// Verifies primary keys (unique, non-null), relation endpoint types, and the
// presence of a keyed main table; builds key indexes for relation columns.
// Connectivity problems are recorded as warnings, not errors.
Database validate_schema(DatabaseSchema schema, std::vector<LoadedTable> tables, StringPool pool);

EdgeKind classify_edge(const Database& db, const Relation& relation, bool from_left);
PathKind classify_path(const Database& db, const JoiningPath& path);

// Rewrites the path to its shortest equivalent form: a hop through an
// intermediate table entered and left on the same column elides when that
// column is the intermediate table's primary key, the exit hop lands on the
// next table's primary key, and the schema declares the direct relation.
// Repeats until no rewrite applies.
JoiningPath canonicalize_path(const Database& db, const JoiningPath& path);

// Human-readable rendering, e.g. "main-[TrainID]->delay :: Delay".
std::string describe_path(const Database& db, const JoiningPath& path);

}  // namespace onebm
