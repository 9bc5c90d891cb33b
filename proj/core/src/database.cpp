#include "onebm/database.hpp"

#include <algorithm>
#include <charconv>
#include <deque>

#include "onebm/errors.hpp"
#include "onebm/time.hpp"

namespace onebm {

std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::one_to_one:
      return "one_to_one";
    case EdgeKind::one_to_many:
      return "one_to_many";
    case EdgeKind::many_to_one:
      return "many_to_one";
    case EdgeKind::many_to_many:
      return "many_to_many";
  }
  return "many_to_many";
}

namespace {

uint64_t index_slot(int table_index, int column_index) {
  return (uint64_t(uint32_t(table_index)) << 32) | uint32_t(column_index);
}

// Renders a key value for diagnostics.
std::string render_key(const Database& db, const ColumnData& col, size_t row) {
  if (col.nulls[row]) return "<null>";
  switch (col.type) {
    case ColumnType::numerical: {
      char buf[32];
      auto res = std::to_chars(buf, buf + sizeof(buf), col.numbers[row]);
      return std::string(buf, res.ptr);
    }
    case ColumnType::timestamp:
      return format_timestamp(col.timestamps[row]);
    case ColumnType::categorical:
    case ColumnType::text:
      return std::string(db.pool.view(col.strings[row]));
  }
  return "?";
}

bool is_primary_key(const Database& db, int table_index, int column_index) {
  const TableSpec& spec = db.tables[size_t(table_index)].spec;
  return spec.primary_key && *spec.primary_key == spec.columns[size_t(column_index)].name;
}

}  // namespace

const KeyIndex& Database::key_index(int table_index, int column_index) const {
  auto it = key_indexes_.find(index_slot(table_index, column_index));
  if (it == key_indexes_.end())
    throw SchemaError(SchemaErrorKind::missing_column,
                      "no key index for " + tables[size_t(table_index)].spec.name + "." +
                          tables[size_t(table_index)].spec.columns[size_t(column_index)].name);
  return it->second;
}

int Database::hop_source_table(const PathHop& hop) const {
  const Relation& r = schema.relations[size_t(hop.relation)];
  return schema.table_index(hop.from_left ? r.left_table : r.right_table);
}

int Database::hop_dest_table(const PathHop& hop) const {
  const Relation& r = schema.relations[size_t(hop.relation)];
  return schema.table_index(hop.from_left ? r.right_table : r.left_table);
}

int Database::hop_source_column(const PathHop& hop) const {
  const Relation& r = schema.relations[size_t(hop.relation)];
  return tables[size_t(hop_source_table(hop))].column_index(hop.from_left ? r.left_column
                                                                          : r.right_column);
}

int Database::hop_dest_column(const PathHop& hop) const {
  const Relation& r = schema.relations[size_t(hop.relation)];
  return tables[size_t(hop_dest_table(hop))].column_index(hop.from_left ? r.right_column
                                                                        : r.left_column);
}

std::vector<int> Database::path_tables(const JoiningPath& path) const {
  std::vector<int> out;
  out.reserve(path.hops.size() + 1);
  out.push_back(main_table);
  for (const PathHop& hop : path.hops) out.push_back(hop_dest_table(hop));
  return out;
}

int Database::terminal_table(const JoiningPath& path) const {
  return path.hops.empty() ? main_table : hop_dest_table(path.hops.back());
}

Database validate_schema(DatabaseSchema schema, std::vector<LoadedTable> tables, StringPool pool) {
  Database db;
  db.schema = std::move(schema);
  db.tables = std::move(tables);
  db.pool = std::move(pool);
  db.main_table = db.schema.table_index(db.schema.main_table);
  if (db.main_table < 0)
    throw SchemaError(SchemaErrorKind::no_main_table,
                      "main table \"" + db.schema.main_table + "\" was not loaded");
  if (!db.main().spec.primary_key)
    throw SchemaError(SchemaErrorKind::no_main_table,
                      "main table \"" + db.schema.main_table + "\" has no primary key");

  // Primary keys must be unique and non-null.
  for (const LoadedTable& table : db.tables) {
    if (!table.spec.primary_key) continue;
    int col_idx = table.column_index(*table.spec.primary_key);
    const ColumnData& col = table.columns[size_t(col_idx)];
    std::unordered_map<uint64_t, size_t> seen;
    seen.reserve(table.row_count);
    for (size_t row = 0; row < table.row_count; row++) {
      if (col.nulls[row])
        throw SchemaError(SchemaErrorKind::null_key_value,
                          "table \"" + table.spec.name + "\": primary key \"" +
                              *table.spec.primary_key + "\" is null at row " +
                              std::to_string(row + 1));
      uint64_t key = encode_key(col.cell(row));
      auto [it, inserted] = seen.emplace(key, row);
      if (!inserted)
        throw SchemaError(SchemaErrorKind::duplicate_key_value,
                          "table \"" + table.spec.name + "\": primary key \"" +
                              *table.spec.primary_key + "\" value " + render_key(db, col, row) +
                              " occurs more than once");
    }
  }

  // Role invariants: target, cutoff_time and order appear at most once, on
  // the main table only; event_time at most once per table; temporal roles
  // require timestamp columns.
  int target_count = 0, cutoff_count = 0, order_count = 0;
  for (size_t t = 0; t < db.tables.size(); t++) {
    const LoadedTable& table = db.tables[t];
    int event_count = 0;
    for (const ColumnSpec& col : table.spec.columns) {
      for (ColumnRole role : col.roles) {
        bool main_only = role == ColumnRole::target || role == ColumnRole::cutoff_time ||
                         role == ColumnRole::order;
        if (main_only) {
          if (int(t) != db.main_table)
            throw SchemaError(SchemaErrorKind::invalid_role,
                              "column \"" + table.spec.name + "." + col.name + "\": role " +
                                  to_string(role) + " is only allowed on the main table");
          int& count = role == ColumnRole::target   ? target_count
                       : role == ColumnRole::cutoff_time ? cutoff_count
                                                         : order_count;
          if (++count > 1)
            throw SchemaError(SchemaErrorKind::invalid_role,
                              "role " + to_string(role) + " is declared more than once");
        }
        if (role == ColumnRole::event_time && ++event_count > 1)
          throw SchemaError(SchemaErrorKind::invalid_role,
                            "table \"" + table.spec.name + "\" declares event_time twice");
        if ((role == ColumnRole::cutoff_time || role == ColumnRole::event_time) &&
            col.type != ColumnType::timestamp)
          throw SchemaError(SchemaErrorKind::type_mismatch,
                            "column \"" + table.spec.name + "." + col.name + "\" has role " +
                                to_string(role) + " but is not a timestamp");
      }
    }
  }

  // Relation endpoints must exist and agree on type.
  for (const Relation& rel : db.schema.relations) {
    int lt = db.schema.table_index(rel.left_table);
    int rt = db.schema.table_index(rel.right_table);
    if (lt < 0 || rt < 0)
      throw SchemaError(SchemaErrorKind::missing_table,
                        "relation references unknown table \"" +
                            (lt < 0 ? rel.left_table : rel.right_table) + "\"");
    int lc = db.tables[size_t(lt)].column_index(rel.left_column);
    int rc = db.tables[size_t(rt)].column_index(rel.right_column);
    if (lc < 0 || rc < 0)
      throw SchemaError(SchemaErrorKind::missing_column,
                        "relation references unknown column \"" +
                            (lc < 0 ? rel.left_table + "." + rel.left_column
                                    : rel.right_table + "." + rel.right_column) +
                            "\"");
    ColumnType ltype = db.tables[size_t(lt)].columns[size_t(lc)].type;
    ColumnType rtype = db.tables[size_t(rt)].columns[size_t(rc)].type;
    if (ltype != rtype)
      throw SchemaError(SchemaErrorKind::type_mismatch,
                        "relation " + rel.left_table + "." + rel.left_column + " = " +
                            rel.right_table + "." + rel.right_column + " joins " +
                            std::string(to_string(ltype)) + " to " +
                            std::string(to_string(rtype)));

    // Build key indexes for both endpoints (idempotent across relations).
    for (auto [table_index, column_index] : {std::pair{lt, lc}, {rt, rc}}) {
      uint64_t slot = index_slot(table_index, column_index);
      if (db.key_indexes_.count(slot)) continue;
      KeyIndex index;
      const LoadedTable& table = db.tables[size_t(table_index)];
      const ColumnData& col = table.columns[size_t(column_index)];
      for (size_t row = 0; row < table.row_count; row++) {
        if (col.nulls[row]) continue;  // null keys never join
        index[encode_key(col.cell(row))].push_back(uint32_t(row));
      }
      db.key_indexes_.emplace(slot, std::move(index));
    }
  }

  // Tables unreachable from main cannot contribute features; warn, don't fail.
  std::vector<bool> reached(db.tables.size(), false);
  std::deque<int> frontier{db.main_table};
  reached[size_t(db.main_table)] = true;
  while (!frontier.empty()) {
    int at = frontier.front();
    frontier.pop_front();
    for (const Relation& rel : db.schema.relations) {
      int lt = db.schema.table_index(rel.left_table);
      int rt = db.schema.table_index(rel.right_table);
      for (int next : {lt == at ? rt : -1, rt == at ? lt : -1}) {
        if (next >= 0 && !reached[size_t(next)]) {
          reached[size_t(next)] = true;
          frontier.push_back(next);
        }
      }
    }
  }
  for (size_t t = 0; t < db.tables.size(); t++) {
    if (!reached[t])
      db.warnings.push_back("table \"" + db.tables[t].spec.name +
                            "\" is not connected to the main table and contributes no features");
  }
  return db;
}

EdgeKind classify_edge(const Database& db, const Relation& relation, bool from_left) {
  int lt = db.schema.table_index(relation.left_table);
  int rt = db.schema.table_index(relation.right_table);
  int lc = db.tables[size_t(lt)].column_index(relation.left_column);
  int rc = db.tables[size_t(rt)].column_index(relation.right_column);
  bool src_pk = from_left ? is_primary_key(db, lt, lc) : is_primary_key(db, rt, rc);
  bool dst_pk = from_left ? is_primary_key(db, rt, rc) : is_primary_key(db, lt, lc);
  if (src_pk && dst_pk) return EdgeKind::one_to_one;
  if (src_pk) return EdgeKind::one_to_many;
  if (dst_pk) return EdgeKind::many_to_one;
  return EdgeKind::many_to_many;
}

PathKind classify_path(const Database& db, const JoiningPath& path) {
  for (const PathHop& hop : path.hops) {
    EdgeKind kind = classify_edge(db, db.schema.relations[size_t(hop.relation)], hop.from_left);
    if (kind == EdgeKind::one_to_many || kind == EdgeKind::many_to_many)
      return PathKind::multiple;
  }
  return PathKind::one_to_one;
}

JoiningPath canonicalize_path(const Database& db, const JoiningPath& path) {
  JoiningPath current = path;
  bool changed = true;
  while (changed && current.hops.size() >= 2) {
    changed = false;
    for (size_t i = 0; i + 1 < current.hops.size(); i++) {
      const PathHop& in = current.hops[i];
      const PathHop& out = current.hops[i + 1];
      int mid = db.hop_dest_table(in);
      if (db.hop_source_column(out) != db.hop_dest_column(in)) continue;
      if (!is_primary_key(db, mid, db.hop_dest_column(in))) continue;
      int next = db.hop_dest_table(out);
      int next_col = db.hop_dest_column(out);
      if (!is_primary_key(db, next, next_col)) continue;

      // The direct relation must exist in the schema to stand in for the pair.
      int src = db.hop_source_table(in);
      int src_col = db.hop_source_column(in);
      const std::string& src_col_name = db.tables[size_t(src)].spec.columns[size_t(src_col)].name;
      const std::string& next_col_name =
          db.tables[size_t(next)].spec.columns[size_t(next_col)].name;
      int direct = -1;
      bool direct_from_left = true;
      for (size_t r = 0; r < db.schema.relations.size(); r++) {
        const Relation& rel = db.schema.relations[r];
        int rlt = db.schema.table_index(rel.left_table);
        int rrt = db.schema.table_index(rel.right_table);
        if (rlt == src && rrt == next && rel.left_column == src_col_name &&
            rel.right_column == next_col_name) {
          direct = int(r);
          direct_from_left = true;
          break;
        }
        if (rrt == src && rlt == next && rel.right_column == src_col_name &&
            rel.left_column == next_col_name) {
          direct = int(r);
          direct_from_left = false;
          break;
        }
      }
      if (direct < 0) continue;

      current.hops[i] = PathHop{direct, direct_from_left};
      current.hops.erase(current.hops.begin() + long(i) + 1);
      changed = true;
      break;
    }
  }
  return current;
}

std::string describe_path(const Database& db, const JoiningPath& path) {
  std::string out = db.main().spec.name;
  for (const PathHop& hop : path.hops) {
    const Relation& rel = db.schema.relations[size_t(hop.relation)];
    out += "-[" + rel.key_label + "]->";
    out += db.tables[size_t(db.hop_dest_table(hop))].spec.name;
  }
  const LoadedTable& terminal = db.tables[size_t(db.terminal_table(path))];
  out += " :: " + terminal.spec.columns[size_t(path.collected_column)].name;
  out += " :: ";
  out += classify_path(db, path) == PathKind::multiple ? "multiple" : "one_to_one";
  return out;
}

}  // namespace onebm
