#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "onebm/cell.hpp"

namespace onebm {

enum class ColumnRole : uint8_t {
  primary_key,
  foreign_key,
  attribute,
  target,
  cutoff_time,
  event_time,
  order,
};

std::string to_string(ColumnRole role);
ColumnRole column_role_from_string(const std::string& s);

struct ColumnSpec {
  std::string name;
  // Unset means the type is inferred from the data at load time.
  std::optional<ColumnType> type;
  std::vector<ColumnRole> roles;

  bool has_role(ColumnRole role) const;
};

struct TableSpec {
  std::string name;
  std::string file;
  // Primary key column, from the table-level field or a column role.
  std::optional<std::string> primary_key;
  std::vector<ColumnSpec> columns;

  const ColumnSpec* find_column(const std::string& column_name) const;
};

// An undirected join edge between two tables.
struct Relation {
  std::string left_table;
  std::string left_column;
  std::string right_table;
  std::string right_column;
  // Label used in feature names for hops across this relation.
  std::string key_label;
};

struct DatabaseSchema {
  std::string main_table;
  std::vector<TableSpec> tables;
  std::vector<Relation> relations;

  const TableSpec* find_table(const std::string& table_name) const;
  int table_index(const std::string& table_name) const;  // -1 when absent
};

// Parses the JSON schema document; throws SchemaError on malformed input.
DatabaseSchema parse_schema_json(const std::string& json_text);
DatabaseSchema load_schema_file(const std::string& path);

}  // namespace onebm
