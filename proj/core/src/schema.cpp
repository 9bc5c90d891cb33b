#include "onebm/schema.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "onebm/errors.hpp"

namespace onebm {

std::string to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::primary_key:
      return "primary_key";
    case ColumnRole::foreign_key:
      return "foreign_key";
    case ColumnRole::attribute:
      return "attribute";
    case ColumnRole::target:
      return "target";
    case ColumnRole::cutoff_time:
      return "cutoff_time";
    case ColumnRole::event_time:
      return "event_time";
    case ColumnRole::order:
      return "order";
  }
  return "attribute";
}

ColumnRole column_role_from_string(const std::string& s) {
  if (s == "primary_key") return ColumnRole::primary_key;
  if (s == "foreign_key") return ColumnRole::foreign_key;
  if (s == "attribute") return ColumnRole::attribute;
  if (s == "target") return ColumnRole::target;
  if (s == "cutoff_time") return ColumnRole::cutoff_time;
  if (s == "event_time") return ColumnRole::event_time;
  if (s == "order") return ColumnRole::order;
  throw SchemaError(SchemaErrorKind::invalid_role, "unknown column role \"" + s + "\"");
}

bool ColumnSpec::has_role(ColumnRole role) const {
  for (ColumnRole r : roles)
    if (r == role) return true;
  return false;
}

const ColumnSpec* TableSpec::find_column(const std::string& column_name) const {
  for (const ColumnSpec& c : columns)
    if (c.name == column_name) return &c;
  return nullptr;
}

const TableSpec* DatabaseSchema::find_table(const std::string& table_name) const {
  for (const TableSpec& t : tables)
    if (t.name == table_name) return &t;
  return nullptr;
}

int DatabaseSchema::table_index(const std::string& table_name) const {
  for (size_t i = 0; i < tables.size(); i++)
    if (tables[i].name == table_name) return int(i);
  return -1;
}

namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw SchemaError(SchemaErrorKind::missing_table,
                      context + ": missing required string field \"" + key + "\"");
  return it->get<std::string>();
}

ColumnSpec parse_column(const json& jcol, const std::string& table_name) {
  ColumnSpec col;
  col.name = require_string(jcol, "name", "column of table \"" + table_name + "\"");
  if (auto it = jcol.find("type"); it != jcol.end() && !it->is_null())
    col.type = column_type_from_string(it->get<std::string>());
  if (auto it = jcol.find("roles"); it != jcol.end()) {
    if (!it->is_array())
      throw SchemaError(SchemaErrorKind::invalid_role,
                        "column \"" + col.name + "\" of table \"" + table_name +
                            "\": \"roles\" must be an array");
    for (const json& r : *it) col.roles.push_back(column_role_from_string(r.get<std::string>()));
  }
  return col;
}

TableSpec parse_table(const json& jtab) {
  TableSpec table;
  table.name = require_string(jtab, "name", "table entry");
  table.file = require_string(jtab, "file", "table \"" + table.name + "\"");
  if (auto it = jtab.find("primary_key"); it != jtab.end() && !it->is_null())
    table.primary_key = it->get<std::string>();
  if (auto it = jtab.find("columns"); it != jtab.end()) {
    for (const json& jcol : *it) table.columns.push_back(parse_column(jcol, table.name));
  }

  // A column-level primary_key role is equivalent to the table-level field;
  // both may be present if they agree.
  for (const ColumnSpec& col : table.columns) {
    if (!col.has_role(ColumnRole::primary_key)) continue;
    if (table.primary_key && *table.primary_key != col.name)
      throw SchemaError(SchemaErrorKind::duplicate_key_value,
                        "table \"" + table.name + "\" declares conflicting primary keys \"" +
                            *table.primary_key + "\" and \"" + col.name + "\"");
    table.primary_key = col.name;
  }
  if (table.primary_key && !table.find_column(*table.primary_key))
    throw SchemaError(SchemaErrorKind::missing_column,
                      "table \"" + table.name + "\": primary key column \"" + *table.primary_key +
                          "\" is not declared");
  return table;
}

Relation parse_relation(const json& jrel, const DatabaseSchema& schema) {
  Relation rel;
  rel.left_table = require_string(jrel, "left_table", "relation");
  rel.left_column = require_string(jrel, "left_column", "relation");
  rel.right_table = require_string(jrel, "right_table", "relation");
  rel.right_column = require_string(jrel, "right_column", "relation");
  if (auto it = jrel.find("key_label"); it != jrel.end() && !it->is_null())
    rel.key_label = it->get<std::string>();
  else
    rel.key_label = rel.left_column;

  for (const auto& [table, column] :
       {std::pair{rel.left_table, rel.left_column}, {rel.right_table, rel.right_column}}) {
    const TableSpec* spec = schema.find_table(table);
    if (!spec)
      throw SchemaError(SchemaErrorKind::missing_table,
                        "relation references unknown table \"" + table + "\"");
    if (!spec->find_column(column))
      throw SchemaError(SchemaErrorKind::missing_column, "relation references unknown column \"" +
                                                             table + "." + column + "\"");
  }
  return rel;
}

}  // namespace

DatabaseSchema parse_schema_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(SchemaErrorKind::missing_table, std::string("schema is not valid JSON: ") + e.what());
  }

  DatabaseSchema schema;
  schema.main_table = require_string(doc, "main_table", "schema");
  if (auto it = doc.find("tables"); it != doc.end()) {
    for (const json& jtab : *it) {
      TableSpec table = parse_table(jtab);
      if (schema.find_table(table.name))
        throw SchemaError(SchemaErrorKind::duplicate_key_value,
                          "table \"" + table.name + "\" is declared twice");
      schema.tables.push_back(std::move(table));
    }
  }
  if (!schema.find_table(schema.main_table))
    throw SchemaError(SchemaErrorKind::no_main_table,
                      "main table \"" + schema.main_table + "\" is not declared");
  if (auto it = doc.find("relations"); it != doc.end()) {
    for (const json& jrel : *it) schema.relations.push_back(parse_relation(jrel, schema));
  }
  return schema;
}

DatabaseSchema load_schema_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw SchemaError(SchemaErrorKind::missing_table, "cannot open schema file \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema_json(buf.str());
}

}  // namespace onebm
