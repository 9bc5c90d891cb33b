#include "onebm/ingest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "onebm/errors.hpp"
#include "onebm/time.hpp"

namespace onebm {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view trimmed(const std::string& s) {
  size_t begin = 0, end = s.size();
  while (begin < end && (s[begin] == ' ' || s[begin] == '\t')) begin++;
  while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) end--;
  return std::string_view(s).substr(begin, end - begin);
}

bool parse_number(const std::string& cell, double& out) {
  std::string_view v = trimmed(cell);
  if (v.empty()) return false;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  return ec == std::errc() && ptr == v.data() + v.size();
}

}  // namespace

bool is_null_token(const std::string& cell) { return cell.empty() || cell == "NA"; }

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable parse_csv(const std::string& text, const std::string& file_name) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  size_t line = 1;
  bool in_quotes = false;
  bool any_field = false;  // record has content beyond a bare newline

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    if (table.header.empty())
      table.header = std::move(record);
    else
      table.rows.push_back(std::move(record));
    record.clear();
    any_field = false;
  };

  for (size_t i = 0; i < text.size(); i++) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i++;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') line++;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty())
          throw ParseError(file_name, line, record.size() + 1,
                           "quote inside unquoted field");
        in_quotes = true;
        any_field = true;
        break;
      case ',':
        end_field();
        any_field = true;
        break;
      case '\r':
        break;  // handled by the following '\n'
      case '\n':
        if (any_field || !field.empty() || !record.empty()) end_record();
        line++;
        break;
      default:
        field += c;
        any_field = true;
        break;
    }
  }
  if (in_quotes) throw ParseError(file_name, line, record.size() + 1, "unterminated quoted field");
  if (any_field || !field.empty() || !record.empty()) end_record();

  if (table.header.empty()) throw ParseError(file_name, 1, 1, "missing header row");
  for (size_t r = 0; r < table.rows.size(); r++) {
    if (table.rows[r].size() != table.header.size())
      throw ParseError(file_name, r + 2, table.rows[r].size(),
                       "row has " + std::to_string(table.rows[r].size()) + " fields, header has " +
                           std::to_string(table.header.size()));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) { return parse_csv(read_file(path), path); }

ColumnType infer_column_type(const std::vector<std::string>& values, bool* was_empty,
                             double parse_quorum, double categorical_ratio,
                             size_t categorical_floor) {
  size_t present = 0, timestamps = 0, numbers = 0;
  std::unordered_set<std::string> distinct;
  for (const std::string& cell : values) {
    if (is_null_token(cell)) continue;
    present++;
    if (parse_timestamp(cell)) timestamps++;
    double ignored;
    if (parse_number(cell, ignored)) numbers++;
    distinct.insert(cell);
  }
  if (was_empty) *was_empty = present == 0;
  if (present == 0) return ColumnType::categorical;
  if (double(timestamps) >= parse_quorum * double(present)) return ColumnType::timestamp;
  if (double(numbers) >= parse_quorum * double(present)) return ColumnType::numerical;
  if (double(distinct.size()) <= categorical_ratio * double(present) ||
      distinct.size() <= categorical_floor)
    return ColumnType::categorical;
  return ColumnType::text;
}

std::optional<std::string> resolve_cutoff_column(const TableSpec& main) {
  std::optional<std::string> found;
  for (const ColumnSpec& col : main.columns) {
    if (!col.has_role(ColumnRole::cutoff_time)) continue;
    if (found)
      throw SchemaError(SchemaErrorKind::ambiguous_cutoff,
                        "columns \"" + *found + "\" and \"" + col.name +
                            "\" both declare role cutoff_time");
    found = col.name;
  }
  if (found) return found;
  for (const ColumnSpec& col : main.columns) {
    if (col.name == "cutoff_time" && col.type == ColumnType::timestamp) return col.name;
  }
  return std::nullopt;
}

namespace {

// Converts one raw CSV column into typed storage. Strict cells (declared
// types) raise ParseError; lenient cells fall back to null.
ColumnData convert_column(const CsvTable& csv, size_t col_idx, ColumnType type, bool strict,
                          const std::string& file_name, StringPool& pool,
                          std::vector<std::string>& warnings, const std::string& column_name) {
  ColumnData out;
  out.type = type;
  size_t n = csv.rows.size();
  out.nulls.assign(n, false);
  size_t fallback_nulls = 0;

  for (size_t r = 0; r < n; r++) {
    const std::string& cell = csv.rows[r][col_idx];
    bool null = is_null_token(cell);
    switch (type) {
      case ColumnType::numerical: {
        double value = 0;
        if (!null && !parse_number(cell, value)) {
          if (strict)
            throw ParseError(file_name, r + 2, col_idx + 1,
                             "cell \"" + cell + "\" is not numerical (column \"" + column_name +
                                 "\")");
          null = true;
          fallback_nulls++;
        }
        out.numbers.push_back(value);
        break;
      }
      case ColumnType::timestamp: {
        int64_t value = 0;
        if (!null) {
          auto parsed = parse_timestamp(cell);
          if (!parsed) {
            if (strict)
              throw ParseError(file_name, r + 2, col_idx + 1,
                               "cell \"" + cell + "\" is not a timestamp (column \"" + column_name +
                                   "\")");
            null = true;
            fallback_nulls++;
          } else {
            value = *parsed;
          }
        }
        out.timestamps.push_back(value);
        break;
      }
      case ColumnType::categorical:
      case ColumnType::text:
        out.strings.push_back(null ? -1 : pool.intern(cell));
        break;
    }
    out.nulls[r] = null;
  }
  if (fallback_nulls > 0)
    warnings.push_back(file_name + ": column \"" + column_name + "\": " +
                       std::to_string(fallback_nulls) + " cell(s) did not match the inferred " +
                       std::string(to_string(type)) + " type and were loaded as null");
  return out;
}

}  // namespace

Database load_database(const DatabaseSchema& schema, const std::string& data_dir) {
  std::vector<LoadedTable> tables;
  StringPool pool;
  std::vector<std::string> warnings;
  DatabaseSchema resolved = schema;

  for (TableSpec& spec : resolved.tables) {
    std::string path = data_dir.empty() ? spec.file : data_dir + "/" + spec.file;
    CsvTable csv = read_csv_file(path);

    auto header_index = [&](const std::string& name) -> int {
      for (size_t i = 0; i < csv.header.size(); i++)
        if (csv.header[i] == name) return int(i);
      return -1;
    };

    // Columns the schema does not declare are still loaded, with inference.
    for (const std::string& name : csv.header) {
      if (!spec.find_column(name)) spec.columns.push_back(ColumnSpec{name, std::nullopt, {}});
    }

    LoadedTable table;
    table.row_count = csv.rows.size();
    for (ColumnSpec& col : spec.columns) {
      int idx = header_index(col.name);
      if (idx < 0)
        throw SchemaError(SchemaErrorKind::missing_column, "table \"" + spec.name +
                                                               "\": declared column \"" + col.name +
                                                               "\" is missing from " + path);
      bool strict = col.type.has_value();
      if (!col.type) {
        std::vector<std::string> cells;
        cells.reserve(csv.rows.size());
        for (const auto& row : csv.rows) cells.push_back(row[size_t(idx)]);
        bool empty = false;
        col.type = infer_column_type(cells, &empty);
        if (empty && !csv.rows.empty())
          warnings.push_back(path + ": column \"" + col.name +
                             "\" has no values; defaulting to categorical");
      }
      table.columns.push_back(convert_column(csv, size_t(idx), *col.type, strict, path, pool,
                                             warnings, col.name));
    }
    table.spec = spec;
    tables.push_back(std::move(table));
  }

  Database db = validate_schema(std::move(resolved), std::move(tables), std::move(pool));
  for (std::string& w : warnings) db.warnings.push_back(std::move(w));
  return db;
}

Database load_database(const std::string& schema_path, const std::string& data_dir) {
  return load_database(load_schema_file(schema_path), data_dir);
}

}  // namespace onebm
