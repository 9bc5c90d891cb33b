#pragma once

#include <optional>
#include <string>
#include <vector>

#include "onebm/database.hpp"
#include "onebm/schema.hpp"
#include "onebm/table.hpp"

namespace onebm {

// Raw CSV contents: header row plus string cells, RFC-4180 dialect.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_file(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& file_name);

// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

// Determines the type of an undeclared column from its raw cells. Empty cells
// and the literal "NA" are nulls and do not participate. Timestamp wins when
// at least `parse_quorum` of the non-null cells parse as timestamps, then
// numerical by the same quorum; otherwise categorical when the distinct ratio
// is at most `categorical_ratio` or the distinct count is at most
// `categorical_floor`; text otherwise. A column with no non-null cell is
// categorical (callers warn). Declared types always override inference.
ColumnType infer_column_type(const std::vector<std::string>& values, bool* was_empty = nullptr,
                             double parse_quorum = 0.99, double categorical_ratio = 0.5,
                             size_t categorical_floor = 16);

// Loads every table named by the schema from `data_dir`, resolves column
// types, and validates the result. Cells that violate a declared type raise
// ParseError; cells that violate an inferred type load as null with a warning.
Database load_database(const std::string& schema_path, const std::string& data_dir);
Database load_database(const DatabaseSchema& schema, const std::string& data_dir);

// The column driving temporal filtering: the role-declared cutoff column if
// any, else a timestamp column named exactly "cutoff_time", else none.
std::optional<std::string> resolve_cutoff_column(const TableSpec& main);

bool is_null_token(const std::string& cell);

}  // namespace onebm
