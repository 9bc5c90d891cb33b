#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onebm/cell.hpp"
#include "onebm/schema.hpp"

namespace onebm {

// Columnar storage for one loaded table column. Exactly one of the value
// vectors is populated, matching `type`; strings are interner ids into the
// database-wide StringPool.
struct ColumnData {
  ColumnType type = ColumnType::categorical;
  std::vector<bool> nulls;
  std::vector<double> numbers;
  std::vector<int64_t> timestamps;
  std::vector<int32_t> strings;

  size_t size() const { return nulls.size(); }

  CellValue cell(size_t row) const {
    if (nulls[row]) return CellValue::null_value();
    switch (type) {
      case ColumnType::numerical:
        return CellValue::from_number(numbers[row]);
      case ColumnType::timestamp:
        return CellValue::from_timestamp(timestamps[row]);
      case ColumnType::categorical:
        return CellValue::from_category(strings[row]);
      case ColumnType::text:
        return CellValue::from_text(strings[row]);
    }
    return CellValue::null_value();
  }
};

struct LoadedTable {
  TableSpec spec;  // column specs carry resolved (inferred) types
  std::vector<ColumnData> columns;
  size_t row_count = 0;

  int column_index(const std::string& name) const {
    for (size_t i = 0; i < spec.columns.size(); i++)
      if (spec.columns[i].name == name) return int(i);
    return -1;
  }
};

}  // namespace onebm
