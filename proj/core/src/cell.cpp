#include "onebm/cell.hpp"

#include "onebm/errors.hpp"

namespace onebm {

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::numerical:
      return "numerical";
    case ColumnType::categorical:
      return "categorical";
    case ColumnType::text:
      return "text";
    case ColumnType::timestamp:
      return "timestamp";
  }
  return "unknown";
}

ColumnType column_type_from_string(std::string_view name) {
  if (name == "numerical") return ColumnType::numerical;
  if (name == "categorical") return ColumnType::categorical;
  if (name == "text") return ColumnType::text;
  if (name == "timestamp") return ColumnType::timestamp;
  throw SchemaError(SchemaErrorKind::type_mismatch,
                    "unknown column type '" + std::string(name) + "'");
}

int32_t StringPool::intern(std::string_view s) {
  auto it = ids_.find(s);
  if (it != ids_.end()) return it->second;
  strings_.emplace_back(s);
  int32_t id = static_cast<int32_t>(strings_.size() - 1);
  ids_.emplace(strings_.back(), id);
  return id;
}

}  // namespace onebm
