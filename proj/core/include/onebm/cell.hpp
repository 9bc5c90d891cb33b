#pragma once

#include <bit>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <unordered_map>

namespace onebm {

// Basic column types a cell can carry.
enum class ColumnType : uint8_t { numerical, categorical, text, timestamp };

std::string_view to_string(ColumnType type);
ColumnType column_type_from_string(std::string_view name);

enum class CellKind : uint8_t { null, number, category, text, timestamp };

// A single typed value. Categorical and text payloads are ids into the
// database's StringPool; timestamps are epoch seconds (UTC).
struct CellValue {
  CellKind kind = CellKind::null;
  union {
    double number;
    int32_t str_id;
    int64_t ts;
  };

  static CellValue null_value() { return CellValue{}; }
  static CellValue from_number(double v) {
    CellValue c;
    c.kind = CellKind::number;
    c.number = v;
    return c;
  }
  static CellValue from_category(int32_t id) {
    CellValue c;
    c.kind = CellKind::category;
    c.str_id = id;
    return c;
  }
  static CellValue from_text(int32_t id) {
    CellValue c;
    c.kind = CellKind::text;
    c.str_id = id;
    return c;
  }
  static CellValue from_timestamp(int64_t seconds) {
    CellValue c;
    c.kind = CellKind::timestamp;
    c.ts = seconds;
    return c;
  }

  bool is_null() const { return kind == CellKind::null; }

  friend bool operator==(const CellValue& a, const CellValue& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case CellKind::null:
        return true;
      case CellKind::number:
        return a.number == b.number;
      case CellKind::category:
      case CellKind::text:
        return a.str_id == b.str_id;
      case CellKind::timestamp:
        return a.ts == b.ts;
    }
    return false;
  }
};

// Append-only string interner. Ids are dense and stable; id -1 means null.
// Backed by a deque so string storage never moves.
class StringPool {
 public:
  int32_t intern(std::string_view s);
  std::string_view view(int32_t id) const { return strings_[static_cast<size_t>(id)]; }
  size_t size() const { return strings_.size(); }

 private:
  std::deque<std::string> strings_;
  std::unordered_map<std::string_view, int32_t> ids_;
};

// Normalized 64-bit join-key encoding. Only comparable between columns of the
// same ColumnType, which schema validation guarantees for relations.
inline uint64_t encode_key(const CellValue& v) {
  switch (v.kind) {
    case CellKind::number: {
      double d = v.number == 0.0 ? 0.0 : v.number;  // fold -0.0 into +0.0
      return std::bit_cast<uint64_t>(d);
    }
    case CellKind::category:
    case CellKind::text:
      return static_cast<uint64_t>(static_cast<uint32_t>(v.str_id));
    case CellKind::timestamp:
      return std::bit_cast<uint64_t>(v.ts);
    case CellKind::null:
      break;
  }
  return ~uint64_t{0};
}

}  // namespace onebm
