#pragma once

#include <stdexcept>
#include <string>

namespace onebm {

// Base class for every error raised by the engine.
class OnebmError : public std::runtime_error {
 public:
  explicit OnebmError(const std::string& message) : std::runtime_error(message) {}
};

enum class SchemaErrorKind {
  missing_table,
  missing_column,
  duplicate_key_value,
  null_key_value,
  type_mismatch,
  no_main_table,
  invalid_role,
  ambiguous_cutoff,
};

class SchemaError : public OnebmError {
 public:
  SchemaError(SchemaErrorKind kind, const std::string& message)
      : OnebmError(message), kind_(kind) {}

  SchemaErrorKind kind() const { return kind_; }

 private:
  SchemaErrorKind kind_;
};

// Raised while reading a data or config file; carries the offending position.
class ParseError : public OnebmError {
 public:
  ParseError(std::string file, uint64_t line, uint64_t column, const std::string& message)
      : OnebmError(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " +
                   message),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const { return file_; }
  uint64_t line() const { return line_; }
  uint64_t column() const { return column_; }

 private:
  std::string file_;
  uint64_t line_;
  uint64_t column_;
};

enum class FeatureErrorKind {
  unknown_type,
  duplicate_registration,
  name_collision,
  depth_out_of_range,
  plugin_width_mismatch,
};

class FeatureError : public OnebmError {
 public:
  FeatureError(FeatureErrorKind kind, const std::string& message)
      : OnebmError(message), kind_(kind) {}

  FeatureErrorKind kind() const { return kind_; }

 private:
  FeatureErrorKind kind_;
};

}  // namespace onebm
