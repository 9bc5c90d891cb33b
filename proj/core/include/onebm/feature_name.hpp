#pragma once

#include <optional>
#include <string>

#include "onebm/database.hpp"

namespace onebm {

// Renders a feature name: one "key-table" segment per hop (the main table's
// name alone for the hop-less main path), the collected column, then the
// transform tag with optional ".index" and ".norm" suffixes:
//   key1-table1[-key2-table2...]-column[-tag][.index][.norm]
std::string name_feature(const Database& db, const JoiningPath& path,
                         const std::string& transform_tag,
                         std::optional<int> index = std::nullopt, bool normalized = false);

}  // namespace onebm
