#include "onebm/feature_name.hpp"

namespace onebm {

std::string name_feature(const Database& db, const JoiningPath& path,
                         const std::string& transform_tag, std::optional<int> index,
                         bool normalized) {
  std::string name;
  if (path.hops.empty()) {
    name = db.main().spec.name;
  } else {
    for (const PathHop& hop : path.hops) {
      if (!name.empty()) name += '-';
      name += db.schema.relations[size_t(hop.relation)].key_label;
      name += '-';
      name += db.table(db.hop_dest_table(hop)).spec.name;
    }
  }
  const LoadedTable& terminal = db.table(db.terminal_table(path));
  name += '-';
  name += terminal.spec.columns[size_t(path.collected_column)].name;
  if (!transform_tag.empty()) {
    name += '-';
    name += transform_tag;
  }
  if (index) {
    name += '.';
    name += std::to_string(*index);
  }
  if (normalized) name += ".norm";
  return name;
}

}  // namespace onebm
