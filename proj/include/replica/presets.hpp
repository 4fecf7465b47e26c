#pragma once

#include <string_view>
#include <vector>

namespace replica {

/// An experiment file shipped with the library.
struct Preset {
  std::string_view name;
  std::string_view description;
  std::string_view json;
};

const std::vector<Preset>& presets();
/// nullptr when no preset has this name.
const Preset* find_preset(std::string_view name);

}  // namespace replica
