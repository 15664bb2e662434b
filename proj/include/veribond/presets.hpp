#pragma once

#include <string>
#include <vector>

#include "veribond/scenario.hpp"

namespace veribond {

/// Built-in scenario configurations usable without any config file.
std::vector<std::string> preset_names();
ScenarioConfig preset_scenario(const std::string& name);

}  // namespace veribond
