#pragma once

#include <string>

#include "spunsplit/io.hpp"

namespace spunsplit::testing {

// Reads fixtures/<name>.
InstanceDocument load_fixture(const std::string& name);
std::string fixture_path(const std::string& name);

}  // namespace spunsplit::testing
