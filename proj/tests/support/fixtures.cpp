#include "fixtures.hpp"

namespace spunsplit::testing {

std::string fixture_path(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

InstanceDocument load_fixture(const std::string& name) { return read_instance_file(fixture_path(name)); }

}  // namespace spunsplit::testing
