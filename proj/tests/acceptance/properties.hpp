#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mnar::acceptance {

struct PropertyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Always-on invariant checks. `workdir` receives scratch files for the CLI
// determinism check.
std::vector<PropertyCheck> run_property_suite(const std::filesystem::path& workdir);

}  // namespace mnar::acceptance
