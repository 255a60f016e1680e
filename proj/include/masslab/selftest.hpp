// Built-in example suite run by `masslab selftest`.
#pragma once

#include <string>
#include <vector>

namespace masslab {

struct SelftestCase {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<SelftestCase> run_selftest();

}  // namespace masslab
