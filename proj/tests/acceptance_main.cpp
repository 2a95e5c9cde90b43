#include <iostream>

#include "eagle/checks/check.hpp"

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const auto checks = eagle::checks::acceptance_checks();
  const auto sum = eagle::checks::run_checks(checks, filter, std::cout);
  std::cout << sum.passed << " passed, " << sum.failed << " failed\n";
  return sum.failed == 0 && sum.passed > 0 ? 0 : 1;
}
