#pragma once

#include <string>

#include <doctest.h>

#include "eagle/checks/check.hpp"

// Runs every derived check whose name starts with `prefix` as its own subcase.
inline void run_derived(const std::string& prefix) {
  int ran = 0;
  for (const auto& c : eagle::checks::derived_checks()) {
    if (c.name.rfind(prefix, 0) != 0) continue;
    ++ran;
    SUBCASE(c.name.c_str()) {
      eagle::checks::CheckResult r;
      try {
        r = c.run();
      } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
      }
      INFO(c.name << ": " << r.detail);
      CHECK(r.pass);
    }
  }
  CHECK(ran > 0);
}
