#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eagle::checks {

struct CheckResult {
  bool pass = true;
  std::string detail;
};

struct Check {
  std::string name;
  std::function<CheckResult()> run;
};

/// Collects expectations; the first failure message is kept for the report.
class Tally {
 public:
  void expect(bool cond, const std::string& what) {
    if (!cond && ok_) {
      ok_ = false;
      failure_ = what;
    }
  }
  bool ok() const { return ok_; }
  CheckResult result(std::string detail = {}) const {
    if (ok_) return {true, std::move(detail)};
    return {false, detail.empty() ? failure_ : failure_ + " | " + detail};
  }

 private:
  bool ok_ = true;
  std::string failure_;
};

/// Every oracle-backed example and property of the library.
std::vector<Check> derived_checks();

/// The numbered end-to-end acceptance criteria.
std::vector<Check> acceptance_checks();

struct RunSummary {
  int passed = 0;
  int failed = 0;
};

/// Runs the checks whose name contains `filter` (all when empty), printing one
/// "PASS|FAIL name: detail" line each. Exceptions count as failures.
RunSummary run_checks(std::span<const Check> checks, std::string_view filter, std::ostream& out);

std::string format_double(double v);

}  // namespace eagle::checks
