// Runs every acceptance criterion and prints one line each; exit status 1 on any failure.
#include <cstdio>

#include "fracdiff/suite.hpp"

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  int failed = 0;
  for (int id : fracdiff::suite_criteria(fracdiff::SuiteKind::full)) {
    const fracdiff::CheckResult r = fracdiff::run_criterion(id);
    std::printf("%s %-24s worst/tol %.3e  %6.1f s  | %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured,
                r.runtime_s, r.detail.c_str());
    failed += !r.pass;
  }
  std::printf("%d of %d criteria failed\n", failed, fracdiff::kCriteria);
  return failed ? 1 : 0;
}
