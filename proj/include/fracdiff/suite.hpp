#pragma once

#include <string>
#include <vector>

#include "fracdiff/analysis.hpp"

namespace fracdiff {

enum class SuiteKind {
  core,  ///< every criterion except the two oracle-heavy ones (L1 solver, mixed-case ODE)
  full
};

/// Number of acceptance criteria.
inline constexpr int kCriteria = 10;

/// Runs acceptance criterion `id` (1..kCriteria). The check passes when the measured quantity is
/// within tolerance and the run stayed inside its time budget. Multi-part criteria report the
/// worst part as measured / tolerance against a tolerance of 1; `detail` lists the parts.
CheckResult run_criterion(int id);

/// Criteria of the suite, in order.
std::vector<int> suite_criteria(SuiteKind kind);

VerificationReport run_suite(SuiteKind kind);

}  // namespace fracdiff
