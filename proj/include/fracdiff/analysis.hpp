#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fracdiff/model.hpp"

namespace fracdiff {

/// Profile on the given grid from a pointwise density; the evaluator is kept for adaptive integration.
Profile make_profile(const Eigen::VectorXd& x, const std::function<double(double)>& density, double t,
                     const ModelParams& p, ProfileSource source = ProfileSource::closed_form);

struct MassCheck {
  double mass = 0.0;
  double deviation = 0.0;  ///< mass - 1
  double tail = 0.0;       ///< extrapolated contribution beyond the sampled range
};

/// Weighted mass int |x|^{N-1} rho dx. A profile sampled on x >= 0 is taken as the even half
/// (mass counted twice). Uses the profile's evaluator when present, else the samples; the part
/// beyond the last sample is extrapolated from the local exponential or power decay. Throws
/// DomainError (insufficient coverage) if that tail estimate exceeds tol.
MassCheck normalization_check(const Profile& profile, double tol = 1e-6);

struct MomentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> times;
  std::vector<double> second_moments;  ///< <x^2> = int |x|^{N+1} rho / int |x|^{N-1} rho
};

/// Least-squares fit ln <x^2> = intercept + slope ln t. Needs at least 5 profiles spanning at
/// least one decade in t; throws DomainError on a non-positive moment.
MomentFit second_moment_fit(const std::vector<Profile>& profiles);

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// Log-log slope of rho against |x| using the samples with |x| in the window (at least 20).
/// Throws DomainError when the window leaves the support (zero or missing samples).
double tail_exponent_fit(const Profile& profile, FitWindow window);

struct CheckResult {
  std::string name;
  std::string anchor;  ///< the property being checked, in words
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double runtime_s = 0.0;
  std::string detail;  ///< per-part breakdown, free text
};

struct VerificationReport {
  std::vector<CheckResult> checks;     ///< sorted by name
  std::vector<std::string> failures;   ///< names of failing checks, in check order
  bool pass = false;
  std::vector<std::pair<std::string, std::string>> environment;
};

/// Sorts by name and aggregates; throws std::invalid_argument on empty input.
VerificationReport build_report(std::vector<CheckResult> results,
                                std::vector<std::pair<std::string, std::string>> environment = {});

/// JSON with keys in the order summary, failures, checks, environment. Runtimes are written as
/// null when include_timing is false so that repeated runs are byte-identical.
std::string report_json(const VerificationReport& report, bool include_timing = true);

}  // namespace fracdiff
