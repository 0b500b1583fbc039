#pragma once

#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracdiff/closed_form.hpp"
#include "fracdiff/model.hpp"
#include "fracdiff/oracle.hpp"

namespace fracdiff::cli {

/// Bad command line or config file; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output destination could not be written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;  ///< special, profile, verify, moments, scaled, figures
  std::set<std::string> given;  ///< keys set by the file or a flag

  ModelParams model;
  GridSpec grid{0.0, 20.0, 512, 1.0, 512};
  std::string output = "-";  ///< "-" is stdout

  // profile / moments
  std::string case_name = "case1";  ///< case1, case2, drift, mixed, l1
  double t = 1.0;
  std::optional<double> x0;
  double x_lo = 0.01;
  double x_hi = 5.0;
  int points = 101;
  Truncation trunc;
  double t_lo = 0.1;
  double t_hi = 10.0;
  int times = 7;

  // special
  std::string function = "mittag_leffler";  ///< gamma, mittag_leffler, bessel_k, fox_h
  std::vector<double> z = {1.0};
  double a = 0.5;  ///< ML alpha, Bessel order
  double b = 1.0;  ///< ML beta
  HParams h;
  double tol = 1e-10;

  // verify
  std::string suite = "core";
  std::vector<int> criteria;  ///< overrides the suite when non-empty
  bool timing = false;        ///< write runtimes (makes the report run dependent)

  // scaled / figures
  SupportRegion region = SupportRegion::infinite;
  double phi0 = 1.0;
  std::string which = "fig1";
};

/// Parses `<tool> <subcommand> [--key value]... [--config <path>]`. Precedence is flag > config
/// file (a flat JSON object with the same keys) > defaults; every key is range checked before
/// anything runs. Throws ConfigError; returns nullopt after printing help.
std::optional<RunConfig> parse_config(int argc, const char* const* argv, std::ostream& help_out);

/// Runs the command. Returns the exit status (verify: 0 iff every check passes); summaries go to
/// `log`, data to cfg.output. Throws IoError and the library's numerical errors.
int run_command(const RunConfig& cfg, std::ostream& log);

/// Formats with 15 significant digits, independent of the locale.
std::string format_number(double v);

/// Writes a header row and one record per line to `path` ("-" is stdout). Throws IoError.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace fracdiff::cli
