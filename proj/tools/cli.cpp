#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fracdiff/analysis.hpp"
#include "fracdiff/specfun.hpp"
#include "fracdiff/suite.hpp"

namespace fracdiff::cli {

namespace {

const std::vector<std::pair<std::string, std::string>> kCommands = {
    {"special", "special functions: gamma, Mittag-Leffler, Bessel K, Fox H"},
    {"profile", "propagator profile as CSV (x, rho, error_estimate)"},
    {"verify", "acceptance suite as a JSON report; exit 0 iff every check passes"},
    {"moments", "second moment against time and its fitted log-log slope"},
    {"scaled", "similarity solution and its scaled profile"},
    {"figures", "figure data: fig1 propagator collapse, fig2/fig3 similarity profiles"}};

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("key '" + key + "': " + what);
}

double to_double(const std::string& key, const std::string& raw) {
  double v = 0.0;
  const char* end = raw.data() + raw.size();
  const auto [ptr, ec] = std::from_chars(raw.data(), end, v);
  if (raw.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) fail(key, "malformed number '" + raw + "'");
  return v;
}

int to_int(const std::string& key, const std::string& raw) {
  int v = 0;
  const char* end = raw.data() + raw.size();
  const auto [ptr, ec] = std::from_chars(raw.data(), end, v);
  if (raw.empty() || ec != std::errc() || ptr != end) fail(key, "malformed integer '" + raw + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

std::string choice(const std::string& key, const std::string& raw, const std::vector<std::string>& allowed) {
  for (const std::string& a : allowed)
    if (raw == a) return raw;
  std::string list;
  for (const std::string& a : allowed) list += (list.empty() ? "" : ", ") + a;
  fail(key, "expected one of " + list + ", got '" + raw + "'");
}

// Range helpers; the message shows the admissible set.
double positive(const std::string& key, const std::string& raw) {
  const double v = to_double(key, raw);
  if (!(v > 0.0)) fail(key, raw + " must be positive");
  return v;
}

int at_least(const std::string& key, const std::string& raw, int lo) {
  const int v = to_int(key, raw);
  if (v < lo) fail(key, raw + " must be >= " + std::to_string(lo));
  return v;
}

std::vector<GammaPair> gamma_pairs(const std::string& key, const std::string& raw) {
  std::vector<GammaPair> out;
  if (raw.empty()) return out;
  for (const std::string& item : split(raw, ';')) {
    const std::vector<std::string> ab = split(item, ',');
    if (ab.size() != 2) fail(key, "expected 'coeff,scale' pairs separated by ';', got '" + raw + "'");
    out.push_back({to_double(key, ab[0]), positive(key, ab[1])});
  }
  return out;
}

struct Key {
  std::string name;
  std::string help;
  std::set<std::string> commands;  // empty: every command
  std::function<void(RunConfig&, const std::string&)> apply;
};

const std::set<std::string> kModelCommands = {"profile", "moments", "scaled", "figures"};

const std::vector<Key>& keys() {
  static const std::vector<Key> list = {
      {"output", "output path, - for stdout", {}, [](RunConfig& c, const std::string& r) { c.output = r; }},
      // model
      {"gamma", "Caputo order in (0, 1]", kModelCommands,
       [](RunConfig& c, const std::string& r) {
         const double v = to_double("gamma", r);
         if (!(v > 0.0 && v <= 1.0)) fail("gamma", r + " outside (0, 1]");
         c.model.gamma = v;
       }},
      {"mu", "spatial fractional order", kModelCommands,
       [](RunConfig& c, const std::string& r) { c.model.mu = to_double("mu", r); }},
      {"nu", "nonlinearity exponent", kModelCommands,
       [](RunConfig& c, const std::string& r) { c.model.nu = to_double("nu", r); }},
      {"theta", "diffusion exponent, > -2", kModelCommands,
       [](RunConfig& c, const std::string& r) {
         const double v = to_double("theta", r);
         if (!(v > -2.0)) fail("theta", r + " must exceed -2");
         c.model.theta = v;
       }},
      {"ndim", "dimension N >= 1", kModelCommands,
       [](RunConfig& c, const std::string& r) { c.model.n_dim = at_least("ndim", r, 1); }},
      {"d", "diffusion amplitude D > 0", kModelCommands,
       [](RunConfig& c, const std::string& r) { c.model.d_coeff = positive("d", r); }},
      {"k", "drift amplitude K", kModelCommands,
       [](RunConfig& c, const std::string& r) { c.model.k_drift = to_double("k", r); }},
      {"alpha", "memory exponent alpha > 0", kModelCommands,
       [](RunConfig& c, const std::string& r) { c.model.alpha_mem = positive("alpha", r); }},
      {"kernel", "impulsive or power_law", kModelCommands,
       [](RunConfig& c, const std::string& r) {
         c.model.kernel = choice("kernel", r, {"impulsive", "power_law"}) == "impulsive" ? KernelKind::impulsive
                                                                                         : KernelKind::power_law;
       }},
      // grid of the L1 solver
      {"x_min", "solver grid left end (must be 0)", {"profile"},
       [](RunConfig& c, const std::string& r) { c.grid.x_min = to_double("x_min", r); }},
      {"x_max", "solver grid right end", {"profile"},
       [](RunConfig& c, const std::string& r) { c.grid.x_max = positive("x_max", r); }},
      {"nx", "solver cells, >= 16", {"profile"},
       [](RunConfig& c, const std::string& r) { c.grid.nx = at_least("nx", r, 16); }},
      {"nt", "solver time steps, >= 8", {"profile"},
       [](RunConfig& c, const std::string& r) { c.grid.nt = at_least("nt", r, 8); }},
      {"t_max", "solver end time (defaults to t)", {"profile"},
       [](RunConfig& c, const std::string& r) { c.grid.t_max = positive("t_max", r); }},
      // sampling
      {"case", "case1, case2, drift, mixed or l1", {"profile", "moments"},
       [](RunConfig& c, const std::string& r) {
         c.case_name = choice("case", r, {"case1", "case2", "drift", "mixed", "l1"});
       }},
      {"t", "time > 0", {"profile", "scaled", "figures"},
       [](RunConfig& c, const std::string& r) { c.t = positive("t", r); }},
      {"x0", "single evaluation point", {"profile"},
       [](RunConfig& c, const std::string& r) { c.x0 = to_double("x0", r); }},
      {"x_lo", "first sample", {"profile", "scaled", "figures"},
       [](RunConfig& c, const std::string& r) { c.x_lo = to_double("x_lo", r); }},
      {"x_hi", "last sample", {"profile", "scaled", "figures"},
       [](RunConfig& c, const std::string& r) { c.x_hi = to_double("x_hi", r); }},
      {"points", "number of samples, >= 1", {"profile", "scaled", "figures"},
       [](RunConfig& c, const std::string& r) { c.points = at_least("points", r, 1); }},
      {"n_max", "series truncation, >= 1", {"profile"},
       [](RunConfig& c, const std::string& r) { c.trunc.n_max = at_least("n_max", r, 1); }},
      {"rel_tol", "series relative tolerance", {"profile"},
       [](RunConfig& c, const std::string& r) { c.trunc.rel_tol = positive("rel_tol", r); }},
      {"t_lo", "first moment time", {"moments"},
       [](RunConfig& c, const std::string& r) { c.t_lo = positive("t_lo", r); }},
      {"t_hi", "last moment time", {"moments"},
       [](RunConfig& c, const std::string& r) { c.t_hi = positive("t_hi", r); }},
      {"times", "number of moment times, >= 5", {"moments"},
       [](RunConfig& c, const std::string& r) { c.times = at_least("times", r, 5); }},
      // special functions
      {"fn", "gamma, mittag_leffler, bessel_k or fox_h", {"special"},
       [](RunConfig& c, const std::string& r) {
         c.function = choice("fn", r, {"gamma", "mittag_leffler", "bessel_k", "fox_h"});
       }},
      {"z", "comma-separated arguments", {"special"},
       [](RunConfig& c, const std::string& r) {
         c.z.clear();
         for (const std::string& s : split(r, ',')) c.z.push_back(to_double("z", s));
         if (c.z.empty()) fail("z", "needs at least one value");
       }},
      {"a", "Mittag-Leffler alpha or Bessel order", {"special"},
       [](RunConfig& c, const std::string& r) { c.a = to_double("a", r); }},
      {"b", "Mittag-Leffler beta", {"special"},
       [](RunConfig& c, const std::string& r) { c.b = to_double("b", r); }},
      {"m", "Fox H: m", {"special"}, [](RunConfig& c, const std::string& r) { c.h.m = at_least("m", r, 0); }},
      {"n", "Fox H: n", {"special"}, [](RunConfig& c, const std::string& r) { c.h.n = at_least("n", r, 0); }},
      {"upper", "Fox H (a_i, A_i) as 'a,A;a,A'", {"special"},
       [](RunConfig& c, const std::string& r) { c.h.upper = gamma_pairs("upper", r); }},
      {"lower", "Fox H (b_j, B_j) as 'b,B;b,B'", {"special"},
       [](RunConfig& c, const std::string& r) { c.h.lower = gamma_pairs("lower", r); }},
      {"tol", "absolute tolerance", {"special"},
       [](RunConfig& c, const std::string& r) { c.tol = positive("tol", r); }},
      // verify
      {"suite", "core or full", {"verify"},
       [](RunConfig& c, const std::string& r) { c.suite = choice("suite", r, {"core", "full"}); }},
      {"criteria", "comma-separated criterion ids", {"verify"},
       [](RunConfig& c, const std::string& r) {
         c.criteria.clear();
         for (const std::string& s : split(r, ',')) {
           const int id = to_int("criteria", s);
           if (id < 1 || id > kCriteria) fail("criteria", s + " outside 1.." + std::to_string(kCriteria));
           c.criteria.push_back(id);
         }
       }},
      {"timing", "true or false: write runtimes", {"verify"},
       [](RunConfig& c, const std::string& r) { c.timing = choice("timing", r, {"true", "false"}) == "true"; }},
      // similarity solutions and figures
      {"region", "bounded or infinite", {"scaled"},
       [](RunConfig& c, const std::string& r) {
         c.region = choice("region", r, {"bounded", "infinite"}) == "bounded" ? SupportRegion::bounded
                                                                               : SupportRegion::infinite;
       }},
      {"phi0", "phi(0) > 0", {"scaled", "figures"},
       [](RunConfig& c, const std::string& r) { c.phi0 = positive("phi0", r); }},
      {"which", "fig1, fig2 or fig3", {"figures"},
       [](RunConfig& c, const std::string& r) { c.which = choice("which", r, {"fig1", "fig2", "fig3"}); }},
  };
  return list;
}

bool applies(const Key& k, const std::string& command) { return k.commands.empty() || k.commands.count(command); }

const Key* find_key(const std::string& name) {
  for (const Key& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

std::string json_scalar(const std::string& key, const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  fail(key, "expected a string, number or boolean");
}

std::map<std::string, std::string> read_config_file(const std::string& path, const std::string& command) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file '" + path + "': cannot open");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file '" + path + "': expected a JSON object");
  std::map<std::string, std::string> out;
  for (const auto& [name, value] : j.items()) {
    const Key* k = find_key(name);
    if (!k) throw ConfigError("unknown key '" + name + "' in config file '" + path + "'");
    if (!applies(*k, command)) throw ConfigError("key '" + name + "' is not used by '" + command + "'");
    if (value.is_array()) {
      std::string joined;
      for (const auto& e : value) joined += (joined.empty() ? "" : ",") + json_scalar(name, e);
      out[name] = joined;
    } else {
      out[name] = json_scalar(name, value);
    }
  }
  return out;
}

// Defaults that depend on the subcommand, applied to keys nobody set.
void command_defaults(RunConfig& c) {
  auto unset = [&](const char* k) { return !c.given.count(k); };
  if (c.command == "profile" || c.command == "moments") {
    if (c.case_name == "case2") {
      if (unset("kernel")) c.model.kernel = KernelKind::power_law;
      if (unset("alpha")) c.model.alpha_mem = 0.5;
    } else if (c.case_name == "drift") {
      if (unset("k")) c.model.k_drift = 1.0;
    } else if (c.case_name == "mixed") {
      if (unset("kernel")) c.model.kernel = KernelKind::power_law;
      if (unset("gamma")) c.model.gamma = 0.5;
      if (unset("mu")) c.model.mu = 1.5;
      if (unset("alpha")) c.model.alpha_mem = 0.5;
      if (unset("k")) c.model.k_drift = 1.0;
    }
    if (unset("t_max")) c.grid.t_max = c.t;
  }
  if (c.command == "figures" && c.which != "fig1") c.region = c.which == "fig2" ? SupportRegion::bounded : SupportRegion::infinite;
  if (c.command == "scaled" || (c.command == "figures" && c.which != "fig1")) {
    if (unset("mu")) c.model.mu = c.region == SupportRegion::bounded ? -2.0 : 0.25;
    if (unset("k")) c.model.k_drift = 1.0;
  }
}

void cross_checks(const RunConfig& c) {
  try {
    c.model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const bool sampled = c.command == "profile" || c.command == "scaled" || (c.command == "figures" && c.which == "fig1");
  if (sampled && !c.x0 && c.points > 1 && !(c.x_lo < c.x_hi)) fail("x_hi", "must exceed x_lo");
  if (c.command == "moments" && !(c.t_hi > c.t_lo)) fail("t_hi", "must exceed t_lo");
  if (c.command == "profile" && c.case_name == "l1") {
    if (c.grid.x_min != 0.0) fail("x_min", "the radial solver needs x_min = 0");
    if (c.t > c.grid.t_max) fail("t", "exceeds t_max");
  }
  if (c.command == "special" && c.function == "fox_h") {
    if (c.h.lower.empty()) fail("lower", "Fox H needs at least one (b, B) pair");
    if (c.h.m > static_cast<int>(c.h.lower.size())) fail("m", "exceeds the number of lower pairs");
    if (c.h.n > static_cast<int>(c.h.upper.size())) fail("n", "exceeds the number of upper pairs");
  }
}

// ---- commands ----

std::vector<double> sample_grid(const RunConfig& c) {
  if (c.x0) return {*c.x0};
  std::vector<double> x(c.points);
  for (int i = 0; i < c.points; ++i) x[i] = c.points == 1 ? c.x_lo : c.x_lo + (c.x_hi - c.x_lo) * i / (c.points - 1.0);
  return x;
}

std::function<Estimate(double, double)> propagator(const RunConfig& c) {
  const ModelParams p = c.model;
  if (c.case_name == "case1") return [p](double x, double t) { return green_case1(x, t, p); };
  if (c.case_name == "case2") return [p](double x, double t) { return green_case2(x, t, p); };
  if (c.case_name == "drift")
    return [p](double x, double t) { return green_drift_power(x, t, p, -p.theta - 1.0); };
  if (c.case_name == "mixed") {
    const Truncation tr = c.trunc;
    return [p, tr](double x, double t) {
      const SeriesEstimate s = mixed_density(x, t, p, tr);
      return Estimate{s.value, s.error};
    };
  }
  throw ConfigError("key 'case': '" + c.case_name + "' has no pointwise propagator");
}

// L1 solution on the requested grid, with the difference to a half-resolution run as the error.
int run_l1_profile(const RunConfig& c) {
  const GridSpec fine = c.grid;
  GridSpec coarse = fine;
  coarse.nx /= 2;
  coarse.nt /= 2;
  const Profile pf = caputo_l1_green(c.model, fine, {c.t}).profiles.front();
  const Profile pc = caputo_l1_green(c.model, coarse, {c.t}).profiles.front();
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < pf.x.size(); ++i) {
    const double x = pf.x(i);
    // Linear interpolation of the coarse cell values (constant beyond the outer centres).
    const double u = std::clamp(x / coarse.dx() - 0.5, 0.0, coarse.nx - 1.0);
    const Eigen::Index j = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), coarse.nx - 2);
    const double w = u - j;
    const double rc = (1.0 - w) * pc.values(j) + w * pc.values(j + 1);
    rows.push_back({x, pf.values(i), std::abs(pf.values(i) - rc)});
  }
  write_csv(c.output, {"x", "rho", "error_estimate"}, rows);
  return 0;
}

int run_profile(const RunConfig& c) {
  if (c.case_name == "l1") return run_l1_profile(c);
  std::vector<std::vector<double>> rows;
  if (c.case_name == "mixed" && !c.x0) {
    const std::vector<double> xs = sample_grid(c);
    for (double x : xs)
      if (x == 0.0) throw DomainError("mixed_density: singular point x = 0");
    const std::vector<Estimate> rho = mixed_density_grid(xs, c.t, c.model);
    for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back({xs[i], rho[i].value, rho[i].error});
  } else {
    const auto g = propagator(c);
    for (double x : sample_grid(c)) {
      const Estimate e = g(x, c.t);
      rows.push_back({x, e.value, e.error});
    }
  }
  write_csv(c.output, {"x", "rho", "error_estimate"}, rows);
  return 0;
}

int run_special(const RunConfig& c, std::ostream&) {
  std::vector<std::vector<double>> rows;
  for (double z : c.z) {
    Estimate e;
    if (c.function == "gamma") {
      e = gamma_fn(z);
    } else if (c.function == "mittag_leffler") {
      MittagLefflerOptions o;
      o.tolerance = c.tol;
      e = mittag_leffler(c.a, c.b, z, o);
    } else if (c.function == "bessel_k") {
      e = bessel_k_mod(c.a, z);
    } else {
      FoxOptions o;
      o.abs_tol = c.tol;
      e = fox_h(c.h, z, o);
    }
    rows.push_back({z, e.value, e.error});
  }
  write_csv(c.output, {"z", "value", "error_estimate"}, rows);
  return 0;
}

int run_moments(const RunConfig& c, std::ostream& log) {
  if (c.case_name == "mixed" || c.case_name == "l1")
    throw ConfigError("key 'case': moments need a closed-form propagator with a finite second moment");
  const auto g = propagator(c);
  const double order = c.case_name == "case2" ? c.model.gamma + c.model.alpha_mem : c.model.gamma;
  std::vector<Profile> fam;
  for (int i = 0; i < c.times; ++i) {
    const double t = c.t_lo * std::pow(c.t_hi / c.t_lo, i / (c.times - 1.0));
    const double tt = 2.0 + c.model.theta;
    // Out to H argument 120, where the propagator has long underflowed.
    const double x_end = std::pow(120.0 * tt * tt * c.model.d_coeff * std::pow(t, order), 1.0 / tt);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(64, 1e-6 * x_end, x_end);
    fam.push_back(make_profile(x, [g, t](double xx) { return g(xx, t).value; }, t, c.model));
  }
  const MomentFit fit = second_moment_fit(fam);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < fit.times.size(); ++i) rows.push_back({fit.times[i], fit.second_moments[i]});
  write_csv(c.output, {"t", "second_moment"}, rows);
  ModelParams pe = c.model;
  pe.gamma = std::min(order, 1.0);
  log << "fitted_slope " << format_number(fit.slope) << "\n";
  if (order <= 1.0) log << "expected_slope " << format_number(moment_exponent(pe).exponent) << "\n";
  return 0;
}

ScaledSolutionSpec scaled_spec(const RunConfig& c) {
  return make_scaled_spec(c.model.mu, c.model.theta, c.region, c.model.n_dim, c.phi0);
}

int run_scaled(const RunConfig& c) {
  const ScaledSolutionSpec spec = scaled_spec(c);
  const double phi = phi_scale(c.t, spec, c.model);
  std::vector<std::vector<double>> rows;
  for (double x : sample_grid(c)) {
    const double rho = scaled_solution(x, c.t, spec, c.model);
    rows.push_back({x, rho, std::abs(x) / phi, std::pow(phi, c.model.n_dim) * rho});
  }
  write_csv(c.output, {"x", "rho", "x_over_phi", "scaled_rho"}, rows);
  return 0;
}

int run_figures(const RunConfig& c) {
  std::vector<std::vector<double>> rows;
  if (c.which == "fig1") {
    const double tt = 2.0 + c.model.theta;
    const double scale = fig1_scale(c.t, c.model);
    for (double x : sample_grid(c)) {
      const double arg = std::pow(std::abs(x), tt) / (tt * tt * c.model.d_coeff * std::pow(c.t, c.model.gamma));
      rows.push_back({arg, scale * green_case1(x, c.t, c.model).value});
    }
    write_csv(c.output, {"scaled_x", "scaled_rho"}, rows);
    return 0;
  }
  const ScaledSolutionSpec spec = scaled_spec(c);
  const double phi = phi_scale(c.t, spec, c.model);
  // Abscissa x / phi across the support (bounded) or a wide symmetric window.
  const double z_end = c.given.count("x_hi") ? c.x_hi : (c.region == SupportRegion::bounded ? 1.0 : 10.0);
  const double z_start = c.given.count("x_lo") ? c.x_lo : -z_end;
  const int n = c.given.count("points") ? c.points : 201;
  for (int i = 0; i < n; ++i) {
    const double z = n == 1 ? z_start : z_start + (z_end - z_start) * i / (n - 1.0);
    rows.push_back({z, std::pow(phi, c.model.n_dim) * scaled_solution(z * phi, c.t, spec, c.model)});
  }
  write_csv(c.output, {"x_over_phi", "scaled_rho"}, rows);
  return 0;
}

int run_verify(const RunConfig& c, std::ostream& log) {
  std::vector<int> ids = c.criteria;
  if (ids.empty()) ids = suite_criteria(c.suite == "full" ? SuiteKind::full : SuiteKind::core);
  std::vector<CheckResult> results;
  for (int id : ids) {
    results.push_back(run_criterion(id));
    log << (results.back().pass ? "PASS " : "FAIL ") << results.back().name << "\n";
  }
  const VerificationReport report =
      build_report(std::move(results), {{"suite", c.criteria.empty() ? c.suite : "custom"},
                                        {"timing", c.timing ? "included" : "omitted for reproducibility"}});
  const std::string text = report_json(report, c.timing);
  if (c.output == "-") {
    std::cout << text;
  } else {
    std::ofstream out(c.output);
    if (!out || !(out << text)) throw IoError("cannot write '" + c.output + "': " + std::strerror(errno));
  }
  return report.pass ? 0 : 1;
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  return std::string(buf, r.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
  if (path == "-") {
    std::cout << os.str();
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << os.str()) || !out.flush()) throw IoError("cannot write '" + path + "': " + std::strerror(errno));
}

std::optional<RunConfig> parse_config(int argc, const char* const* argv, std::ostream& help_out) {
  CLI::App app{"Fractional diffusion propagators, similarity solutions and verification"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> flag_values;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, bool> timing_flag;
  for (const auto& [cmd, description] : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd, description);
    sub->allow_extras();
    sub->add_option("--config", config_paths[cmd], "JSON file with the same keys");
    for (const Key& k : keys()) {
      if (!applies(k, cmd)) continue;
      if (k.name == "timing") {
        sub->add_flag("--timing", timing_flag[cmd], k.help);
        continue;
      }
      sub->add_option("--" + k.name, flag_values[cmd][k.name], k.help);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    help_out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    help_out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }
  CLI::App* sub = app.get_subcommands().front();

  RunConfig cfg;
  cfg.command = sub->get_name();
  for (const std::string& extra : sub->remaining()) {
    std::string name = extra;
    if (name.rfind("--", 0) == 0) name = name.substr(2);
    name = name.substr(0, name.find('='));
    const Key* k = find_key(name);
    if (k && !applies(*k, cfg.command)) throw ConfigError("key '" + name + "' is not used by '" + cfg.command + "'");
    throw ConfigError(k ? "unexpected argument '" + extra + "'" : "unknown key '" + name + "'");
  }

  std::map<std::string, std::string> merged;
  if (sub->get_option("--config")->count()) merged = read_config_file(config_paths[cfg.command], cfg.command);
  for (const Key& k : keys()) {
    if (!applies(k, cfg.command)) continue;
    const std::string opt = "--" + k.name;
    if (sub->get_option(opt)->count()) {
      merged[k.name] = k.name == "timing" ? "true" : flag_values[cfg.command][k.name];
    }
  }
  // Keys that switch defaults (case, region, which) go first so later keys can override them.
  for (const char* first : {"case", "region", "which"})
    if (merged.count(first)) find_key(first)->apply(cfg, merged.at(first));
  for (const auto& [name, raw] : merged) cfg.given.insert(name);
  for (const auto& [name, raw] : merged) find_key(name)->apply(cfg, raw);
  command_defaults(cfg);
  cross_checks(cfg);
  return cfg;
}

int run_command(const RunConfig& cfg, std::ostream& log) {
  if (cfg.command == "special") return run_special(cfg, log);
  if (cfg.command == "profile") return run_profile(cfg);
  if (cfg.command == "verify") return run_verify(cfg, log);
  if (cfg.command == "moments") return run_moments(cfg, log);
  if (cfg.command == "scaled") return run_scaled(cfg);
  if (cfg.command == "figures") return run_figures(cfg);
  throw ConfigError("unknown subcommand '" + cfg.command + "'");
}

}  // namespace fracdiff::cli
