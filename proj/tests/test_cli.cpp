#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "cli.hpp"

using namespace fracdiff;
using cli::ConfigError;
using cli::RunConfig;

namespace {

namespace fs = std::filesystem;

RunConfig parse(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"fracdiff"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream help;
  const auto cfg = cli::parse_config(static_cast<int>(argv.size()), argv.data(), help);
  REQUIRE(cfg.has_value());
  return *cfg;
}

std::string parse_error(const std::vector<std::string>& args) {
  try {
    parse(args);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "fracdiff_cli_test";
  fs::create_directories(d);
  return d;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(FRACDIFF_TOOL) + " " + args + " 2> " + (scratch_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("parse_config: a plain profile request") {
  const RunConfig c = parse({"profile", "--case", "case1", "--gamma", "0.5", "--theta", "0", "--ndim", "1", "--t", "1"});
  CHECK(c.command == "profile");
  CHECK(c.case_name == "case1");
  CHECK(c.model.gamma == 0.5);
  CHECK(c.model.n_dim == 1);
  CHECK(c.t == 1.0);
}

TEST_CASE("parse_config: range violations and malformed values name the key") {
  CHECK(parse_error({"profile", "--gamma", "1.5"}).find("'gamma'") != std::string::npos);
  CHECK(parse_error({"profile", "--gamma", "0.5x"}).find("malformed number") != std::string::npos);
  CHECK(parse_error({"profile", "--ndim", "0"}).find("'ndim'") != std::string::npos);
  CHECK(parse_error({"profile", "--case", "case9"}).find("'case'") != std::string::npos);
  CHECK(parse_error({"verify", "--criteria", "1,11"}).find("'criteria'") != std::string::npos);
  CHECK(parse_error({"profile", "--x_lo", "2", "--x_hi", "1"}).find("'x_hi'") != std::string::npos);
}

TEST_CASE("parse_config: unknown keys are rejected") {
  CHECK(parse_error({"profile", "--bogus", "1"}) == "unknown key 'bogus'");
  CHECK(parse_error({"verify", "--gamma", "0.5"}).find("not used by 'verify'") != std::string::npos);
  const fs::path f = write_file("unknown.json", R"({"gamma": 0.5, "colour": "red"})");
  CHECK(parse_error({"profile", "--config", f.string()}).find("unknown key 'colour'") != std::string::npos);
}

TEST_CASE("parse_config: flag over file over default") {
  const fs::path f = write_file("gamma.json", R"({"gamma": 0.5, "theta": 0.25})");
  const RunConfig file_only = parse({"profile", "--config", f.string()});
  CHECK(file_only.model.gamma == 0.5);
  CHECK(file_only.model.theta == 0.25);
  const RunConfig both = parse({"profile", "--config", f.string(), "--gamma", "0.8"});
  CHECK(both.model.gamma == 0.8);
  CHECK(both.model.theta == 0.25);
  CHECK(parse({"profile"}).model.gamma == 1.0);
  const fs::path bad = write_file("bad.json", R"({"gamma": 1.5})");
  CHECK(parse_error({"profile", "--config", bad.string()}).find("'gamma'") != std::string::npos);
  const fs::path arr = write_file("arr.json", R"({"criteria": [1, 9], "timing": true})");
  const RunConfig v = parse({"verify", "--config", arr.string()});
  CHECK(v.criteria == std::vector<int>{1, 9});
  CHECK(v.timing);
}

TEST_CASE("parse_config: case-dependent defaults yield to explicit keys") {
  const RunConfig m = parse({"profile", "--case", "mixed"});
  CHECK(m.model.mu == 1.5);
  CHECK(m.model.kernel == KernelKind::power_law);
  CHECK(parse({"profile", "--case", "mixed", "--mu", "1.2"}).model.mu == 1.2);
  CHECK(parse({"figures", "--which", "fig2"}).model.mu == -2.0);
  CHECK(parse({"figures", "--which", "fig3"}).model.mu == 0.25);
}

TEST_CASE("format_number and write_csv") {
  CHECK(cli::format_number(1.0 / 3.0) == "0.333333333333333");
  CHECK(cli::format_number(1e-20) == "1e-20");
  const fs::path out = scratch_dir() / "three.csv";
  cli::write_csv(out.string(), {"x", "rho"}, {{1, 2}, {3, 4}, {5, 6}});
  const auto ls = lines(slurp(out));
  CHECK(ls.size() == 4);
  CHECK(ls[0] == "x,rho");
  CHECK(ls[3] == "5,6");
  CHECK_THROWS_AS(cli::write_csv("/nonexistent_dir/x.csv", {"x"}, {{1}}), cli::IoError);
}

TEST_CASE("tool: profile CSV, determinism, singular point, unwritable output") {
  const fs::path a = scratch_dir() / "a.csv", b = scratch_dir() / "b.csv";
  const std::string args = "profile --case case1 --gamma 0.5 --theta 0.5 --ndim 2 --points 25 --output ";
  REQUIRE(run_tool(args + a.string()) == 0);
  REQUIRE(run_tool(args + b.string()) == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  const auto ls = lines(text);
  CHECK(ls.size() == 26);
  CHECK(ls[0] == "x,rho,error_estimate");
  CHECK(run_tool("profile --case mixed --x0 0 --output " + (scratch_dir() / "m.csv").string()) != 0);
  CHECK(slurp(scratch_dir() / "stderr.txt").find("singular") != std::string::npos);
  CHECK(run_tool("profile --x0 1 --output /nonexistent_dir/p.csv") == 3);
  CHECK(run_tool("profile --gamma 2") == 2);
}

TEST_CASE("tool: figures fig1 columns follow the caption scaling") {
  const fs::path out = scratch_dir() / "fig1.csv";
  REQUIRE(run_tool("figures --which fig1 --gamma 0.5 --theta 0.5 --points 5 --x_lo 0.5 --x_hi 2.5 --output " +
                   out.string()) == 0);
  const auto ls = lines(slurp(out));
  REQUIRE(ls.size() == 6);
  CHECK(ls[0] == "scaled_x,scaled_rho");
  // x = 0.5: x^{2.5} / (2.5^2 D t^gamma)
  CHECK(std::stod(ls[1].substr(0, ls[1].find(','))) == doctest::Approx(std::pow(0.5, 2.5) / 6.25).epsilon(1e-12));
}

TEST_CASE("tool: fig2 vanishes outside the unit interval") {
  const fs::path out = scratch_dir() / "fig2.csv";
  REQUIRE(run_tool("figures --which fig2 --points 5 --x_lo -1.5 --x_hi 1.5 --output " + out.string()) == 0);
  const auto ls = lines(slurp(out));
  REQUIRE(ls.size() == 6);
  CHECK(ls[1] == "-1.5,0");
  CHECK(ls[5] == "1.5,0");
}

TEST_CASE("tool: verify writes a reproducible report and its exit status") {
  const fs::path a = scratch_dir() / "v1.json", b = scratch_dir() / "v2.json";
  REQUIRE(run_tool("verify --criteria 1,9 --output " + a.string()) == 0);
  REQUIRE(run_tool("verify --criteria 1,9 --output " + b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  const auto j = nlohmann::json::parse(slurp(a));
  CHECK(j["summary"] == "pass");
  CHECK(j["checks"].size() == 2);
  CHECK(j["checks"][0]["runtime_s"].is_null());
  REQUIRE(run_tool("verify --criteria 9 --timing --output " + a.string()) == 0);
  CHECK(nlohmann::json::parse(slurp(a))["checks"][0]["runtime_s"].is_number());
}

TEST_CASE("tool: moments prints the fitted slope") {
  const fs::path out = scratch_dir() / "mom.csv";
  REQUIRE(run_tool("moments --case case1 --gamma 0.5 --output " + out.string()) == 0);
  CHECK(lines(slurp(out)).size() == 8);
  CHECK(slurp(scratch_dir() / "stderr.txt").find("fitted_slope 0.5") != std::string::npos);
}
