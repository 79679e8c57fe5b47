#include "diffract/commands.hpp"
#include "diffract/errors.hpp"

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace diffract;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "diffract_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DIFFRACT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// drops the last (wall-clock) column of every line
std::string without_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
    out += line + "\n";
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("config parsing applies defaults") {
  const auto c = parse_config(R"({"preset": "paper-example-2d", "problem": "elliptic", "points": [[0.9, 0.05]]})");
  CHECK(c.N == 100000);
  CHECK(c.h == 1e-4);
  CHECK(c.domain == "unit-disc");
  CHECK(c.epsilon(1e-4) == Catch::Approx(0.1));
  CHECK(c.scheme == SchemeKind::Transformed);
  CHECK(base_step(c) == 1e-4);
}

TEST_CASE("config parsing rejects bad documents") {
  CHECK_THROWS_AS(parse_config(R"({"preset": "constant", "points": [[0, 0]], "T": 1, "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"points": [[0, 0]], "T": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"preset": "constant", "T": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"preset": "constant", "points": [[0, 0]]})"), ConfigError);  // T
  CHECK_THROWS_AS(parse_config(R"({"preset": "nope", "points": [[0]], "T": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"preset": "piecewise-constant-1d", "points": [[0, 1]], "T": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"preset": "constant", "points": [[0, 0]], "T": 1, "h": 0.3})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"preset": "constant", "points": [[0, 0]], "T": 1, "n": 10, "h": 0.1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"preset": "constant", "points": [[0, 0]], "T": 1, "N": -5})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"preset": "constant", "points": [[0, 0]], "problem": "elliptic"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"preset": "constant", "points": [[0, 0]], "T": 1, "epsilon_rule": "h^x"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("estimate on the constant preset") {
  // a = I / 2 in 2D: E|X_T|^2 = |x0|^2 + d T
  const auto c = parse_config(
      R"({"preset": "constant", "value": 0.5, "dim": 2, "points": [[0.3, 0.4]], "T": 0.5, "n": 10, "N": 20000, "seed": 4})");
  const auto out = cmd_estimate(c, 2);
  CHECK(out.exit_code == kExitOk);
  std::istringstream in(out.csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "point_x,point_y,h,N,estimate,stderr,crossings,corrections,excluded,seconds");
  const auto cells = split(row);
  REQUIRE(cells.size() == 10);
  const double est = std::stod(cells[4]), se = std::stod(cells[5]);
  CHECK(std::abs(est - (0.25 + 1.0)) <= 4.0 * se);
  CHECK(cells[3] == "20000");
}

TEST_CASE("re-running reproduces the csv apart from timings") {
  const auto c = parse_config(
      R"({"preset": "paper-example-2d", "points": [[0, 0.05], [0.5, -0.2]], "T": 0.01, "h": 0.001, "N": 3000})");
  const auto a = cmd_estimate(c, 1);
  const auto b = cmd_estimate(c, 3);
  CHECK(without_seconds(a.csv) == without_seconds(b.csv));
}

TEST_CASE("converge on the constant preset reports noise") {
  const auto c = parse_config(
      R"({"preset": "constant", "value": 0.5, "dim": 1, "points": [[0.2]], "T": 1, "h_list": [0.25, 0.125, 0.0625],
          "N": 4000, "reference": 1.04, "payoff": "square"})");
  const auto out = cmd_converge(c, 0);
  CHECK(out.summary.find("noise-dominated") != std::string::npos);
  CHECK(out.csv.rfind("# preset=constant", 0) == 0);
}

TEST_CASE("converge on the 1D benchmark against the oracle") {
  const auto c = parse_config(
      R"({"preset": "piecewise-constant-1d", "points": [[0.1]], "T": 1, "h_list": [0.25, 0.125, 0.0625],
          "N": 200000, "reference": "reference1d"})");
  const auto out = cmd_converge(c, 0);
  INFO(out.csv << out.summary);
  CHECK(out.summary.find("slope") == 0);
  CHECK(out.json.find("\"slope\"") != std::string::npos);
}

TEST_CASE("compare under continuous coefficients gives identical columns") {
  const auto c = parse_config(
      R"({"preset": "constant", "value": 1.0, "dim": 2, "points": [[0.1, 0.02]], "T": 0.1, "h": 0.01, "N": 2000,
          "domain": "unit-disc", "payoff": "square"})");
  const auto out = cmd_compare(c, 0);
  std::istringstream in(out.csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  const auto cells = split(row);
  REQUIRE(cells.size() == 10);
  CHECK(cells[4] == cells[6]);
  CHECK(cells[5] == cells[7]);
  CHECK(cells[8].empty());
}

TEST_CASE("oracle1d passes, and fails with corrections disabled") {
  const std::string base = R"({"preset": "piecewise-constant-1d", "points": [[0.1]], "T": 1, "n": 200, "N": 300)";
  CHECK(cmd_oracle1d(parse_config(base + "}"), 0).exit_code == kExitOk);
  CHECK(cmd_oracle1d(parse_config(base + R"(, "a_plus": 1.5, "a_minus": 1.5})"), 0).exit_code == kExitOk);
  CHECK(cmd_oracle1d(parse_config(base + R"(, "apply_correction": false})"), 0).exit_code == kExitNumerical);
}

TEST_CASE("diagnose tabulates ratios") {
  const auto c = parse_config(
      R"({"preset": "paper-example-2d", "points": [[0, 0.05]], "T": 0.01, "h_list": [0.001, 0.00025], "N": 2000})");
  const auto out = cmd_diagnose(c, 0);
  std::istringstream in(out.csv);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "point_x,point_y,h,N,S,stderr,ratio,excluded,seconds");
  CHECK(split(first)[6].empty());
  const double ratio = std::stod(split(second)[6]);
  CHECK(ratio > 0.0);
  CHECK(ratio < 1.0);
}

TEST_CASE("command-line exit codes and output files") {
  const auto good = write_file("good.json",
                               R"({"preset": "piecewise-constant-1d", "points": [[0.1]], "T": 1, "n": 100, "N": 200})");
  const auto bad = write_file("bad.json", R"({"preset": "piecewise-constant-1d", "points": [[0.1]], "T": 1, "extra": 0})");
  const auto broken = write_file(
      "broken.json",
      R"({"preset": "piecewise-constant-1d", "points": [[0.1]], "T": 1, "n": 100, "N": 200, "apply_correction": false})");
  const auto out = scratch("estimate.csv");
  fs::remove(out);

  CHECK(run_cli("estimate --config " + good.string() + " --out " + out.string()) == 0);
  CHECK(read_file(out).rfind("point_x,point_y,h,N,estimate", 0) == 0);
  CHECK(run_cli("estimate --config " + bad.string()) == 1);
  CHECK(run_cli("estimate --config " + scratch("missing.json").string()) == 1);
  CHECK(run_cli("oracle1d --config " + good.string() + " --json") == 0);
  CHECK(run_cli("oracle1d --config " + broken.string()) == 2);
  CHECK(run_cli("bogus") == 1);

  const auto first = scratch("seeded_a.csv"), second = scratch("seeded_b.csv");
  CHECK(run_cli("estimate --config " + good.string() + " --seed 9 --workers 1 --out " + first.string()) == 0);
  CHECK(run_cli("estimate --config " + good.string() + " --seed 9 --workers 3 --out " + second.string()) == 0);
  CHECK(without_seconds(read_file(first)) == without_seconds(read_file(second)));
}
