#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bergbep/io.hpp"
#include "cli.hpp"

using namespace bergbep;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(BERGBEP_TEST_DATA) / "data";

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("bergbep_cli_" + std::to_string(std::random_device{}()));
  TempDir() { fs::create_directories(path); }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

int run(std::vector<std::string> args) { return cli::run(args); }

std::vector<std::vector<double>> read_csv(const std::string& path, std::string* header = nullptr) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell.empty() ? NAN : std::stod(cell));
    if (!line.empty() && line.back() == ',') row.push_back(NAN);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("solve-bep on the saturated fixture") {
  TempDir tmp;
  REQUIRE(run({"solve-bep", "--problem", (kData / "bep_saturated.json").string(), "--out", tmp / "s.json",
               "--oracle"}) == cli::kOk);
  const SolutionFile s = solution_from_json(read_text(tmp / "s.json"));
  CHECK(s.active);
  CHECK(std::abs(s.err_J - 0.1) <= 1e-8 * 0.1);
  CHECK(s.coefficients.size() == 17);
  REQUIRE(s.oracle.has_value());
  CHECK(s.oracle->max_coefficient_delta <= 1e-6);
  CHECK(s.tool == "bergbep");
}

TEST_CASE("solve-bep exit codes") {
  TempDir tmp;
  const auto solve = [&](const std::string& file) {
    return run({"solve-bep", "--problem", (kData / file).string(), "--out", tmp / "o.json"});
  };
  CHECK(solve("bep_attainable.json") == cli::kOk);
  CHECK(solution_from_json(read_text(tmp / "o.json")).err_K <= 1e-10);
  CHECK(solve("bep_infeasible.json") == cli::kInfeasible);
  CHECK(solve("bep_nonconvergent.json") == cli::kNonConvergence);
  CHECK(solve("bad_schema.json") == cli::kIoOrSchema);
  CHECK(solve("does_not_exist.json") == cli::kIoOrSchema);
  CHECK(solve("fbep_saturated.json") == cli::kIoOrSchema);
  CHECK(run({"solve-bep"}) == cli::kIoOrSchema);
  CHECK(run({"frobnicate"}) == cli::kIoOrSchema);
  CHECK(run({}) == cli::kIoOrSchema);
}

TEST_CASE("solve-fbep") {
  TempDir tmp;
  REQUIRE(run({"solve-fbep", "--problem", (kData / "fbep_saturated.json").string(), "--out", tmp / "f.json"}) ==
          cli::kOk);
  const SolutionFile s = solution_from_json(read_text(tmp / "f.json"));
  CHECK(s.type == "fbep");
  CHECK(s.active);
  CHECK(std::abs(s.err_J - 0.4) <= 1e-6 * 0.4);
  REQUIRE(s.conjecture_residual.has_value());
  CHECK(*s.conjecture_residual <= 1e-4);
  CHECK(s.element_labels.front() == "e_0");
}

TEST_CASE("spectrum") {
  TempDir tmp;
  std::string header;
  REQUIRE(run({"spectrum", "--region", "radial:0.5", "--degree", "8", "--out", tmp / "r.csv"}) == cli::kOk);
  const auto radial = read_csv(tmp / "r.csv", &header);
  CHECK(header == "index,eigenvalue,closed_form");
  REQUIRE(radial.size() == 9);
  for (int n = 0; n <= 8; ++n) {
    CHECK(std::abs(radial[n][1] - std::pow(0.25, n + 1)) <= 1e-12);
    CHECK(radial[n][2] == std::pow(0.25, n + 1));
  }

  REQUIRE(run({"spectrum", "--region", "full", "--degree", "5", "--out", tmp / "f.csv"}) == cli::kOk);
  for (const auto& row : read_csv(tmp / "f.csv")) CHECK(std::abs(row[1] - 1.0) <= 1e-12);

  REQUIRE(run({"spectrum", "--region", "sector:1.5708", "--degree", "8", "--out", tmp / "s.csv"}) == cli::kOk);
  double trace = 0.0;
  for (const auto& row : read_csv(tmp / "s.csv")) {
    CHECK(row[1] >= -1e-10);
    CHECK(row[1] <= 1.0 + 1e-10);
    CHECK(std::isnan(row[2]));
    trace += row[1];
  }
  CHECK(trace == doctest::Approx(9.0 * 0.5).epsilon(1e-4));

  CHECK(run({"spectrum", "--region", "wedge:1", "--out", tmp / "w.csv"}) == cli::kIoOrSchema);
  CHECK(run({"spectrum", "--region", "radial:0.5", "--degree", "-1"}) == cli::kIoOrSchema);
}

TEST_CASE("lambda-sweep") {
  TempDir tmp;
  REQUIRE(run({"lambda-sweep", "--problem", (kData / "bep_sweep.json").string(), "--m-values", "0.4,0.2,0.1,0.05",
               "--out", tmp / "l.csv"}) == cli::kOk);
  std::string header;
  const auto rows = read_csv(tmp / "l.csv", &header);
  CHECK(header == "M,lambda,err_K,err_J,active");
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][1] > rows[i - 1][1]);
    CHECK(rows[i][2] >= rows[i - 1][2]);
  }
  for (const auto& row : rows) CHECK(std::abs(row[3] - row[0]) <= 1e-8 * std::max(1.0, row[0]));

  REQUIRE(run({"lambda-sweep", "--problem", (kData / "fbep_saturated.json").string(), "--m-values", "0.6,0.4",
               "--out", tmp / "fl.csv"}) == cli::kOk);
  const auto frows = read_csv(tmp / "fl.csv");
  REQUIRE(frows.size() == 2);
  CHECK(frows[1][1] > frows[0][1]);

  CHECK(run({"lambda-sweep", "--problem", (kData / "bep_sweep.json").string(), "--m-values", "0.4,x"}) ==
        cli::kIoOrSchema);
  CHECK(run({"lambda-sweep", "--problem", (kData / "bep_infeasible.json").string(), "--m-values", "0.5", "--out",
             tmp / "x.csv"}) == cli::kInfeasible);
}

TEST_CASE("project and teodorescu") {
  TempDir tmp;
  REQUIRE(run({"project", "--function", "z_bar", "--degree", "8", "--out", tmp / "p.json"}) == cli::kOk);
  const FunctionSpec p = function_spec_from_json(read_text(tmp / "p.json"));
  REQUIRE(p.kind == FunctionSpec::Kind::Coeffs);
  CHECK(p.values.size() == 9);
  for (const Complex& c : p.values) CHECK(std::abs(c) <= 1e-12);

  REQUIRE(run({"project", "--function", "const:2,1", "--degree", "4", "--out", tmp / "c.json"}) == cli::kOk);
  const FunctionSpec c = function_spec_from_json(read_text(tmp / "c.json"));
  CHECK(std::abs(c.values[0] - Complex(2.0, 1.0)) <= 1e-12);

  REQUIRE(run({"project", "--function", "@" + (tmp / "c.json"), "--degree", "4", "--out", tmp / "cc.json"}) ==
          cli::kOk);
  CHECK(std::abs(function_spec_from_json(read_text(tmp / "cc.json")).values[0] - Complex(2.0, 1.0)) <= 1e-12);

  CHECK(run({"project", "--function", "z_bar", "--degree", "40", "--grid", "8,16"}) == cli::kIoOrSchema);
  CHECK(run({"project", "--function", "z_bar", "--grid", "8x16"}) == cli::kIoOrSchema);

  REQUIRE(run({"teodorescu", "--function", "const", "--grid", "16,32", "--out", tmp / "t.csv"}) == cli::kOk);
  std::string header;
  const auto rows = read_csv(tmp / "t.csv", &header);
  CHECK(header == "ring,q,x,y,re,im");
  CHECK(rows.size() == 16 * 32);
  double worst = 0.0;
  for (const auto& r : rows) {
    if (std::hypot(r[2], r[3]) <= 0.9) worst = std::max(worst, std::hypot(r[4] - r[2], r[5] + r[3]));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("reruns are byte-identical") {
  TempDir tmp;
  const std::string problem = (kData / "bep_saturated.json").string();
  REQUIRE(run({"solve-bep", "--problem", problem, "--out", tmp / "a.json"}) == cli::kOk);
  REQUIRE(run({"solve-bep", "--problem", problem, "--out", tmp / "b.json"}) == cli::kOk);
  CHECK(read_text(tmp / "a.json") == read_text(tmp / "b.json"));

  const std::string fproblem = (kData / "fbep_saturated.json").string();
  REQUIRE(run({"solve-fbep", "--problem", fproblem, "--out", tmp / "c.json"}) == cli::kOk);
  REQUIRE(run({"solve-fbep", "--problem", fproblem, "--out", tmp / "d.json"}) == cli::kOk);
  CHECK(read_text(tmp / "c.json") == read_text(tmp / "d.json"));
}

TEST_CASE("unwritable output is an I/O failure") {
  CHECK(run({"spectrum", "--region", "full", "--out", "/nonexistent/dir/x.csv"}) == cli::kIoOrSchema);
}
