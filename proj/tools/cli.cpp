#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bergbep/bep.hpp"
#include "bergbep/bergman.hpp"
#include "bergbep/error.hpp"
#include "bergbep/fbep.hpp"
#include "bergbep/io.hpp"
#include "bergbep/version.hpp"
#include "bergbep/vekua.hpp"

namespace bergbep::cli {

namespace {

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level log_level() {
  const char* env = std::getenv("BERGBEP_LOG");
  if (env == nullptr) return Level::Error;
  const std::string v(env);
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  return Level::Error;
}

void log(Level level, const std::string& msg) {
  if (level > log_level()) return;
  static const char* names[] = {"error", "info", "debug"};
  std::cerr << "bergbep[" << names[static_cast<int>(level)] << "]: " << msg << "\n";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible:
      return kInfeasible;
    case ErrorKind::NonConvergence:
      return kNonConvergence;
    default:
      return kIoOrSchema;
  }
}

// Shortest representation that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

GridSpec parse_grid(const std::string& text) {
  const auto comma = text.find(',');
  require(comma != std::string::npos, ErrorKind::Schema, "grid must be given as N_R,N_THETA");
  try {
    return GridSpec{std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
  } catch (const std::exception&) {
    fail(ErrorKind::Schema, "cannot read grid sizes from '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == item.size() && used > 0, ErrorKind::Schema, "cannot read '" + item + "' as a number");
    out.push_back(v);
  }
  require(!out.empty(), ErrorKind::Schema, "empty value list");
  return out;
}

ProblemFile load_problem(const std::string& path, const std::string& expected) {
  ProblemFile p = problem_from_json(read_text(path));
  require(p.type == expected, ErrorKind::Schema,
          "problem type is '" + p.type + "', this command expects '" + expected + "'");
  return p;
}

// Commands

int solve_bep_cmd(const std::string& problem, const std::string& out, bool oracle) {
  const ProblemFile pf = load_problem(problem, "bep");
  const BepProblem p = make_bep_problem(pf);
  const BepOptions opt = pf.options.bep();
  log(Level::Debug, "grid " + std::to_string(p.grid()->ring_count()) + " rings x " +
                        std::to_string(p.grid()->angular_count()) + " angles, region K = " + p.K.describe());
  const BepSolution s = solve_bep(p, opt);
  log(Level::Info, "lambda = " + num(s.lambda) + ", err_K = " + num(s.err_K) + ", err_J = " + num(s.err_J) +
                       ", kkt = " + num(s.kkt_residual) + (s.active ? " (saturated)" : " (inactive)"));
  SolutionFile sf = make_solution_file(pf, s);
  if (oracle) {
    const BepSolution o = solve_bep_oracle(p, opt);
    double delta = 0.0;
    for (std::size_t n = 0; n < s.g0.coeffs.size(); ++n) {
      delta = std::max(delta, std::abs(s.g0.coeffs[n] - o.g0.coeffs[n]));
    }
    sf.oracle = OracleDelta{o.lambda, delta};
    log(Level::Info, "oracle lambda = " + num(o.lambda) + ", max coefficient delta = " + num(delta));
  }
  emit(out, to_json(sf));
  return kOk;
}

int solve_fbep_cmd(const std::string& problem, const std::string& out) {
  const ProblemFile pf = load_problem(problem, "fbep");
  const FbepProblem p = make_fbep_problem(pf);
  const FbepSolution s = solve_fbep(p, pf.options.bep());
  log(Level::Info, "basis of " + std::to_string(s.basis->size()) + " lifted elements, min Gram eigenvalue " +
                       num(s.basis->min_eigenvalue));
  log(Level::Info, "lambda = " + num(s.lambda) + ", err_K = " + num(s.err_K) + ", err_J = " + num(s.err_J) +
                       ", kkt = " + num(s.kkt_residual));
  emit(out, to_json(make_solution_file(pf, p, s)));
  return kOk;
}

int spectrum_cmd(const std::string& region_text, int degree, const std::string& out) {
  const Region region = parse_region(region_text);
  require(degree >= 0, ErrorKind::Schema, "degree must be non-negative");
  const std::vector<double> values = spectrum(gram(region, degree));

  std::vector<double> closed;
  if (region.shape() == Region::Shape::FullDisc) {
    closed.assign(values.size(), region.complemented() ? 0.0 : 1.0);
  } else if (region.shape() == Region::Shape::RadialDisc) {
    const double a2 = region.parameter() * region.parameter();
    for (int n = 0; n <= degree; ++n) {
      const double d = std::pow(a2, n + 1);
      closed.push_back(region.complemented() ? 1.0 - d : d);
    }
    std::sort(closed.begin(), closed.end(), std::greater<>());
  }
  std::ostringstream os;
  os << "index,eigenvalue,closed_form\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << i << "," << num(values[i]) << "," << (closed.empty() ? std::string() : num(closed[i])) << "\n";
  }
  emit(out, os.str());
  return kOk;
}

int project_cmd(const std::string& function, int degree, const std::string& grid_text, const std::string& out) {
  const FunctionSpec spec = parse_function_shorthand(function);
  const GridPtr grid = make_grid(parse_grid(grid_text), Region::full_disc());
  const AnalyticCoeffs c = project(sample(spec, grid), degree);
  emit(out, to_json(FunctionSpec::coefficients(c.coeffs)));
  return kOk;
}

int teodorescu_cmd(const std::string& function, const std::string& grid_text, const std::string& out) {
  const FunctionSpec spec = parse_function_shorthand(function);
  const GridPtr grid = make_grid(parse_grid(grid_text), Region::full_disc());
  const GridFunction t = teodorescu(sample(spec, grid));
  std::ostringstream os;
  os << "ring,q,x,y,re,im\n";
  for (int i = 0; i < grid->ring_count(); ++i) {
    for (int q = 0; q < grid->angular_count(); ++q) {
      const std::size_t idx = grid->index(i, q);
      const Complex z = grid->node(idx);
      os << i << "," << q << "," << num(z.real()) << "," << num(z.imag()) << "," << num(t[idx].real()) << ","
         << num(t[idx].imag()) << "\n";
    }
  }
  emit(out, os.str());
  return kOk;
}

int lambda_sweep_cmd(const std::string& problem, const std::string& m_values, const std::string& out) {
  ProblemFile pf = problem_from_json(read_text(problem));
  const std::vector<double> ms = parse_list(m_values);
  std::ostringstream os;
  os << "M,lambda,err_K,err_J,active\n";
  if (pf.type == "fbep") {
    FbepProblem p = make_fbep_problem(pf);
    auto basis = std::make_shared<const VekuaBasis>(
        build_fbep_space(p.f, p.degree, p.lift_tolerance, p.lift_max_iterations));
    for (double m : ms) {
      p.M = m;
      const FbepSolution s = solve_fbep(p, basis, pf.options.bep());
      os << num(m) << "," << num(s.lambda) << "," << num(s.err_K) << "," << num(s.err_J) << "," << s.active << "\n";
    }
  } else {
    BepProblem p = make_bep_problem(pf);
    for (double m : ms) {
      p.M = m;
      const BepSolution s = solve_bep(p, pf.options.bep());
      log(Level::Debug, "M = " + num(m) + ": lambda = " + num(s.lambda));
      os << num(m) << "," << num(s.lambda) << "," << num(s.err_K) << "," << num(s.err_J) << "," << s.active << "\n";
    }
  }
  emit(out, os.str());
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Bounded extremal problems in Bergman and Bergman-Vekua spaces on the unit disc", "bergbep"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string problem;
  std::string out = "-";
  bool oracle = false;
  std::string region;
  std::string function;
  std::string grid = "32,64";
  std::string m_values;
  int degree = 16;

  auto* bep = app.add_subcommand("solve-bep", "Solve a BEP problem file");
  bep->add_option("--problem", problem, "Problem JSON")->required();
  bep->add_option("--out", out, "Solution JSON ('-' for stdout)");
  bep->add_flag("--oracle", oracle, "Cross-check with the eigen/secular oracle");

  auto* fbep = app.add_subcommand("solve-fbep", "Solve an f-BEP problem file");
  fbep->add_option("--problem", problem, "Problem JSON")->required();
  fbep->add_option("--out", out, "Solution JSON ('-' for stdout)");

  auto* spec = app.add_subcommand("spectrum", "Eigenvalues of the Toeplitz matrix of a region");
  spec->add_option("--region", region, "full, radial:a, annulus:a, sector:theta [,complement]")->required();
  spec->add_option("--degree", degree, "Truncation degree N");
  spec->add_option("--out", out, "CSV output ('-' for stdout)");

  auto* proj = app.add_subcommand("project", "Bergman projection coefficients of a function");
  proj->add_option("--function", function, "Function spec, e.g. z_bar, exp_x:0.1, @file.json")->required();
  proj->add_option("--degree", degree, "Truncation degree N");
  proj->add_option("--grid", grid, "Grid size N_R,N_THETA");
  proj->add_option("--out", out, "JSON output ('-' for stdout)");

  auto* teo = app.add_subcommand("teodorescu", "Teodorescu transform sampled on the grid nodes");
  teo->add_option("--function", function, "Function spec")->required();
  teo->add_option("--grid", grid, "Grid size N_R,N_THETA");
  teo->add_option("--out", out, "CSV output ('-' for stdout)");

  auto* sweep = app.add_subcommand("lambda-sweep", "Multiplier and errors over a list of constraint levels");
  sweep->add_option("--problem", problem, "Problem JSON")->required();
  sweep->add_option("--m-values", m_values, "Comma-separated M values")->required();
  sweep->add_option("--out", out, "CSV output ('-' for stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kIoOrSchema;
  }

  try {
    if (*bep) return solve_bep_cmd(problem, out, oracle);
    if (*fbep) return solve_fbep_cmd(problem, out);
    if (*spec) return spectrum_cmd(region, degree, out);
    if (*proj) return project_cmd(function, degree, grid, out);
    if (*teo) return teodorescu_cmd(function, grid, out);
    if (*sweep) return lambda_sweep_cmd(problem, m_values, out);
  } catch (const Error& e) {
    log(Level::Error, e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    log(Level::Error, e.what());
    return kIoOrSchema;
  }
  return kIoOrSchema;
}

}  // namespace bergbep::cli
