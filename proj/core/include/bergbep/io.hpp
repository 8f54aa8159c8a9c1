#pragma once

// JSON problem and solution files. Complex numbers are [re, im] pairs.
// Parsing failures throw Error with ErrorKind::Schema, file access failures
// ErrorKind::Io.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bergbep/bep.hpp"
#include "bergbep/disc.hpp"
#include "bergbep/fbep.hpp"
#include "bergbep/vekua.hpp"

namespace bergbep {

inline constexpr std::string_view kProblemSchema = "bergbep.problem/1";
inline constexpr std::string_view kSolutionSchema = "bergbep.solution/1";
inline constexpr std::string_view kLambdaConvention =
    "lambda in (-1, inf) with (I + lambda P chi_J) g0 = P(h_K v (lambda + 1) h_J); "
    "lambda = mu - 1 for the multiplier mu of the squared constraint";

/// Data on the disc: coefficients in e_n, a named closed form, or node values.
///
/// Builtins: const (value), z_bar, abs2, exp_x (rate), exp_xy (rate), basis (index).
struct FunctionSpec {
  enum class Kind { Coeffs, Builtin, Grid };

  Kind kind = Kind::Builtin;
  std::string name;
  Complex value{1.0, 0.0};
  double rate = 0.0;
  int index = 0;
  std::vector<Complex> values;  // coefficients or node values

  static FunctionSpec builtin(std::string name);
  static FunctionSpec coefficients(std::vector<Complex> c);
  static FunctionSpec samples(const GridFunction& g);

  bool operator==(const FunctionSpec&) const = default;
};

/// "z_bar", "abs2", "const:2", "const:1,-0.5", "exp_x:0.1", "exp_xy:0.1",
/// "basis:3", a JSON object, or "@path" to a JSON file.
FunctionSpec parse_function_shorthand(const std::string& text);
GridFunction sample(const FunctionSpec& spec, const GridPtr& grid);

/// "full", "radial:a", "annulus:a", "sector:theta", each optionally followed
/// by ",complement".
Region parse_region(const std::string& text);

/// Quadrature size; n_r counts Gauss nodes per radial panel. Radial regions
/// add a panel break at their radius.
struct GridSpec {
  int n_r = 32;
  int n_theta = 64;
  bool operator==(const GridSpec&) const = default;
};
GridPtr make_grid(const GridSpec& spec, const Region& region);

struct ConductivitySpec {
  std::string form = "constant";  // constant, exp_x, exp_xy
  double c = 1.0;
  bool operator==(const ConductivitySpec&) const = default;
};
Conductivity make_conductivity(const ConductivitySpec& spec, const GridPtr& grid);

struct SolverOptions {
  double lambda_lo = -1.0 + 1e-9;
  double lambda_hi = 1.0;
  int max_iterations = 200;
  double tolerance = 1e-12;
  bool truncation_check = false;
  double lift_tolerance = 1e-12;
  int lift_max_iterations = 500;
  bool operator==(const SolverOptions&) const = default;

  BepOptions bep() const;
};

struct ProblemFile {
  std::string schema{kProblemSchema};
  std::string type = "bep";  // bep or fbep
  GridSpec grid;
  int degree = 16;
  std::string K = "radial:0.5";
  FunctionSpec h_K;
  FunctionSpec h_J;
  double M = 0.1;
  std::optional<ConductivitySpec> conductivity;
  SolverOptions options;
  bool operator==(const ProblemFile&) const = default;
};

struct OracleDelta {
  double lambda = 0.0;
  double max_coefficient_delta = 0.0;
  bool operator==(const OracleDelta&) const = default;
};

struct SolutionFile {
  std::string schema{kSolutionSchema};
  std::string tool = "bergbep";
  std::string version;
  std::string type = "bep";
  std::string lambda_convention{kLambdaConvention};
  int degree = 0;
  GridSpec grid;
  std::string K;
  double M = 0.0;
  std::vector<Complex> coefficients;         // bep: c_n of e_n
  std::vector<std::string> element_labels;   // fbep: basis element of each real coefficient
  std::vector<double> real_coefficients;     // fbep
  double lambda = 0.0;
  double err_K = 0.0;
  double err_J = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool active = false;
  double feasibility_distance = 0.0;
  std::optional<double> truncation_drift;
  std::optional<double> vekua_residual;
  std::optional<double> conjecture_residual;
  std::optional<double> basis_min_eigenvalue;
  std::vector<std::string> dropped_elements;
  std::optional<OracleDelta> oracle;
  bool operator==(const SolutionFile&) const = default;
};

std::string to_json(const FunctionSpec& spec);
std::string to_json(const ProblemFile& p);
std::string to_json(const SolutionFile& s);
FunctionSpec function_spec_from_json(std::string_view text);
ProblemFile problem_from_json(std::string_view text);
SolutionFile solution_from_json(std::string_view text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Grid, regions and sampled data of a problem file.
BepProblem make_bep_problem(const ProblemFile& p);
FbepProblem make_fbep_problem(const ProblemFile& p);

SolutionFile make_solution_file(const ProblemFile& p, const BepSolution& s);
SolutionFile make_solution_file(const ProblemFile& p, const FbepProblem& fp, const FbepSolution& s);

}  // namespace bergbep
