#include "bergbep/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bergbep/error.hpp"
#include "bergbep/version.hpp"

namespace bergbep {

using Json = nlohmann::ordered_json;

namespace {

Json complex_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from(const Json& j) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(), ErrorKind::Schema,
          "complex number must be a two-element numeric array [re, im]");
  const Complex c(j[0].get<double>(), j[1].get<double>());
  require(std::isfinite(c.real()) && std::isfinite(c.imag()), ErrorKind::Schema, "complex number must be finite");
  return c;
}

Json complex_list(const std::vector<Complex>& v) {
  Json a = Json::array();
  for (Complex c : v) a.push_back(complex_json(c));
  return a;
}

std::vector<Complex> complex_list_from(const Json& j) {
  require(j.is_array(), ErrorKind::Schema, "expected an array of [re, im] pairs");
  std::vector<Complex> v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(complex_from(e));
  return v;
}

const Json& field(const Json& j, const char* key) {
  require(j.is_object(), ErrorKind::Schema, std::string("expected an object containing '") + key + "'");
  const auto it = j.find(key);
  require(it != j.end(), ErrorKind::Schema, std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const Json::exception&) {
    fail(ErrorKind::Schema, std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key);
}

Json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::optional<double> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get<double>(j, key);
}

// Puts each [re, im] pair of a pretty-printed document on one line.
std::string compact_pairs(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  auto is_num = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.' || c == 'e' || c == 'E'; };
  auto is_space = [](char c) { return c == ' ' || c == '\n'; };
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '[') {
      std::size_t k = i + 1;
      std::string parts[2];
      bool ok = true;
      for (int p = 0; p < 2 && ok; ++p) {
        while (k < text.size() && is_space(text[k])) ++k;
        const std::size_t start = k;
        while (k < text.size() && is_num(text[k])) ++k;
        parts[p] = text.substr(start, k - start);
        ok = !parts[p].empty();
        if (ok && p == 0) {
          ok = k < text.size() && text[k] == ',';
          ++k;
        }
      }
      while (ok && k < text.size() && is_space(text[k])) ++k;
      if (ok && k < text.size() && text[k] == ']') {
        out += "[" + parts[0] + ", " + parts[1] + "]";
        i = k + 1;
        continue;
      }
    }
    out += text[i++];
  }
  return out;
}

std::string pretty(const Json& j) { return compact_pairs(j.dump(2)) + "\n"; }

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Schema, std::string("invalid JSON: ") + e.what());
  }
}

Json function_json(const FunctionSpec& s) {
  Json j;
  switch (s.kind) {
    case FunctionSpec::Kind::Coeffs:
      j["kind"] = "coeffs";
      j["coeffs"] = complex_list(s.values);
      break;
    case FunctionSpec::Kind::Grid:
      j["kind"] = "grid";
      j["values"] = complex_list(s.values);
      break;
    case FunctionSpec::Kind::Builtin:
      j["kind"] = "builtin";
      j["name"] = s.name;
      if (s.name == "const") j["value"] = complex_json(s.value);
      if (s.name == "exp_x" || s.name == "exp_xy") j["rate"] = s.rate;
      if (s.name == "basis") j["index"] = s.index;
      break;
  }
  return j;
}

FunctionSpec function_from(const Json& j) {
  const auto kind = get<std::string>(j, "kind");
  FunctionSpec s;
  if (kind == "coeffs") {
    s.kind = FunctionSpec::Kind::Coeffs;
    s.values = complex_list_from(field(j, "coeffs"));
    require(!s.values.empty(), ErrorKind::Schema, "coefficient list must not be empty");
  } else if (kind == "grid") {
    s.kind = FunctionSpec::Kind::Grid;
    s.values = complex_list_from(field(j, "values"));
  } else if (kind == "builtin") {
    s = FunctionSpec::builtin(get<std::string>(j, "name"));
    if (s.name == "const") s.value = complex_from(field(j, "value"));
    if (s.name == "exp_x" || s.name == "exp_xy") s.rate = get<double>(j, "rate");
    if (s.name == "basis") {
      s.index = get<int>(j, "index");
      require(s.index >= 0, ErrorKind::Schema, "basis index must be non-negative");
    }
  } else {
    fail(ErrorKind::Schema, "unknown function kind '" + kind + "'");
  }
  return s;
}

Json grid_json(const GridSpec& g) { return Json{{"n_r", g.n_r}, {"n_theta", g.n_theta}}; }

GridSpec grid_from(const Json& j) {
  GridSpec g{get<int>(j, "n_r"), get<int>(j, "n_theta")};
  require(g.n_r >= 1 && g.n_theta >= 1, ErrorKind::Schema, "grid sizes must be positive");
  return g;
}

double read_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == text.size() && used > 0 && std::isfinite(v), ErrorKind::Schema,
          "cannot read a number from '" + text + "' in " + what);
  return v;
}

}  // namespace

// FunctionSpec

FunctionSpec FunctionSpec::builtin(std::string name) {
  static const char* known[] = {"const", "z_bar", "abs2", "exp_x", "exp_xy", "basis"};
  bool ok = false;
  for (const char* k : known) ok = ok || name == k;
  require(ok, ErrorKind::Schema, "unknown builtin function '" + name + "'");
  FunctionSpec s;
  s.kind = Kind::Builtin;
  s.name = std::move(name);
  return s;
}

FunctionSpec FunctionSpec::coefficients(std::vector<Complex> c) {
  FunctionSpec s;
  s.kind = Kind::Coeffs;
  s.values = std::move(c);
  return s;
}

FunctionSpec FunctionSpec::samples(const GridFunction& g) {
  FunctionSpec s;
  s.kind = Kind::Grid;
  s.values.assign(g.values().begin(), g.values().end());
  return s;
}

FunctionSpec parse_function_shorthand(const std::string& text) {
  if (!text.empty() && text.front() == '@') return function_spec_from_json(read_text(text.substr(1)));
  if (!text.empty() && text.front() == '{') return function_spec_from_json(text);
  const auto colon = text.find(':');
  FunctionSpec s = FunctionSpec::builtin(text.substr(0, colon));
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (s.name == "const") {
    if (arg.empty()) return s;
    const auto comma = arg.find(',');
    s.value = comma == std::string::npos
                  ? Complex(read_number(arg, text))
                  : Complex(read_number(arg.substr(0, comma), text), read_number(arg.substr(comma + 1), text));
  } else if (s.name == "exp_x" || s.name == "exp_xy") {
    require(!arg.empty(), ErrorKind::Schema, s.name + " needs a rate, e.g. " + s.name + ":0.1");
    s.rate = read_number(arg, text);
  } else if (s.name == "basis") {
    require(!arg.empty(), ErrorKind::Schema, "basis needs an index, e.g. basis:2");
    const double n = read_number(arg, text);
    require(n >= 0 && n == std::floor(n), ErrorKind::Schema, "basis index must be a non-negative integer");
    s.index = static_cast<int>(n);
  } else {
    require(arg.empty(), ErrorKind::Schema, s.name + " takes no parameter");
  }
  return s;
}

GridFunction sample(const FunctionSpec& spec, const GridPtr& grid) {
  switch (spec.kind) {
    case FunctionSpec::Kind::Coeffs:
      return eval_on_grid(AnalyticCoeffs(spec.values), grid);
    case FunctionSpec::Kind::Grid:
      require(spec.values.size() == grid->size(), ErrorKind::Schema,
              "grid function has " + std::to_string(spec.values.size()) + " values but the grid has " +
                  std::to_string(grid->size()) + " nodes");
      return GridFunction(grid, spec.values);
    case FunctionSpec::Kind::Builtin:
      break;
  }
  const std::string& n = spec.name;
  if (n == "const") return GridFunction::constant(grid, spec.value);
  if (n == "z_bar") return GridFunction::sample(grid, [](Complex z) { return std::conj(z); });
  if (n == "abs2") return GridFunction::sample(grid, [](Complex z) { return Complex(std::norm(z)); });
  const double c = spec.rate;
  if (n == "exp_x") return GridFunction::sample(grid, [c](Complex z) { return Complex(std::exp(c * z.real())); });
  if (n == "exp_xy") {
    return GridFunction::sample(grid, [c](Complex z) { return Complex(std::exp(c * z.real() * z.imag())); });
  }
  const int k = spec.index;
  return GridFunction::sample(grid, [k](Complex z) { return eval_basis(k, z); });
}

// Regions and grids

Region parse_region(const std::string& text) {
  std::string body = text;
  bool complement = false;
  const std::string suffix = ",complement";
  if (body.size() > suffix.size() && body.compare(body.size() - suffix.size(), suffix.size(), suffix) == 0) {
    complement = true;
    body.resize(body.size() - suffix.size());
  }
  const auto colon = body.find(':');
  const std::string shape = body.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : body.substr(colon + 1);
  Region r = Region::full_disc();
  if (shape == "full" && arg.empty()) {
    r = Region::full_disc();
  } else if (shape == "radial" || shape == "annulus" || shape == "sector") {
    const double v = read_number(arg, "region '" + text + "'");
    try {
      r = shape == "radial" ? Region::radial_disc(v) : shape == "annulus" ? Region::annulus(v) : Region::sector(v);
    } catch (const Error& e) {
      fail(ErrorKind::Schema, "region '" + text + "': " + e.what());
    }
  } else {
    fail(ErrorKind::Schema, "unknown region spec '" + text + "' (expected full, radial:a, annulus:a or sector:theta)");
  }
  return complement ? r.complement() : r;
}

GridPtr make_grid(const GridSpec& spec, const Region& region) {
  require(spec.n_r >= 1 && spec.n_theta >= 1, ErrorKind::Schema, "grid sizes must be positive");
  if (region.shape() == Region::Shape::RadialDisc) return build_grid(spec.n_r, spec.n_theta, {region.parameter()});
  return build_grid(spec.n_r, spec.n_theta);
}

Conductivity make_conductivity(const ConductivitySpec& spec, const GridPtr& grid) {
  if (spec.form == "constant") return Conductivity::constant(grid, spec.c);
  if (spec.form == "exp_x") return Conductivity::exp_x(grid, spec.c);
  if (spec.form == "exp_xy") return Conductivity::exp_xy(grid, spec.c);
  fail(ErrorKind::Schema, "unknown conductivity form '" + spec.form + "' (expected constant, exp_x or exp_xy)");
}

BepOptions SolverOptions::bep() const {
  BepOptions o;
  o.lambda_lo = lambda_lo;
  o.lambda_hi = lambda_hi;
  o.max_iterations = max_iterations;
  o.tolerance = tolerance;
  o.truncation_check = truncation_check;
  return o;
}

// Serialization

std::string to_json(const FunctionSpec& spec) { return pretty(function_json(spec)); }

FunctionSpec function_spec_from_json(std::string_view text) { return function_from(parse_json(text)); }

std::string to_json(const ProblemFile& p) {
  Json j;
  j["schema"] = p.schema;
  j["type"] = p.type;
  j["grid"] = grid_json(p.grid);
  j["degree"] = p.degree;
  j["K"] = p.K;
  j["h_K"] = function_json(p.h_K);
  j["h_J"] = function_json(p.h_J);
  j["M"] = p.M;
  if (p.conductivity) j["conductivity"] = Json{{"form", p.conductivity->form}, {"c", p.conductivity->c}};
  const SolverOptions& o = p.options;
  j["options"] = Json{{"lambda_lo", o.lambda_lo},
                      {"lambda_hi", o.lambda_hi},
                      {"max_iterations", o.max_iterations},
                      {"tolerance", o.tolerance},
                      {"truncation_check", o.truncation_check},
                      {"lift_tolerance", o.lift_tolerance},
                      {"lift_max_iterations", o.lift_max_iterations}};
  return pretty(j);
}

ProblemFile problem_from_json(std::string_view text) {
  const Json j = parse_json(text);
  ProblemFile p;
  p.schema = get<std::string>(j, "schema");
  require(p.schema == kProblemSchema, ErrorKind::Schema,
          "unsupported problem schema '" + p.schema + "' (expected " + std::string(kProblemSchema) + ")");
  p.type = get_or<std::string>(j, "type", "bep");
  require(p.type == "bep" || p.type == "fbep", ErrorKind::Schema, "problem type must be bep or fbep");
  p.grid = grid_from(field(j, "grid"));
  p.degree = get<int>(j, "degree");
  require(p.degree >= 0, ErrorKind::Schema, "degree must be non-negative");
  p.K = get<std::string>(j, "K");
  parse_region(p.K);
  p.h_K = function_from(field(j, "h_K"));
  p.h_J = function_from(field(j, "h_J"));
  p.M = get<double>(j, "M");
  require(std::isfinite(p.M) && p.M > 0.0, ErrorKind::Schema, "M must be a positive number");
  if (j.contains("conductivity") && !j.at("conductivity").is_null()) {
    const Json& c = j.at("conductivity");
    p.conductivity = ConductivitySpec{get<std::string>(c, "form"), get<double>(c, "c")};
  }
  if (j.contains("options")) {
    const Json& o = j.at("options");
    SolverOptions d;
    p.options.lambda_lo = get_or(o, "lambda_lo", d.lambda_lo);
    p.options.lambda_hi = get_or(o, "lambda_hi", d.lambda_hi);
    p.options.max_iterations = get_or(o, "max_iterations", d.max_iterations);
    p.options.tolerance = get_or(o, "tolerance", d.tolerance);
    p.options.truncation_check = get_or(o, "truncation_check", d.truncation_check);
    p.options.lift_tolerance = get_or(o, "lift_tolerance", d.lift_tolerance);
    p.options.lift_max_iterations = get_or(o, "lift_max_iterations", d.lift_max_iterations);
  }
  return p;
}

std::string to_json(const SolutionFile& s) {
  Json j;
  j["schema"] = s.schema;
  j["tool"] = s.tool;
  j["version"] = s.version;
  j["type"] = s.type;
  j["lambda_convention"] = s.lambda_convention;
  j["degree"] = s.degree;
  j["grid"] = grid_json(s.grid);
  j["K"] = s.K;
  j["M"] = s.M;
  if (s.type == "fbep") {
    Json a = Json::array();
    for (std::size_t i = 0; i < s.real_coefficients.size(); ++i) {
      a.push_back(Json{{"element", s.element_labels.at(i)}, {"value", s.real_coefficients[i]}});
    }
    j["coefficients"] = a;
  } else {
    j["coefficients"] = complex_list(s.coefficients);
  }
  j["lambda"] = s.lambda;
  j["err_K"] = s.err_K;
  j["err_J"] = s.err_J;
  j["kkt_residual"] = s.kkt_residual;
  j["iterations"] = s.iterations;
  j["active"] = s.active;
  j["feasibility_distance"] = s.feasibility_distance;
  Json d;
  d["truncation_drift"] = optional_number(s.truncation_drift);
  d["vekua_residual"] = optional_number(s.vekua_residual);
  d["conjecture_residual"] = optional_number(s.conjecture_residual);
  d["basis_min_eigenvalue"] = optional_number(s.basis_min_eigenvalue);
  d["dropped_elements"] = s.dropped_elements;
  if (s.oracle) {
    d["oracle"] = Json{{"lambda", s.oracle->lambda}, {"max_coefficient_delta", s.oracle->max_coefficient_delta}};
  } else {
    d["oracle"] = nullptr;
  }
  j["diagnostics"] = d;
  return pretty(j);
}

SolutionFile solution_from_json(std::string_view text) {
  const Json j = parse_json(text);
  SolutionFile s;
  s.schema = get<std::string>(j, "schema");
  require(s.schema == kSolutionSchema, ErrorKind::Schema,
          "unsupported solution schema '" + s.schema + "' (expected " + std::string(kSolutionSchema) + ")");
  s.tool = get<std::string>(j, "tool");
  s.version = get<std::string>(j, "version");
  s.type = get<std::string>(j, "type");
  s.lambda_convention = get<std::string>(j, "lambda_convention");
  s.degree = get<int>(j, "degree");
  s.grid = grid_from(field(j, "grid"));
  s.K = get<std::string>(j, "K");
  s.M = get<double>(j, "M");
  const Json& coeffs = field(j, "coefficients");
  if (s.type == "fbep") {
    require(coeffs.is_array(), ErrorKind::Schema, "coefficients must be an array");
    for (const auto& e : coeffs) {
      s.element_labels.push_back(get<std::string>(e, "element"));
      s.real_coefficients.push_back(get<double>(e, "value"));
    }
  } else {
    s.coefficients = complex_list_from(coeffs);
  }
  s.lambda = get<double>(j, "lambda");
  s.err_K = get<double>(j, "err_K");
  s.err_J = get<double>(j, "err_J");
  s.kkt_residual = get<double>(j, "kkt_residual");
  s.iterations = get<int>(j, "iterations");
  s.active = get<bool>(j, "active");
  s.feasibility_distance = get<double>(j, "feasibility_distance");
  const Json& d = field(j, "diagnostics");
  s.truncation_drift = optional_from(d, "truncation_drift");
  s.vekua_residual = optional_from(d, "vekua_residual");
  s.conjecture_residual = optional_from(d, "conjecture_residual");
  s.basis_min_eigenvalue = optional_from(d, "basis_min_eigenvalue");
  s.dropped_elements = get_or<std::vector<std::string>>(d, "dropped_elements", {});
  if (d.contains("oracle") && !d.at("oracle").is_null()) {
    const Json& o = d.at("oracle");
    s.oracle = OracleDelta{get<double>(o, "lambda"), get<double>(o, "max_coefficient_delta")};
  }
  return s;
}

// Files

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  require(!in.bad(), ErrorKind::Io, "error while reading '" + path.string() + "'");
  return os.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  require(out.good(), ErrorKind::Io, "error while writing '" + path.string() + "'");
}

// Problem assembly

BepProblem make_bep_problem(const ProblemFile& p) {
  const Region K = parse_region(p.K);
  const GridPtr grid = make_grid(p.grid, K);
  BepProblem bp = BepProblem::make(K, sample(p.h_K, grid), sample(p.h_J, grid), p.M, p.degree);
  return bp;
}

FbepProblem make_fbep_problem(const ProblemFile& p) {
  const Region K = parse_region(p.K);
  const GridPtr grid = make_grid(p.grid, K);
  const ConductivitySpec cs = p.conductivity.value_or(ConductivitySpec{});
  FbepProblem fp =
      FbepProblem::make(make_conductivity(cs, grid), K, sample(p.h_K, grid), sample(p.h_J, grid), p.M, p.degree);
  fp.lift_tolerance = p.options.lift_tolerance;
  fp.lift_max_iterations = p.options.lift_max_iterations;
  return fp;
}

namespace {

SolutionFile solution_header(const ProblemFile& p) {
  SolutionFile s;
  s.version = std::string(kVersion);
  s.type = p.type;
  s.degree = p.degree;
  s.grid = p.grid;
  s.K = p.K;
  s.M = p.M;
  return s;
}

}  // namespace

SolutionFile make_solution_file(const ProblemFile& p, const BepSolution& sol) {
  SolutionFile s = solution_header(p);
  s.type = "bep";
  s.coefficients = sol.g0.coeffs;
  s.lambda = sol.lambda;
  s.err_K = sol.err_K;
  s.err_J = sol.err_J;
  s.kkt_residual = sol.kkt_residual;
  s.iterations = sol.iterations;
  s.active = sol.active;
  s.feasibility_distance = sol.feasibility_distance;
  if (std::isfinite(sol.truncation_drift)) s.truncation_drift = sol.truncation_drift;
  return s;
}

SolutionFile make_solution_file(const ProblemFile& p, const FbepProblem& fp, const FbepSolution& sol) {
  SolutionFile s = solution_header(p);
  s.type = "fbep";
  for (std::size_t i = 0; i < sol.basis->size(); ++i) {
    s.element_labels.push_back(sol.basis->elements[i].label());
    s.real_coefficients.push_back(sol.coefficients(static_cast<Eigen::Index>(i)));
  }
  s.lambda = sol.lambda;
  s.err_K = sol.err_K;
  s.err_J = sol.err_J;
  s.kkt_residual = sol.kkt_residual;
  s.iterations = sol.iterations;
  s.active = sol.active;
  s.feasibility_distance = sol.feasibility_distance;
  s.vekua_residual = sol.vekua_residual;
  s.conjecture_residual = fbep_conjecture_check(fp, sol);
  s.basis_min_eigenvalue = sol.basis->min_eigenvalue;
  s.dropped_elements = sol.basis->dropped;
  return s;
}

}  // namespace bergbep
