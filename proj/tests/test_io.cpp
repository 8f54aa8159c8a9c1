#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "bergbep/error.hpp"
#include "bergbep/io.hpp"

using namespace bergbep;

namespace {

const std::filesystem::path kData = std::filesystem::path(BERGBEP_TEST_DATA) / "data";
const std::filesystem::path kGolden = std::filesystem::path(BERGBEP_TEST_DATA) / "golden";

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

void check_close(const SolutionFile& a, const SolutionFile& b, double tol) {
  CHECK(a.type == b.type);
  CHECK(a.degree == b.degree);
  CHECK(a.grid == b.grid);
  CHECK(a.K == b.K);
  CHECK(a.M == b.M);
  CHECK(a.active == b.active);
  CHECK(a.element_labels == b.element_labels);
  CHECK(a.dropped_elements == b.dropped_elements);
  CHECK(close(a.lambda, b.lambda, tol));
  CHECK(close(a.err_K, b.err_K, tol));
  CHECK(close(a.err_J, b.err_J, tol));
  CHECK(close(a.feasibility_distance, b.feasibility_distance, tol));
  REQUIRE(a.coefficients.size() == b.coefficients.size());
  for (std::size_t n = 0; n < a.coefficients.size(); ++n) CHECK(std::abs(a.coefficients[n] - b.coefficients[n]) <= tol);
  REQUIRE(a.real_coefficients.size() == b.real_coefficients.size());
  for (std::size_t n = 0; n < a.real_coefficients.size(); ++n) {
    CHECK(std::abs(a.real_coefficients[n] - b.real_coefficients[n]) <= tol);
  }
}

}  // namespace

TEST_CASE("function shorthand") {
  CHECK(parse_function_shorthand("z_bar") == FunctionSpec::builtin("z_bar"));
  const FunctionSpec c = parse_function_shorthand("const:1,-0.5");
  CHECK(c.name == "const");
  CHECK(c.value == Complex(1.0, -0.5));
  CHECK(parse_function_shorthand("const:2").value == Complex(2.0));
  CHECK(parse_function_shorthand("exp_x:0.1").rate == 0.1);
  CHECK(parse_function_shorthand("exp_xy:-0.25").rate == -0.25);
  CHECK(parse_function_shorthand("basis:3").index == 3);
  const FunctionSpec j = parse_function_shorthand(R"({"kind": "coeffs", "coeffs": [[1, 0], [0, 2]]})");
  CHECK(j.kind == FunctionSpec::Kind::Coeffs);
  CHECK(j.values == std::vector<Complex>{{1.0, 0.0}, {0.0, 2.0}});

  for (const char* bad : {"nope", "basis:-1", "basis:1.5", "exp_x", "z_bar:2", "const:abc", "{oops"}) {
    CAPTURE(bad);
    CHECK(kind_of([&] { parse_function_shorthand(bad); }) == ErrorKind::Schema);
  }
  CHECK(kind_of([] { parse_function_shorthand("@/nonexistent/file.json"); }) == ErrorKind::Io);
}

TEST_CASE("sampling builtins") {
  const GridPtr g = build_grid(4, 8);
  const Complex z = g->node(13);
  CHECK(sample(FunctionSpec::builtin("z_bar"), g)[13] == std::conj(z));
  CHECK(sample(FunctionSpec::builtin("abs2"), g)[13] == Complex(std::norm(z)));
  FunctionSpec e = FunctionSpec::builtin("exp_xy");
  e.rate = 0.3;
  CHECK(sample(e, g)[13] == Complex(std::exp(0.3 * z.real() * z.imag())));
  FunctionSpec b = FunctionSpec::builtin("basis");
  b.index = 2;
  CHECK(std::abs(sample(b, g)[13] - std::sqrt(3.0) * z * z) < 1e-15);
  const FunctionSpec coeffs = FunctionSpec::coefficients({{0.0, 0.0}, {1.0, 0.0}});
  CHECK(std::abs(sample(coeffs, g)[13] - std::sqrt(2.0) * z) < 1e-15);

  const GridFunction v = GridFunction::sample(g, [](Complex w) { return w * w; });
  CHECK(sample(FunctionSpec::samples(v), g)[5] == v[5]);
  CHECK(kind_of([&] { sample(FunctionSpec::samples(v), build_grid(4, 10)); }) == ErrorKind::Schema);
}

TEST_CASE("region specs") {
  CHECK(parse_region("full").describe() == "full");
  CHECK(parse_region("radial:0.5").describe() == "radial:0.5");
  CHECK(parse_region("annulus:0.25").describe() == "annulus:0.25");
  CHECK(parse_region("radial:0.5,complement").describe() == "annulus:0.5");
  const Region s = parse_region("sector:1.2,complement");
  CHECK(s.shape() == Region::Shape::Sector);
  CHECK(s.complemented());
  CHECK(s.parameter() == 1.2);
  for (const char* bad : {"wedge:1", "radial", "radial:2", "sector:x", "full:1", ""}) {
    CAPTURE(bad);
    CHECK(kind_of([&] { parse_region(bad); }) == ErrorKind::Schema);
  }
  const GridPtr g = make_grid({6, 12}, parse_region("radial:0.3"));
  CHECK(g->ring_count() == 12);
  CHECK(make_grid({6, 12}, parse_region("sector:1")).get()->ring_count() == 6);
}

TEST_CASE("problem files round-trip") {
  const ProblemFile p = problem_from_json(read_text(kData / "bep_saturated.json"));
  CHECK(p.type == "bep");
  CHECK(p.grid == GridSpec{24, 64});
  CHECK(p.degree == 16);
  CHECK(p.K == "radial:0.5");
  CHECK(p.h_K == FunctionSpec::builtin("abs2"));
  CHECK(p.M == 0.1);
  CHECK_FALSE(p.conductivity.has_value());
  CHECK(p.options == SolverOptions{});

  const std::string text = to_json(p);
  CHECK(problem_from_json(text) == p);
  CHECK(to_json(problem_from_json(text)) == text);

  ProblemFile q = problem_from_json(read_text(kData / "fbep_saturated.json"));
  REQUIRE(q.conductivity.has_value());
  CHECK(q.conductivity->form == "exp_x");
  q.options.max_iterations = 17;
  q.options.truncation_check = true;
  q.h_K = FunctionSpec::coefficients({{0.5, -0.25}, {1e-17, 3.0}});
  CHECK(problem_from_json(to_json(q)) == q);
}

TEST_CASE("schema errors") {
  const std::string good = read_text(kData / "bep_saturated.json");
  CHECK(kind_of([&] { problem_from_json(read_text(kData / "bad_schema.json")); }) == ErrorKind::Schema);
  CHECK(kind_of([] { problem_from_json("[1, 2"); }) == ErrorKind::Schema);
  CHECK(kind_of([] { problem_from_json("{}"); }) == ErrorKind::Schema);

  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    s.replace(pos, from.size(), to);
    return s;
  };
  CHECK(kind_of([&] { problem_from_json(replaced(R"("type": "bep")", R"("type": "xyz")")); }) == ErrorKind::Schema);
  CHECK(kind_of([&] { problem_from_json(replaced(R"("M": 0.1)", R"("M": -1)")); }) == ErrorKind::Schema);
  CHECK(kind_of([&] { problem_from_json(replaced(R"("M": 0.1)", R"("M": "big")")); }) == ErrorKind::Schema);
  CHECK(kind_of([&] { problem_from_json(replaced(R"("degree": 16)", R"("degree": -2)")); }) == ErrorKind::Schema);
  CHECK(kind_of([&] { problem_from_json(replaced(R"("value": [0, 0])", R"("value": [0])")); }) == ErrorKind::Schema);
  CHECK(kind_of([&] { problem_from_json(replaced(R"("name": "abs2")", R"("name": "abs3")")); }) == ErrorKind::Schema);

  CHECK(kind_of([] { read_text("/nonexistent/problem.json"); }) == ErrorKind::Io);
  CHECK(kind_of([] { write_text("/nonexistent/dir/out.json", "x"); }) == ErrorKind::Io);
  CHECK(kind_of([] { solution_from_json(R"({"schema": "bergbep.solution/0"})"); }) == ErrorKind::Schema);
}

TEST_CASE("assembled problems") {
  const ProblemFile pf = problem_from_json(read_text(kData / "bep_saturated.json"));
  const BepProblem p = make_bep_problem(pf);
  CHECK(p.K.describe() == "radial:0.5");
  CHECK(p.J.describe() == "annulus:0.5");
  CHECK(p.grid()->ring_count() == 48);
  CHECK(p.degree == 16);

  const ProblemFile ff = problem_from_json(read_text(kData / "fbep_saturated.json"));
  const FbepProblem fp = make_fbep_problem(ff);
  CHECK(fp.f.form == Conductivity::Form::ExpX);
  CHECK(fp.f.c == 0.1);
  CHECK(fp.lift_tolerance == ff.options.lift_tolerance);
}

TEST_CASE("golden BEP solution") {
  const std::string golden = read_text(kGolden / "bep_solution.json");
  const SolutionFile g = solution_from_json(golden);
  CHECK(to_json(g) == golden);
  CHECK(g.schema == kSolutionSchema);
  CHECK(g.lambda_convention == kLambdaConvention);

  const ProblemFile pf = problem_from_json(read_text(kData / "bep_saturated.json"));
  const SolutionFile fresh = make_solution_file(pf, solve_bep(make_bep_problem(pf), pf.options.bep()));
  check_close(fresh, g, 1e-9);
  CHECK(std::abs(fresh.err_J - 0.1) <= 1e-8 * 0.1);
  CHECK(solution_from_json(to_json(fresh)) == fresh);
}

TEST_CASE("golden f-BEP solution") {
  const std::string golden = read_text(kGolden / "fbep_solution.json");
  const SolutionFile g = solution_from_json(golden);
  CHECK(to_json(g) == golden);
  CHECK(g.type == "fbep");
  CHECK(g.element_labels.size() == g.real_coefficients.size());

  const ProblemFile pf = problem_from_json(read_text(kData / "fbep_saturated.json"));
  const FbepProblem p = make_fbep_problem(pf);
  const SolutionFile fresh = make_solution_file(pf, p, solve_fbep(p, pf.options.bep()));
  check_close(fresh, g, 1e-8);
  CHECK(solution_from_json(to_json(fresh)) == fresh);
}

TEST_CASE("non-finite values are rejected on output and input") {
  SolutionFile s;
  s.version = "x";
  s.coefficients = {{1.0, 2.0}};
  s.truncation_drift = 0.5;
  s.oracle = OracleDelta{0.25, 1e-12};
  CHECK(solution_from_json(to_json(s)) == s);
  CHECK(kind_of([] { function_spec_from_json(R"({"kind": "coeffs", "coeffs": [[1e999, 0]]})"); }) == ErrorKind::Schema);
}
