#include <doctest.h>

#include <cmath>

#include "bergbep/error.hpp"
#include "bergbep/vekua.hpp"

using namespace bergbep;

namespace {

double max_error_within(const GridFunction& a, const GridFunction& b, double radius) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.grid()->node(i)) <= radius) m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

double interior_relative(const GridFunction& a, const GridFunction& b) {
  const auto in = interior_nodes(*a.grid());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!in[i]) continue;
    const double w = a.grid()->weight(i);
    num += w * std::norm(a[i] - b[i]);
    den += w * std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

GridFunction z_power(const GridPtr& g, int m, int n) {
  return GridFunction::sample(g, [m, n](Complex z) { return std::pow(z, m) * std::pow(std::conj(z), n); });
}

}  // namespace

TEST_CASE("Teodorescu transform of monomials") {
  const GridPtr g = build_grid(24, 64);
  // T[1] = conj(z).
  const GridFunction t1 = teodorescu(GridFunction::constant(g, 1.0));
  CHECK(max_error_within(t1, z_power(g, 0, 1), 1.0) <= 1e-12);
  CHECK(teodorescu(GridFunction::zeros(g)).max_abs() == 0.0);

  // For m <= n the boundary term vanishes: T[z^m zb^n] = z^m zb^(n+1) / (n+1).
  for (auto [m, n] : {std::pair{0, 1}, {1, 1}, {2, 3}, {0, 4}}) {
    const GridFunction t = teodorescu(z_power(g, m, n));
    const GridFunction expected = (1.0 / (n + 1)) * z_power(g, m, n + 1);
    CHECK(max_error_within(t, expected, 1.0) <= 1e-11);
  }
}

TEST_CASE("dbar is a left inverse of T on smooth functions") {
  const GridPtr g = build_grid(64, 128);
  const std::vector<GridFunction> inputs = {
      GridFunction::constant(g, {1.0, 0.5}),
      GridFunction::sample(g, [](Complex z) { return std::exp(z.real()); }),
      GridFunction::sample(g, [](Complex z) { return std::cos(z.imag()) + Complex(0.0, 1.0) * z; }),
      GridFunction::sample(g, [](Complex z) { return std::norm(z) * std::conj(z); }),
      GridFunction::sample(g, [](Complex z) { return 1.0 / (2.0 - z); }),
  };
  for (const GridFunction& w : inputs) CHECK(interior_relative(dbar(teodorescu(w)), w) <= 1e-3);
}

TEST_CASE("polar derivatives") {
  const GridPtr g = build_grid(48, 64);
  const GridFunction zb = z_power(g, 0, 1);
  CHECK(interior_relative(dbar(zb), GridFunction::constant(g, 1.0)) <= 1e-8);
  CHECK(interior_relative(dbar(z_power(g, 1, 1)), z_power(g, 1, 0)) <= 1e-6);
  const GridFunction d = dbar(z_power(g, 3, 0));
  double worst = 0.0;
  const auto in = interior_nodes(*g);
  for (std::size_t i = 0; i < g->size(); ++i)
    if (in[i]) worst = std::max(worst, std::abs(d[i]));
  CHECK(worst <= 1e-6);
  CHECK(interior_relative(dz(z_power(g, 3, 0)), (3.0 * z_power(g, 2, 0))) <= 1e-6);
  CHECK_THROWS_AS(dbar(GridFunction::zeros(build_grid(4, 16))), Error);
}

TEST_CASE("alpha_f closed forms agree with numerical differentiation") {
  const GridPtr g = build_grid(48, 96);
  const auto check = [&](const Conductivity& closed, Complex (*oracle)(Complex)) {
    const GridFunction a = alpha_from_f(closed);
    const GridFunction sampled = alpha_from_f(Conductivity::from_samples(closed.f));
    const GridFunction expected = GridFunction::sample(g, oracle);
    CHECK(max_error_within(a, expected, 1.0) <= 1e-14);
    CHECK(interior_relative(sampled, expected) <= 1e-5);
  };
  check(Conductivity::exp_x(g, 1.0), [](Complex) { return Complex(0.5); });
  check(Conductivity::exp_xy(g, 1.0), [](Complex z) { return 0.5 * Complex(z.imag(), z.real()); });
  CHECK(alpha_from_f(Conductivity::constant(g, 3.0)).max_abs() == 0.0);

  const Conductivity f = Conductivity::exp_x(g, 0.2);
  CHECK(f.k == doctest::Approx(std::exp(0.2)));
  CHECK_THROWS_AS(Conductivity::from_samples(GridFunction::constant(g, 0.0)), Error);
  CHECK_THROWS_AS(Conductivity::from_samples(GridFunction::constant(g, Complex(1.0, 1.0))), Error);
}

TEST_CASE("membership residuals of f and i/f") {
  const GridPtr g = build_grid(32, 64);
  for (const Conductivity& f : {Conductivity::exp_x(g, 0.2), Conductivity::exp_xy(g, 0.1)}) {
    const GridFunction alpha = alpha_from_f(f);
    CHECK(vekua_residual(f.f, alpha, 16) <= 1e-6);
    const GridFunction inv = Complex(0.0, 1.0) * (GridFunction::constant(g, 1.0) / f.f);
    CHECK(vekua_residual(inv, alpha, 16) <= 1e-6);
    // conj(f) = f is in the space, i f is not.
    CHECK(vekua_residual(Complex(0.0, 1.0) * f.f, alpha, 16) > 1e-3);
  }
  CHECK(vekua_residual(z_power(g, 0, 1), GridFunction::zeros(g), 16) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(vekua_residual(z_power(g, 5, 0), GridFunction::zeros(g), 16) <= 1e-13);
}

TEST_CASE("lifting analytic seeds") {
  const GridPtr g = build_grid(32, 64);
  SUBCASE("alpha = 0 returns the seed") {
    const AnalyticCoeffs seed({{0.2, 0.0}, {0.0, 1.0}, {0.5, -0.5}});
    const VekuaFunction v = vekua_lift(eval_on_grid(seed, g), GridFunction::zeros(g), 8, 1e-12, 50);
    CHECK(v.iterations == 1);
    CHECK(v.converged);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(v.w[i] == eval(seed, g->node(i)));
  }

  SUBCASE("contraction regime converges geometrically") {
    const GridFunction alpha = alpha_from_f(Conductivity::exp_x(g, 0.1));
    for (int n : {0, 3, 8}) {
      const VekuaFunction v = vekua_lift(AnalyticCoeffs::unit(n, 8), alpha, 1e-12, 200);
      CHECK(v.converged);
      CHECK(v.residual <= 1e-6);
      REQUIRE(v.step_norms.size() >= 3);
      // T has norm below 2, |alpha| = 0.05: the ratio stays well below one.
      for (std::size_t k = 1; k + 1 < v.step_norms.size(); ++k) {
        if (v.step_norms[k - 1] < 1e-13) break;
        CHECK(v.step_norms[k] / v.step_norms[k - 1] < 0.2);
      }
    }
  }

  SUBCASE("divergence is reported") {
    const GridFunction alpha = GridFunction::constant(g, 40.0);
    CHECK_THROWS_AS(vekua_lift(AnalyticCoeffs::unit(2, 8), alpha, 1e-12, 200), Error);
  }

  SUBCASE("iteration cap") {
    const GridFunction alpha = alpha_from_f(Conductivity::exp_x(g, 0.5));
    const VekuaFunction v = vekua_lift(AnalyticCoeffs::unit(1, 8), alpha, 1e-14, 2);
    CHECK_FALSE(v.converged);
    CHECK(v.iterations == 2);
    CHECK(v.step_norms.size() == 2);
  }
}

TEST_CASE("similarity principle") {
  const GridPtr g = build_grid(32, 64);
  SUBCASE("classical case") {
    const VekuaFunction w = make_vekua_function(
        GridFunction::sample(g, [](Complex z) { return 2.0 + z; }), GridFunction::zeros(g), 8);
    const SimilarityFactor s = similarity_factor(w);
    CHECK(s.s.max_abs() == 0.0);
    CHECK(max_error_within(s.analytic, w.w, 1.0) == 0.0);
    CHECK(s.bound_holds);
  }
  SUBCASE("lifted functions") {
    const Conductivity f = Conductivity::exp_x(g, 0.3);
    const GridFunction alpha = alpha_from_f(f);
    const VekuaFunction w = vekua_lift(AnalyticCoeffs({{1.0, 0.0}, {0.3, 0.0}}), alpha, 1e-12, 200);
    const SimilarityFactor s = similarity_factor(w);
    CHECK(s.bound_holds);
    CHECK(s.s_sup <= 4.0 * s.alpha_sup + 1e-8);
    CHECK(s.defining_residual <= 1e-3);
    CHECK(s.dbar_residual <= 1e-3);
  }
  SUBCASE("zeros are rejected") {
    const VekuaFunction w = make_vekua_function(GridFunction::zeros(g), GridFunction::zeros(g), 4);
    CHECK_THROWS_AS(similarity_factor(w), Error);
  }
}

TEST_CASE("restricted projection fixes Vekua functions") {
  const GridPtr g = build_grid(32, 64);
  const VekuaFunction a = make_vekua_function(GridFunction::sample(g, [](Complex z) { return z * z; }),
                                              GridFunction::zeros(g), 8);
  CHECK(interior_relative(pf_restricted(a, 8), a.w) <= 1e-13);

  const GridFunction alpha = alpha_from_f(Conductivity::exp_x(g, 0.1));
  for (int n : {0, 2, 5}) {
    const VekuaFunction w = vekua_lift(AnalyticCoeffs::unit(n, 8), alpha, 1e-12, 200);
    const GridFunction p = pf_restricted(w, 8);
    CHECK(norm(p - w.w) / norm(w.w) <= 1e-4);
  }
}

TEST_CASE("PDE diagnostics") {
  SUBCASE("constant solution w = f") {
    const GridPtr g = build_grid(32, 64);
    const Conductivity f = Conductivity::exp_x(g, 1.0);
    const VekuaFunction w = make_vekua_function(f.f, alpha_from_f(f), 8);
    const MetaharmonicResiduals r = metaharmonic_residuals(w, f);
    CHECK(r.real_part <= 1e-10);
    CHECK(r.imag_part <= 1e-10);
    CHECK(beltrami_residual(w, f) <= 1e-2);
  }
  SUBCASE("classical case: analytic w is harmonic") {
    const GridPtr g = build_grid(32, 64);
    const Conductivity f = Conductivity::constant(g, 1.0);
    const VekuaFunction w = make_vekua_function(z_power(g, 3, 0), GridFunction::zeros(g), 8);
    const MetaharmonicResiduals r = metaharmonic_residuals(w, f);
    CHECK(r.real_part <= 1e-3);
    CHECK(r.imag_part <= 1e-3);
    CHECK(beltrami_residual(w, f) <= 1e-6);
  }
  SUBCASE("lifted functions converge under refinement") {
    double prev_meta = 0.0;
    double prev_belt = 0.0;
    for (int rings : {32, 64}) {
      const GridPtr g = build_grid(rings, 2 * rings);
      const Conductivity f = Conductivity::exp_x(g, 1.0);
      const VekuaFunction w = vekua_lift(AnalyticCoeffs::unit(2, 8), alpha_from_f(f), 1e-12, 300);
      const MetaharmonicResiduals r = metaharmonic_residuals(w, f);
      const double meta = std::max(r.real_part, r.imag_part);
      const double belt = beltrami_residual(w, f);
      CHECK(meta <= 1e-2);
      CHECK(belt <= 1e-2);
      if (prev_meta > 0.0) {
        CHECK(std::log2(prev_meta / meta) >= 1.0);
        CHECK(std::log2(prev_belt / belt) >= 1.0);
      }
      prev_meta = meta;
      prev_belt = belt;
    }
  }
  SUBCASE("Vekua solutions are not harmonic") {
    const GridPtr g = build_grid(32, 64);
    const Conductivity f = Conductivity::exp_x(g, 1.0);
    const MetaharmonicResiduals lap = laplacian_residuals(f.f);
    CHECK(lap.real_part > 0.1);
    const MetaharmonicResiduals harmonic = laplacian_residuals(z_power(g, 2, 0));
    CHECK(harmonic.real_part <= 1e-4);
  }
}

TEST_CASE("coarse grids are rejected by the PDE diagnostics") {
  const GridPtr g = build_grid(4, 8);
  const Conductivity f = Conductivity::constant(g, 1.0);
  const VekuaFunction w = make_vekua_function(GridFunction::constant(g, 1.0), GridFunction::zeros(g), 1);
  CHECK_THROWS_AS(metaharmonic_residuals(w, f), Error);
  CHECK_THROWS_AS(beltrami_residual(w, f), Error);
}
