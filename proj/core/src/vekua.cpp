#include "bergbep/vekua.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "bergbep/error.hpp"

namespace bergbep {

namespace {

constexpr Complex kI{0.0, 1.0};

// Per-grid operator cache. Grids are compared by layout, so two separately
// built grids with the same parameters share one instance.
template <class T>
std::shared_ptr<const T> cached_for_grid(const GridPtr& grid) {
  static std::mutex mutex;
  static std::vector<std::pair<GridPtr, std::shared_ptr<const T>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  for (const auto& [g, op] : cache) {
    if (g->same_as(*grid)) return op;
  }
  auto op = std::make_shared<const T>(grid);
  if (cache.size() >= 8) cache.erase(cache.begin());
  cache.emplace_back(grid, op);
  return op;
}

// Direct-summation DFT along each ring, applied to all rings at once as a
// dense product. Modes run from mode_min to mode_max; for even n the Nyquist
// coefficient is split evenly between +-n/2.
class AngularTransform {
 public:
  using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit AngularTransform(const GridPtr& grid) : AngularTransform(grid->angular_count()) {}
  explicit AngularTransform(int n) : n_(n) {
    mode_min_ = (n % 2 == 0) ? -n / 2 : -(n - 1) / 2;
    mode_max_ = (n % 2 == 0) ? n / 2 : (n - 1) / 2;
    const int modes = mode_count();
    forward_.resize(n, modes);
    inverse_.resize(modes, n);
    for (int k = mode_min_; k <= mode_max_; ++k) {
      const bool nyquist = n % 2 == 0 && (k == mode_min_ || k == mode_max_);
      for (int q = 0; q < n; ++q) {
        const long long idx = ((static_cast<long long>(k) * q) % n + n) % n;
        const double t = 2.0 * std::numbers::pi * static_cast<double>(idx) / n;
        const Complex e(std::cos(t), std::sin(t));
        forward_(q, k - mode_min_) = std::conj(e) / static_cast<double>(n) * (nyquist ? 0.5 : 1.0);
        inverse_(k - mode_min_, q) = e;
      }
    }
  }

  int angular_count() const { return n_; }
  int mode_min() const { return mode_min_; }
  int mode_max() const { return mode_max_; }
  int mode_count() const { return mode_max_ - mode_min_ + 1; }

  /// rings x modes coefficients of a grid function.
  Eigen::MatrixXcd forward(const GridFunction& g) const {
    const auto rings = static_cast<Eigen::Index>(g.size() / n_);
    Eigen::Map<const RowMatrix> v(g.values().data(), rings, n_);
    return v * forward_;
  }

  /// Ring samples (row-major rings x n) from rings x modes coefficients.
  RowMatrix inverse(const Eigen::MatrixXcd& modes) const { return modes * inverse_; }

 private:
  int n_;
  int mode_min_;
  int mode_max_;
  Eigen::MatrixXcd forward_;
  Eigen::MatrixXcd inverse_;
};

// Five-point Lagrange derivative weights on the ring radii, one-sided at the
// first and last two rings.
class PolarDifferentiator {
 public:
  explicit PolarDifferentiator(const GridPtr& grid)
      : grid_(grid), angular_(grid->angular_count()) {
    const int rings = grid->ring_count();
    require(rings >= 5, ErrorKind::InvalidArgument,
            "polar differentiation needs at least 5 radial rings (grid too coarse)");
    const auto r = grid->radii();
    start_.resize(rings);
    weights_.resize(rings);
    for (int i = 0; i < rings; ++i) {
      const int j0 = std::clamp(i - 2, 0, rings - 5);
      start_[i] = j0;
      const double x0 = r[i];
      for (int j = 0; j < 5; ++j) {
        const double xj = r[j0 + j];
        double sum = 0.0;
        for (int m = 0; m < 5; ++m) {
          if (m == j) continue;
          double prod = 1.0 / (xj - r[j0 + m]);
          for (int l = 0; l < 5; ++l) {
            if (l == j || l == m) continue;
            prod *= (x0 - r[j0 + l]) / (xj - r[j0 + l]);
          }
          sum += prod;
        }
        weights_[i][j] = sum;
      }
    }
  }

  // Returns (d/dr g, d/dtheta g).
  std::pair<std::vector<Complex>, std::vector<Complex>> partials(const GridFunction& g) const {
    const DiscGrid& grid = *grid_;
    const int rings = grid.ring_count();
    const int nt = grid.angular_count();
    std::vector<Complex> dr(grid.size());
    std::vector<Complex> dt(grid.size());
    for (int i = 0; i < rings; ++i) {
      for (int q = 0; q < nt; ++q) {
        Complex acc = 0.0;
        for (int j = 0; j < 5; ++j) acc += weights_[i][j] * g[grid.index(start_[i] + j, q)];
        dr[grid.index(i, q)] = acc;
      }
    }
    Eigen::MatrixXcd modes = angular_.forward(g);
    for (int k = angular_.mode_min(); k <= angular_.mode_max(); ++k) {
      const bool nyquist = (nt % 2 == 0) && (k == angular_.mode_min() || k == angular_.mode_max());
      modes.col(k - angular_.mode_min()) *= nyquist ? Complex(0.0) : kI * static_cast<double>(k);
    }
    const AngularTransform::RowMatrix back = angular_.inverse(modes);
    std::copy(back.data(), back.data() + back.size(), dt.begin());
    return {std::move(dr), std::move(dt)};
  }

 private:
  GridPtr grid_;
  AngularTransform angular_;
  std::vector<int> start_;
  std::vector<std::array<double, 5>> weights_;
};

// Orthonormal polynomials on [0,1] for the weight s^a, via the Jacobi
// (alpha = 0, beta = a) three-term recurrence mapped from [-1,1].
class RadialJacobi {
 public:
  RadialJacobi(int a, int count) : a_(a), diag_(count), off_(count + 1) {
    const double beta = a;
    for (int n = 0; n < count; ++n) {
      double an;
      if (n == 0) {
        an = beta / (beta + 2.0);
      } else {
        const double t = 2.0 * n + beta;
        an = beta * beta / (t * (t + 2.0));
      }
      diag_[n] = 0.5 * (1.0 + an);
    }
    off_[0] = 0.0;
    for (int n = 1; n <= count; ++n) {
      const double t = 2.0 * n + beta;
      const double bn = 4.0 * n * n * (n + beta) * (n + beta) / (t * t * (t + 1.0) * (t - 1.0));
      off_[n] = std::sqrt(0.25 * bn);
    }
    p0_ = std::sqrt(beta + 1.0);
  }

  void eval(double s, std::span<double> out) const {
    const int count = static_cast<int>(out.size());
    if (count == 0) return;
    double prev = 0.0;
    double cur = p0_;
    out[0] = cur;
    for (int n = 0; n + 1 < count; ++n) {
      const double next = ((s - diag_[n]) * cur - off_[n] * prev) / off_[n + 1];
      prev = cur;
      cur = next;
      out[n + 1] = cur;
    }
  }

 private:
  int a_;
  std::vector<double> diag_;
  std::vector<double> off_;
  double p0_ = 1.0;
};

double safe_exp(double x) { return x < -745.0 ? 0.0 : std::exp(x); }

std::shared_ptr<const PolarDifferentiator> differentiator(const GridPtr& grid) {
  return cached_for_grid<PolarDifferentiator>(grid);
}

double masked_norm(const GridFunction& g, const std::vector<std::uint8_t>& mask) {
  const DiscGrid& grid = *g.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (mask[i]) s += grid.weight(i) * std::norm(g[i]);
  }
  return std::sqrt(s);
}

GridFunction map_values(const GridFunction& g, auto&& fn) {
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g[i]);
  return GridFunction(g.grid(), std::move(v));
}

}  // namespace

// Conductivity

Conductivity Conductivity::constant(GridPtr grid, double value) {
  require(value != 0.0 && std::isfinite(value), ErrorKind::InvalidArgument,
          "constant conductivity must be finite and non-zero");
  Conductivity out{GridFunction::constant(std::move(grid), value),
                   std::max(std::abs(value), 1.0 / std::abs(value)), Form::Constant, value};
  return out;
}

Conductivity Conductivity::exp_x(GridPtr grid, double c) {
  auto f = GridFunction::sample(std::move(grid), [c](Complex z) { return Complex(std::exp(c * z.real())); });
  return Conductivity{std::move(f), std::exp(std::abs(c)), Form::ExpX, c};
}

Conductivity Conductivity::exp_xy(GridPtr grid, double c) {
  auto f = GridFunction::sample(std::move(grid),
                                [c](Complex z) { return Complex(std::exp(c * z.real() * z.imag())); });
  return Conductivity{std::move(f), std::exp(0.5 * std::abs(c)), Form::ExpXY, c};
}

Conductivity Conductivity::from_samples(GridFunction f, double k) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (Complex v : f.values()) {
    require(std::isfinite(v.real()) && v.imag() == 0.0, ErrorKind::InvalidArgument,
            "conductivity samples must be finite and real");
    lo = std::min(lo, std::abs(v.real()));
    hi = std::max(hi, std::abs(v.real()));
  }
  require(lo > 0.0, ErrorKind::InvalidArgument, "conductivity vanishes at a node");
  const double tight = std::max(hi, 1.0 / lo);
  if (k <= 0.0) k = tight;
  require(k >= 1.0 && 1.0 / k <= lo && hi <= k, ErrorKind::InvalidArgument,
          "conductivity violates 1/k <= |f| <= k");
  return Conductivity{std::move(f), k, Form::Sampled, 0.0};
}

// Differentiation

GridFunction dbar(const GridFunction& g) {
  const auto diff = differentiator(g.grid());
  auto [dr, dt] = diff->partials(g);
  const DiscGrid& grid = *g.grid();
  std::vector<Complex> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Complex z = grid.node(i);
    const double r = std::abs(z);
    const Complex e = z / r;
    out[i] = 0.5 * e * (dr[i] + kI * dt[i] / r);
  }
  return GridFunction(g.grid(), std::move(out));
}

GridFunction dz(const GridFunction& g) {
  const auto diff = differentiator(g.grid());
  auto [dr, dt] = diff->partials(g);
  const DiscGrid& grid = *g.grid();
  std::vector<Complex> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Complex z = grid.node(i);
    const double r = std::abs(z);
    const Complex e = std::conj(z) / r;
    out[i] = 0.5 * e * (dr[i] - kI * dt[i] / r);
  }
  return GridFunction(g.grid(), std::move(out));
}

GridFunction alpha_from_f(const Conductivity& f) {
  const double floor = 1.0 / f.k;
  for (Complex v : f.f.values()) {
    require(std::abs(v) >= floor * (1.0 - 1e-14), ErrorKind::InvalidArgument,
            "alpha_from_f: |f| below 1/k at a node");
  }
  switch (f.form) {
    case Conductivity::Form::Constant:
      return GridFunction::zeros(f.grid());
    case Conductivity::Form::ExpX:
      return GridFunction::constant(f.grid(), 0.5 * f.c);
    case Conductivity::Form::ExpXY: {
      const double c = f.c;
      return GridFunction::sample(f.grid(), [c](Complex z) { return 0.5 * c * Complex(z.imag(), z.real()); });
    }
    case Conductivity::Form::Sampled:
      break;
  }
  return dbar(f.f) / f.f;
}

// Teodorescu transform

TeodorescuOperator::TeodorescuOperator(GridPtr grid) : grid_(std::move(grid)) {
  const DiscGrid& g = *grid_;
  const int rings = g.ring_count();
  const int panel = g.nodes_per_panel();
  const int exact = g.radial_exactness();
  const AngularTransform angular(g.angular_count());
  mode_min_ = angular.mode_min();
  mode_max_ = angular.mode_max();
  radial_.resize(angular.mode_count());

  const auto s = g.s_nodes();
  const auto r = g.radii();
  const auto omega = g.ring_weights();

  std::vector<double> p;
  for (int k = mode_min_; k <= mode_max_; ++k) {
    const int a = std::abs(k);
    // Discrete orthogonality of s^{a/2} p_m needs a + 2(M-1) <= exact.
    const int count = std::min(panel, (exact - a) / 2 + 1);
    if (exact - a < 0 || count <= 0) continue;
    const RadialJacobi basis(a, count);
    p.assign(count, 0.0);

    // Projection: c_m = sum_l omega_l s_l^{a/2} p_m(s_l) w_k(r_l).
    Eigen::MatrixXd project(count, rings);
    for (int l = 0; l < rings; ++l) {
      basis.eval(s[l], p);
      const double scale = omega[l] * safe_exp(0.5 * a * std::log(s[l]));
      for (int m = 0; m < count; ++m) project(m, l) = scale * p[m];
    }

    // Exact Cauchy-kernel integrals of r^a p_m(s) e^{ik theta}; output mode k-1.
    Eigen::MatrixXd integrate(rings, count);
    if (k <= 0) {
      const GaussRule rule = gauss_legendre_unit((a + count) / 2 + 1);
      for (int i = 0; i < rings; ++i) {
        const double log_r = std::log(r[i]);
        for (int m = 0; m < count; ++m) integrate(i, m) = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double t = rule.nodes[q];
          basis.eval(s[i] * t, p);
          const double scale = rule.weights[q] * safe_exp(a * std::log(t) + (a + 1) * log_r);
          for (int m = 0; m < count; ++m) integrate(i, m) += scale * p[m];
        }
      }
    } else {
      const GaussRule rule = gauss_legendre_unit(count / 2 + 1);
      for (int i = 0; i < rings; ++i) {
        const double len = 1.0 - s[i];
        const double scale0 = -len * safe_exp((k - 1) * std::log(r[i]));
        for (int m = 0; m < count; ++m) integrate(i, m) = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          basis.eval(s[i] + len * rule.nodes[q], p);
          const double scale = scale0 * rule.weights[q];
          for (int m = 0; m < count; ++m) integrate(i, m) += scale * p[m];
        }
      }
    }
    radial_[k - mode_min_] = integrate * project;
  }
}

std::shared_ptr<const TeodorescuOperator> TeodorescuOperator::for_grid(const GridPtr& grid) {
  return cached_for_grid<TeodorescuOperator>(grid);
}

GridFunction TeodorescuOperator::apply(const GridFunction& w) const {
  require(w.grid()->same_as(*grid_), ErrorKind::GridMismatch,
          "teodorescu: function lives on a different grid");
  const DiscGrid& g = *grid_;
  const int rings = g.ring_count();
  const int nt = g.angular_count();
  const auto angular = cached_for_grid<AngularTransform>(grid_);
  const int modes = angular->mode_count();

  const Eigen::MatrixXcd in = angular->forward(w);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rings, modes);
  for (int k = 0; k < modes; ++k) {
    if (radial_[k].size() == 0) continue;
    out.col(k) = radial_[k] * in.col(k);
  }
  AngularTransform::RowMatrix back = angular->inverse(out);
  // Every output mode is shifted down by one.
  for (int q = 0; q < nt; ++q) back.col(q) *= std::conj(std::polar(1.0, g.angle(q)));
  std::vector<Complex> values(back.data(), back.data() + back.size());
  return GridFunction(w.grid(), std::move(values));
}

GridFunction teodorescu(const GridFunction& g) { return TeodorescuOperator::for_grid(g.grid())->apply(g); }

// Membership and lifting

double vekua_residual(const GridFunction& w, const GridFunction& alpha, int degree) {
  check_same_grid(w, alpha);
  const GridFunction u = w - teodorescu(alpha * w.conj());
  const GridFunction pu = eval_on_grid(project(u, degree), w.grid());
  return norm(u - pu);
}

VekuaFunction make_vekua_function(GridFunction w, GridFunction alpha, int degree) {
  const double res = vekua_residual(w, alpha, degree);
  VekuaFunction out{std::move(w), std::move(alpha), res, 0.0, degree, 0, true, {}};
  return out;
}

VekuaFunction vekua_lift(const GridFunction& seed, const GridFunction& alpha, int degree, double tol,
                         int max_iter) {
  check_same_grid(seed, alpha);
  require(tol > 0.0, ErrorKind::InvalidArgument, "vekua_lift: tolerance must be positive");
  require(max_iter >= 1, ErrorKind::InvalidArgument, "vekua_lift: max_iter must be >= 1");
  const auto op = TeodorescuOperator::for_grid(seed.grid());

  GridFunction w = seed;
  std::vector<double> steps;
  bool converged = false;
  int it = 0;
  int growth = 0;
  while (it < max_iter) {
    ++it;
    GridFunction next = seed + op->apply(alpha * w.conj());
    const double step = norm(next - w);
    w = std::move(next);
    if (!steps.empty()) growth = step > steps.back() ? growth + 1 : 0;
    steps.push_back(step);
    if (step <= tol) {
      converged = true;
      break;
    }
    if (growth >= 3) {
      std::ostringstream os;
      os << "vekua_lift: iteration diverges (step norm grew 3 times in a row, last " << step << ")";
      fail(ErrorKind::NonConvergence, os.str());
    }
  }
  VekuaFunction out = make_vekua_function(std::move(w), alpha, degree);
  out.tolerance = tol;
  out.iterations = it;
  out.converged = converged;
  out.step_norms = std::move(steps);
  return out;
}

VekuaFunction vekua_lift(const AnalyticCoeffs& seed, const GridFunction& alpha, double tol, int max_iter) {
  return vekua_lift(eval_on_grid(seed, alpha.grid()), alpha, seed.degree(), tol, max_iter);
}

// Similarity principle

SimilarityFactor similarity_factor(const VekuaFunction& w) {
  for (Complex v : w.w.values()) {
    require(v != Complex(0.0), ErrorKind::InvalidArgument, "similarity_factor: w vanishes at a node");
  }
  const GridFunction ratio = w.alpha * (w.w.conj() / w.w);
  GridFunction s = teodorescu(ratio);
  GridFunction analytic = w.w * map_values(s, [](Complex v) { return std::exp(-v); });

  const auto inner = interior_nodes(*w.w.grid());
  const double f_norm = masked_norm(analytic, inner);
  const double ratio_norm = masked_norm(ratio, inner);
  SimilarityFactor out{std::move(s), std::move(analytic), 0.0, 0.0, 0.0, w.alpha.max_abs(), true};
  out.dbar_residual = f_norm > 0 ? masked_norm(dbar(out.analytic), inner) / f_norm : 0.0;
  out.defining_residual = ratio_norm > 0 ? masked_norm(dbar(out.s) - ratio, inner) / ratio_norm : 0.0;
  out.s_sup = out.s.max_abs();
  out.bound_holds = out.s_sup <= 4.0 * out.alpha_sup + 1e-8;
  return out;
}

GridFunction pf_restricted(const VekuaFunction& w, int degree) {
  const GridPtr& grid = w.w.grid();
  const GridFunction tw = teodorescu(w.alpha * w.w.conj());
  return eval_on_grid(project(w.w, degree), grid) + (tw - eval_on_grid(project(tw, degree), grid));
}

// PDE diagnostics

std::vector<std::uint8_t> interior_nodes(const DiscGrid& grid) {
  const double limit = 1.0 - 2.0 / grid.ring_count();
  std::vector<std::uint8_t> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(grid.node(i)) <= limit ? 1 : 0;
  return out;
}

GridFunction divergence_form(const GridFunction& sigma, const GridFunction& u) {
  // div(sigma grad u) = 4 Re dz(sigma dbar u) for real sigma and u.
  const GridFunction flux = sigma * dbar(u);
  return map_values(dz(flux), [](Complex v) { return Complex(4.0 * v.real()); });
}

namespace {

double relative_divergence(const GridFunction& sigma, const GridFunction& u,
                           const std::vector<std::uint8_t>& inner) {
  const double num = masked_norm(divergence_form(sigma, u), inner);
  const double den = masked_norm(2.0 * (sigma * dbar(u)), inner) + masked_norm(sigma * u, inner);
  return den > 0.0 ? num / den : num;
}

}  // namespace

MetaharmonicResiduals metaharmonic_residuals(const VekuaFunction& w, const Conductivity& f) {
  check_same_grid(w.w, f.f);
  const auto inner = interior_nodes(*w.w.grid());
  const GridFunction f2 = f.f * f.f;
  const GridFunction inv_f2 = map_values(f2, [](Complex v) { return 1.0 / v; });
  const GridFunction u0 = w.w.real_part() / f.f;
  const GridFunction u1 = f.f * w.w.imag_part();
  return {relative_divergence(f2, u0, inner), relative_divergence(inv_f2, u1, inner)};
}

double beltrami_residual(const VekuaFunction& w, const Conductivity& f) {
  check_same_grid(w.w, f.f);
  const auto inner = interior_nodes(*w.w.grid());
  const GridFunction g = w.w.real_part() / f.f + kI * (f.f * w.w.imag_part());
  const GridFunction nu = map_values(f.f, [](Complex v) { return (1.0 - v * v) / (1.0 + v * v); });
  const GridFunction dbar_g = dbar(g);
  const GridFunction dz_g = dz(g);
  const double num = masked_norm(dbar_g - nu * dz_g.conj(), inner);
  const double den = masked_norm(dbar_g, inner) + masked_norm(dz_g, inner) + masked_norm(g, inner);
  return den > 0.0 ? num / den : num;
}

MetaharmonicResiduals laplacian_residuals(const GridFunction& w) {
  const auto inner = interior_nodes(*w.grid());
  const GridFunction one = GridFunction::constant(w.grid(), 1.0);
  return {relative_divergence(one, w.real_part(), inner), relative_divergence(one, w.imag_part(), inner)};
}

}  // namespace bergbep
