#include "bergbep/fbep.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "bergbep/error.hpp"
#include "secular.hpp"

namespace bergbep {

namespace {

Eigen::VectorXd masked_weights(const DiscGrid& grid, const Region& region) {
  const auto inside = region.resolve(grid);
  Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) w(static_cast<Eigen::Index>(i)) = inside[i] ? grid.weight(i) : 0.0;
  return w;
}

Eigen::MatrixXcd values_matrix(const VekuaBasis& b) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(b.grid->size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j) {
    const auto v = b.elements[j].lift.w.values();
    m.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return m;
}

Eigen::MatrixXd real_gram(const Eigen::MatrixXcd& w, const Eigen::VectorXd& weights) {
  Eigen::MatrixXd g = (w.adjoint() * weights.asDiagonal() * w).real();
  return 0.5 * (g + g.transpose());
}

void validate_partition(const DiscGrid& grid, const Region& K, const Region& J) {
  const auto inK = K.resolve(grid);
  const auto inJ = J.resolve(grid);
  std::size_t k_nodes = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require((inK[i] != 0) != (inJ[i] != 0), ErrorKind::InvalidArgument, "f-BEP: K and J must partition the grid nodes");
    k_nodes += inK[i] ? 1 : 0;
  }
  require(k_nodes > 0, ErrorKind::InvalidArgument, "f-BEP: region K contains no grid nodes");
}

}  // namespace

std::string BasisElement::label() const {
  std::ostringstream os;
  os << (imaginary ? "i*e_" : "e_") << n;
  return os.str();
}

GridFunction VekuaBasis::combine(const Eigen::VectorXd& a) const {
  require(static_cast<std::size_t>(a.size()) == size(), ErrorKind::InvalidArgument,
          "VekuaBasis::combine: coefficient count mismatch");
  GridFunction out = GridFunction::zeros(grid);
  for (std::size_t j = 0; j < size(); ++j) {
    const auto v = elements[j].lift.w.values();
    const double aj = a(static_cast<Eigen::Index>(j));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += aj * v[i];
  }
  return out;
}

Eigen::MatrixXd VekuaBasis::gram_on(const Region& region) const {
  return real_gram(values_matrix(*this), masked_weights(*grid, region));
}

Eigen::VectorXd VekuaBasis::moments(const GridFunction& g, const Region& region) const {
  require(g.grid()->same_as(*grid), ErrorKind::GridMismatch, "VekuaBasis::moments: grid mismatch");
  const auto v = g.values();
  const Eigen::Map<const Eigen::VectorXcd> gv(v.data(), static_cast<Eigen::Index>(v.size()));
  return (values_matrix(*this).adjoint() * masked_weights(*grid, region).asDiagonal() * gv).real();
}

VekuaBasis build_fbep_space(const Conductivity& f, int degree, double tol, int max_iter) {
  require(degree >= 0, ErrorKind::InvalidArgument, "build_fbep_space: degree must be non-negative");
  const GridFunction alpha = alpha_from_f(f);

  std::vector<std::future<BasisElement>> jobs;
  for (int n = 0; n <= degree; ++n) {
    for (bool imag : {false, true}) {
      jobs.push_back(std::async(std::launch::async, [&alpha, n, imag, degree, tol, max_iter] {
        std::vector<Complex> c(degree + 1);
        c[n] = imag ? Complex(0.0, 1.0) : Complex(1.0);
        BasisElement e{n, imag, vekua_lift(AnalyticCoeffs(std::move(c)), alpha, tol, max_iter)};
        return e;
      }));
    }
  }
  std::vector<BasisElement> all;
  for (auto& job : jobs) {
    try {
      all.push_back(job.get());
    } catch (const Error& err) {
      const int k = static_cast<int>(all.size());
      std::ostringstream os;
      os << "build_fbep_space: lift of " << (k % 2 ? "i*e_" : "e_") << k / 2 << " failed: " << err.what();
      fail(err.kind(), os.str());
    }
    if (!all.back().lift.converged) {
      std::ostringstream os;
      os << "build_fbep_space: lift of " << all.back().label() << " did not reach tolerance " << tol << " in "
         << max_iter << " iterations";
      fail(ErrorKind::NonConvergence, os.str());
    }
  }

  VekuaBasis basis;
  basis.grid = f.grid();
  basis.degree = degree;
  basis.tolerance = tol;
  basis.elements = std::move(all);
  const Eigen::MatrixXd full = basis.gram_on(Region::full_disc());

  // Greedy rank-revealing pass in seed order.
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < full.rows(); ++j) {
    double resid = full(j, j);
    if (!kept.empty()) {
      const auto m = static_cast<Eigen::Index>(kept.size());
      Eigen::MatrixXd gk(m, m);
      Eigen::VectorXd v(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        v(a) = full(kept[a], j);
        for (Eigen::Index b = 0; b < m; ++b) gk(a, b) = full(kept[a], kept[b]);
      }
      resid -= v.dot(gk.ldlt().solve(v));
    }
    if (resid > 1e-10 * full(j, j)) {
      kept.push_back(j);
    } else {
      basis.dropped.push_back(basis.elements[static_cast<std::size_t>(j)].label());
    }
  }
  std::vector<BasisElement> elements;
  for (Eigen::Index j : kept) elements.push_back(std::move(basis.elements[static_cast<std::size_t>(j)]));
  basis.elements = std::move(elements);
  basis.gram = basis.gram_on(Region::full_disc());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(basis.gram, Eigen::EigenvaluesOnly);
  basis.min_eigenvalue = eig.eigenvalues().minCoeff();
  basis.max_eigenvalue = eig.eigenvalues().maxCoeff();
  return basis;
}

FbepProblem FbepProblem::make(Conductivity f, Region K, GridFunction h_K, GridFunction h_J, double M,
                              int degree) {
  Region J = K.complement();
  FbepProblem p{std::move(f), std::move(K), std::move(J), std::move(h_K), std::move(h_J), M, degree};
  return p;
}

void FbepProblem::validate() const {
  require(std::isfinite(M) && M > 0.0, ErrorKind::InvalidArgument, "f-BEP: M must be positive");
  require(degree >= 0, ErrorKind::InvalidArgument, "f-BEP: degree must be non-negative");
  require(lift_tolerance > 0.0, ErrorKind::InvalidArgument, "f-BEP: lift tolerance must be positive");
  check_same_grid(h_K, h_J);
  check_same_grid(h_K, f.f);
  require(h_K.all_finite() && h_J.all_finite(), ErrorKind::InvalidArgument, "f-BEP: data must be finite");
  const DiscGrid& g = *grid();
  if (2 * degree > g.exactness_degree()) {
    std::ostringstream os;
    os << "f-BEP: degree " << degree << " exceeds half the grid exactness degree " << g.exactness_degree();
    fail(ErrorKind::DegreeTooLarge, os.str());
  }
  validate_partition(g, K, J);
}

double fbep_feasibility_distance(const VekuaBasis& basis, const GridFunction& h_J, const Region& J) {
  const Eigen::VectorXd w = masked_weights(*basis.grid, J);
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXcd a = sw.asDiagonal() * values_matrix(basis);
  const auto v = h_J.values();
  const Eigen::VectorXcd b = sw.asDiagonal() * Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<Eigen::Index>(v.size()));
  const Eigen::Index rows = a.rows();
  Eigen::MatrixXd ar(2 * rows, a.cols());
  ar << a.real(), a.imag();
  Eigen::VectorXd br(2 * rows);
  br << b.real(), b.imag();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ar);
  qr.setThreshold(1e-12);
  return (br - ar * qr.solve(br)).norm();
}

FbepSolution solve_fbep(const FbepProblem& p, const BepOptions& opt) {
  p.validate();
  auto basis = std::make_shared<const VekuaBasis>(
      build_fbep_space(p.f, p.degree, p.lift_tolerance, p.lift_max_iterations));
  return solve_fbep(p, std::move(basis), opt);
}

FbepSolution solve_fbep(const FbepProblem& p, std::shared_ptr<const VekuaBasis> basis, const BepOptions& opt) {
  p.validate();
  require(basis && basis->grid->same_as(*p.grid()), ErrorKind::GridMismatch, "solve_fbep: basis lives on another grid");
  require(basis->degree == p.degree, ErrorKind::InvalidArgument, "solve_fbep: basis degree differs from the problem");
  if (basis->min_eigenvalue < 1e-10) {
    std::ostringstream os;
    os << "solve_fbep: ill-conditioned basis, smallest Gram eigenvalue " << basis->min_eigenvalue;
    fail(ErrorKind::InvalidArgument, os.str());
  }

  const double dist = fbep_feasibility_distance(*basis, p.h_J, p.J);
  if (dist > p.M + 1e-9) {
    std::ostringstream os;
    os << "infeasible constraint level: M = " << p.M << " is below the distance " << dist
       << " of h_J to the lifted span on J";
    fail(ErrorKind::Infeasible, os.str());
  }
  const Eigen::MatrixXd AK = basis->gram_on(p.K);
  const Eigen::MatrixXd AJ = basis->gram_on(p.J);
  const Eigen::VectorXd bK = basis->moments(p.h_K, p.K);
  const Eigen::VectorXd bJ = basis->moments(p.h_J, p.J);
  const double hJ = norm(p.h_J, p.J);
  const auto r = detail::secular_solve<double>(AK, AJ, bK, bJ, hJ * hJ, dist * dist, p.M, 1.0 + opt.lambda_lo,
                                               opt.max_iterations);

  FbepSolution s{basis, r.x, basis->combine(r.x)};
  s.lambda = r.mu - 1.0;
  s.err_K = norm(p.h_K - s.w_star, p.K);
  s.err_J = norm(p.h_J - s.w_star, p.J);
  s.iterations = r.iterations;
  s.active = r.active;
  s.feasibility_distance = dist;
  if (s.active && std::abs(s.err_J - p.M) > 1e-6 * std::max(1.0, p.M)) {
    std::ostringstream os;
    os << "solve_fbep: secular iteration stopped at |err_J - M| = " << std::abs(s.err_J - p.M);
    fail(ErrorKind::NonConvergence, os.str());
  }
  const GridFunction kkt = r.mu * glue(GridFunction::zeros(p.grid()), s.w_star - p.h_J, p.K) +
                           glue(s.w_star - p.h_K, GridFunction::zeros(p.grid()), p.K);
  s.kkt_residual = basis->moments(kkt, Region::full_disc()).norm();
  s.vekua_residual = vekua_residual(s.w_star, basis->elements.empty() ? alpha_from_f(p.f)
                                                                      : basis->elements.front().lift.alpha,
                                    p.degree);
  return s;
}

double fbep_conjecture_residual(const FbepProblem& p, const VekuaBasis& basis, const Eigen::VectorXd& a,
                                double lambda) {
  const GridFunction w = basis.combine(a);
  const GridFunction v = (lambda + 1.0) * glue(GridFunction::zeros(p.grid()), w - p.h_J, p.K) +
                         glue(w - p.h_K, GridFunction::zeros(p.grid()), p.K);
  const Eigen::VectorXd m = basis.moments(v, Region::full_disc());
  const Eigen::VectorXd y = basis.gram.ldlt().solve(m);
  const double proj = std::sqrt(std::max(0.0, y.dot(basis.gram * y)));
  const double wn = norm(w);
  return proj / (wn > 0.0 ? wn : 1.0);
}

double fbep_conjecture_check(const FbepProblem& p, const FbepSolution& sol) {
  require(sol.basis != nullptr, ErrorKind::InvalidArgument, "fbep_conjecture_check: solution has no basis");
  return fbep_conjecture_residual(p, *sol.basis, sol.coefficients, sol.lambda);
}

double fbep_directional_check(const FbepProblem& p, const FbepSolution& sol, int count, std::uint64_t seed) {
  require(sol.basis != nullptr, ErrorKind::InvalidArgument, "fbep_directional_check: solution has no basis");
  const VekuaBasis& b = *sol.basis;
  const Eigen::VectorXd gK = 2.0 * b.moments(sol.w_star - p.h_K, p.K);
  const Eigen::VectorXd gJ = 2.0 * b.moments(sol.w_star - p.h_J, p.J);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd d(gK.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = normal(rng);
    if (sol.active && gJ.dot(d) > 0.0) d = -d;
    worst = std::min(worst, gK.dot(d) / d.norm());
  }
  return worst;
}

Eigen::MatrixXd toeplitz_f_matrix(const VekuaBasis& basis, const Region& region) {
  return basis.gram.ldlt().solve(basis.gram_on(region));
}

double self_adjointness_defect(const VekuaBasis& basis, const Region& region) {
  const Eigen::MatrixXd gx = basis.gram * toeplitz_f_matrix(basis, region);
  const double scale = gx.norm();
  return scale > 0.0 ? (gx - gx.transpose()).norm() / scale : 0.0;
}

TransferReport transfer_report(const FbepProblem& p, int max_iter, double tol) {
  p.validate();
  const GridPtr& grid = p.grid();
  const GridFunction alpha = alpha_from_f(p.f);
  const auto op = TeodorescuOperator::for_grid(grid);
  const GridFunction zero = GridFunction::zeros(grid);
  auto on_j = [&](const GridFunction& g) { return glue(zero, g, p.K); };

  // S h = chi_J (h - T[chi_J alpha conj h]),  S* v = chi_J (v + alpha T[chi_J conj v]).
  auto S = [&](const GridFunction& h) { return on_j(h - op->apply(on_j(alpha * h.conj()))); };
  auto S_adj = [&](const GridFunction& v) { return on_j(v + alpha * op->apply(on_j(v).conj())); };

  TransferReport r{on_j(p.h_J - op->apply(on_j(alpha * p.h_J.conj())))};

  GridFunction x = on_j(GridFunction::sample(grid, [](Complex z) { return 1.0 + 0.5 * z + 0.25 * std::conj(z); }));
  double nx = norm(x);
  require(nx > 0.0, ErrorKind::InvalidArgument, "transfer_report: region J contains no grid nodes");
  x *= 1.0 / nx;
  double est = 0.0;
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    const GridFunction sx = S(x);
    const double next = norm(sx);
    GridFunction y = S_adj(sx);
    const double ny = norm(y);
    if (ny == 0.0) {
      est = next;
      break;
    }
    x = (1.0 / ny) * std::move(y);
    const bool done = std::abs(next - est) <= tol * std::max(next, 1.0);
    est = next;
    if (done) break;
  }
  r.iterations = std::min(r.iterations, max_iter);
  r.rho = est;
  r.M_star = p.M * est;
  return r;
}

}  // namespace bergbep
