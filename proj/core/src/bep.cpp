#include "bergbep/bep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bergbep/error.hpp"
#include "secular.hpp"

namespace bergbep {

namespace {

// Quadrature data of a problem: basis matrix, masked weights, Gram matrices
// and moment vectors for K and J.
struct Discrete {
  Eigen::MatrixXcd E;
  Eigen::VectorXd wK;
  Eigen::VectorXd wJ;
  Eigen::VectorXcd hK;
  Eigen::VectorXcd hJ;
  Eigen::MatrixXcd GK;
  Eigen::MatrixXcd GJ;
  Eigen::VectorXcd bK;
  Eigen::VectorXcd bJ;
};

void hermitian(Eigen::MatrixXcd& m) { m = 0.5 * (m + m.adjoint()).eval(); }

Eigen::VectorXcd as_vector(const GridFunction& g) {
  return Eigen::Map<const Eigen::VectorXcd>(g.values().data(), static_cast<Eigen::Index>(g.size()));
}

Discrete discretize(const BepProblem& p) {
  const DiscGrid& grid = *p.grid();
  const auto inK = p.K.resolve(grid);
  const auto inJ = p.J.resolve(grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Discrete d;
  d.E = basis_matrix(grid, p.degree);
  d.wK.resize(n);
  d.wJ.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = grid.weight(static_cast<std::size_t>(i));
    d.wK(i) = inK[i] ? w : 0.0;
    d.wJ(i) = inJ[i] ? w : 0.0;
  }
  d.hK = as_vector(p.h_K);
  d.hJ = as_vector(p.h_J);
  d.GK = d.E.adjoint() * d.wK.asDiagonal() * d.E;
  d.GJ = d.E.adjoint() * d.wJ.asDiagonal() * d.E;
  hermitian(d.GK);
  hermitian(d.GJ);
  d.bK = d.E.adjoint() * d.wK.asDiagonal() * d.hK;
  d.bJ = d.E.adjoint() * d.wJ.asDiagonal() * d.hJ;
  return d;
}

double weighted_norm(const Eigen::VectorXcd& r, const Eigen::VectorXd& w) {
  return std::sqrt(std::max(0.0, (w.array() * r.array().abs2()).sum()));
}

// Minimizer of ||.||_K^2 + mu ||.||_J^2 misfit. For mu > 1 the system is
// divided by mu to keep it well scaled as mu grows.
Eigen::VectorXcd solve_weighted(const Discrete& d, double mu) {
  Eigen::MatrixXcd a;
  Eigen::VectorXcd b;
  if (mu <= 1.0) {
    a = d.GK + mu * d.GJ;
    b = d.bK + mu * d.bJ;
  } else {
    a = d.GK / mu + d.GJ;
    b = d.bK / mu + d.bJ;
  }
  Eigen::LLT<Eigen::MatrixXcd> llt(a);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  return a.completeOrthogonalDecomposition().solve(b);
}

double err_on(const Discrete& d, const Eigen::VectorXcd& c, bool on_j) {
  const Eigen::VectorXcd r = (on_j ? d.hJ : d.hK) - d.E * c;
  return weighted_norm(r, on_j ? d.wJ : d.wK);
}

double kkt_of(const Discrete& d, const Eigen::VectorXcd& c, double lambda) {
  const Eigen::VectorXcd g = d.E * c;
  const Eigen::VectorXcd r = (lambda + 1.0) * (d.wJ.asDiagonal() * (g - d.hJ)).eval() +
                             (d.wK.asDiagonal() * (g - d.hK)).eval();
  return (d.E.adjoint() * r).norm();
}

BepSolution finish(const Discrete& d, const Eigen::VectorXcd& c, double lambda,
                   int iterations, bool active, double dist) {
  BepSolution s;
  s.g0 = AnalyticCoeffs::from_vector(c);
  s.lambda = lambda;
  s.err_K = err_on(d, c, false);
  s.err_J = err_on(d, c, true);
  s.kkt_residual = kkt_of(d, c, lambda);
  s.iterations = iterations;
  s.active = active;
  s.feasibility_distance = dist;
  return s;
}

double checked_distance(const BepProblem& p) {
  const double dist = feasibility_distance(p.h_J, p.J, p.degree);
  if (dist > p.M + 1e-9) {
    std::ostringstream os;
    os << "infeasible constraint level: M = " << p.M << " is below the distance " << dist
       << " of h_J to the analytic span on J";
    fail(ErrorKind::Infeasible, os.str());
  }
  return dist;
}

void add_truncation_drift(const BepProblem& p, const BepOptions& opt, BepSolution& s,
                          BepSolution (*solver)(const BepProblem&, const BepOptions&)) {
  if (!opt.truncation_check || p.degree < 4) return;
  BepProblem coarse = p;
  coarse.degree = p.degree - 4;
  BepOptions o = opt;
  o.truncation_check = false;
  try {
    const BepSolution c = solver(coarse, o);
    double drift = 0.0;
    for (int n = 0; n <= p.degree; ++n) {
      const Complex cn = n <= coarse.degree ? c.g0.coeffs[n] : Complex(0.0);
      drift += std::norm(s.g0.coeffs[n] - cn);
    }
    s.truncation_drift = std::sqrt(drift);
  } catch (const Error&) {
    // The coarser space may be infeasible; the drift stays NaN.
  }
}

}  // namespace

BepProblem BepProblem::make(Region K, GridFunction h_K, GridFunction h_J, double M, int degree) {
  Region J = K.complement();
  BepProblem p{std::move(K), std::move(J), std::move(h_K), std::move(h_J), M, degree};
  return p;
}

void BepProblem::validate() const {
  require(std::isfinite(M) && M > 0.0, ErrorKind::InvalidArgument, "BEP: M must be positive");
  require(degree >= 0, ErrorKind::InvalidArgument, "BEP: degree must be non-negative");
  check_same_grid(h_K, h_J);
  require(h_K.all_finite() && h_J.all_finite(), ErrorKind::InvalidArgument, "BEP: data must be finite");
  const DiscGrid& grid = *h_K.grid();
  if (2 * degree > grid.exactness_degree()) {
    std::ostringstream os;
    os << "BEP: degree " << degree << " exceeds half the grid exactness degree " << grid.exactness_degree();
    fail(ErrorKind::DegreeTooLarge, os.str());
  }
  const auto inK = K.resolve(grid);
  const auto inJ = J.resolve(grid);
  std::size_t k_nodes = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require((inK[i] != 0) != (inJ[i] != 0), ErrorKind::InvalidArgument,
            "BEP: K and J must partition the grid nodes");
    k_nodes += inK[i] ? 1 : 0;
  }
  require(k_nodes > 0, ErrorKind::InvalidArgument, "BEP: region K contains no grid nodes");
}

FeasibilityReport feasibility(const GridFunction& h_J, const Region& J, int degree) {
  const DiscGrid& grid = *h_J.grid();
  if (2 * degree > grid.exactness_degree()) {
    fail(ErrorKind::DegreeTooLarge, "feasibility: degree exceeds half the grid exactness degree");
  }
  const auto inJ = J.resolve(grid);
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd sw(n);
  for (Eigen::Index i = 0; i < n; ++i) sw(i) = inJ[i] ? std::sqrt(grid.weight(static_cast<std::size_t>(i))) : 0.0;
  const Eigen::MatrixXcd a = sw.asDiagonal() * basis_matrix(grid, degree);
  const Eigen::VectorXcd b = sw.asDiagonal() * as_vector(h_J);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
  qr.setThreshold(1e-12);
  const Eigen::VectorXcd c = qr.solve(b);
  FeasibilityReport r;
  r.distance = (b - a * c).norm();
  r.rank = static_cast<int>(qr.rank());
  r.regularized = r.rank < degree + 1;
  return r;
}

double feasibility_distance(const GridFunction& h_J, const Region& J, int degree) {
  return feasibility(h_J, J, degree).distance;
}

AnalyticCoeffs solve_at_lambda(const BepProblem& p, double lambda) {
  require(lambda > -1.0, ErrorKind::InvalidArgument, "solve_at_lambda: lambda must exceed -1");
  p.validate();
  return AnalyticCoeffs::from_vector(solve_weighted(discretize(p), 1.0 + lambda));
}

double constraint_error(const BepProblem& p, double lambda) {
  require(lambda > -1.0, ErrorKind::InvalidArgument, "constraint_error: lambda must exceed -1");
  p.validate();
  const Discrete d = discretize(p);
  return err_on(d, solve_weighted(d, 1.0 + lambda), true);
}

double kkt_residual(const BepProblem& p, const AnalyticCoeffs& g, double lambda) {
  p.validate();
  require(g.degree() == p.degree, ErrorKind::InvalidArgument, "kkt_residual: degree mismatch");
  return kkt_of(discretize(p), g.as_vector(), lambda);
}

BepSolution solve_bep(const BepProblem& p, const BepOptions& opt) {
  p.validate();
  require(opt.lambda_lo > -1.0 && opt.lambda_hi > opt.lambda_lo, ErrorKind::InvalidArgument,
          "solve_bep: invalid lambda bracket");
  const double dist = checked_distance(p);
  const Discrete d = discretize(p);
  const double target = opt.tolerance * std::max(1.0, p.M);

  // Work in t = log(1 + lambda); e(t) is expected to be non-increasing.
  auto eval = [&](double t, Eigen::VectorXcd& c) {
    c = solve_weighted(d, std::exp(t));
    return err_on(d, c, true);
  };

  Eigen::VectorXcd c_lo;
  double t_lo = std::log1p(opt.lambda_lo);
  double e_lo = eval(t_lo, c_lo);
  int iterations = 1;
  if (e_lo <= p.M) {
    BepSolution s = finish(d, c_lo, opt.lambda_lo, iterations, false, dist);
    add_truncation_drift(p, opt, s, &solve_bep);
    return s;
  }

  Eigen::VectorXcd c_hi;
  double t_hi = std::log1p(opt.lambda_hi);
  double e_hi = eval(t_hi, c_hi);
  ++iterations;
  int expansions = 0;
  while (e_hi > p.M) {
    if (expansions >= opt.max_iterations) {
      std::ostringstream os;
      os << "solve_bep: bracket expansion exhausted; e(lambda_lo) = " << e_lo << ", e(lambda_hi = "
         << std::expm1(t_hi) << ") = " << e_hi << ", M = " << p.M;
      fail(ErrorKind::NonConvergence, os.str());
    }
    if (e_hi > e_lo + 1e-12) {
      fail(ErrorKind::NonConvergence, "solve_bep: constraint error is not monotone in lambda");
    }
    t_lo = t_hi;
    e_lo = e_hi;
    t_hi += std::log(2.0);
    e_hi = eval(t_hi, c_hi);
    ++iterations;
    ++expansions;
  }

  Eigen::VectorXcd c_mid = c_hi;
  double t_mid = t_hi;
  double e_mid = e_hi;
  if (std::abs(e_hi - p.M) > target) {
    for (int it = 0; it < opt.max_iterations; ++it) {
      t_mid = 0.5 * (t_lo + t_hi);
      e_mid = eval(t_mid, c_mid);
      ++iterations;
      if (e_mid > e_lo + 1e-12 || e_mid < e_hi - 1e-12) {
        std::ostringstream os;
        os << "solve_bep: constraint error is not monotone in lambda near lambda = " << std::expm1(t_mid);
        fail(ErrorKind::NonConvergence, os.str());
      }
      if (std::abs(e_mid - p.M) <= target || t_hi - t_lo < 1e-15 * std::max(1.0, std::abs(t_mid))) break;
      if (e_mid > p.M) {
        t_lo = t_mid;
        e_lo = e_mid;
      } else {
        t_hi = t_mid;
        e_hi = e_mid;
      }
    }
  }
  if (std::abs(e_mid - p.M) > 1e-8 * std::max(1.0, p.M)) {
    std::ostringstream os;
    os << "solve_bep: bisection stopped at |e - M| = " << std::abs(e_mid - p.M);
    fail(ErrorKind::NonConvergence, os.str());
  }
  BepSolution s = finish(d, c_mid, std::expm1(t_mid), iterations, true, dist);
  add_truncation_drift(p, opt, s, &solve_bep);
  return s;
}

BepSolution solve_bep_oracle(const BepProblem& p, const BepOptions& opt) {
  p.validate();
  const double dist = checked_distance(p);
  const Discrete d = discretize(p);
  const double hJ2 = (d.wJ.array() * d.hJ.array().abs2()).sum();
  const auto r = detail::secular_solve<Complex>(d.GK, d.GJ, d.bK, d.bJ, hJ2, dist * dist, p.M,
                                                1.0 + opt.lambda_lo, opt.max_iterations);
  if (r.active) {
    const double e = err_on(d, r.x, true);
    if (std::abs(e - p.M) > 1e-8 * std::max(1.0, p.M)) {
      std::ostringstream os;
      os << "solve_bep_oracle: secular iteration stopped at |e - M| = " << std::abs(e - p.M);
      fail(ErrorKind::NonConvergence, os.str());
    }
  }
  return finish(d, r.x, r.mu - 1.0, r.iterations, r.active, dist);
}

}  // namespace bergbep
