#pragma once

// Norm-constrained least squares in a finite basis:
//   min x^H GK x - 2 Re x^H bK   s.t.  x^H GJ x - 2 Re x^H bJ + hJ2 <= M^2,
// with GK + GJ positive definite. The stationarity condition
//   (GK + mu GJ) x = bK + mu bJ
// is diagonalized by the generalized eigenproblem GJ v = l (GK + GJ) v, and the
// multiplier mu is found by Newton's method on the secular equation.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "bergbep/error.hpp"

namespace bergbep::detail {

template <class Scalar>
struct SecularResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  double mu = 0.0;
  int iterations = 0;
  bool active = false;
};

/// `dist2` is the squared feasibility distance computed elsewhere; the
/// eigen-based value is used when larger. `mu_lo` is returned when the
/// constraint is inactive.
template <class Scalar>
SecularResult<Scalar> secular_solve(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& GK,
                                    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& GJ,
                                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& bK,
                                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& bJ, double hJ2,
                                    double dist2, double M, double mu_lo, int max_iterations) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Matrix G = GK + GJ;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(GJ, G);
  require(ges.info() == Eigen::Success, ErrorKind::NonConvergence, "secular solve: generalized eigensolver failed");
  const Matrix& V = ges.eigenvectors();
  const Eigen::VectorXd l = ges.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
  const Vector betaK = V.adjoint() * bK;
  const Vector betaJ = V.adjoint() * bJ;
  const Eigen::Index n = l.size();

  auto solution = [&](double mu) {
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = (betaK(i) + mu * betaJ(i)) / (1.0 - l(i) + mu * l(i));
    return Vector(V * y);
  };

  // Constraint value is d^2 + q(mu)^2, q^2 = sum a_i / D_i^2, D_i = 1 - l_i + mu l_i.
  Eigen::VectorXd a(n);
  double d2 = hJ2;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (l(i) <= 1e-300) {
      a(i) = 0.0;
      continue;
    }
    a(i) = std::norm(l(i) * betaK(i) - (1.0 - l(i)) * betaJ(i)) / l(i);
    d2 -= std::norm(betaJ(i)) / l(i);
  }
  d2 = std::max(d2, dist2);
  const double room = M * M - d2;

  // Returns q and d(1/q)/dmu; 1/q is increasing and concave, so Newton from
  // the left approaches the root monotonically.
  auto q_and_slope = [&](double mu) {
    double q2 = 0.0;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = 1.0 - l(i) + mu * l(i);
      q2 += a(i) / (den * den);
      s += a(i) * l(i) / (den * den * den);
    }
    const double q = std::sqrt(q2);
    return std::pair{q, q > 0.0 ? s / (q2 * q) : 0.0};
  };

  SecularResult<Scalar> out;
  auto [q, slope] = q_and_slope(mu_lo);
  out.iterations = 1;
  if (room > 0.0 && q <= std::sqrt(room)) {
    out.x = solution(mu_lo);
    out.mu = mu_lo;
    return out;
  }
  if (room <= 0.0) {
    std::ostringstream os;
    os << "secular solve: M = " << M << " does not exceed the feasibility distance " << std::sqrt(std::max(d2, 0.0));
    fail(ErrorKind::Infeasible, os.str());
  }

  const double inv_target = 1.0 / std::sqrt(room);
  double mu = mu_lo;
  for (; out.iterations < max_iterations; ++out.iterations) {
    const double gap = inv_target - 1.0 / q;
    if (gap <= 1e-15 * inv_target || slope <= 0.0) break;
    const double next = mu + gap / slope;
    if (!(next > mu)) break;
    mu = next;
    std::tie(q, slope) = q_and_slope(mu);
  }
  out.x = solution(mu);
  out.mu = mu;
  out.active = true;
  return out;
}

}  // namespace bergbep::detail
