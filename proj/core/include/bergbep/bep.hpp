#pragma once

// Bounded extremal problem in A2(D), p = 2: minimize ||h_K - g||_{L2(K)} over
// g in span{e_0..e_N} subject to ||h_J - g||_{L2(J)} <= M, with J = D \ K.
//
// All inner products are node quadratures on the data grid, so the discrete
// problem is exactly the one the diagnostics measure. Grids whose radial
// panels break at the radius of a radial region reproduce the closed-form
// Gram matrices to rounding.

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "bergbep/bergman.hpp"
#include "bergbep/disc.hpp"

namespace bergbep {

struct BepProblem {
  Region K;
  Region J;
  GridFunction h_K;
  GridFunction h_J;
  double M = 0.0;
  int degree = 0;

  /// J defaults to the complement of K.
  static BepProblem make(Region K, GridFunction h_K, GridFunction h_J, double M, int degree);

  const GridPtr& grid() const noexcept { return h_K.grid(); }
  /// Throws on M <= 0, mismatched grids, overlapping or non-covering regions,
  /// empty K, or a degree the grid cannot resolve.
  void validate() const;
};

struct BepOptions {
  double lambda_lo = -1.0 + 1e-9;
  double lambda_hi = 1.0;  // initial upper end, expanded by doubling 1 + lambda
  int max_iterations = 200;
  /// Relative target for |err_J - M| / max(1, M) inside the solver.
  double tolerance = 1e-12;
  /// Also solve at degree N - 4 and report the coefficient drift.
  bool truncation_check = false;
};

struct BepSolution {
  AnalyticCoeffs g0;
  double lambda = 0.0;
  double err_K = 0.0;
  double err_J = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool active = false;  // constraint saturated
  double feasibility_distance = 0.0;
  double truncation_drift = std::numeric_limits<double>::quiet_NaN();
};

struct FeasibilityReport {
  double distance = 0.0;
  int rank = 0;          // numerical rank of the J-restricted basis
  bool regularized = false;
};

/// min_c ||h_J - sum c_n e_n||_{L2(J)} by weighted least squares on the grid.
FeasibilityReport feasibility(const GridFunction& h_J, const Region& J, int degree);
double feasibility_distance(const GridFunction& h_J, const Region& J, int degree);

/// Coefficients of (I + lambda P chi_J)^{-1} P(h_K v (lambda + 1) h_J).
AnalyticCoeffs solve_at_lambda(const BepProblem& p, double lambda);

/// ||solve_at_lambda(p, lambda) - h_J||_{L2(J)}.
double constraint_error(const BepProblem& p, double lambda);

/// ||(lambda + 1) P(chi_J (g - h_J)) + P(chi_K (g - h_K))|| from grid residuals.
double kkt_residual(const BepProblem& p, const AnalyticCoeffs& g, double lambda);

/// Bisection on lambda (in log(1 + lambda)) with bracket expansion.
/// Throws Infeasible, NonConvergence (bracket exhausted or non-monotone e).
BepSolution solve_bep(const BepProblem& p, const BepOptions& opt = {});

/// Independent route: generalized eigendecomposition of the J-Gram against the
/// full Gram and Newton on the secular equation for the KKT multiplier.
BepSolution solve_bep_oracle(const BepProblem& p, const BepOptions& opt = {});

}  // namespace bergbep
