#pragma once

// Bounded extremal problem in the Bergman-Vekua space A_f^2(D): the BEP posed
// over real combinations of lifted basis elements {e_n, i e_n}, n = 0..N.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bergbep/bep.hpp"
#include "bergbep/vekua.hpp"

namespace bergbep {

struct BasisElement {
  int n = 0;
  bool imaginary = false;  // seed is i e_n
  VekuaFunction lift;

  std::string label() const;
};

struct VekuaBasis {
  GridPtr grid;
  int degree = 0;
  double tolerance = 0.0;
  std::vector<BasisElement> elements;   // kept elements, in seed order
  std::vector<std::string> dropped;     // labels removed by the rank pass
  Eigen::MatrixXd gram;                 // Re <w_j, w_i> over D, kept elements
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;

  std::size_t size() const noexcept { return elements.size(); }
  /// sum a_m w_m
  GridFunction combine(const Eigen::VectorXd& a) const;
  /// Real Gram matrix Re <chi_Omega w_j, w_i>.
  Eigen::MatrixXd gram_on(const Region& region) const;
  /// Re <g, w_i> over `region`.
  Eigen::VectorXd moments(const GridFunction& g, const Region& region) const;
};

/// Lifts e_0..e_N and i e_0..i e_N for f (in parallel across seeds), then drops
/// elements whose Gram-Schmidt residual falls below 1e-10 of their norm.
/// Throws NonConvergence naming the seed when a lift diverges.
VekuaBasis build_fbep_space(const Conductivity& f, int degree, double tol, int max_iter = 500);

struct FbepProblem {
  Conductivity f;
  Region K;
  Region J;
  GridFunction h_K;
  GridFunction h_J;
  double M = 0.0;
  int degree = 0;
  double lift_tolerance = 1e-12;
  int lift_max_iterations = 500;

  static FbepProblem make(Conductivity f, Region K, GridFunction h_K, GridFunction h_J, double M,
                          int degree);
  const GridPtr& grid() const noexcept { return f.grid(); }
  void validate() const;
};

struct FbepSolution {
  std::shared_ptr<const VekuaBasis> basis;
  Eigen::VectorXd coefficients;  // over basis->elements
  GridFunction w_star;
  /// Paper convention: lambda = mu - 1 for the KKT multiplier mu >= 0 of the
  /// squared constraint, so that lambda in (-1, inf).
  double lambda = 0.0;
  double err_K = 0.0;
  double err_J = 0.0;
  double kkt_residual = 0.0;
  double vekua_residual = 0.0;
  double feasibility_distance = 0.0;
  int iterations = 0;
  bool active = false;
};

/// Distance from h_J to the real span of the basis on J.
double fbep_feasibility_distance(const VekuaBasis& basis, const GridFunction& h_J, const Region& J);

/// Real QCQP over the basis via the generalized eigendecomposition of the J-Gram
/// and the secular equation. Throws Infeasible or InvalidArgument (basis
/// numerically singular).
FbepSolution solve_fbep(const FbepProblem& p, const BepOptions& opt = {});
FbepSolution solve_fbep(const FbepProblem& p, std::shared_ptr<const VekuaBasis> basis,
                        const BepOptions& opt = {});

/// ||Pi((lambda + 1) chi_J (w - h_J) + chi_K (w - h_K))|| / ||w|| with Pi the
/// orthogonal projection onto the real span of the basis.
double fbep_conjecture_check(const FbepProblem& p, const FbepSolution& sol);
/// Same residual for arbitrary coefficients and lambda.
double fbep_conjecture_residual(const FbepProblem& p, const VekuaBasis& basis, const Eigen::VectorXd& a,
                                double lambda);

/// Smallest normalized directional derivative <grad err_K^2, d> / |d| over
/// `count` random directions d with <grad err_J^2, d> <= 0 (all directions when
/// the constraint is inactive).
double fbep_directional_check(const FbepProblem& p, const FbepSolution& sol, int count, std::uint64_t seed);

/// Matrix of Pi(chi_Omega .) in the basis, and its defect from self-adjointness
/// in the Gram inner product, ||G X - (G X)^T|| / ||G X||.
Eigen::MatrixXd toeplitz_f_matrix(const VekuaBasis& basis, const Region& region);
double self_adjointness_defect(const VekuaBasis& basis, const Region& region);

/// Transferred data h_J* = h_J - T_J(alpha conj(h_J)) and the norm rho of
/// S h = chi_J (h - T[chi_J alpha conj(h)]) on L2(J), so that M* = M rho.
struct TransferReport {
  GridFunction h_J_star;
  double rho = 0.0;
  double M_star = 0.0;
  int iterations = 0;
};
TransferReport transfer_report(const FbepProblem& p, int max_iter = 100, double tol = 1e-10);

}  // namespace bergbep
