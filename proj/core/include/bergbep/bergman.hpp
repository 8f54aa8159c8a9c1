#pragma once

// Truncated Bergman space A2(D) in the orthonormal basis e_n = sqrt(n+1) z^n:
// expansions, the Bergman projection, the reproducing kernel and the
// Toeplitz (Gram) matrices of characteristic-function symbols.

#include <Eigen/Dense>
#include <vector>

#include "bergbep/disc.hpp"

namespace bergbep {

/// Coefficients c_0..c_N of sum c_n e_n.
struct AnalyticCoeffs {
  std::vector<Complex> coeffs;

  AnalyticCoeffs() = default;
  explicit AnalyticCoeffs(std::vector<Complex> c) : coeffs(std::move(c)) {}
  static AnalyticCoeffs unit(int n, int degree);

  int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
  /// A2 norm, by Parseval.
  double norm() const noexcept;
  Eigen::VectorXcd as_vector() const;
  static AnalyticCoeffs from_vector(const Eigen::VectorXcd& v);
};

/// Bergman projection onto span{e_0..e_N}: c_n = <g, e_n>.
/// Throws DegreeTooLarge when 2N exceeds the grid's exactness degree.
AnalyticCoeffs project(const GridFunction& g, int degree);

/// sum c_n e_n(z), Horner style.
Complex eval(const AnalyticCoeffs& c, Complex z);
GridFunction eval_on_grid(const AnalyticCoeffs& c, GridPtr grid);

/// Bergman kernel 1/(1 - conj(z) zeta)^2.
Complex kernel_eval(Complex z, Complex zeta);
/// Kernel route to the projection: quadrature of g(zeta) conj(K(z, zeta)).
Complex kernel_project(const GridFunction& g, Complex z);

/// Matrix of the Toeplitz operator P(chi_Omega .) on span{e_0..e_N}:
/// entries(m, n) = <chi_Omega e_n, e_m>.
struct GramMatrix {
  Region region;
  int degree = 0;
  Eigen::MatrixXcd entries;
};

/// Closed-form Gram matrix for full-disc, radial and sector shapes (and their
/// complements). Mask regions fall back to quadrature on the mask's grid.
GramMatrix gram(const Region& region, int degree);
/// Gram matrix by node-wise quadrature on `grid`.
GramMatrix gram_on_grid(const Region& region, const DiscGrid& grid, int degree);

/// Node-by-basis matrix E(i, n) = e_n(z_i).
Eigen::MatrixXcd basis_matrix(const DiscGrid& grid, int degree);

struct HermitianEigen {
  Eigen::VectorXd values;    // descending
  Eigen::MatrixXcd vectors;  // columns, matching `values`
  int sweeps = 0;
  double off_diagonal = 0.0;
};

/// Cyclic complex Jacobi iteration; stops once the off-diagonal Frobenius norm
/// drops below `tol`. Throws NonConvergence (with the residual) otherwise.
HermitianEigen jacobi_eigen(const Eigen::MatrixXcd& a, double tol = 1e-12, int max_sweeps = 60);

/// Eigenvalues of the Gram matrix, sorted descending.
std::vector<double> spectrum(const GramMatrix& g);

}  // namespace bergbep
