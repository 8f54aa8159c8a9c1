#pragma once

// Generalized analytic functions for the main Vekua equation
//   dbar w = alpha_f conj(w),  alpha_f = dbar f / f,
// on the unit disc: differentiation on the polar grid, the Teodorescu
// transform, membership residuals, lifting of analytic seeds, the similarity
// factor, the restricted Bergman-Vekua projection and PDE diagnostics.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "bergbep/bergman.hpp"
#include "bergbep/disc.hpp"

namespace bergbep {

/// Real, non-vanishing conductivity f with 1/k <= |f| <= k.
///
/// The closed forms keep alpha_f exact; sampled conductivities get alpha_f
/// by numerical differentiation.
struct Conductivity {
  enum class Form { Sampled, Constant, ExpX, ExpXY };

  GridFunction f;
  double k = 1.0;
  Form form = Form::Sampled;
  double c = 0.0;  // rate for ExpX / ExpXY, value for Constant

  static Conductivity constant(GridPtr grid, double value);
  /// f = exp(c x)
  static Conductivity exp_x(GridPtr grid, double c);
  /// f = exp(c x y)
  static Conductivity exp_xy(GridPtr grid, double c);
  /// Real samples; k defaults to the tightest admissible bound.
  static Conductivity from_samples(GridFunction f, double k = 0.0);

  const GridPtr& grid() const noexcept { return f.grid(); }
};

/// Polar-grid derivatives: spectral in theta, 4th-order finite differences in r.
/// Throw InvalidArgument when the grid has fewer than 5 rings.
GridFunction dbar(const GridFunction& g);
GridFunction dz(const GridFunction& g);

/// alpha_f = dbar f / f (closed form when available).
GridFunction alpha_from_f(const Conductivity& f);

/// Teodorescu transform T[w](z) = int_D w(zeta) / (z - zeta) dA(zeta) on the
/// nodes of a fixed grid.
///
/// Each angular Fourier mode of w is expanded radially in the Jacobi
/// polynomials that are orthonormal for the weight s^|k| (s = r^2), and the
/// Cauchy kernel is integrated exactly against that expansion. The result is
/// exact to rounding for polynomials in z, conj(z) resolved by the grid.
class TeodorescuOperator {
 public:
  explicit TeodorescuOperator(GridPtr grid);

  /// Shared, lazily built instance for `grid` (cached per grid layout).
  static std::shared_ptr<const TeodorescuOperator> for_grid(const GridPtr& grid);

  GridFunction apply(const GridFunction& w) const;
  const GridPtr& grid() const noexcept { return grid_; }

 private:
  GridPtr grid_;
  int mode_min_ = 0;
  int mode_max_ = 0;
  std::vector<Eigen::MatrixXd> radial_;  // one rings x rings map per input mode
};

GridFunction teodorescu(const GridFunction& g);

/// ||u - P_N u|| with u = w - T[alpha conj(w)]; near zero iff w solves the
/// Vekua equation numerically.
double vekua_residual(const GridFunction& w, const GridFunction& alpha, int degree);

struct VekuaFunction {
  GridFunction w;
  GridFunction alpha;
  double residual = 0.0;
  double tolerance = 0.0;
  int degree = 0;
  int iterations = 0;
  bool converged = true;
  /// ||w^{k+1} - w^k|| for every iteration of the lift.
  std::vector<double> step_norms;
};

/// Wraps an existing grid function; the residual is evaluated at `degree`.
VekuaFunction make_vekua_function(GridFunction w, GridFunction alpha, int degree);

/// Fixed point w = seed + T[alpha conj(w)], started at the seed.
/// Throws NonConvergence when the step norm grows three times in a row.
VekuaFunction vekua_lift(const AnalyticCoeffs& seed, const GridFunction& alpha, double tol,
                         int max_iter);

/// Same as vekua_lift for a seed already sampled on the grid.
VekuaFunction vekua_lift(const GridFunction& seed, const GridFunction& alpha, int degree,
                         double tol, int max_iter);

struct SimilarityFactor {
  GridFunction s;
  GridFunction analytic;    // F = w e^{-s}
  double dbar_residual;     // ||dbar F|| / ||F|| on interior nodes
  double defining_residual; // ||dbar s - alpha conj(w)/w|| / ||alpha conj(w)/w|| on interior nodes
  double s_sup;
  double alpha_sup;
  bool bound_holds;         // s_sup <= 4 alpha_sup + 1e-8
};

/// s = T[alpha conj(w) / w] and F = w e^{-s}. Throws if w vanishes at a node.
SimilarityFactor similarity_factor(const VekuaFunction& w);

/// P w + Q[T[alpha conj(w)]] with P the degree-N Bergman projection and Q = I - P.
GridFunction pf_restricted(const VekuaFunction& w, int degree);

struct MetaharmonicResiduals {
  double real_part;  // div(f^2 grad(w0/f))
  double imag_part;  // div(f^-2 grad(f w1))
};

/// Relative L2 residuals of the two divergence-form equations satisfied by the
/// real and imaginary parts, on interior nodes.
MetaharmonicResiduals metaharmonic_residuals(const VekuaFunction& w, const Conductivity& f);

/// Relative residual of dbar G = nu conj(dz G), G = w0/f + i f w1,
/// nu = (1 - f^2)/(1 + f^2), on interior nodes.
double beltrami_residual(const VekuaFunction& w, const Conductivity& f);

/// Relative residual of the plain Laplace equation for the real and imaginary
/// parts of w; used to show that Vekua solutions are not harmonic.
MetaharmonicResiduals laplacian_residuals(const GridFunction& w);

/// Nodes with |z| <= 1 - 2h, h = 1 / ring_count.
std::vector<std::uint8_t> interior_nodes(const DiscGrid& grid);

/// Divergence of sigma grad(u) for real sigma, u.
GridFunction divergence_form(const GridFunction& sigma, const GridFunction& u);

}  // namespace bergbep
