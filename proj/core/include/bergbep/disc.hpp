#pragma once

// Geometry on the unit disc: polar quadrature, regions, sampled functions and
// the L2 inner product for the normalized area measure dA = dx dy / pi.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bergbep {

using Complex = std::complex<double>;

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre_unit(int n);

/// Tensor polar quadrature on the unit disc.
///
/// Radially the rule is Gauss-Legendre in s = r^2 (one panel per interval
/// between consecutive radial breaks), so integrals of polynomials in |z|^2
/// are exact. Angularly it is the uniform trapezoid rule with nodes at
/// 2 pi q / n_theta. Node `ring * n_theta + q` sits at r_ring e^{i theta_q}.
class DiscGrid {
 public:
  DiscGrid(int nodes_per_panel, int angular_count, std::vector<double> radial_breaks = {});

  int nodes_per_panel() const noexcept { return nodes_per_panel_; }
  int ring_count() const noexcept { return static_cast<int>(radii_.size()); }
  int angular_count() const noexcept { return angular_count_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  std::span<const double> radii() const noexcept { return radii_; }
  std::span<const double> s_nodes() const noexcept { return s_nodes_; }
  /// Quadrature weights of the rings in the variable s; they sum to 1.
  std::span<const double> ring_weights() const noexcept { return ring_weights_; }
  std::span<const double> radial_breaks() const noexcept { return radial_breaks_; }

  double angle(int q) const noexcept;
  std::size_t index(int ring, int q) const noexcept {
    return static_cast<std::size_t>(ring) * angular_count_ + q;
  }
  Complex node(std::size_t idx) const noexcept { return nodes_[idx]; }
  std::span<const Complex> nodes() const noexcept { return nodes_; }
  double weight(std::size_t idx) const noexcept {
    return ring_weights_[idx / angular_count_] / angular_count_;
  }

  /// Largest total degree m + n for which the rule integrates z^m conj(z)^n exactly.
  int exactness_degree() const noexcept;
  /// Largest polynomial degree in s integrated exactly on every radial panel.
  int radial_exactness() const noexcept { return 2 * nodes_per_panel_ - 1; }

  bool same_as(const DiscGrid& other) const noexcept;

 private:
  int nodes_per_panel_;
  int angular_count_;
  std::vector<double> radial_breaks_;
  std::vector<double> radii_;
  std::vector<double> s_nodes_;
  std::vector<double> ring_weights_;
  std::vector<Complex> nodes_;
};

using GridPtr = std::shared_ptr<const DiscGrid>;

/// Builds the standard grid: n_r Gauss nodes in s on (0,1) times n_theta angles.
GridPtr build_grid(int n_r, int n_theta);
/// Same rule split into radial panels at the given radii, so region boundaries
/// |z| = a can be integrated without boundary error.
GridPtr build_grid(int n_r, int n_theta, std::vector<double> radial_breaks);

/// Measurable subset of the disc.
///
/// Analytic shapes: the whole disc, the disc |z| < a, and the sector
/// |arg z| < theta. Each carries a complement flag, so the annulus a <= |z| < 1
/// is the complemented radial disc. Masks are explicit per-node indicators.
/// A node belongs to the region iff its center satisfies the defining
/// inequality; a region and its complement partition the nodes of any grid.
class Region {
 public:
  enum class Shape { FullDisc, RadialDisc, Sector, Mask };

  static Region full_disc();
  static Region radial_disc(double a);
  static Region annulus(double a);
  static Region sector(double theta);
  static Region mask(GridPtr grid, std::vector<std::uint8_t> inside);

  Region complement() const;

  Shape shape() const noexcept { return shape_; }
  bool complemented() const noexcept { return complemented_; }
  /// Radius a for radial shapes, half-opening theta for sectors, 0 otherwise.
  double parameter() const noexcept { return parameter_; }
  /// Grid a Mask region was defined on; null for analytic shapes.
  const GridPtr& mask_grid() const noexcept { return mask_grid_; }

  /// Membership of a point; Mask regions throw (they only exist on nodes).
  bool contains(Complex z) const;
  /// Per-node indicator on `grid`.
  std::vector<std::uint8_t> resolve(const DiscGrid& grid) const;
  /// Closed-form normalized area when the shape admits one.
  std::optional<double> area() const;
  /// True when the region is the mask complement of nothing, i.e. empty by construction.
  bool empty_by_construction() const noexcept {
    return shape_ == Shape::FullDisc && complemented_;
  }

  std::string describe() const;

 private:
  Region(Shape shape, double parameter, bool complemented) noexcept
      : shape_(shape), parameter_(parameter), complemented_(complemented) {}

  Shape shape_;
  double parameter_ = 0.0;
  bool complemented_ = false;
  GridPtr mask_grid_;
  std::shared_ptr<const std::vector<std::uint8_t>> mask_;
};

/// Complex samples of an L2 function at the nodes of a grid.
class GridFunction {
 public:
  GridFunction(GridPtr grid, std::vector<Complex> values);

  static GridFunction zeros(GridPtr grid);
  static GridFunction constant(GridPtr grid, Complex value);
  template <class F>
  static GridFunction sample(GridPtr grid, F&& fn) {
    std::vector<Complex> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->node(i));
    return GridFunction(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const Complex> values() const noexcept { return values_; }
  std::span<Complex> values() noexcept { return values_; }
  Complex operator[](std::size_t i) const noexcept { return values_[i]; }
  Complex& operator[](std::size_t i) noexcept { return values_[i]; }

  GridFunction conj() const;
  GridFunction real_part() const;
  GridFunction imag_part() const;
  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(const GridFunction& other);
  GridFunction& operator*=(Complex scalar);

 private:
  GridPtr grid_;
  std::vector<Complex> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(GridFunction a, const GridFunction& b);
GridFunction operator*(Complex s, GridFunction a);
GridFunction operator/(const GridFunction& a, const GridFunction& b);

void check_same_grid(const GridFunction& a, const GridFunction& b);

/// Quadrature value of the integral over `region` of g conj(h) dA.
Complex inner_product(const GridFunction& g, const GridFunction& h,
                      const Region& region = Region::full_disc());
double norm(const GridFunction& g, const Region& region = Region::full_disc());

/// Equals h_K on the nodes of K and h_J on the remaining nodes.
GridFunction glue(const GridFunction& h_K, const GridFunction& h_J, const Region& K);

/// Orthonormal Bergman basis element sqrt(n+1) z^n.
Complex eval_basis(int n, Complex z);

}  // namespace bergbep
