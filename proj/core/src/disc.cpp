#include "bergbep/disc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bergbep/error.hpp"

namespace bergbep {

GaussRule gauss_legendre_unit(int n) {
  require(n >= 1, ErrorKind::InvalidArgument, "Gauss-Legendre rule needs at least one node");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Re-evaluate the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Ascending order on [0, 1].
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.5;
  return rule;
}

DiscGrid::DiscGrid(int nodes_per_panel, int angular_count, std::vector<double> radial_breaks)
    : nodes_per_panel_(nodes_per_panel),
      angular_count_(angular_count),
      radial_breaks_(std::move(radial_breaks)) {
  require(nodes_per_panel >= 2, ErrorKind::InvalidArgument, "build_grid: n_r must be >= 2");
  require(angular_count >= 4, ErrorKind::InvalidArgument, "build_grid: n_theta must be >= 4");
  std::sort(radial_breaks_.begin(), radial_breaks_.end());
  radial_breaks_.erase(std::unique(radial_breaks_.begin(), radial_breaks_.end()),
                       radial_breaks_.end());
  for (double b : radial_breaks_) {
    require(b > 0.0 && b < 1.0, ErrorKind::InvalidArgument,
            "build_grid: radial breaks must lie in (0,1)");
  }

  std::vector<double> edges{0.0};
  for (double b : radial_breaks_) edges.push_back(b * b);
  edges.push_back(1.0);

  const GaussRule rule = gauss_legendre_unit(nodes_per_panel);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double lo = edges[p];
    const double len = edges[p + 1] - edges[p];
    for (int i = 0; i < nodes_per_panel; ++i) {
      const double s = lo + len * rule.nodes[i];
      s_nodes_.push_back(s);
      radii_.push_back(std::sqrt(s));
      ring_weights_.push_back(len * rule.weights[i]);
    }
  }

  nodes_.reserve(radii_.size() * angular_count_);
  for (double r : radii_) {
    for (int q = 0; q < angular_count_; ++q) {
      const double t = angle(q);
      nodes_.emplace_back(r * std::cos(t), r * std::sin(t));
    }
  }
}

double DiscGrid::angle(int q) const noexcept {
  return 2.0 * std::numbers::pi * q / angular_count_;
}

int DiscGrid::exactness_degree() const noexcept {
  return std::min(4 * nodes_per_panel_ - 1, angular_count_ - 1);
}

bool DiscGrid::same_as(const DiscGrid& other) const noexcept {
  return this == &other ||
         (nodes_per_panel_ == other.nodes_per_panel_ && angular_count_ == other.angular_count_ &&
          radial_breaks_ == other.radial_breaks_);
}

GridPtr build_grid(int n_r, int n_theta) { return std::make_shared<const DiscGrid>(n_r, n_theta); }

GridPtr build_grid(int n_r, int n_theta, std::vector<double> radial_breaks) {
  return std::make_shared<const DiscGrid>(n_r, n_theta, std::move(radial_breaks));
}

// Region

Region Region::full_disc() { return Region(Shape::FullDisc, 0.0, false); }

Region Region::radial_disc(double a) {
  require(a > 0.0 && a < 1.0, ErrorKind::InvalidArgument, "radial region needs 0 < a < 1");
  return Region(Shape::RadialDisc, a, false);
}

Region Region::annulus(double a) { return radial_disc(a).complement(); }

Region Region::sector(double theta) {
  require(theta > 0.0 && theta < std::numbers::pi, ErrorKind::InvalidArgument,
          "sector region needs 0 < theta < pi");
  return Region(Shape::Sector, theta, false);
}

Region Region::mask(GridPtr grid, std::vector<std::uint8_t> inside) {
  require(grid != nullptr, ErrorKind::InvalidArgument, "mask region needs a grid");
  require(inside.size() == grid->size(), ErrorKind::GridMismatch,
          "mask region: indicator length does not match grid size");
  Region r(Shape::Mask, 0.0, false);
  r.mask_grid_ = std::move(grid);
  r.mask_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(inside));
  return r;
}

Region Region::complement() const {
  Region r = *this;
  r.complemented_ = !complemented_;
  return r;
}

bool Region::contains(Complex z) const {
  bool in = false;
  switch (shape_) {
    case Shape::FullDisc:
      in = true;
      break;
    case Shape::RadialDisc:
      in = std::abs(z) < parameter_;
      break;
    case Shape::Sector:
      in = std::abs(std::arg(z)) < parameter_;
      break;
    case Shape::Mask:
      fail(ErrorKind::InvalidArgument, "mask regions are only defined on grid nodes");
  }
  return in != complemented_;
}

std::vector<std::uint8_t> Region::resolve(const DiscGrid& grid) const {
  std::vector<std::uint8_t> out(grid.size());
  if (shape_ == Shape::Mask) {
    require(mask_grid_->same_as(grid), ErrorKind::GridMismatch,
            "mask region resolved on a different grid");
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = static_cast<std::uint8_t>(((*mask_)[i] != 0) != complemented_);
    }
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = contains(grid.node(i)) ? 1 : 0;
  return out;
}

std::optional<double> Region::area() const {
  double a = 0.0;
  switch (shape_) {
    case Shape::FullDisc:
      a = 1.0;
      break;
    case Shape::RadialDisc:
      a = parameter_ * parameter_;
      break;
    case Shape::Sector:
      a = parameter_ / std::numbers::pi;
      break;
    case Shape::Mask:
      return std::nullopt;
  }
  return complemented_ ? 1.0 - a : a;
}

std::string Region::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (shape_) {
    case Shape::FullDisc:
      os << (complemented_ ? "empty" : "full");
      return os.str();
    case Shape::RadialDisc:
      os << (complemented_ ? "annulus:" : "radial:") << parameter_;
      return os.str();
    case Shape::Sector:
      os << "sector:" << parameter_;
      break;
    case Shape::Mask:
      os << "mask";
      break;
  }
  if (complemented_) os << ",complement";
  return os.str();
}

// GridFunction

GridFunction::GridFunction(GridPtr grid, std::vector<Complex> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, ErrorKind::InvalidArgument, "grid function needs a grid");
  require(values_.size() == grid_->size(), ErrorKind::GridMismatch,
          "grid function: value count does not match grid size");
}

GridFunction GridFunction::zeros(GridPtr grid) {
  const std::size_t n = grid->size();
  return GridFunction(std::move(grid), std::vector<Complex>(n));
}

GridFunction GridFunction::constant(GridPtr grid, Complex value) {
  const std::size_t n = grid->size();
  return GridFunction(std::move(grid), std::vector<Complex>(n, value));
}

GridFunction GridFunction::conj() const {
  GridFunction out = *this;
  for (auto& v : out.values_) v = std::conj(v);
  return out;
}

GridFunction GridFunction::real_part() const {
  GridFunction out = *this;
  for (auto& v : out.values_) v = v.real();
  return out;
}

GridFunction GridFunction::imag_part() const {
  GridFunction out = *this;
  for (auto& v : out.values_) v = v.imag();
  return out;
}

bool GridFunction::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

double GridFunction::max_abs() const noexcept {
  double m = 0.0;
  for (Complex v : values_) m = std::max(m, std::abs(v));
  return m;
}

void check_same_grid(const GridFunction& a, const GridFunction& b) {
  require(a.grid()->same_as(*b.grid()), ErrorKind::GridMismatch,
          "grid functions live on different grids");
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  check_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  check_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(const GridFunction& other) {
  check_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(Complex scalar) {
  for (auto& v : values_) v *= scalar;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(GridFunction a, const GridFunction& b) { return a *= b; }
GridFunction operator*(Complex s, GridFunction a) { return a *= s; }

GridFunction operator/(const GridFunction& a, const GridFunction& b) {
  check_same_grid(a, b);
  std::vector<Complex> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] / b[i];
  return GridFunction(a.grid(), std::move(v));
}

Complex inner_product(const GridFunction& g, const GridFunction& h, const Region& region) {
  check_same_grid(g, h);
  const DiscGrid& grid = *g.grid();
  const auto inside = region.resolve(grid);
  const int nt = grid.angular_count();
  // Written out by hand so that swapping g and h yields the exact conjugate.
  double re = 0.0;
  double im = 0.0;
  for (int ring = 0; ring < grid.ring_count(); ++ring) {
    double ring_re = 0.0;
    double ring_im = 0.0;
    for (int q = 0; q < nt; ++q) {
      const std::size_t i = grid.index(ring, q);
      if (!inside[i]) continue;
      const double gr = g[i].real(), gi = g[i].imag();
      const double hr = h[i].real(), hi = h[i].imag();
      ring_re += gr * hr + gi * hi;
      ring_im += gi * hr - gr * hi;
    }
    const double w = grid.ring_weights()[ring] / nt;
    re += w * ring_re;
    im += w * ring_im;
  }
  return {re, im};
}

double norm(const GridFunction& g, const Region& region) {
  return std::sqrt(std::max(0.0, inner_product(g, g, region).real()));
}

GridFunction glue(const GridFunction& h_K, const GridFunction& h_J, const Region& K) {
  check_same_grid(h_K, h_J);
  const auto inside = K.resolve(*h_K.grid());
  std::vector<Complex> v(h_K.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = inside[i] ? h_K[i] : h_J[i];
  return GridFunction(h_K.grid(), std::move(v));
}

Complex eval_basis(int n, Complex z) {
  require(n >= 0, ErrorKind::InvalidArgument, "basis index must be non-negative");
  Complex p = 1.0;
  Complex base = z;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) p *= base;
    base *= base;
  }
  return std::sqrt(n + 1.0) * p;
}

}  // namespace bergbep
