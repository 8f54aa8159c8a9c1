#include "bergbep/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "bergbep/error.hpp"

namespace bergbep {

AnalyticCoeffs AnalyticCoeffs::unit(int n, int degree) {
  require(n >= 0 && n <= degree, ErrorKind::InvalidArgument, "unit coefficient index out of range");
  std::vector<Complex> c(degree + 1);
  c[n] = 1.0;
  return AnalyticCoeffs(std::move(c));
}

double AnalyticCoeffs::norm() const noexcept {
  double s = 0.0;
  for (Complex c : coeffs) s += std::norm(c);
  return std::sqrt(s);
}

Eigen::VectorXcd AnalyticCoeffs::as_vector() const {
  return Eigen::Map<const Eigen::VectorXcd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
}

AnalyticCoeffs AnalyticCoeffs::from_vector(const Eigen::VectorXcd& v) {
  return AnalyticCoeffs(std::vector<Complex>(v.data(), v.data() + v.size()));
}

Eigen::MatrixXcd basis_matrix(const DiscGrid& grid, int degree) {
  Eigen::MatrixXcd e(static_cast<Eigen::Index>(grid.size()), degree + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex z = grid.node(i);
    Complex p = 1.0;
    for (int n = 0; n <= degree; ++n) {
      e(static_cast<Eigen::Index>(i), n) = std::sqrt(n + 1.0) * p;
      p *= z;
    }
  }
  return e;
}

AnalyticCoeffs project(const GridFunction& g, int degree) {
  const DiscGrid& grid = *g.grid();
  require(degree >= 0, ErrorKind::InvalidArgument, "project: degree must be non-negative");
  if (2 * degree > grid.exactness_degree()) {
    std::ostringstream os;
    os << "project: degree " << degree << " exceeds half the grid exactness degree "
       << grid.exactness_degree();
    fail(ErrorKind::DegreeTooLarge, os.str());
  }
  std::vector<Complex> c(degree + 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex z = grid.node(i);
    const Complex wg = grid.weight(i) * g[i];
    const Complex zb = std::conj(z);
    Complex p = 1.0;
    for (int n = 0; n <= degree; ++n) {
      c[n] += wg * p;
      p *= zb;
    }
  }
  for (int n = 0; n <= degree; ++n) c[n] *= std::sqrt(n + 1.0);
  return AnalyticCoeffs(std::move(c));
}

Complex eval(const AnalyticCoeffs& c, Complex z) {
  Complex acc = 0.0;
  for (int n = c.degree(); n >= 0; --n) acc = acc * z + std::sqrt(n + 1.0) * c.coeffs[n];
  return acc;
}

GridFunction eval_on_grid(const AnalyticCoeffs& c, GridPtr grid) {
  std::vector<Complex> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = eval(c, grid->node(i));
  return GridFunction(std::move(grid), std::move(v));
}

Complex kernel_eval(Complex z, Complex zeta) {
  const Complex d = 1.0 - std::conj(z) * zeta;
  require(std::abs(d) > 0.0, ErrorKind::InvalidArgument, "kernel_eval: conj(z) zeta = 1 is a pole");
  return 1.0 / (d * d);
}

Complex kernel_project(const GridFunction& g, Complex z) {
  const DiscGrid& grid = *g.grid();
  Complex acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    acc += grid.weight(i) * g[i] * std::conj(kernel_eval(z, grid.node(i)));
  }
  return acc;
}

namespace {

void symmetrize_from_upper(Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m(i, i) = m(i, i).real();
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) m(j, i) = std::conj(m(i, j));
  }
}

}  // namespace

GramMatrix gram(const Region& region, int degree) {
  require(degree >= 0, ErrorKind::InvalidArgument, "gram: degree must be non-negative");
  const int n1 = degree + 1;
  GramMatrix out{region, degree, Eigen::MatrixXcd::Zero(n1, n1)};
  Eigen::MatrixXcd& g = out.entries;
  const double p = region.parameter();

  switch (region.shape()) {
    case Region::Shape::Mask:
      return gram_on_grid(region, *region.mask_grid(), degree);
    case Region::Shape::FullDisc:
      g.setIdentity();
      break;
    case Region::Shape::RadialDisc: {
      const double a2 = p * p;
      double pw = a2;
      for (int n = 0; n < n1; ++n) {
        g(n, n) = pw;
        pw *= a2;
      }
      break;
    }
    case Region::Shape::Sector:
      for (int m = 0; m < n1; ++m) {
        g(m, m) = p / std::numbers::pi;
        for (int n = m + 1; n < n1; ++n) {
          const double k = n - m;
          g(m, n) = std::sqrt((m + 1.0) * (n + 1.0)) / (m + n + 2.0) * 2.0 * std::sin(k * p) /
                    (k * std::numbers::pi);
        }
      }
      symmetrize_from_upper(g);
      break;
  }
  if (region.complemented()) {
    g = Eigen::MatrixXcd::Identity(n1, n1) - g;
    symmetrize_from_upper(g);
  }
  return out;
}

GramMatrix gram_on_grid(const Region& region, const DiscGrid& grid, int degree) {
  if (2 * degree > grid.exactness_degree()) {
    std::ostringstream os;
    os << "gram: degree " << degree << " exceeds half the grid exactness degree "
       << grid.exactness_degree();
    fail(ErrorKind::DegreeTooLarge, os.str());
  }
  const auto inside = region.resolve(grid);
  const Eigen::MatrixXcd e = basis_matrix(grid, degree);
  Eigen::VectorXd w(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) w(static_cast<Eigen::Index>(i)) = inside[i] ? grid.weight(i) : 0.0;
  GramMatrix out{region, degree, e.adjoint() * w.asDiagonal() * e};
  symmetrize_from_upper(out.entries);
  return out;
}

HermitianEigen jacobi_eigen(const Eigen::MatrixXcd& input, double tol, int max_sweeps) {
  require(input.rows() == input.cols(), ErrorKind::InvalidArgument, "jacobi_eigen: matrix must be square");
  const Eigen::Index n = input.rows();
  Eigen::MatrixXcd a = input;
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Identity(n, n);

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  HermitianEigen out;
  double off = off_norm();
  int sweep = 0;
  while (off > tol && sweep < max_sweeps) {
    ++sweep;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag < 1e-300) continue;
        // Phase rotation makes a(p,q) real, then the classical real rotation zeroes it.
        const Complex phase = a(p, q) / mag;
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex ph = std::conj(phase);  // e^{-i phi}

        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp - s * ph * akq;
          a(k, q) = s * akp + c * ph * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk - s * phase * aqk;
          a(q, k) = s * apk + c * phase * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = c * vkp - s * ph * vkq;
          v(k, q) = s * vkp + c * ph * vkq;
        }
      }
    }
    off = off_norm();
  }
  if (off > tol) {
    std::ostringstream os;
    os << "jacobi_eigen: no convergence after " << sweep << " sweeps, off-diagonal norm " << off;
    fail(ErrorKind::NonConvergence, os.str());
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  out.off_diagonal = off;
  return out;
}

std::vector<double> spectrum(const GramMatrix& g) {
  const HermitianEigen eig = jacobi_eigen(g.entries);
  return std::vector<double>(eig.values.data(), eig.values.data() + eig.values.size());
}

}  // namespace bergbep
