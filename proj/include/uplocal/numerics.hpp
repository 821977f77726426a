#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "uplocal/error.hpp"

namespace uplocal {

using cplx = std::complex<double>;
using Vec = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Upper bound on n^d for any grid; 2^24 complex samples are 256 MiB.
inline constexpr std::size_t kDefaultPointBudget = std::size_t{1} << 24;

/// Uniform tensor grid. Three flavours share one representation:
///
///  - box:      nodes -R + j*2R/(n-1), j = 0..n-1 (both endpoints included),
///              integrated with the trapezoidal rule;
///  - torus:    nodes -1/2 + j/n on [-1/2, 1/2)^d, integrated with the plain
///              Riemann sum (exact for trigonometric polynomials of degree < n/2);
///  - spectral: the dual grid of a discrete Fourier transform, nodes
///              (j - floor(n/2)) * dxi, integrated with the plain Riemann sum.
///
/// Samples are stored row-major: the last axis varies fastest.
class Grid {
 public:
  enum class Kind { box, torus, spectral };

  static Grid box(int dim, double halfwidth, int points_per_axis,
                  std::size_t point_budget = kDefaultPointBudget);
  static Grid torus(int dim, int points_per_axis,
                    std::size_t point_budget = kDefaultPointBudget);
  static Grid spectral(int dim, int points_per_axis, double spacing,
                       std::size_t point_budget = kDefaultPointBudget);

  Kind kind() const noexcept { return kind_; }
  bool periodic() const noexcept { return kind_ == Kind::torus; }
  int dim() const noexcept { return dim_; }
  int points_per_axis() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  double origin() const noexcept { return origin_; }
  /// R for box grids, 1/2 for the torus, n*dxi/2 for spectral grids.
  double halfwidth() const noexcept;
  std::size_t size() const noexcept { return size_; }

  double node(int j) const noexcept { return origin_ + h_ * j; }
  /// Quadrature weight of node j along one axis.
  double axis_weight(int j) const noexcept;
  void index(std::size_t flat, std::span<int> idx) const noexcept;
  void point(std::size_t flat, std::span<double> x) const noexcept;
  double weight(std::size_t flat) const noexcept;

  bool operator==(const Grid& other) const noexcept = default;

 private:
  Grid(Kind kind, int dim, int n, double h, double origin, std::size_t budget);

  Kind kind_;
  int dim_;
  int n_;
  double h_;
  double origin_;
  std::size_t size_;
};

struct SampledFunction {
  Grid grid;
  std::vector<cplx> values;

  SampledFunction(Grid g, std::vector<cplx> v);
  explicit SampledFunction(Grid g) : SampledFunction(g, std::vector<cplx>(g.size())) {}

  int dim() const noexcept { return grid.dim(); }
  std::size_t size() const noexcept { return values.size(); }
};

/// Tensor-product quadrature of the samples (trapezoid on box grids, Riemann sum
/// otherwise).
cplx integrate(const SampledFunction& f);
/// Quadrature of |f|^2.
double norm_sq(const SampledFunction& f);

/// Samples of f^(xi) = \int f(x) exp(-2 pi i <x, xi>) dx on the dual grid with
/// spacing 1/(n h). Rejects periodic grids.
SampledFunction continuous_ft(const SampledFunction& f);
/// Inverse of continuous_ft; `target` is the box grid the result lives on.
SampledFunction inverse_continuous_ft(const SampledFunction& f_hat, const Grid& target);
/// Fourier coefficients c_m = \int_T g exp(-2 pi i <m, x>) dx of a torus
/// function, returned on the integer spectral grid m_k = j - floor(n/2).
SampledFunction fourier_coefficients(const SampledFunction& g);
/// Sum_j L_j df/dx_j by multiplication with 2 pi i <L, xi> in the transform
/// domain. Works on box grids (via continuous_ft) and torus grids (via
/// Fourier coefficients).
SampledFunction spectral_directional_derivative(const SampledFunction& f,
                                                std::span<const double> L);

/// Dense symmetric matrix, row-major.
class MatrixSym {
 public:
  explicit MatrixSym(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {}
  /// Validates |a_jk - a_kj| < 1e-12 * max|a|.
  MatrixSym(int dim, std::vector<double> row_major);

  int dim() const noexcept { return dim_; }
  double operator()(int j, int k) const noexcept { return a_[static_cast<std::size_t>(j) * dim_ + k]; }
  /// Sets both (j, k) and (k, j).
  void set(int j, int k, double value) noexcept;
  double max_abs() const noexcept;
  /// Frobenius norm.
  double norm() const noexcept;
  double quadratic_form(std::span<const double> v) const;
  Vec apply(std::span<const double> v) const;
  /// Principal submatrix on the given (sorted) indices.
  MatrixSym principal(std::span<const int> keep) const;
  const std::vector<double>& data() const noexcept { return a_; }

 private:
  int dim_;
  std::vector<double> a_;
};

struct EigenPair {
  double value;
  Vec vector;
};

/// Full eigendecomposition by cyclic Jacobi rotations, ascending eigenvalues,
/// unit eigenvectors.
std::vector<EigenPair> sym_eig(const MatrixSym& m);

struct LinearSolve {
  Vec solution;
  double det = 0.0;
  bool singular = false;
};

/// Gaussian elimination with partial pivoting. `singular` is set when
/// |det| < 1e-12 * (max Euclidean row norm)^dim; the solution is then empty.
LinearSolve solve_and_det(const MatrixSym& b, std::span<const double> rhs);

/// Worker count for internal parallel loops: UPLOCAL_THREADS when set to a
/// positive integer, otherwise the hardware concurrency.
int max_threads();

/// Runs fn(i) for i in [0, count) over contiguous chunks on up to max_threads()
/// threads. Each index is visited exactly once, so per-index results are
/// independent of the thread count.
template <typename F>
void parallel_for(std::size_t count, F&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(max_threads()), count / 4096 + 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace uplocal
