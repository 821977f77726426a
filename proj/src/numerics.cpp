#include "uplocal/numerics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

namespace uplocal {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::grid_budget: return "grid_budget";
    case ErrorCode::unknown_function: return "unknown_function";
    case ErrorCode::ft_unavailable: return "ft_unavailable";
    case ErrorCode::not_differentiable: return "not_differentiable";
    case ErrorCode::zero_norm: return "zero_norm";
    case ErrorCode::zero_direction: return "zero_direction";
    case ErrorCode::non_integer_direction: return "non_integer_direction";
    case ErrorCode::vanishing_commutator: return "vanishing_commutator";
    case ErrorCode::symmetry_violation: return "symmetry_violation";
    case ErrorCode::centering_violated: return "centering_violated";
    case ErrorCode::tail_tolerance: return "tail_tolerance";
    case ErrorCode::not_admissible: return "not_admissible";
    case ErrorCode::unsupported_dimension: return "unsupported_dimension";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(Kind kind, int dim, int n, double h, double origin, std::size_t budget)
    : kind_(kind), dim_(dim), n_(n), h_(h), origin_(origin), size_(1) {
  if (dim < 1 || dim > 6) {
    throw Error(ErrorCode::unsupported_dimension, "grid dimension must be in 1..6, got " + std::to_string(dim));
  }
  if (n < 4) throw Error(ErrorCode::invalid_argument, "grid needs at least 4 points per axis");
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::invalid_argument, "grid spacing must be positive");
  for (int k = 0; k < dim; ++k) {
    if (size_ > budget / static_cast<std::size_t>(n)) {
      std::ostringstream os;
      os << n << "^" << dim << " points exceed the budget of " << budget;
      throw Error(ErrorCode::grid_budget, os.str());
    }
    size_ *= static_cast<std::size_t>(n);
  }
}

Grid Grid::box(int dim, double halfwidth, int n, std::size_t budget) {
  if (!(halfwidth > 0.0)) throw Error(ErrorCode::invalid_argument, "box halfwidth must be positive");
  if (n < 4) throw Error(ErrorCode::invalid_argument, "grid needs at least 4 points per axis");
  return Grid(Kind::box, dim, n, 2.0 * halfwidth / (n - 1), -halfwidth, budget);
}

Grid Grid::torus(int dim, int n, std::size_t budget) {
  if (n < 4) throw Error(ErrorCode::invalid_argument, "grid needs at least 4 points per axis");
  return Grid(Kind::torus, dim, n, 1.0 / n, -0.5, budget);
}

Grid Grid::spectral(int dim, int n, double spacing, std::size_t budget) {
  return Grid(Kind::spectral, dim, n, spacing, -spacing * (n / 2), budget);
}

double Grid::halfwidth() const noexcept {
  switch (kind_) {
    case Kind::box: return -origin_;
    case Kind::torus: return 0.5;
    case Kind::spectral: return 0.5 * n_ * h_;
  }
  return 0.0;
}

double Grid::axis_weight(int j) const noexcept {
  if (kind_ == Kind::box && (j == 0 || j == n_ - 1)) return 0.5 * h_;
  return h_;
}

void Grid::index(std::size_t flat, std::span<int> idx) const noexcept {
  for (int k = dim_ - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(flat % static_cast<std::size_t>(n_));
    flat /= static_cast<std::size_t>(n_);
  }
}

void Grid::point(std::size_t flat, std::span<double> x) const noexcept {
  for (int k = dim_ - 1; k >= 0; --k) {
    x[k] = node(static_cast<int>(flat % static_cast<std::size_t>(n_)));
    flat /= static_cast<std::size_t>(n_);
  }
}

double Grid::weight(std::size_t flat) const noexcept {
  double w = 1.0;
  for (int k = 0; k < dim_; ++k) {
    w *= axis_weight(static_cast<int>(flat % static_cast<std::size_t>(n_)));
    flat /= static_cast<std::size_t>(n_);
  }
  return w;
}

SampledFunction::SampledFunction(Grid g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::invalid_argument, "sample count " + std::to_string(values.size()) +
                                                 " does not match grid size " + std::to_string(grid.size()));
  }
}

namespace {

// Visits every node in row-major order with the product weight, without
// re-decomposing the flat index at each step.
template <typename F>
void for_each_weighted(const Grid& g, F&& fn) {
  const int d = g.dim();
  const int n = g.points_per_axis();
  std::vector<int> idx(d, 0);
  std::vector<double> axis_w(n);
  for (int j = 0; j < n; ++j) axis_w[j] = g.axis_weight(j);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    double w = 1.0;
    for (int k = 0; k < d; ++k) w *= axis_w[idx[k]];
    fn(flat, w);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place multi-dimensional DFT with kernel exp(sign * 2 pi i j m / n).
void dft_inplace(std::vector<cplx>& data, int dim, int n, int sign) {
  std::vector<int> dims(dim, n);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft(dim, dims.data(), ptr, ptr, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

// Evaluates out_m = scale * sum_j in_j exp(sign 2 pi i x_j y_m) for tensor
// grids x_j = a + j p and y_m = b + m q with p q n = 1.
std::vector<cplx> tensor_dft(std::span<const cplx> in, int dim, int n, double a, double p, double b, double q,
                             int sign, double scale) {
  const double s = sign < 0 ? -kTwoPi : kTwoPi;
  std::vector<cplx> pre(n), post(n);
  for (int j = 0; j < n; ++j) {
    pre[j] = std::polar(1.0, s * j * p * b);
    post[j] = std::polar(1.0, s * a * j * q);
  }
  const cplx global = std::polar(1.0, s * a * b);

  std::vector<cplx> data(in.begin(), in.end());
  std::vector<int> idx(dim, 0);
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    cplx f = 1.0;
    for (int k = 0; k < dim; ++k) f *= pre[idx[k]];
    data[flat] *= f;
    for (int k = dim - 1; k >= 0; --k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
  dft_inplace(data, dim, n, sign);
  std::fill(idx.begin(), idx.end(), 0);
  cplx g = scale;
  for (int k = 0; k < dim; ++k) g *= global;
  for (std::size_t flat = 0; flat < data.size(); ++flat) {
    cplx f = g;
    for (int k = 0; k < dim; ++k) f *= post[idx[k]];
    data[flat] *= f;
    for (int k = dim - 1; k >= 0; --k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
  return data;
}

void multiply_by_derivative_symbol(SampledFunction& spec, std::span<const double> L, bool zero_nyquist) {
  const Grid& g = spec.grid;
  const int d = g.dim();
  const int n = g.points_per_axis();
  std::vector<int> idx(d, 0);
  for (std::size_t flat = 0; flat < spec.size(); ++flat) {
    double proj = 0.0;
    bool nyquist = false;
    for (int k = 0; k < d; ++k) {
      proj += L[k] * g.node(idx[k]);
      if (n % 2 == 0 && idx[k] == 0 && L[k] != 0.0) nyquist = true;
    }
    spec.values[flat] *= (zero_nyquist && nyquist) ? cplx(0.0) : cplx(0.0, kTwoPi * proj);
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[k] < n) break;
      idx[k] = 0;
    }
  }
}

}  // namespace

cplx integrate(const SampledFunction& f) {
  cplx sum = 0.0;
  for_each_weighted(f.grid, [&](std::size_t i, double w) { sum += w * f.values[i]; });
  return sum;
}

double norm_sq(const SampledFunction& f) {
  double sum = 0.0;
  for_each_weighted(f.grid, [&](std::size_t i, double w) { sum += w * std::norm(f.values[i]); });
  return sum;
}

SampledFunction continuous_ft(const SampledFunction& f) {
  const Grid& g = f.grid;
  if (g.kind() != Grid::Kind::box) {
    throw Error(ErrorCode::invalid_argument, "continuous_ft needs a box grid; use fourier_coefficients on the torus");
  }
  const int n = g.points_per_axis();
  const double h = g.spacing();
  const Grid dual = Grid::spectral(g.dim(), n, 1.0 / (n * h));
  auto out = tensor_dft(f.values, g.dim(), n, g.origin(), h, dual.origin(), dual.spacing(), -1,
                        std::pow(h, g.dim()));
  return SampledFunction(dual, std::move(out));
}

SampledFunction inverse_continuous_ft(const SampledFunction& f_hat, const Grid& target) {
  const Grid& g = f_hat.grid;
  if (g.kind() != Grid::Kind::spectral || target.kind() != Grid::Kind::box || target.dim() != g.dim() ||
      target.points_per_axis() != g.points_per_axis() ||
      std::abs(target.spacing() * g.spacing() * g.points_per_axis() - 1.0) > 1e-12) {
    throw Error(ErrorCode::invalid_argument, "inverse_continuous_ft: target grid is not dual to the spectral grid");
  }
  auto out = tensor_dft(f_hat.values, g.dim(), g.points_per_axis(), g.origin(), g.spacing(), target.origin(),
                        target.spacing(), +1, std::pow(g.spacing(), g.dim()));
  return SampledFunction(target, std::move(out));
}

SampledFunction fourier_coefficients(const SampledFunction& g) {
  const Grid& grid = g.grid;
  if (!grid.periodic()) throw Error(ErrorCode::invalid_argument, "fourier_coefficients needs a torus grid");
  const int n = grid.points_per_axis();
  const Grid freq = Grid::spectral(grid.dim(), n, 1.0);
  auto out = tensor_dft(g.values, grid.dim(), n, grid.origin(), grid.spacing(), freq.origin(), 1.0, -1,
                        std::pow(grid.spacing(), grid.dim()));
  return SampledFunction(freq, std::move(out));
}

SampledFunction spectral_directional_derivative(const SampledFunction& f, std::span<const double> L) {
  if (static_cast<int>(L.size()) != f.dim()) throw Error(ErrorCode::invalid_argument, "direction dimension mismatch");
  const Grid& g = f.grid;
  if (g.kind() == Grid::Kind::box) {
    auto spec = continuous_ft(f);
    multiply_by_derivative_symbol(spec, L, true);
    return inverse_continuous_ft(spec, g);
  }
  if (g.kind() == Grid::Kind::torus) {
    auto coeffs = fourier_coefficients(f);
    multiply_by_derivative_symbol(coeffs, L, true);
    const Grid& cg = coeffs.grid;
    auto out = tensor_dft(coeffs.values, g.dim(), g.points_per_axis(), cg.origin(), 1.0, g.origin(), g.spacing(),
                          +1, 1.0);
    return SampledFunction(g, std::move(out));
  }
  throw Error(ErrorCode::invalid_argument, "spectral derivative of spectral-grid samples is not defined");
}

// ---------------------------------------------------------------------------
// Dense linear algebra

MatrixSym::MatrixSym(int dim, std::vector<double> row_major) : dim_(dim), a_(std::move(row_major)) {
  if (dim < 1 || a_.size() != static_cast<std::size_t>(dim) * dim) {
    throw Error(ErrorCode::invalid_argument, "matrix entry count does not match dimension");
  }
  const double tol = 1e-12 * max_abs();
  for (int j = 0; j < dim; ++j) {
    for (int k = j + 1; k < dim; ++k) {
      if (std::abs((*this)(j, k) - (*this)(k, j)) > tol) {
        throw Error(ErrorCode::invalid_argument, "matrix is not symmetric");
      }
    }
  }
}

void MatrixSym::set(int j, int k, double value) noexcept {
  a_[static_cast<std::size_t>(j) * dim_ + k] = value;
  a_[static_cast<std::size_t>(k) * dim_ + j] = value;
}

double MatrixSym::max_abs() const noexcept {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

double MatrixSym::norm() const noexcept {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

double MatrixSym::quadratic_form(std::span<const double> v) const {
  double s = 0.0;
  for (int j = 0; j < dim_; ++j)
    for (int k = 0; k < dim_; ++k) s += v[j] * (*this)(j, k) * v[k];
  return s;
}

Vec MatrixSym::apply(std::span<const double> v) const {
  Vec out(dim_, 0.0);
  for (int j = 0; j < dim_; ++j)
    for (int k = 0; k < dim_; ++k) out[j] += (*this)(j, k) * v[k];
  return out;
}

MatrixSym MatrixSym::principal(std::span<const int> keep) const {
  const int m = static_cast<int>(keep.size());
  MatrixSym sub(m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) sub.a_[static_cast<std::size_t>(j) * m + k] = (*this)(keep[j], keep[k]);
  return sub;
}

std::vector<EigenPair> sym_eig(const MatrixSym& m) {
  const int d = m.dim();
  std::vector<double> a = m.data();
  std::vector<double> v(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i) * d + i] = 1.0;
  auto at = [d](std::vector<double>& x, int i, int j) -> double& { return x[static_cast<std::size_t>(i) * d + j]; };

  const double scale = std::max(m.norm(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += at(a, p, q) * at(a, p, q);
    if (std::sqrt(off) <= 1e-15 * scale) break;

    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double apq = at(a, p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (at(a, q, q) - at(a, p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = at(a, k, p), akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = at(a, p, k), aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        at(a, p, q) = at(a, q, p) = 0.0;
        for (int k = 0; k < d; ++k) {
          const double vkp = at(v, k, p), vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<EigenPair> out(d);
  for (int i = 0; i < d; ++i) {
    out[i].value = at(a, i, i);
    out[i].vector.resize(d);
    int big = 0;
    for (int k = 0; k < d; ++k) {
      out[i].vector[k] = at(v, k, i);
      if (std::abs(out[i].vector[k]) > std::abs(out[i].vector[big]) + 1e-12) big = k;
    }
    if (out[i].vector[big] < 0.0)
      for (double& x : out[i].vector) x = -x;
  }
  std::stable_sort(out.begin(), out.end(), [](const EigenPair& l, const EigenPair& r) { return l.value < r.value; });
  return out;
}

LinearSolve solve_and_det(const MatrixSym& b, std::span<const double> rhs) {
  const int d = b.dim();
  if (static_cast<int>(rhs.size()) != d) throw Error(ErrorCode::invalid_argument, "rhs size mismatch");
  std::vector<double> a = b.data();
  Vec x(rhs.begin(), rhs.end());
  auto at = [d, &a](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * d + j]; };

  double max_row = 0.0;
  for (int i = 0; i < d; ++i) {
    double r = 0.0;
    for (int j = 0; j < d; ++j) r += at(i, j) * at(i, j);
    max_row = std::max(max_row, std::sqrt(r));
  }

  LinearSolve out;
  double det = 1.0;
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int i = col + 1; i < d; ++i)
      if (std::abs(at(i, col)) > std::abs(at(piv, col))) piv = i;
    if (piv != col) {
      for (int j = 0; j < d; ++j) std::swap(at(piv, j), at(col, j));
      std::swap(x[piv], x[col]);
      det = -det;
    }
    const double p = at(col, col);
    det *= p;
    if (p == 0.0) continue;
    for (int i = col + 1; i < d; ++i) {
      const double f = at(i, col) / p;
      if (f == 0.0) continue;
      for (int j = col; j < d; ++j) at(i, j) -= f * at(col, j);
      x[i] -= f * x[col];
    }
  }
  out.det = det;
  out.singular = !(std::abs(det) >= 1e-12 * std::pow(max_row, d));
  if (out.singular) return out;
  for (int i = d - 1; i >= 0; --i) {
    double s = x[i];
    for (int j = i + 1; j < d; ++j) s -= at(i, j) * x[j];
    x[i] = s / at(i, i);
  }
  out.solution = std::move(x);
  return out;
}

int max_threads() {
  if (const char* env = std::getenv("UPLOCAL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace uplocal
