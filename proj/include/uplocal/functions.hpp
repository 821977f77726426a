#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uplocal/numerics.hpp"

namespace uplocal {

/// Sum of coef * prod_k x_k^exponents[k].
struct Polynomial {
  struct Term {
    double coef = 0.0;
    std::vector<int> exponents;
  };

  int dim = 0;
  std::vector<Term> terms;

  static Polynomial constant(int dim, double value);
  /// Parses "coef@e1,e2,...;coef@..."; an empty exponent list means a
  /// constant term in dimension `dim_hint`.
  static Polynomial parse(std::string_view text, int dim_hint = 0);

  int total_degree() const noexcept;
  double evaluate(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> out) const;
  /// True when every term has the same exponent parity along `axis`.
  bool uniform_parity(int axis) const noexcept;
  /// True when every exponent of every term is odd.
  bool all_odd() const noexcept;
  std::string to_string() const;
};

/// Nonzero vector in R^d along which localization is measured.
struct Direction {
  Vec components;

  explicit Direction(Vec c);
  int dim() const noexcept { return static_cast<int>(components.size()); }
  double norm() const noexcept { return norm2(components); }
  /// Components are integers within 1e-12.
  bool is_integer() const noexcept;
  Direction unit() const;
  std::span<const double> span() const noexcept { return components; }
};

enum class FunctionKind {
  gaussian_diag,
  gaussian_directional,
  example1,
  example2,
  indicator_poly,
  hermite_pure,
  custom_grid,
};

/// Affine change of variables g(x) = amp * exp(2 pi i <W, x>) f(b U x - x0).
/// U is row-major orthogonal; an empty U means identity.
struct Transform {
  cplx amplitude = 1.0;
  double scale = 1.0;
  Vec shift;
  Vec modulation;
  std::vector<double> rotation;

  bool is_identity() const noexcept;
};

/// Named analytic test function with exact evaluator, and where available an
/// exact Fourier transform and gradient.
class CatalogFunction {
 public:
  /// (2/pi)^{d/4} (prod a)^{1/4} exp(-sum a_k x_k^2), unit L2 norm.
  static CatalogFunction gaussian_diag(Vec a);
  /// exp(-(2 pi^2 / mu) <L,x>^2) P(u) exp(-nu |u|^2), u_j = L_{j+1} x_1 - L_1 x_{j+1}.
  static CatalogFunction gaussian_directional(Vec L, double mu, double nu, Polynomial phi);
  /// (3 x y / 2) on [-1,1]^2.
  static CatalogFunction example1();
  /// (sqrt(21) x^3 y / 2) on [-1,1]^2.
  static CatalogFunction example2();
  /// P(x) on [-1,1]^d, zero outside.
  static CatalogFunction indicator_poly(Polynomial p);
  /// Tensor Hermite function h_alpha.
  static CatalogFunction hermite_pure(std::vector<int> alpha);
  /// Samples read from a custom grid file; no pointwise evaluation.
  static CatalogFunction custom_grid(SampledFunction samples, bool normalized, std::string source = {});

  /// Parses "gaussian_diag:1,4", "example1", "hermite_pure:1,1",
  /// "indicator_poly:1.5@1,1", "gaussian_directional:L1,L2|mu|nu|phi",
  /// "custom_grid:path".
  static CatalogFunction parse(std::string_view spec);

  FunctionKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  const std::string& name() const noexcept { return name_; }
  const Vec& params() const noexcept { return params_; }

  bool has_exact_ft() const noexcept;
  bool has_exact_gradient() const noexcept { return kind_ != FunctionKind::custom_grid; }
  /// |f| even in each coordinate.
  bool even_per_axis() const noexcept { return even_per_axis_; }
  /// f odd in each coordinate.
  bool odd_per_axis() const noexcept { return odd_per_axis_; }
  /// Jump discontinuity on the boundary of [-1,1]^d; the gradient is the
  /// classical one on the open box.
  bool compact_support() const noexcept;
  /// Smooth with fast decay; eligible for periodization.
  bool admissible() const noexcept;

  cplx evaluate(std::span<const double> x) const;
  cplx exact_ft(std::span<const double> xi) const;
  void gradient(std::span<const double> x, std::span<cplx> out) const;

  CatalogFunction transformed(const Transform& t) const;
  const Transform& transform() const noexcept { return transform_; }

  /// Box grid on which quadrature and transforms of this function are accurate
  /// to well below 1e-8.
  Grid recommended_grid() const;

  const SampledFunction* custom_samples() const noexcept { return custom_.get(); }

 private:
  CatalogFunction(FunctionKind kind, int dim, std::string name) : kind_(kind), dim_(dim), name_(std::move(name)) {}

  cplx evaluate_base(std::span<const double> y) const;
  cplx exact_ft_base(std::span<const double> xi) const;
  void gradient_base(std::span<const double> y, std::span<cplx> out) const;

  FunctionKind kind_;
  int dim_;
  std::string name_;
  Vec params_;
  Polynomial poly_;
  std::vector<int> alpha_;
  bool even_per_axis_ = false;
  bool odd_per_axis_ = false;
  Transform transform_;
  std::shared_ptr<const SampledFunction> custom_;
};

/// f sampled at every grid node. custom_grid entries return their samples when
/// the grid matches.
SampledFunction sample(const CatalogFunction& f, const Grid& grid);
/// Exact f^ sampled on a (spectral) grid.
SampledFunction sample_ft(const CatalogFunction& f, const Grid& grid);
/// d sampled partial derivatives.
std::vector<SampledFunction> sample_gradient(const CatalogFunction& f, const Grid& grid);

/// Samples of sum_j L_j df/dx_j. Catalog entries use the exact gradient;
/// sampled functions use spectral differentiation.
SampledFunction directional_derivative(const CatalogFunction& f, std::span<const double> L, const Grid& grid);
SampledFunction directional_derivative(const SampledFunction& f, std::span<const double> L);

/// custom_grid file: header "dim n R normalized", then n^d lines "re im" in
/// row-major order on the box grid of halfwidth R.
SampledFunction read_custom_grid(const std::string& path, bool* normalized = nullptr);
void write_custom_grid(const std::string& path, const SampledFunction& f, bool normalized);

/// Hermite function h_k(y) by the three-term recurrence.
double hermite_function(int k, double y);
/// h_0(y) .. h_kmax(y).
void hermite_all(int kmax, double y, std::span<double> out);

}  // namespace uplocal
