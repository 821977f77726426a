#pragma once

#include <string>
#include <vector>

#include "uplocal/functions.hpp"
#include "uplocal/numerics.hpp"

namespace uplocal {

/// h_k at each point.
Vec hermite_values(int k, std::span<const double> points);

/// n-point Gauss-Hermite rule with the weight folded into the weights:
/// \int F(x) dx ~ sum_i weights[i] F(nodes[i]), exact when F e^{x^2} is a
/// polynomial of degree <= 2n - 1. Nodes ascending.
struct GaussHermiteRule {
  Vec nodes;
  Vec weights;
};
GaussHermiteRule gauss_hermite(int n);

/// Coefficients c_alpha = \int f h_alpha for all alpha with max_k alpha_k <= cutoff,
/// stored row-major in a tensor of shape (cutoff + 1)^dim.
struct HermiteExpansion {
  int dim = 0;
  int cutoff = 0;
  std::vector<cplx> coeffs;
  /// 1 - sum |c|^2 / ||f||^2.
  double residual = 0.0;
  /// ||f||^2 used for the residual.
  double norm_sq = 0.0;

  HermiteExpansion() = default;
  HermiteExpansion(int d, int n);

  std::size_t size() const noexcept { return coeffs.size(); }
  /// Coefficient at alpha, 0 outside the box.
  cplx at(std::span<const int> alpha) const noexcept;
  cplx& operator[](std::span<const int> alpha);
  void multi_index(std::size_t flat, std::span<int> alpha) const noexcept;
  double coeff_norm_sq() const noexcept;
};

inline constexpr double kDefaultTailTolerance = 1e-6;
inline constexpr int kMaxHermiteCutoff = 16;
inline constexpr int kMaxHermiteDim = 3;

/// Tensor Gauss-Hermite projection with `nodes` points per axis (0 means
/// 2 cutoff + 8). Throws tail_tolerance when the residual exceeds `tolerance`.
HermiteExpansion expand(const CatalogFunction& f, int cutoff, double tolerance = kDefaultTailTolerance,
                        int nodes = 0);
/// Projection of box-grid samples by the grid quadrature.
HermiteExpansion expand(const SampledFunction& f, int cutoff, double tolerance = kDefaultTailTolerance);

/// Samples of sum_alpha c_alpha h_alpha on the grid.
SampledFunction reconstruct(const HermiteExpansion& e, const Grid& grid);

/// alpha_L = <A_L f, f> / ||f||^2 and beta_L = <B_L f, f> / ||f||^2 from the
/// coefficients, with ||f||^2 = sum |c|^2.
struct Centering {
  double alpha_L = 0.0;
  double beta_L = 0.0;
};
Centering hermite_centering(const HermiteExpansion& e, std::span<const double> L);

/// S_plus = sum_alpha |P_alpha + Q_alpha|^2 and S_minus = sum_alpha |P_alpha - Q_alpha|^2
/// with P_alpha = sum_n L_n sqrt(alpha_n) c_{alpha - e_n} and
/// Q_alpha = sum_n L_n sqrt(alpha_n + 1) c_{alpha + e_n}. S_plus / 2 = ||<L,x> f||^2,
/// S_minus / 2 = ||df/dL||^2.
struct HermiteSums {
  double s_plus = 0.0;
  double s_minus = 0.0;
  /// sum_alpha (|P_alpha|^2 + |Q_alpha|^2).
  double sum_pq = 0.0;
  /// Estimated contribution of coefficients beyond the cutoff.
  double truncation_bound = 0.0;
};
HermiteSums hermite_sums(const HermiteExpansion& e, std::span<const double> L);

struct HermiteSumFunctional {
  double value = 0.0;
  double truncation_bound = 0.0;
};

/// (2 pi)^-2 ||A_L f||^2 + (2 pi)^2 ||B_L f||^2 in coefficient space. Requires
/// |alpha_L|, |beta_L| < 1e-6.
HermiteSumFunctional sum_functional_hermite(const HermiteExpansion& e, std::span<const double> L);
/// S_plus S_minus / (4 ||L||^4 (sum |c|^2)^2). Requires the same centering.
double up_hermite(const HermiteExpansion& e, std::span<const double> L);

/// Variances and products from the coefficient sums (centering required):
/// delta_A = (2 pi)^2 S_plus / 2, delta_B = (2 pi)^-2 S_minus / 2, with
/// sum_functional normalized by ||L||^2 sum |c|^2.
struct HermiteReport {
  double delta_A = 0.0;
  double delta_B = 0.0;
  double up = 0.0;
  double sum_functional = 0.0;
  double truncation_bound = 0.0;
};
HermiteReport hermite_report(const HermiteExpansion& e, std::span<const double> L);

/// True iff every coefficient above 1e-10 in modulus has all indices odd (and
/// at least one such coefficient exists).
bool odd_symmetry_check(const HermiteExpansion& e);

/// Text dump: header "dim cutoff residual", then "alpha_1 .. alpha_d re im"
/// for every |c_alpha| > 1e-12.
void write_expansion(const std::string& path, const HermiteExpansion& e);
HermiteExpansion read_expansion(const std::string& path);

}  // namespace uplocal
