#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uplocal/functions.hpp"
#include "uplocal/numerics.hpp"

namespace uplocal {

/// Raw (unnormalized) moments of |f|^2 and |f^|^2.
struct MomentSet {
  int dim = 0;
  double norm_sq = 0.0;
  Vec mean_time;          // \int x_k |f|^2
  Vec mean_freq;          // \int xi_k |f^|^2
  MatrixSym second_time;  // \int x_k x_n |f|^2
  MatrixSym second_freq;  // \int xi_k xi_n |f^|^2
  Vec M;                  // (2 pi)^2 second_time[k][k]
  Vec M_hat;              // second_freq[k][k]

  explicit MomentSet(int d) : dim(d), mean_time(d), mean_freq(d), second_time(d), second_freq(d), M(d), M_hat(d) {}
};

/// Moments by quadrature of f on its grid and f^ on the dual grid.
MomentSet moments(const SampledFunction& f, const SampledFunction& f_hat);
/// Moments whose frequency half comes from the partial derivatives:
/// \int xi_k xi_n |f^|^2 = (2 pi)^-2 Re \int df/dx_k conj(df/dx_n).
MomentSet moments_from_gradient(const SampledFunction& f, const std::vector<SampledFunction>& gradient);

enum class MomentRoute { automatic, exact_ft, discrete_ft, gradient };

/// Moments of a catalog function. The automatic route uses the classical
/// gradient for compactly supported entries, the closed-form transform when
/// one exists and the discrete transform otherwise.
MomentSet moments(const CatalogFunction& f, MomentRoute route = MomentRoute::automatic,
                  std::optional<Grid> grid = std::nullopt);

/// Delta(A_L, f) = ||A_L f||^2 - |<A_L f, f>|^2 / ||f||^2.
double variance_A(const MomentSet& m, std::span<const double> L);
/// Delta(B_L, f) = \int <L,xi>^2 |f^|^2 - (\int <L,xi> |f^|^2)^2 / ||f||^2.
double variance_B(const MomentSet& m, std::span<const double> L);
double variance_A(const SampledFunction& f, const SampledFunction& f_hat, std::span<const double> L);
double variance_B(const SampledFunction& f, const SampledFunction& f_hat, std::span<const double> L);

struct LocalizationReport {
  Vec direction;
  double delta_A = 0.0;
  double delta_B = 0.0;
  double alpha_L = 0.0;  // <A_L f, f> / ||f||^2
  double beta_L = 0.0;   // <B_L f, f> / ||f||^2
  double up = 0.0;
  /// ((2 pi)^-2 Delta_A + (2 pi)^2 Delta_B) / ||f||^2 at the unit direction.
  double sum_functional = 0.0;
  std::vector<std::string> warnings;
};

LocalizationReport up_directional(const MomentSet& m, std::span<const double> L);
LocalizationReport up_directional(const SampledFunction& f, const SampledFunction& f_hat, std::span<const double> L);

/// (1 / (d^2 ||f||^4)) sum_j Delta(A_j) sum_k Delta(B_k).
double up_gg(const MomentSet& m);
double up_gg(const SampledFunction& f, const SampledFunction& f_hat);

/// K_L(g) = 2 \int_T sin^2(pi <L,x>) |g|^2.
double k_functional(const SampledFunction& g, std::span<const double> L);
/// M_L(g) = i \int_T sin(2 pi <L,x>) |g|^2 (purely imaginary).
cplx m_functional(const SampledFunction& g, std::span<const double> L);

struct PeriodicReport {
  cplx commutator;     // <e^{2 pi i <L,x>} g, g>
  double var_A = 0.0;  // ||g||^4 / |commutator|^2 - 1
  double var_A_km = 0.0;  // same quantity through K_L and M_L
  double var_F = 0.0;
  double up = 0.0;
};

/// Periodic directional product var_A var_F / ||L||^4 for integer L.
PeriodicReport up_periodic(const SampledFunction& g, std::span<const double> L);

struct PeriodicGGReport {
  double var_A = 0.0;
  double var_F = 0.0;
  double up = 0.0;
};

PeriodicGGReport up_gg_periodic(const SampledFunction& g);

}  // namespace uplocal
