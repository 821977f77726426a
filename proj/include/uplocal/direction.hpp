#pragma once

#include <functional>
#include <vector>

#include "uplocal/localization.hpp"
#include "uplocal/numerics.hpp"

namespace uplocal {

/// A_jk = (M_k M^_j + M_j M^_k) / 2 from moments normalized by ||f||^2.
/// Throws symmetry_violation when a mixed or first moment that the quadratic
/// form UP_L = v^T A v assumes to vanish exceeds `tolerance` (relative).
MatrixSym build_A_matrix(const MomentSet& m, double tolerance = 1e-6);

struct Candidate {
  Vec direction;         // sqrt(v), nonnegative unit vector
  Vec v;                 // squared coordinates on the simplex
  double up_value = 0.0; // v^T A v
  std::vector<int> removed;
};

struct CandidateSet {
  std::vector<Candidate> candidates;
  std::size_t min_index = 0;
  std::size_t max_index = 0;

  const Candidate& min() const { return candidates[min_index]; }
  const Candidate& max() const { return candidates[max_index]; }
};

/// Stationary points of v^T A v on the simplex by principal-submatrix
/// enumeration, plus the vertices e_k.
CandidateSet extremal_directions(const MatrixSym& A);

/// Covariance form: M_kn = cov_time[k][n] + (2 pi)^2 cov_freq[k][n], divided by ||f||^2.
MatrixSym build_M_matrix(const MomentSet& m);

struct Extreme {
  double value = 0.0;
  Vec direction;
};

struct SumFunctionalExtremes {
  Extreme min;
  Extreme max;
  bool isotropic = false;
};

SumFunctionalExtremes optimize_sum_functional(const MatrixSym& M);

struct BruteForceResult {
  double min = 0.0;
  double max = 0.0;
  Vec argmin;
  Vec argmax;
  /// Gradient norm times the sampling spacing; bounds the gap between the
  /// sampled and true extremes for smooth objectives.
  double resolution_bound = 0.0;
};

/// Evaluates `objective` at `resolution` unit directions: angles 2 pi j / resolution
/// in d = 2, a Fibonacci lattice in d = 3.
BruteForceResult sphere_bruteforce(int dim, int resolution, const std::function<double(std::span<const double>)>& objective);

enum class SphereObjective { up, sum_functional };
BruteForceResult sphere_bruteforce(const MomentSet& m, int resolution, SphereObjective objective = SphereObjective::up);

/// Unit directions used by sphere_bruteforce.
std::vector<Vec> sphere_directions(int dim, int resolution);

}  // namespace uplocal
