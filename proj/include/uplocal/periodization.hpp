#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uplocal/functions.hpp"
#include "uplocal/localization.hpp"

namespace uplocal {

/// f_lambda^per(x) = lambda^{d/2} sum_{|k|_inf <= K} f(lambda (x + k)) on the torus grid.
struct PeriodizedFunction {
  std::string base;
  double lambda = 1.0;
  int truncation = 0;
  SampledFunction samples;
  /// Change of ||samples||^2 caused by the first dropped shell |k|_inf = K + 1.
  double tail_bound = 0.0;
};

struct PeriodizeOptions {
  /// Translates per axis half-range; 0 picks the smallest K whose tail is below 1e-10 ||g||^2.
  int truncation = 0;
  /// Torus points per axis; 0 doubles from 32 until the outer Fourier band is below 1e-12 relative.
  int points_per_axis = 0;
  std::size_t point_budget = kDefaultPointBudget;
};

/// Rejects non-admissible entries, and explicit truncations whose tail exceeds
/// 1e-8 ||g||^2 (tail_tolerance).
PeriodizedFunction periodize(const CatalogFunction& f, double lambda, const PeriodizeOptions& options = {});

struct SweepRow {
  double lambda = 0.0;
  double var_A_scaled = 0.0;  // lambda^2 var_A
  double var_F_scaled = 0.0;  // var_F / lambda^2
  double up_periodic = 0.0;
  double error = 0.0;         // |up_periodic - up_directional(f, L)|
  double up_gg_periodic = 0.0;
  double gg_error = 0.0;      // |up_gg_periodic - up_gg(f)|
  int truncation = 0;
  int points_per_axis = 0;
  std::string flag;           // empty, or the error code of a failed row
};

struct SweepResult {
  double up_reference = 0.0;
  double up_gg_reference = 0.0;
  std::vector<SweepRow> rows;
};

/// One row per lambda (ascending). Rows whose commutator vanishes are kept
/// with the flag set and NaN values.
SweepResult convergence_sweep(const CatalogFunction& f, std::span<const double> L, std::span<const double> lambdas,
                              bool include_gg = false);

}  // namespace uplocal
