#include "uplocal/periodization.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace uplocal {

namespace {

constexpr double kAutoTail = 1e-10;
constexpr double kAcceptTail = 1e-8;
constexpr double kBandTolerance = 1e-12;
constexpr int kMaxTruncation = 64;

// Sum of lambda^{d/2} f(lambda (x + k)) over integer k whose sup norm lies in
// [k_lo, k_hi], at every torus node.
std::vector<cplx> shell_sum(const CatalogFunction& f, double lambda, const Grid& grid, int k_lo, int k_hi) {
  const int d = grid.dim();
  std::vector<std::vector<int>> shifts;
  const int width = 2 * k_hi + 1;
  std::size_t count = 1;
  for (int k = 0; k < d; ++k) count *= static_cast<std::size_t>(width);
  std::vector<int> k(d);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    int sup = 0;
    for (int j = d - 1; j >= 0; --j) {
      k[j] = static_cast<int>(rest % width) - k_hi;
      rest /= width;
      sup = std::max(sup, std::abs(k[j]));
    }
    if (sup >= k_lo) shifts.push_back(k);
  }
  const double amp = std::pow(lambda, d / 2.0);
  std::vector<cplx> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    std::vector<double> x(d), y(d);
    grid.point(i, x);
    cplx s = 0.0;
    for (const auto& shift : shifts) {
      for (int j = 0; j < d; ++j) y[j] = lambda * (x[j] + shift[j]);
      s += f.evaluate(y);
    }
    out[i] = amp * s;
  });
  return out;
}

double torus_norm_sq(const std::vector<cplx>& v, const Grid& g) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return s * std::pow(g.spacing(), g.dim());
}

// Change of ||g||^2 when the shell values are added: at most 2 ||g|| ||s|| + ||s||^2.
double tail_estimate(const std::vector<cplx>& g, const std::vector<cplx>& shell, const Grid& grid) {
  const double s = std::sqrt(torus_norm_sq(shell, grid));
  return 2.0 * std::sqrt(torus_norm_sq(g, grid)) * s + s * s;
}

// Largest Fourier coefficient modulus in the outer band |m|_inf >= 3n/8,
// relative to the largest coefficient overall.
double outer_band(const SampledFunction& g) {
  const SampledFunction c = fourier_coefficients(g);
  const int n = g.grid.points_per_axis();
  const int d = g.dim();
  double top = 0.0, band = 0.0;
  std::vector<int> idx(d);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c.grid.index(i, idx);
    int sup = 0;
    for (int k = 0; k < d; ++k) sup = std::max(sup, std::abs(idx[k] - n / 2));
    const double a = std::abs(c.values[i]);
    top = std::max(top, a);
    if (4 * sup >= 3 * n / 2) band = std::max(band, a);
  }
  return top > 0.0 ? band / top : 0.0;
}

}  // namespace

PeriodizedFunction periodize(const CatalogFunction& f, double lambda, const PeriodizeOptions& options) {
  if (!f.admissible()) throw Error(ErrorCode::not_admissible, f.name() + " is not eligible for periodization");
  if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_argument, "lambda must be positive");
  if (options.truncation < 0) throw Error(ErrorCode::invalid_argument, "truncation must be >= 1");
  const int d = f.dim();

  auto build = [&](const Grid& grid) {
    PeriodizedFunction p{f.name(), lambda, 0, SampledFunction(grid), 0.0};
    if (options.truncation > 0) {
      p.truncation = options.truncation;
      p.samples.values = shell_sum(f, lambda, grid, 0, p.truncation);
      const auto shell = shell_sum(f, lambda, grid, p.truncation + 1, p.truncation + 1);
      p.tail_bound = tail_estimate(p.samples.values, shell, grid);
      const double norm = torus_norm_sq(p.samples.values, grid);
      if (!(p.tail_bound < kAcceptTail * norm)) {
        std::ostringstream os;
        os << "dropped translate mass " << p.tail_bound << " exceeds " << kAcceptTail << " * ||g||^2 at K = "
           << p.truncation << "; increase K";
        throw Error(ErrorCode::tail_tolerance, os.str());
      }
      return p;
    }
    p.samples.values = shell_sum(f, lambda, grid, 0, 1);
    for (int K = 1;; ++K) {
      const auto shell = shell_sum(f, lambda, grid, K + 1, K + 1);
      p.tail_bound = tail_estimate(p.samples.values, shell, grid);
      if (p.tail_bound < kAutoTail * torus_norm_sq(p.samples.values, grid)) {
        p.truncation = K;
        return p;
      }
      if (K + 1 > kMaxTruncation) {
        throw Error(ErrorCode::tail_tolerance, "translate sum does not converge by K = " +
                                                   std::to_string(kMaxTruncation));
      }
      for (std::size_t i = 0; i < shell.size(); ++i) p.samples.values[i] += shell[i];
    }
  };

  if (options.points_per_axis > 0) {
    return build(Grid::torus(d, options.points_per_axis, options.point_budget));
  }
  for (int n = 32;; n *= 2) {
    std::size_t next = 1;
    for (int k = 0; k < d; ++k) next *= static_cast<std::size_t>(2 * n);
    PeriodizedFunction p = build(Grid::torus(d, n, options.point_budget));
    if (outer_band(p.samples) < kBandTolerance || next > options.point_budget) return p;
  }
}

SweepResult convergence_sweep(const CatalogFunction& f, std::span<const double> L, std::span<const double> lambdas,
                              bool include_gg) {
  if (static_cast<int>(L.size()) != f.dim()) throw Error(ErrorCode::invalid_argument, "direction dimension mismatch");
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) throw Error(ErrorCode::invalid_argument, "lambdas must be ascending");
  }
  for (double v : L) {
    if (std::abs(v - std::round(v)) > 1e-12) {
      throw Error(ErrorCode::non_integer_direction, "periodic operators need an integer direction");
    }
  }
  SweepResult result;
  const MomentSet m = moments(f);
  result.up_reference = up_directional(m, L).up;
  if (include_gg) result.up_gg_reference = up_gg(m);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double lambda : lambdas) {
    SweepRow row;
    row.lambda = lambda;
    const PeriodizedFunction p = periodize(f, lambda);
    row.truncation = p.truncation;
    row.points_per_axis = p.samples.grid.points_per_axis();
    try {
      const PeriodicReport r = up_periodic(p.samples, L);
      row.var_A_scaled = lambda * lambda * r.var_A;
      row.var_F_scaled = r.var_F / (lambda * lambda);
      row.up_periodic = r.up;
      row.error = std::abs(r.up - result.up_reference);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::vanishing_commutator) throw;
      row.flag = to_string(e.code());
      row.var_A_scaled = row.var_F_scaled = row.up_periodic = row.error = nan;
    }
    if (include_gg) {
      try {
        const PeriodicGGReport g = up_gg_periodic(p.samples);
        row.up_gg_periodic = g.up;
        row.gg_error = std::abs(g.up - result.up_gg_reference);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::vanishing_commutator) throw;
        row.flag = to_string(e.code());
        row.up_gg_periodic = row.gg_error = nan;
      }
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace uplocal
