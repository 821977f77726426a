#include "uplocal/localization.hpp"

#include <cmath>
#include <sstream>

namespace uplocal {

namespace {

constexpr double kClampWarn = 1e-10;

void require_positive_norm(double n) {
  if (!(n > 0.0)) throw Error(ErrorCode::zero_norm, "function has zero norm");
}

void require_dim(int d, std::span<const double> L) {
  if (static_cast<int>(L.size()) != d) {
    throw Error(ErrorCode::invalid_argument, "direction has " + std::to_string(L.size()) +
                                                 " components, function has dimension " + std::to_string(d));
  }
  if (!(norm2(L) > 0.0)) throw Error(ErrorCode::zero_direction, "direction must be nonzero");
}

// Accumulates \int w |f|^2, \int x_k w |f|^2 and \int x_k x_n w |f|^2.
void accumulate_moments(const SampledFunction& f, double& norm, Vec& mean, MatrixSym& second) {
  const Grid& g = f.grid;
  const int d = g.dim();
  std::vector<double> x(d);
  std::vector<double> s(static_cast<std::size_t>(d) * d, 0.0);
  std::fill(mean.begin(), mean.end(), 0.0);
  norm = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = g.weight(i) * std::norm(f.values[i]);
    if (w == 0.0) continue;
    g.point(i, x);
    norm += w;
    for (int k = 0; k < d; ++k) {
      mean[k] += w * x[k];
      for (int n = k; n < d; ++n) s[static_cast<std::size_t>(k) * d + n] += w * x[k] * x[n];
    }
  }
  for (int k = 0; k < d; ++k)
    for (int n = k; n < d; ++n) second.set(k, n, s[static_cast<std::size_t>(k) * d + n]);
}

void fill_diagonals(MomentSet& m) {
  for (int k = 0; k < m.dim; ++k) {
    m.M[k] = kTwoPi * kTwoPi * m.second_time(k, k);
    m.M_hat[k] = m.second_freq(k, k);
  }
}

double clamp_variance(double v, const char* what, std::vector<std::string>* warnings) {
  if (v >= 0.0) return v;
  if (v < -kClampWarn && warnings) {
    std::ostringstream os;
    os << what << " = " << v << " clamped to 0";
    warnings->push_back(os.str());
  }
  return 0.0;
}

double raw_variance_A(const MomentSet& m, std::span<const double> L) {
  const double mean = dot(L, m.mean_time);
  return kTwoPi * kTwoPi * (m.second_time.quadratic_form(L) - mean * mean / m.norm_sq);
}

double raw_variance_B(const MomentSet& m, std::span<const double> L) {
  const double mean = dot(L, m.mean_freq);
  return m.second_freq.quadratic_form(L) - mean * mean / m.norm_sq;
}

}  // namespace

MomentSet moments(const SampledFunction& f, const SampledFunction& f_hat) {
  if (f.dim() != f_hat.dim()) throw Error(ErrorCode::invalid_argument, "f and f^ have different dimensions");
  MomentSet m(f.dim());
  accumulate_moments(f, m.norm_sq, m.mean_time, m.second_time);
  require_positive_norm(m.norm_sq);
  double freq_norm = 0.0;
  accumulate_moments(f_hat, freq_norm, m.mean_freq, m.second_freq);
  fill_diagonals(m);
  return m;
}

MomentSet moments_from_gradient(const SampledFunction& f, const std::vector<SampledFunction>& gradient) {
  const int d = f.dim();
  if (static_cast<int>(gradient.size()) != d) throw Error(ErrorCode::invalid_argument, "gradient has wrong length");
  for (const auto& g : gradient)
    if (!(g.grid == f.grid)) throw Error(ErrorCode::invalid_argument, "gradient samples live on a different grid");
  MomentSet m(d);
  accumulate_moments(f, m.norm_sq, m.mean_time, m.second_time);
  require_positive_norm(m.norm_sq);
  std::vector<cplx> cross(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<cplx> mixed(d, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = f.grid.weight(i);
    if (w == 0.0) continue;
    for (int k = 0; k < d; ++k) {
      mixed[k] += w * gradient[k].values[i] * std::conj(f.values[i]);
      for (int n = k; n < d; ++n) {
        cross[static_cast<std::size_t>(k) * d + n] += w * gradient[k].values[i] * std::conj(gradient[n].values[i]);
      }
    }
  }
  const double s = 1.0 / (kTwoPi * kTwoPi);
  for (int k = 0; k < d; ++k) {
    m.mean_freq[k] = mixed[k].imag() / kTwoPi;
    for (int n = k; n < d; ++n) m.second_freq.set(k, n, s * cross[static_cast<std::size_t>(k) * d + n].real());
  }
  fill_diagonals(m);
  return m;
}

MomentSet moments(const CatalogFunction& f, MomentRoute route, std::optional<Grid> grid) {
  const Grid g = grid ? *grid : f.recommended_grid();
  if (route == MomentRoute::automatic) {
    if (f.compact_support()) {
      route = MomentRoute::gradient;
    } else if (f.has_exact_ft()) {
      route = MomentRoute::exact_ft;
    } else {
      route = MomentRoute::discrete_ft;
    }
  }
  const SampledFunction samples = sample(f, g);
  switch (route) {
    case MomentRoute::gradient:
      return moments_from_gradient(samples, sample_gradient(f, g));
    case MomentRoute::exact_ft: {
      if (g.kind() != Grid::Kind::box) throw Error(ErrorCode::invalid_argument, "moments need a box grid");
      const int n = g.points_per_axis();
      const Grid dual = Grid::spectral(g.dim(), n, 1.0 / (n * g.spacing()));
      return moments(samples, sample_ft(f, dual));
    }
    default:
      return moments(samples, continuous_ft(samples));
  }
}

double variance_A(const MomentSet& m, std::span<const double> L) {
  require_dim(m.dim, L);
  return clamp_variance(raw_variance_A(m, L), "delta_A", nullptr);
}

double variance_B(const MomentSet& m, std::span<const double> L) {
  require_dim(m.dim, L);
  return clamp_variance(raw_variance_B(m, L), "delta_B", nullptr);
}

double variance_A(const SampledFunction& f, const SampledFunction& f_hat, std::span<const double> L) {
  return variance_A(moments(f, f_hat), L);
}

double variance_B(const SampledFunction& f, const SampledFunction& f_hat, std::span<const double> L) {
  return variance_B(moments(f, f_hat), L);
}

LocalizationReport up_directional(const MomentSet& m, std::span<const double> L) {
  require_dim(m.dim, L);
  LocalizationReport r;
  r.direction.assign(L.begin(), L.end());
  r.delta_A = clamp_variance(raw_variance_A(m, L), "delta_A", &r.warnings);
  r.delta_B = clamp_variance(raw_variance_B(m, L), "delta_B", &r.warnings);
  r.alpha_L = kTwoPi * dot(L, m.mean_time) / m.norm_sq;
  r.beta_L = -dot(L, m.mean_freq) / m.norm_sq;
  const double l2 = dot(L, L);
  r.up = r.delta_A * r.delta_B / (l2 * l2 * m.norm_sq * m.norm_sq);
  r.sum_functional =
      (r.delta_A / (kTwoPi * kTwoPi) + kTwoPi * kTwoPi * r.delta_B) / (l2 * m.norm_sq);
  return r;
}

LocalizationReport up_directional(const SampledFunction& f, const SampledFunction& f_hat, std::span<const double> L) {
  return up_directional(moments(f, f_hat), L);
}

double up_gg(const MomentSet& m) {
  const int d = m.dim;
  double sa = 0.0, sb = 0.0;
  Vec e(d, 0.0);
  for (int k = 0; k < d; ++k) {
    e[k] = 1.0;
    sa += clamp_variance(raw_variance_A(m, e), "delta_A", nullptr);
    sb += clamp_variance(raw_variance_B(m, e), "delta_B", nullptr);
    e[k] = 0.0;
  }
  return sa * sb / (static_cast<double>(d) * d * m.norm_sq * m.norm_sq);
}

double up_gg(const SampledFunction& f, const SampledFunction& f_hat) { return up_gg(moments(f, f_hat)); }

// ---------------------------------------------------------------------------
// Torus

namespace {

void require_torus(const SampledFunction& g) {
  if (!g.grid.periodic()) throw Error(ErrorCode::invalid_argument, "periodic functionals need a torus grid");
}

void require_integer(std::span<const double> L) {
  for (double v : L) {
    if (std::abs(v - std::round(v)) > 1e-12) {
      throw Error(ErrorCode::non_integer_direction, "periodic operators need an integer direction");
    }
  }
}

// \int_T phase(<L,x>) |g|^2 for a real or complex weight.
template <typename Fn>
auto torus_weighted(const SampledFunction& g, std::span<const double> L, Fn fn) {
  const Grid& grid = g.grid;
  std::vector<double> x(grid.dim());
  decltype(fn(0.0)) sum{};
  const double w = std::pow(grid.spacing(), grid.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    grid.point(i, x);
    sum += fn(dot(L, x)) * (w * std::norm(g.values[i]));
  }
  return sum;
}

// var_F = ||B g||^2 / N - |<B g, g>|^2 / N^2 with B = (i / 2 pi) d/dL.
double frequency_variance(const SampledFunction& g, std::span<const double> L, double N) {
  const SampledFunction D = spectral_directional_derivative(g, L);
  const double dd = norm_sq(D);
  cplx dg = 0.0;
  const double w = std::pow(g.grid.spacing(), g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) dg += w * D.values[i] * std::conj(g.values[i]);
  const double s = 1.0 / (kTwoPi * kTwoPi);
  return std::max(0.0, s * dd / N - s * std::norm(dg) / (N * N));
}

cplx commutator_value(const SampledFunction& g, std::span<const double> L) {
  return torus_weighted(g, L, [](double t) { return std::polar(1.0, kTwoPi * t); });
}

}  // namespace

double k_functional(const SampledFunction& g, std::span<const double> L) {
  require_torus(g);
  require_dim(g.dim(), L);
  require_integer(L);
  return torus_weighted(g, L, [](double t) {
    const double s = std::sin(kPi * t);
    return 2.0 * s * s;
  });
}

cplx m_functional(const SampledFunction& g, std::span<const double> L) {
  require_torus(g);
  require_dim(g.dim(), L);
  require_integer(L);
  return {0.0, torus_weighted(g, L, [](double t) { return std::sin(kTwoPi * t); })};
}

PeriodicReport up_periodic(const SampledFunction& g, std::span<const double> L) {
  require_torus(g);
  require_dim(g.dim(), L);
  require_integer(L);
  const double N = norm_sq(g);
  require_positive_norm(N);
  PeriodicReport r;
  r.commutator = commutator_value(g, L);
  if (std::abs(r.commutator) < 1e-10 * N) {
    throw Error(ErrorCode::vanishing_commutator, "<A g, g> vanishes; the periodic product is undefined");
  }
  r.var_A = N * N / std::norm(r.commutator) - 1.0;
  const double K = k_functional(g, L);
  const double m = m_functional(g, L).imag();
  r.var_A_km = (2.0 * N * K - K * K - m * m) / ((N - K) * (N - K) + m * m);
  r.var_F = frequency_variance(g, L, N);
  const double l2 = dot(L, L);
  r.up = r.var_A * r.var_F / (l2 * l2);
  return r;
}

PeriodicGGReport up_gg_periodic(const SampledFunction& g) {
  require_torus(g);
  const int d = g.dim();
  const double N = norm_sq(g);
  require_positive_norm(N);
  double num = 0.0, den = 0.0, var_f = 0.0;
  Vec e(d, 0.0);
  for (int j = 0; j < d; ++j) {
    e[j] = 1.0;
    const double a = std::abs(commutator_value(g, e));
    num += N * N - a * a;
    den += a;
    var_f += frequency_variance(g, e, N);
    e[j] = 0.0;
  }
  if (den < 1e-10 * N) {
    throw Error(ErrorCode::vanishing_commutator, "sum of |<A_j g, g>| vanishes; the periodic product is undefined");
  }
  PeriodicGGReport r;
  r.var_A = num / (den * den);
  r.var_F = var_f;
  r.up = r.var_A * r.var_F;
  return r;
}

}  // namespace uplocal
