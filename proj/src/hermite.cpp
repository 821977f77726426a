#include "uplocal/hermite.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace uplocal {

namespace {

constexpr double kCenteringTolerance = 1e-6;

// Contracts every axis of an n^d tensor with the m x n matrix `table`,
// producing an m^d tensor: out[i_1..i_d] = sum_j prod_k table[i_k][j_k] in[j_1..j_d].
std::vector<cplx> contract_axes(std::vector<cplx> data, int d, int n, int m, const std::vector<double>& table) {
  std::vector<int> shape(d, n);
  for (int axis = 0; axis < d; ++axis) {
    std::size_t outer = 1, inner = 1;
    for (int k = 0; k < axis; ++k) outer *= shape[k];
    for (int k = axis + 1; k < d; ++k) inner *= shape[k];
    std::vector<cplx> out(outer * m * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (int i = 0; i < m; ++i) {
        cplx* dst = &out[(o * m + i) * inner];
        for (int j = 0; j < n; ++j) {
          const double t = table[static_cast<std::size_t>(i) * n + j];
          if (t == 0.0) continue;
          const cplx* src = &data[(o * n + j) * inner];
          for (std::size_t r = 0; r < inner; ++r) dst[r] += t * src[r];
        }
      }
    }
    shape[axis] = m;
    data = std::move(out);
  }
  return data;
}

void check_limits(int d, int cutoff) {
  if (d < 1 || d > kMaxHermiteDim) {
    throw Error(ErrorCode::unsupported_dimension, "Hermite expansions support 1 <= d <= " +
                                                      std::to_string(kMaxHermiteDim));
  }
  if (cutoff < 0 || cutoff > kMaxHermiteCutoff) {
    throw Error(ErrorCode::invalid_argument, "Hermite cutoff must lie in [0, " + std::to_string(kMaxHermiteCutoff) + "]");
  }
}

void finish(HermiteExpansion& e, double norm, double tolerance) {
  if (!(norm > 0.0)) throw Error(ErrorCode::zero_norm, "function has zero norm");
  e.norm_sq = norm;
  e.residual = 1.0 - e.coeff_norm_sq() / norm;
  if (e.residual > tolerance) {
    std::ostringstream os;
    os << "Hermite expansion residual " << e.residual << " exceeds tolerance " << tolerance << " at cutoff "
       << e.cutoff;
    throw Error(ErrorCode::tail_tolerance, os.str());
  }
}

struct Neighbours {
  cplx p;  // sum_n L_n sqrt(alpha_n) c_{alpha - e_n}
  cplx q;  // sum_n L_n sqrt(alpha_n + 1) c_{alpha + e_n}
};

Neighbours neighbours(const HermiteExpansion& e, std::span<const double> L, std::span<int> alpha) {
  Neighbours r{0.0, 0.0};
  for (int n = 0; n < e.dim; ++n) {
    if (L[n] == 0.0) continue;
    const int a = alpha[n];
    if (a > 0) {
      alpha[n] = a - 1;
      r.p += L[n] * std::sqrt(static_cast<double>(a)) * e.at(alpha);
    }
    alpha[n] = a + 1;
    r.q += L[n] * std::sqrt(a + 1.0) * e.at(alpha);
    alpha[n] = a;
  }
  return r;
}

void require_direction(const HermiteExpansion& e, std::span<const double> L) {
  if (static_cast<int>(L.size()) != e.dim) throw Error(ErrorCode::invalid_argument, "direction dimension mismatch");
  if (!(norm2(L) > 0.0)) throw Error(ErrorCode::zero_direction, "direction must be nonzero");
}

void require_centered(const HermiteExpansion& e, std::span<const double> L) {
  const Centering c = hermite_centering(e, L);
  if (std::abs(c.alpha_L) >= kCenteringTolerance || std::abs(c.beta_L) >= kCenteringTolerance) {
    std::ostringstream os;
    os << "expansion is not centered along L: alpha_L = " << c.alpha_L << ", beta_L = " << c.beta_L;
    throw Error(ErrorCode::centering_violated, os.str());
  }
}

}  // namespace

Vec hermite_values(int k, std::span<const double> points) {
  if (k < 0) throw Error(ErrorCode::invalid_argument, "Hermite order must be nonnegative");
  Vec out(points.size());
  std::vector<double> all(k + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    hermite_all(k, points[i], all);
    out[i] = all[k];
  }
  return out;
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1 || n > 200) throw Error(ErrorCode::invalid_argument, "Gauss-Hermite order must lie in [1, 200]");
  GaussHermiteRule rule{Vec(n), Vec(n)};
  const double pim4 = std::pow(kPi, -0.25);
  const int m = (n + 1) / 2;
  double z = 0.0;
  std::vector<double> roots(m);
  for (int i = 0; i < m; ++i) {
    // Initial guesses from the asymptotic root distribution, largest first.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * roots[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * roots[1];
    } else {
      z = 2.0 * z - roots[i - 2];
    }
    double p1 = 0.0, p2 = 0.0, pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      p1 = pim4;
      p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    // Recompute p_{n-1} at the converged root for the weight.
    p1 = pim4;
    p2 = 0.0;
    for (int j = 1; j < n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
    }
    roots[i] = z;
    const double w = std::exp(z * z) / (n * p1 * p1);
    rule.nodes[i] = -z;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = z;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

HermiteExpansion::HermiteExpansion(int d, int n) : dim(d), cutoff(n) {
  check_limits(d, n);
  std::size_t size = 1;
  for (int k = 0; k < d; ++k) size *= static_cast<std::size_t>(n + 1);
  coeffs.assign(size, 0.0);
}

cplx HermiteExpansion::at(std::span<const int> alpha) const noexcept {
  std::size_t flat = 0;
  for (int k = 0; k < dim; ++k) {
    if (alpha[k] < 0 || alpha[k] > cutoff) return 0.0;
    flat = flat * (cutoff + 1) + alpha[k];
  }
  return coeffs[flat];
}

cplx& HermiteExpansion::operator[](std::span<const int> alpha) {
  std::size_t flat = 0;
  for (int k = 0; k < dim; ++k) {
    if (alpha[k] < 0 || alpha[k] > cutoff) throw Error(ErrorCode::invalid_argument, "multi-index outside the cutoff");
    flat = flat * (cutoff + 1) + alpha[k];
  }
  return coeffs[flat];
}

void HermiteExpansion::multi_index(std::size_t flat, std::span<int> alpha) const noexcept {
  for (int k = dim - 1; k >= 0; --k) {
    alpha[k] = static_cast<int>(flat % (cutoff + 1));
    flat /= (cutoff + 1);
  }
}

double HermiteExpansion::coeff_norm_sq() const noexcept {
  double s = 0.0;
  for (const auto& c : coeffs) s += std::norm(c);
  return s;
}

HermiteExpansion expand(const CatalogFunction& f, int cutoff, double tolerance, int nodes) {
  const int d = f.dim();
  check_limits(d, cutoff);
  if (f.kind() == FunctionKind::custom_grid) return expand(*f.custom_samples(), cutoff, tolerance);
  const int n = nodes > 0 ? nodes : 2 * cutoff + 8;
  const GaussHermiteRule rule = gauss_hermite(n);
  const int m = cutoff + 1;

  std::vector<double> table(static_cast<std::size_t>(m) * n);
  std::vector<double> h(m);
  for (int j = 0; j < n; ++j) {
    hermite_all(cutoff, rule.nodes[j], h);
    for (int i = 0; i < m; ++i) table[static_cast<std::size_t>(i) * n + j] = rule.weights[j] * h[i];
  }

  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(n);
  std::vector<cplx> values(total);
  parallel_for(total, [&](std::size_t flat) {
    std::vector<double> x(d);
    std::size_t rest = flat;
    for (int k = d - 1; k >= 0; --k) {
      x[k] = rule.nodes[rest % n];
      rest /= n;
    }
    values[flat] = f.evaluate(x);
  });
  double norm = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    double w = 1.0;
    std::size_t rest = flat;
    for (int k = 0; k < d; ++k) {
      w *= rule.weights[rest % n];
      rest /= n;
    }
    norm += w * std::norm(values[flat]);
  }

  HermiteExpansion e(d, cutoff);
  e.coeffs = contract_axes(std::move(values), d, n, m, table);
  finish(e, norm, tolerance);
  return e;
}

HermiteExpansion expand(const SampledFunction& f, int cutoff, double tolerance) {
  const Grid& g = f.grid;
  if (g.kind() != Grid::Kind::box) throw Error(ErrorCode::invalid_argument, "Hermite projection needs a box grid");
  const int d = g.dim();
  check_limits(d, cutoff);
  const int n = g.points_per_axis();
  const int m = cutoff + 1;
  std::vector<double> table(static_cast<std::size_t>(m) * n);
  std::vector<double> h(m);
  for (int j = 0; j < n; ++j) {
    hermite_all(cutoff, g.node(j), h);
    for (int i = 0; i < m; ++i) table[static_cast<std::size_t>(i) * n + j] = g.axis_weight(j) * h[i];
  }
  HermiteExpansion e(d, cutoff);
  e.coeffs = contract_axes(f.values, d, n, m, table);
  finish(e, norm_sq(f), tolerance);
  return e;
}

SampledFunction reconstruct(const HermiteExpansion& e, const Grid& grid) {
  if (grid.dim() != e.dim) throw Error(ErrorCode::invalid_argument, "grid dimension mismatch");
  const int n = grid.points_per_axis();
  const int m = e.cutoff + 1;
  // Transposed table: n x m.
  std::vector<double> table(static_cast<std::size_t>(n) * m);
  std::vector<double> h(m);
  for (int j = 0; j < n; ++j) {
    hermite_all(e.cutoff, grid.node(j), h);
    for (int i = 0; i < m; ++i) table[static_cast<std::size_t>(j) * m + i] = h[i];
  }
  return SampledFunction(grid, contract_axes(e.coeffs, e.dim, m, n, table));
}

Centering hermite_centering(const HermiteExpansion& e, std::span<const double> L) {
  require_direction(e, L);
  const double norm = e.coeff_norm_sq();
  if (!(norm > 0.0)) throw Error(ErrorCode::zero_norm, "expansion has no nonzero coefficient");
  std::vector<int> alpha(e.dim);
  cplx xs = 0.0, ds = 0.0;
  for (std::size_t flat = 0; flat < e.size(); ++flat) {
    if (e.coeffs[flat] == cplx(0.0)) continue;
    e.multi_index(flat, alpha);
    const Neighbours nb = neighbours(e, L, alpha);
    xs += std::conj(e.coeffs[flat]) * (nb.p + nb.q);
    ds += std::conj(e.coeffs[flat]) * (nb.q - nb.p);
  }
  const double r2 = 1.0 / std::sqrt(2.0);
  Centering c;
  c.alpha_L = (kTwoPi * r2 * xs).real() / norm;
  c.beta_L = (cplx(0.0, 1.0 / kTwoPi) * r2 * ds).real() / norm;
  return c;
}

HermiteSums hermite_sums(const HermiteExpansion& e, std::span<const double> L) {
  require_direction(e, L);
  HermiteSums s;
  const int d = e.dim;
  const int box = e.cutoff + 2;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(box);
  std::vector<int> alpha(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int k = d - 1; k >= 0; --k) {
      alpha[k] = static_cast<int>(rest % box);
      rest /= box;
    }
    const Neighbours nb = neighbours(e, L, alpha);
    s.s_plus += std::norm(nb.p + nb.q);
    s.s_minus += std::norm(nb.p - nb.q);
    s.sum_pq += std::norm(nb.p) + std::norm(nb.q);
  }
  // Coefficients beyond the cutoff carry mass residual * ||f||^2 and enter P and
  // Q with weights at most (N + 2) ||L||^2 each.
  const double tail = std::max(0.0, e.residual) * e.norm_sq;
  s.truncation_bound = 2.0 * (e.cutoff + 2.0) * dot(L, L) * tail;
  return s;
}

HermiteSumFunctional sum_functional_hermite(const HermiteExpansion& e, std::span<const double> L) {
  require_direction(e, L);
  require_centered(e, L);
  const HermiteSums s = hermite_sums(e, L);
  return {s.sum_pq, s.truncation_bound};
}

double up_hermite(const HermiteExpansion& e, std::span<const double> L) {
  require_direction(e, L);
  require_centered(e, L);
  const HermiteSums s = hermite_sums(e, L);
  const double l2 = dot(L, L);
  const double norm = e.coeff_norm_sq();
  return s.s_plus * s.s_minus / (4.0 * l2 * l2 * norm * norm);
}

HermiteReport hermite_report(const HermiteExpansion& e, std::span<const double> L) {
  require_direction(e, L);
  require_centered(e, L);
  const HermiteSums s = hermite_sums(e, L);
  const double l2 = dot(L, L);
  const double norm = e.coeff_norm_sq();
  HermiteReport r;
  r.delta_A = kTwoPi * kTwoPi * s.s_plus / 2.0;
  r.delta_B = s.s_minus / (2.0 * kTwoPi * kTwoPi);
  r.up = s.s_plus * s.s_minus / (4.0 * l2 * l2 * norm * norm);
  r.sum_functional = s.sum_pq / (l2 * norm);
  r.truncation_bound = s.truncation_bound;
  return r;
}

bool odd_symmetry_check(const HermiteExpansion& e) {
  std::vector<int> alpha(e.dim);
  bool any = false;
  for (std::size_t flat = 0; flat < e.size(); ++flat) {
    if (std::abs(e.coeffs[flat]) <= 1e-10) continue;
    any = true;
    e.multi_index(flat, alpha);
    for (int a : alpha)
      if (a % 2 == 0) return false;
  }
  return any;
}

void write_expansion(const std::string& path, const HermiteExpansion& e) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out << std::setprecision(17) << e.dim << ' ' << e.cutoff << ' ' << e.residual << '\n';
  std::vector<int> alpha(e.dim);
  for (std::size_t flat = 0; flat < e.size(); ++flat) {
    if (std::abs(e.coeffs[flat]) <= 1e-12) continue;
    e.multi_index(flat, alpha);
    for (int a : alpha) out << a << ' ';
    out << e.coeffs[flat].real() << ' ' << e.coeffs[flat].imag() << '\n';
  }
}

HermiteExpansion read_expansion(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  int d = 0, n = 0;
  double residual = 0.0;
  if (!(in >> d >> n >> residual)) throw Error(ErrorCode::io, "malformed expansion header in '" + path + "'");
  HermiteExpansion e(d, n);
  e.residual = residual;
  std::vector<int> alpha(d);
  while (true) {
    for (int k = 0; k < d; ++k) {
      if (!(in >> alpha[k])) {
        if (k == 0 && in.eof()) {
          e.norm_sq = e.coeff_norm_sq() / (1.0 - residual);
          return e;
        }
        throw Error(ErrorCode::io, "malformed expansion line in '" + path + "'");
      }
    }
    double re = 0.0, im = 0.0;
    if (!(in >> re >> im)) throw Error(ErrorCode::io, "malformed expansion line in '" + path + "'");
    e[alpha] = {re, im};
  }
}

}  // namespace uplocal
