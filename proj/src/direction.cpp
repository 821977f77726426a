#include "uplocal/direction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uplocal {

namespace {

void check_vanishing(double value, double scale, double tolerance, const std::string& what) {
  if (std::abs(value) > tolerance * scale) {
    std::ostringstream os;
    os << what << " = " << value << " does not vanish (scale " << scale << ")";
    throw Error(ErrorCode::symmetry_violation, os.str());
  }
}

bool lex_less(const Vec& a, const Vec& b) { return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()); }

}  // namespace

MatrixSym build_A_matrix(const MomentSet& m, double tolerance) {
  const int d = m.dim;
  const double N = m.norm_sq;
  for (int k = 0; k < d; ++k) {
    check_vanishing(m.mean_time[k], std::sqrt(m.second_time(k, k) * N), tolerance,
                    "first time moment " + std::to_string(k + 1));
    check_vanishing(m.mean_freq[k], std::sqrt(m.second_freq(k, k) * N), tolerance,
                    "first frequency moment " + std::to_string(k + 1));
    for (int n = k + 1; n < d; ++n) {
      check_vanishing(m.second_time(k, n), std::sqrt(m.second_time(k, k) * m.second_time(n, n)), tolerance,
                      "mixed time moment " + std::to_string(k + 1) + "," + std::to_string(n + 1));
      check_vanishing(m.second_freq(k, n), std::sqrt(m.second_freq(k, k) * m.second_freq(n, n)), tolerance,
                      "mixed frequency moment " + std::to_string(k + 1) + "," + std::to_string(n + 1));
    }
  }
  MatrixSym A(d);
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k) A.set(j, k, (m.M[k] * m.M_hat[j] + m.M[j] * m.M_hat[k]) / (2.0 * N * N));
  return A;
}

CandidateSet extremal_directions(const MatrixSym& A) {
  const int d = A.dim();
  if (d < 1) throw Error(ErrorCode::invalid_argument, "empty matrix");
  CandidateSet set;
  auto add = [&](Vec v, std::vector<int> removed) {
    for (const auto& c : set.candidates) {
      double diff = 0.0;
      for (int k = 0; k < d; ++k) diff = std::max(diff, std::abs(c.v[k] - v[k]));
      if (diff < 1e-9) return;
    }
    Candidate c;
    c.direction.resize(d);
    for (int k = 0; k < d; ++k) c.direction[k] = std::sqrt(v[k]);
    c.up_value = A.quadratic_form(v);
    c.v = std::move(v);
    c.removed = std::move(removed);
    set.candidates.push_back(std::move(c));
  };

  const unsigned full = (1u << d) - 1;
  for (unsigned removed_mask = 0; removed_mask < full; ++removed_mask) {
    std::vector<int> keep, removed;
    for (int k = 0; k < d; ++k) (removed_mask >> k & 1u ? removed : keep).push_back(k);
    const MatrixSym B = A.principal(keep);
    const Vec E(keep.size(), 1.0);
    const LinearSolve s = solve_and_det(B, E);
    if (s.singular) continue;
    double total = 0.0;
    for (double y : s.solution) total += y;
    if (std::abs(total) < 1e-300) continue;
    Vec v(d, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const double vi = s.solution[i] / total;
      if (vi < -1e-12) feasible = false;
      v[keep[i]] = std::max(0.0, vi);
    }
    if (feasible) add(std::move(v), std::move(removed));
  }
  for (int k = 0; k < d; ++k) {
    Vec v(d, 0.0);
    v[k] = 1.0;
    std::vector<int> removed;
    for (int j = 0; j < d; ++j)
      if (j != k) removed.push_back(j);
    add(std::move(v), std::move(removed));
  }

  for (std::size_t i = 1; i < set.candidates.size(); ++i) {
    const auto& c = set.candidates[i];
    const auto& lo = set.candidates[set.min_index];
    const auto& hi = set.candidates[set.max_index];
    if (c.up_value < lo.up_value || (c.up_value == lo.up_value && lex_less(c.direction, lo.direction))) {
      set.min_index = i;
    }
    if (c.up_value > hi.up_value || (c.up_value == hi.up_value && lex_less(c.direction, hi.direction))) {
      set.max_index = i;
    }
  }
  return set;
}

MatrixSym build_M_matrix(const MomentSet& m) {
  const int d = m.dim;
  const double N = m.norm_sq;
  MatrixSym M(d);
  for (int k = 0; k < d; ++k) {
    for (int n = k; n < d; ++n) {
      const double ct = m.second_time(k, n) - m.mean_time[k] * m.mean_time[n] / N;
      const double cf = m.second_freq(k, n) - m.mean_freq[k] * m.mean_freq[n] / N;
      M.set(k, n, (ct + kTwoPi * kTwoPi * cf) / N);
    }
  }
  return M;
}

SumFunctionalExtremes optimize_sum_functional(const MatrixSym& M) {
  const auto eig = sym_eig(M);
  SumFunctionalExtremes r;
  r.min = {eig.front().value, eig.front().vector};
  r.max = {eig.back().value, eig.back().vector};
  r.isotropic = r.max.value - r.min.value < 1e-8 * std::abs(r.max.value);
  return r;
}

std::vector<Vec> sphere_directions(int dim, int resolution) {
  if (resolution < 1) throw Error(ErrorCode::invalid_argument, "resolution must be positive");
  std::vector<Vec> dirs;
  dirs.reserve(resolution);
  if (dim == 2) {
    for (int j = 0; j < resolution; ++j) {
      const double t = kTwoPi * j / resolution;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
  } else if (dim == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    // Pole-inclusive Fibonacci lattice: z runs from 1 to -1 in equal steps.
    for (int j = 0; j < resolution; ++j) {
      const double z = resolution == 1 ? 1.0 : 1.0 - 2.0 * j / (resolution - 1);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * j;
      dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
  } else {
    throw Error(ErrorCode::unsupported_dimension, "sphere_bruteforce supports d = 2 and d = 3");
  }
  return dirs;
}

BruteForceResult sphere_bruteforce(int dim, int resolution,
                                   const std::function<double(std::span<const double>)>& objective) {
  const auto dirs = sphere_directions(dim, resolution);
  Vec values(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t i) { values[i] = objective(dirs[i]); });

  BruteForceResult r;
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[lo]) lo = i;
    if (values[i] > values[hi]) hi = i;
  }
  r.min = values[lo];
  r.max = values[hi];
  r.argmin = dirs[lo];
  r.argmax = dirs[hi];

  if (dim == 2) {
    double step = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      step = std::max(step, std::abs(values[(i + 1) % values.size()] - values[i]));
    }
    r.resolution_bound = step;
  } else {
    // Tangential finite-difference gradient on a subsample, times the lattice spacing.
    const double delta = std::sqrt(4.0 * kPi / resolution);
    const std::size_t stride = std::max<std::size_t>(1, dirs.size() / 512);
    const double eps = 1e-4;
    double grad = 0.0;
    for (std::size_t i = 0; i < dirs.size(); i += stride) {
      const Vec& p = dirs[i];
      Vec t1 = std::abs(p[2]) < 0.9 ? Vec{-p[1], p[0], 0.0} : Vec{0.0, -p[2], p[1]};
      const double n1 = norm2(t1);
      for (double& v : t1) v /= n1;
      const Vec t2 = {p[1] * t1[2] - p[2] * t1[1], p[2] * t1[0] - p[0] * t1[2], p[0] * t1[1] - p[1] * t1[0]};
      double g2 = 0.0;
      for (const Vec* t : {static_cast<const Vec*>(&t1), &t2}) {
        Vec a(3), b(3);
        for (int k = 0; k < 3; ++k) {
          a[k] = p[k] + eps * (*t)[k];
          b[k] = p[k] - eps * (*t)[k];
        }
        const double na = norm2(a), nb = norm2(b);
        for (int k = 0; k < 3; ++k) {
          a[k] /= na;
          b[k] /= nb;
        }
        const double g = (objective(a) - objective(b)) / (2.0 * eps);
        g2 += g * g;
      }
      grad = std::max(grad, std::sqrt(g2));
    }
    r.resolution_bound = grad * delta;
  }
  return r;
}

BruteForceResult sphere_bruteforce(const MomentSet& m, int resolution, SphereObjective objective) {
  if (objective == SphereObjective::up) {
    return sphere_bruteforce(m.dim, resolution, [&m](std::span<const double> L) { return up_directional(m, L).up; });
  }
  return sphere_bruteforce(m.dim, resolution,
                           [&m](std::span<const double> L) { return up_directional(m, L).sum_functional; });
}

}  // namespace uplocal
