#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "../oracle.hpp"
#include "uplocal/functions.hpp"

using namespace uplocal;

namespace {

std::vector<CatalogFunction> catalog() {
  return {CatalogFunction::gaussian_diag({1.0}),
          CatalogFunction::gaussian_diag({1.0, 4.0}),
          CatalogFunction::gaussian_diag({1.0, 2.0, 8.0}),
          CatalogFunction::parse("gaussian_directional:0.6,0.8|2|0.5|1@0;0.3@2"),
          CatalogFunction::example1(),
          CatalogFunction::example2(),
          CatalogFunction::parse("indicator_poly:1@1;0.5@3"),
          CatalogFunction::hermite_pure({1, 1}),
          CatalogFunction::hermite_pure({2, 0})};
}

// Box samples with the boundary nodes of [-1,1]^d scaled by 1/2 per boundary axis.
SampledFunction sample_midpoint(const CatalogFunction& f, const Grid& g) {
  auto s = sample(f, g);
  Vec x(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    for (double t : x)
      if (std::abs(std::abs(t) - 1.0) < 1e-12) s.values[i] *= 0.5;
  }
  return s;
}

}  // namespace

TEST_CASE("evaluate examples") {
  const double p[] = {0.5, 0.5};
  CHECK(std::abs(CatalogFunction::example1().evaluate(p) - 0.375) < 1e-15);

  for (int d = 1; d <= 3; ++d) {
    const Vec zero(d, 0.0);
    CHECK(std::abs(CatalogFunction::gaussian_diag(Vec(d, 1.0)).evaluate(zero) - std::pow(2.0 / kPi, d / 4.0)) < 1e-15);
  }
  const double outside[] = {2.0, 1.0};
  CHECK(CatalogFunction::example2().evaluate(outside) == cplx(0.0));
}

TEST_CASE("exact_ft examples") {
  const auto g = CatalogFunction::gaussian_diag({1.0});
  const double zero[] = {0.0};
  CHECK(std::abs(g.exact_ft(zero) - std::pow(kTwoPi, 0.25)) < 1e-14);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double xi[] = {u(rng)};
    const double mxi[] = {-xi[0]};
    CHECK(std::abs(std::abs(g.exact_ft(xi)) - std::abs(g.exact_ft(mxi))) < 1e-15);
  }

  const double one[] = {1.0, 1.0};
  const auto direct = oracle::integrate_2d(
      [](double x, double y) { return 1.5 * x * y * std::exp(oracle::cplx(0, -2 * oracle::pi * (x + y))); }, -1, 1);
  CHECK(std::abs(CatalogFunction::example1().exact_ft(one) - direct) < 1e-4);

  const double xi2[] = {0.3, -0.7};
  const auto direct2 = oracle::integrate_2d(
      [&](double x, double y) {
        return std::sqrt(21.0) / 2 * x * x * x * y * std::exp(oracle::cplx(0, -2 * oracle::pi * (0.3 * x - 0.7 * y)));
      },
      -1, 1);
  CHECK(std::abs(CatalogFunction::example2().exact_ft(xi2) - direct2) < 1e-10);
}

TEST_CASE("exact_ft unavailable for gaussian_directional") {
  const auto f = CatalogFunction::parse("gaussian_directional:1,0|1|1");
  CHECK_FALSE(f.has_exact_ft());
  const double xi[] = {0.0, 0.0};
  try {
    (void)f.exact_ft(xi);
    FAIL("expected ft_unavailable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ft_unavailable);
  }
}

TEST_CASE("exact_ft agrees with continuous_ft at random frequencies") {
  std::mt19937_64 rng(11);
  for (const auto& f : catalog()) {
    if (!f.has_exact_ft() || f.dim() > 2) continue;
    CAPTURE(f.name());
    const bool compact = f.compact_support();
    const Grid g = compact ? Grid::box(f.dim(), 2.0, 1025) : f.recommended_grid();
    const auto F = continuous_ft(compact ? sample_midpoint(f, g) : sample(f, g));
    const int n = F.grid.points_per_axis();
    // Compactly supported transforms decay like 1/|xi|; stay within the low band.
    const int band = compact ? 8 : n / 4;
    std::uniform_int_distribution<int> off(-band, band);
    double err = 0.0;
    Vec xi(f.dim());
    std::vector<int> idx(f.dim());
    for (int trial = 0; trial < 100; ++trial) {
      std::size_t flat = 0;
      for (int k = 0; k < f.dim(); ++k) flat = flat * n + static_cast<std::size_t>(n / 2 + off(rng));
      F.grid.point(flat, xi);
      err = std::max(err, std::abs(F.values[flat] - f.exact_ft(xi)));
    }
    CHECK(err < (compact ? 1e-4 : 1e-6));
  }
}

TEST_CASE("declared symmetry flags hold numerically") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const auto& f : catalog()) {
    CAPTURE(f.name());
    for (int trial = 0; trial < 100; ++trial) {
      Vec x(f.dim());
      for (double& v : x) v = u(rng);
      const cplx fx = f.evaluate(x);
      for (int k = 0; k < f.dim(); ++k) {
        Vec y = x;
        y[k] = -y[k];
        const cplx fy = f.evaluate(y);
        if (f.even_per_axis()) CHECK(std::abs(std::abs(fx) - std::abs(fy)) < 1e-12);
        if (f.odd_per_axis()) CHECK(std::abs(fx + fy) < 1e-12);
      }
    }
  }
  CHECK(CatalogFunction::gaussian_diag({1.0, 4.0}).even_per_axis());
  CHECK(CatalogFunction::example1().odd_per_axis());
  CHECK(CatalogFunction::example1().even_per_axis());
  CHECK(CatalogFunction::hermite_pure({1, 3}).odd_per_axis());
  CHECK_FALSE(CatalogFunction::hermite_pure({1, 2}).odd_per_axis());
}

TEST_CASE("gaussian_directional with constant profile is a rotated gaussian_diag") {
  const Vec L = {0.6, 0.8};
  const double mu = 2.0, nu = 0.5;
  const auto dir = CatalogFunction::gaussian_directional(L, mu, nu, Polynomial::constant(1, 1.0));
  const Vec a = {2.0 * kPi * kPi / mu, nu};
  Transform t;
  t.rotation = {L[0], L[1], L[1], -L[0]};
  const auto rot = CatalogFunction::gaussian_diag(a).transformed(t);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double zero[] = {0.0, 0.0};
  const cplx ratio0 = dir.evaluate(zero) / rot.evaluate(zero);
  for (int i = 0; i < 100; ++i) {
    const double x[] = {u(rng), u(rng)};
    CHECK(std::abs(dir.evaluate(x) / rot.evaluate(x) - ratio0) < 1e-10 * std::abs(ratio0));
  }
}

TEST_CASE("directional derivative examples") {
  const auto e1 = CatalogFunction::example1();
  const Grid g = e1.recommended_grid();
  const double a = 0.6, b = 0.8;
  const double L[] = {a, b};
  const auto d = directional_derivative(e1, L, g);
  Vec x(2);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    if (std::abs(x[0]) >= 1.0 || std::abs(x[1]) >= 1.0) continue;
    err = std::max(err, std::abs(d.values[i] - 1.5 * (a * x[1] + b * x[0])));
  }
  CHECK(err < 1e-12);

  const auto e2 = CatalogFunction::example2();
  const double e[] = {1.0, 0.0};
  const auto d2 = directional_derivative(e2, e, g);
  err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.point(i, x);
    if (std::abs(x[0]) >= 1.0 || std::abs(x[1]) >= 1.0) continue;
    err = std::max(err, std::abs(d2.values[i] - std::sqrt(21.0) / 2 * 3 * x[0] * x[0] * x[1]));
  }
  CHECK(err < 1e-12);

  const auto gs = CatalogFunction::gaussian_diag({1.0});
  const Grid g1 = Grid::box(1, 8.0, 512);
  const double one[] = {1.0};
  const auto dg = directional_derivative(gs, one, g1);
  const auto s = sample(gs, g1);
  err = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) err = std::max(err, std::abs(dg.values[i] + 2 * g1.node(i) * s.values[i]));
  CHECK(err < 1e-8);

  // Sampled route: spectral differentiation.
  const auto ds = directional_derivative(s, one);
  err = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) err = std::max(err, std::abs(ds.values[i] - dg.values[i]));
  CHECK(err < 1e-8);
}

TEST_CASE("exact gradients match central differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  const double h = 1e-6;
  for (const auto& f : catalog()) {
    CAPTURE(f.name());
    for (int trial = 0; trial < 10; ++trial) {
      Vec x(f.dim());
      for (double& v : x) v = u(rng);
      std::vector<cplx> grad(f.dim());
      f.gradient(x, grad);
      for (int k = 0; k < f.dim(); ++k) {
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const cplx fd = (f.evaluate(xp) - f.evaluate(xm)) / (2 * h);
        CHECK(std::abs(grad[k] - fd) < 1e-6 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST_CASE("transformed functions: values, transform and gradient") {
  const auto base = CatalogFunction::hermite_pure({1, 2});
  Transform t;
  t.amplitude = cplx(0.5, 0.5);
  t.scale = 1.3;
  t.shift = {0.2, -0.4};
  t.modulation = {0.7, 0.1};
  const double c = std::cos(0.4), s = std::sin(0.4);
  t.rotation = {c, -s, s, c};
  const auto f = base.transformed(t);
  CHECK_FALSE(f.transform().is_identity());

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 20; ++i) {
    const Vec x = {u(rng), u(rng)};
    const Vec y = {t.scale * (c * x[0] - s * x[1]) - t.shift[0], t.scale * (s * x[0] + c * x[1]) - t.shift[1]};
    const cplx phase = std::exp(cplx(0, kTwoPi * (t.modulation[0] * x[0] + t.modulation[1] * x[1])));
    CHECK(std::abs(f.evaluate(x) - t.amplitude * phase * base.evaluate(y)) < 1e-13);
  }

  const Grid g = f.recommended_grid();
  const auto F = continuous_ft(sample(f, g));
  const int n = F.grid.points_per_axis();
  std::uniform_int_distribution<int> off(-n / 8, n / 8);
  Vec xi(2);
  double err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t flat = static_cast<std::size_t>(n / 2 + off(rng)) * n + (n / 2 + off(rng));
    F.grid.point(flat, xi);
    err = std::max(err, std::abs(F.values[flat] - f.exact_ft(xi)));
  }
  CHECK(err < 1e-6);

  const Vec x = {0.3, -0.2};
  std::vector<cplx> grad(2);
  f.gradient(x, grad);
  for (int k = 0; k < 2; ++k) {
    Vec xp = x, xm = x;
    xp[k] += 1e-6;
    xm[k] -= 1e-6;
    CHECK(std::abs(grad[k] - (f.evaluate(xp) - f.evaluate(xm)) / 2e-6) < 1e-6);
  }
}

TEST_CASE("recommended grids hold the unit norm") {
  for (const auto& f : catalog()) {
    CAPTURE(f.name());
    const Grid g = f.recommended_grid();
    const double n = norm_sq(sample(f, g));
    if (f.kind() == FunctionKind::gaussian_directional || f.kind() == FunctionKind::indicator_poly) {
      CHECK(n > 0.0);
    } else {
      CHECK(std::abs(n - 1.0) < (f.compact_support() ? 1e-4 : 1e-8));
    }
  }
}

TEST_CASE("polynomial parsing and evaluation") {
  const auto p = Polynomial::parse("1.5@1,1;-2@0,2;0.25@", 2);
  CHECK(p.dim == 2);
  CHECK(p.total_degree() == 2);
  const double x[] = {2.0, 3.0};
  CHECK(p.evaluate(x) == doctest::Approx(1.5 * 6 - 2 * 9 + 0.25));
  double g[2];
  p.gradient(x, g);
  CHECK(g[0] == doctest::Approx(1.5 * 3));
  CHECK(g[1] == doctest::Approx(1.5 * 2 - 4 * 3));
  CHECK(p.uniform_parity(0) == false);
  CHECK(Polynomial::parse("1@1,3;2@3,1").all_odd());

  const auto q = Polynomial::parse(p.to_string());
  CHECK(q.evaluate(x) == doctest::Approx(p.evaluate(x)));

  const auto c = Polynomial::parse("1@0;0.3@2", 1);
  CHECK(c.dim == 1);
  CHECK_THROWS_AS(Polynomial::parse(""), Error);
  CHECK_THROWS_AS(Polynomial::parse("1@1;2@1,1"), Error);
  CHECK_THROWS_AS(Polynomial::parse("x@1"), Error);
  CHECK_THROWS_AS(Polynomial::parse("1@-1"), Error);
}

TEST_CASE("catalog parsing and validation") {
  CHECK(CatalogFunction::parse("gaussian_diag:1,4").dim() == 2);
  CHECK(CatalogFunction::parse("example1").kind() == FunctionKind::example1);
  CHECK(CatalogFunction::parse("hermite_pure:1,1").kind() == FunctionKind::hermite_pure);
  CHECK(CatalogFunction::parse("indicator_poly:1.5@1,1").compact_support());
  CHECK(CatalogFunction::parse("gaussian_directional:0.6,0.8|1|0.5").admissible());
  try {
    CatalogFunction::parse("lorentzian:1");
    FAIL("expected unknown_function");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unknown_function);
  }
  CHECK_THROWS_AS(CatalogFunction::gaussian_diag({1.0, 0.0}), Error);
  CHECK_THROWS_AS(CatalogFunction::parse("gaussian_directional:1,1|1|1"), Error);
  CHECK_THROWS_AS(CatalogFunction::parse("gaussian_directional:1,0|0|1"), Error);
  CHECK_FALSE(CatalogFunction::example1().admissible());
}

TEST_CASE("direction validation") {
  const Direction d({3.0, 4.0});
  CHECK(d.norm() == doctest::Approx(5.0));
  CHECK(d.is_integer());
  CHECK(std::abs(d.unit().norm() - 1.0) < 1e-12);
  CHECK_FALSE(Direction({0.5, 1.0}).is_integer());
  try {
    Direction({0.0, 0.0});
    FAIL("expected zero_direction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_direction);
  }
}

TEST_CASE("custom grid files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "uplocal_test_functions";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "g.txt").string();
  const auto f = CatalogFunction::gaussian_diag({1.0, 4.0});
  const auto s = sample(f, Grid::box(2, 6.0, 64));
  write_custom_grid(path, s, true);
  bool normalized = false;
  const auto r = read_custom_grid(path, &normalized);
  CHECK(normalized);
  CHECK(r.grid == s.grid);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(r.values[i] == s.values[i]);

  const auto c = CatalogFunction::parse("custom_grid:" + path);
  CHECK(c.kind() == FunctionKind::custom_grid);
  CHECK_FALSE(c.has_exact_ft());
  CHECK(sample(c, s.grid).values == s.values);

  auto scaled = s;
  for (auto& v : scaled.values) v *= 2.0;
  CHECK_THROWS_AS(CatalogFunction::custom_grid(scaled, true), Error);
  try {
    read_custom_grid((dir / "missing.txt").string());
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("Hermite functions match the explicit polynomial form") {
  for (int k = 0; k <= 10; ++k) {
    for (double y : {-3.1, -0.7, 0.0, 0.4, 2.2}) {
      CHECK(std::abs(hermite_function(k, y) - oracle::hermite_function_direct(k, y)) < 1e-12);
    }
  }
  std::vector<double> all(6);
  hermite_all(5, 0.8, all);
  for (int k = 0; k <= 5; ++k) CHECK(all[k] == doctest::Approx(hermite_function(k, 0.8)));
}
