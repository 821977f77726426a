#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <random>

#include "../oracle.hpp"
#include "uplocal/hermite.hpp"
#include "uplocal/localization.hpp"

using namespace uplocal;

namespace {

Vec random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec v(d);
  double s = 0.0;
  do {
    for (double& x : v) x = n(rng);
    s = norm2(v);
  } while (s < 1e-3);
  for (double& x : v) x /= s;
  return v;
}

HermiteExpansion single(int d, int cutoff, std::vector<int> alpha, cplx value = 1.0) {
  HermiteExpansion e(d, cutoff);
  e[alpha] = value;
  return e;
}

// Real coefficients on even total degree: the expansion is centered along every L.
HermiteExpansion random_centered(std::mt19937_64& rng, int d, int cutoff) {
  std::normal_distribution<double> n(0.0, 1.0);
  HermiteExpansion e(d, cutoff);
  std::vector<int> alpha(d);
  for (std::size_t flat = 0; flat < e.size(); ++flat) {
    e.multi_index(flat, alpha);
    int total = 0;
    for (int a : alpha) total += a;
    if (total % 2 == 0) e.coeffs[flat] = n(rng) / (1.0 + total);
  }
  return e;
}

// Complex coefficients on multi-indices with every entry odd.
HermiteExpansion random_odd(std::mt19937_64& rng, int d, int cutoff) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution keep(0.6);
  HermiteExpansion e(d, cutoff);
  std::vector<int> alpha(d);
  for (std::size_t flat = 0; flat < e.size(); ++flat) {
    e.multi_index(flat, alpha);
    bool odd = true;
    for (int a : alpha) odd = odd && (a % 2 == 1);
    if (odd && keep(rng)) e.coeffs[flat] = cplx(n(rng), n(rng));
  }
  if (e.coeff_norm_sq() == 0.0) e[std::vector<int>(d, 1)] = 1.0;
  return e;
}

}  // namespace

TEST_CASE("Hermite function values") {
  const double zero[] = {0.0};
  CHECK(std::abs(hermite_values(0, zero)[0] - std::pow(kPi, -0.25)) < 1e-15);
  CHECK(std::abs(hermite_values(0, zero)[0] - 0.7511255) < 1e-7);
  CHECK(hermite_values(1, zero)[0] == 0.0);

  const auto rule = gauss_hermite(20);
  const auto h3 = hermite_values(3, rule.nodes);
  double s = 0.0;
  for (std::size_t i = 0; i < h3.size(); ++i) s += rule.weights[i] * h3[i] * h3[i];
  CHECK(std::abs(s - 1.0) < 1e-10);
}

TEST_CASE("Gauss-Hermite rule integrates polynomial times Gaussian exactly") {
  for (int n : {1, 4, 13, 28}) {
    const auto r = gauss_hermite(n);
    for (std::size_t i = 0; i + 1 < r.nodes.size(); ++i) CHECK(r.nodes[i] < r.nodes[i + 1]);
    for (int k = 0; 2 * k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::exp(-r.nodes[i] * r.nodes[i]) * std::pow(r.nodes[i], 2 * k);
      CHECK(std::abs(s - std::tgamma(k + 0.5)) < 1e-11 * std::tgamma(k + 0.5));
    }
  }
  CHECK_THROWS_AS(gauss_hermite(0), Error);
}

TEST_CASE("expand examples") {
  const auto e = expand(CatalogFunction::hermite_pure({0, 0}), 6);
  const std::array<int, 2> zero = {0, 0};
  CHECK(std::abs(e.at(zero) - 1.0) < 1e-12);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(std::abs(e.coeffs[i]) < 1e-10);
  CHECK(e.residual < 1e-12);

  // gaussian_diag(1/2) is exactly h_0.
  const auto g = expand(CatalogFunction::gaussian_diag({0.5}), 8);
  CHECK(std::abs(g.coeffs[0] - 1.0) < 1e-12);

  const auto f = CatalogFunction::gaussian_diag({1.0});
  const auto n = expand(f, 16);
  for (int k = 0; k <= 16; ++k) {
    const double ref = oracle::integrate_1d(
        [&](double x) { return std::pow(2.0 / kPi, 0.25) * std::exp(-x * x) * oracle::hermite_function_direct(k, x); },
        -12, 12, 96);
    CHECK(std::abs(n.coeffs[k].real() - ref) < 1e-10);
    if (k % 2 == 1) CHECK(std::abs(n.coeffs[k]) < 1e-12);
  }
}

TEST_CASE("sampled projection matches the catalog projection") {
  const auto f = CatalogFunction::hermite_pure({2, 1});
  const auto a = expand(f, 6);
  const auto b = expand(sample(f, Grid::box(2, 10.0, 257)), 6);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.coeffs[i] - b.coeffs[i]) < 1e-10);
  const auto r = reconstruct(a, Grid::box(2, 10.0, 65));
  const auto s = sample(f, r.grid);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(r.values[i] - s.values[i]) < 1e-12);
}

TEST_CASE("sum_functional_hermite examples") {
  const double one[] = {1.0};
  const auto v0 = sum_functional_hermite(single(1, 4, {0}), one);
  CHECK(std::abs(v0.value - 1.0) < 1e-14);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(sum_functional_hermite(single(2, 4, {1, 1}), random_unit(rng, 2)).value - 3.0) < 1e-14);
  }
}

TEST_CASE("up_hermite examples") {
  const double one[] = {1.0};
  CHECK(std::abs(up_hermite(single(1, 4, {0}), one) - 0.25) < 1e-14);
  CHECK(std::abs(up_hermite(single(1, 4, {1}), one) - 2.25) < 1e-14);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(up_hermite(single(2, 4, {1, 1}), random_unit(rng, 2)) - 2.25) < 1e-14);
  const auto r = hermite_report(single(1, 4, {0}), one);
  CHECK(std::abs(r.delta_A - kPi * kPi * 2.0) < 1e-12);  // ||2 pi x h_0||^2 = 4 pi^2 / 2
  CHECK(std::abs(r.up - 0.25) < 1e-14);
}

TEST_CASE("odd_symmetry_check examples") {
  CHECK(odd_symmetry_check(single(2, 4, {1, 1})));
  CHECK_FALSE(odd_symmetry_check(single(1, 4, {0})));
  CHECK_FALSE(odd_symmetry_check(HermiteExpansion(2, 3)));
  auto e = single(2, 4, {1, 1}, 0.8);
  e[std::vector<int>{3, 1}] = 0.6;
  CHECK(odd_symmetry_check(e));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) CHECK(up_hermite(e, random_unit(rng, 2)) >= 2.25 - 1e-12);
}

TEST_CASE("coefficient sums agree with quadrature on the reconstructed function") {
  std::mt19937_64 rng(19);
  const Grid g = Grid::box(2, 10.0, 256);
  for (int trial = 0; trial < 4; ++trial) {
    const auto e = random_centered(rng, 2, 6);
    const auto f = reconstruct(e, g);
    const auto F = continuous_ft(f);
    const double norm = e.coeff_norm_sq();
    for (int k = 0; k < 3; ++k) {
      const Vec L = random_unit(rng, 2);
      const auto rep = up_directional(f, F, L);
      const auto sf = sum_functional_hermite(e, L);
      CHECK(std::abs(sf.value - rep.sum_functional * norm) < 1e-6);
      CHECK(std::abs(up_hermite(e, L) - rep.up) < 1e-6);
      const auto hr = hermite_report(e, L);
      CHECK(std::abs(hr.delta_A - rep.delta_A) < 1e-6 * (1 + rep.delta_A));
      CHECK(std::abs(hr.delta_B - rep.delta_B) < 1e-6 * (1 + rep.delta_B));
    }
  }
}

TEST_CASE("coefficient and moment routes agree on catalog functions") {
  const std::vector<CatalogFunction> fns = {
      CatalogFunction::gaussian_diag({0.4, 0.7}), CatalogFunction::gaussian_diag({0.6}),
      CatalogFunction::parse("gaussian_directional:0.6,0.8|39.47841760435743|0.5|1@0;0.3@2"),
      CatalogFunction::hermite_pure({1, 1}), CatalogFunction::hermite_pure({2, 1})};
  std::mt19937_64 rng(23);
  for (const auto& f : fns) {
    CAPTURE(f.name());
    const auto e = expand(f, 10);
    CHECK(e.residual < 1e-8);
    const auto m = moments(f);
    for (int i = 0; i < 20; ++i) {
      const Vec L = random_unit(rng, f.dim());
      CHECK(std::abs(up_hermite(e, L) - up_directional(m, L).up) < 1e-5);
    }
  }
}

TEST_CASE("lower-bound chain and Bessel inequality") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 3;
    const auto e = random_centered(rng, d, d == 3 ? 4 : 7);
    const Vec L = random_unit(rng, d);
    const auto sf = sum_functional_hermite(e, L);
    CHECK(sf.value >= dot(L, L) * e.coeff_norm_sq() - sf.truncation_bound - 1e-12);
  }
  for (const auto& f : {CatalogFunction::gaussian_diag({1.0, 0.7}), CatalogFunction::hermite_pure({3, 2}),
                        CatalogFunction::gaussian_diag({0.5, 0.6, 0.8})}) {
    const auto e = expand(f, 10);
    CHECK(e.coeff_norm_sq() <= e.norm_sq * (1 + 1e-8));
  }
}

TEST_CASE("odd-support expansions obey the 9/4 bound") {
  std::mt19937_64 rng(37);
  double worst = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const auto e = random_odd(rng, d, d == 3 ? 5 : 9);
    REQUIRE(odd_symmetry_check(e));
    const Vec L = random_unit(rng, d);
    const double up = up_hermite(e, L);
    worst = std::min(worst, up);
    CHECK(up >= 2.25 - 1e-5);

    // Neighbours of any alpha along two different axes cannot both be present.
    std::vector<int> alpha(d), a1(d), a2(d);
    for (std::size_t flat = 0; flat < e.size(); ++flat) {
      e.multi_index(flat, alpha);
      for (int n = 0; n < d; ++n) {
        for (int k = n + 1; k < d; ++k) {
          a1 = alpha;
          a2 = alpha;
          a1[n] -= 1;
          a2[k] -= 1;
          if (a1[n] < 0 || a2[k] < 0) continue;
          CHECK(std::abs(e.at(a1) * e.at(a2)) == 0.0);
        }
      }
    }
  }
  CHECK(worst >= 2.25 - 1e-5);
}

TEST_CASE("centering is enforced") {
  HermiteExpansion e(1, 4);
  e[std::vector<int>{0}] = 1.0;
  e[std::vector<int>{1}] = 1.0;
  const double one[] = {1.0};
  const auto c = hermite_centering(e, one);
  CHECK(std::abs(c.alpha_L - kTwoPi * std::sqrt(0.5)) < 1e-12);
  try {
    up_hermite(e, one);
    FAIL("expected centering_violated");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::centering_violated);
  }
  CHECK_THROWS_AS(sum_functional_hermite(e, one), Error);

  HermiteExpansion m(1, 4);
  m[std::vector<int>{0}] = 1.0;
  m[std::vector<int>{1}] = cplx(0.0, 1.0);
  const auto cm = hermite_centering(m, one);
  CHECK(std::abs(cm.alpha_L) < 1e-14);
  CHECK(std::abs(cm.beta_L) > 1e-3);
}

TEST_CASE("expansion dump round trip") {
  std::mt19937_64 rng(41);
  const auto e = random_odd(rng, 2, 7);
  const auto path = (std::filesystem::temp_directory_path() / "uplocal_test_expansion.txt").string();
  write_expansion(path, e);
  const auto r = read_expansion(path);
  CHECK(r.dim == e.dim);
  CHECK(r.cutoff == e.cutoff);
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(r.coeffs[i] == e.coeffs[i]);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_expansion(path), Error);
}

TEST_CASE("tail tolerance and limits") {
  try {
    expand(CatalogFunction::example1(), 4);
    FAIL("expected tail_tolerance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::tail_tolerance);
  }
  CHECK_THROWS_AS(expand(CatalogFunction::gaussian_diag({1.0}), 17), Error);
  try {
    expand(CatalogFunction::gaussian_diag({1, 1, 1, 1}), 2);
    FAIL("expected unsupported_dimension");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_dimension);
  }
}
