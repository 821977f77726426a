#include <doctest.h>

#include <cmath>

#include "../oracle.hpp"
#include "uplocal/periodization.hpp"

using namespace uplocal;

namespace {

// Unit-norm e^{-x^2} evaluated without the library.
double unit_gaussian(double x) { return std::pow(2.0 / oracle::pi, 0.25) * std::exp(-x * x); }

double periodized_norm_oracle(double lambda, int K) {
  return oracle::integrate_1d(
      [&](double x) {
        double s = 0.0;
        for (int k = -K; k <= K; ++k) s += std::sqrt(lambda) * unit_gaussian(lambda * (x + k));
        return s * s;
      },
      -0.5, 0.5, 128);
}

}  // namespace

TEST_CASE("periodized norm at lambda = 1 counts overlapping translates") {
  PeriodizeOptions opt;
  opt.truncation = 6;
  const auto p = periodize(CatalogFunction::gaussian_diag({1.0}), 1.0, opt);
  CHECK(p.truncation == 6);
  CHECK(p.samples.grid.periodic());
  const double n = norm_sq(p.samples);
  CHECK(std::abs(n - periodized_norm_oracle(1.0, 6)) < 1e-10);
  // Translates overlap: sum_m e^{-m^2/2}.
  double s = 0.0;
  for (int m = -20; m <= 20; ++m) s += std::exp(-0.5 * m * m);
  CHECK(std::abs(n - s) < 1e-8);
  CHECK(p.tail_bound < 1e-8 * n);

  const auto q = periodize(CatalogFunction::gaussian_diag({1.0}), 8.0);
  CHECK(std::abs(norm_sq(q.samples) - 1.0) < 1e-6);
}

TEST_CASE("far translates are negligible at lambda = 32") {
  const double lambda = 32.0;
  const auto p = periodize(CatalogFunction::gaussian_diag({1.0}), lambda);
  double sup = 0.0;
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    const double x = p.samples.grid.node(static_cast<int>(i));
    sup = std::max(sup, std::abs(p.samples.values[i] - std::sqrt(lambda) * unit_gaussian(lambda * x)));
  }
  CHECK(sup < 1e-8);
}

TEST_CASE("periodized even function is symmetric") {
  PeriodizeOptions opt;
  opt.truncation = 4;
  const auto p = periodize(CatalogFunction::gaussian_diag({1.0, 1.0}), 4.0, opt);
  const int n = p.samples.grid.points_per_axis();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto a = p.samples.values[static_cast<std::size_t>(i) * n + j];
      const auto b = p.samples.values[static_cast<std::size_t>((n - i) % n) * n + (n - j) % n];
      CHECK(std::abs(a - b) < 1e-12);
    }
  }
}

TEST_CASE("grid doubling leaves the torus norm unchanged") {
  for (double lambda : {1.0, 2.0, 4.0}) {
    for (const auto& f : {CatalogFunction::gaussian_diag({1.0}), CatalogFunction::gaussian_diag({1.0, 4.0})}) {
      const auto p = periodize(f, lambda);
      PeriodizeOptions opt;
      opt.points_per_axis = 2 * p.samples.grid.points_per_axis();
      const auto q = periodize(f, lambda, opt);
      CHECK(std::abs(norm_sq(p.samples) - norm_sq(q.samples)) < 1e-8);
    }
  }
}

TEST_CASE("scaling identities of the periodized unit Gaussian") {
  const auto f = CatalogFunction::gaussian_diag({1.0});
  const double L[] = {1.0};
  const auto m = moments(f);
  const double lambda = 16.0;
  const auto p = periodize(f, lambda);
  CHECK(std::abs(norm_sq(p.samples) - 1.0) < 1e-3);

  // lambda^-2 ||B_L f_lambda||^2 -> ||B_L f||^2 = Delta_B for a centered function.
  const auto d = spectral_directional_derivative(p.samples, L);
  const double b = norm_sq(d) / (kTwoPi * kTwoPi) / (lambda * lambda);
  CHECK(std::abs(b - variance_B(m, L)) < 1e-3);

  // lambda M_L(f_lambda) -> i <A_L f, f> = 0 for the centered Gaussian.
  CHECK(std::abs(lambda * m_functional(p.samples, L)) < 1e-3);

  // Shifted copy: the limit 2 pi i x0 is approached with the cubic Taylor term of
  // sin as leading error, (2 pi)^3 / 6 (x0^3 + 3 x0 / (4 a)) / lambda^2.
  const double x0 = 0.3;
  Transform t;
  t.shift = {x0};
  const auto fs = f.transformed(t);
  double prev_shift = 0.0;
  for (double lam : {8.0, 16.0, 32.0}) {
    const cplx mean = lam * m_functional(periodize(fs, lam).samples, L);
    CHECK(std::abs(mean.real()) < 1e-12);
    const double err = std::abs(mean.imag() - kTwoPi * x0);
    const double lead = std::pow(kTwoPi, 3) / 6 * (x0 * x0 * x0 + 3 * x0 / 4) / (lam * lam);
    CHECK(std::abs(err - lead) < 0.1 * lead);
    if (prev_shift > 0.0) CHECK(err < prev_shift / 3.5);
    prev_shift = err;
  }

  // 2 lambda^2 K_L(f_lambda) -> ||A_L f||^2 with a pi^4 / (4 lambda^2) leading error.
  double prev = 0.0;
  for (double lam : {8.0, 16.0, 32.0}) {
    const auto q = periodize(f, lam);
    const double err = std::abs(2 * lam * lam * k_functional(q.samples, L) - variance_A(m, L));
    const double lead = std::pow(kPi, 4) / (4 * lam * lam);
    CHECK(std::abs(err - lead) < 0.1 * lead);
    if (prev > 0.0) CHECK(err < prev / 3.5);
    prev = err;
  }
}

TEST_CASE("convergence sweep for the unit Gaussian in one dimension") {
  const double L[] = {1.0};
  const double lambdas[] = {1, 2, 4, 8, 16};
  const auto r = convergence_sweep(CatalogFunction::gaussian_diag({1.0}), L, lambdas);
  REQUIRE(r.rows.size() == 5);
  CHECK(std::abs(r.up_reference - 0.25) < 1e-10);
  for (std::size_t i = 2; i < r.rows.size(); ++i) CHECK(r.rows[i].error < r.rows[i - 1].error);
  for (const auto& row : r.rows) {
    CHECK(row.flag.empty());
    CHECK(row.up_periodic >= 0.25 - 1e-9);
  }
  // Leading-order error pi^2 / (8 a lambda^2) of the periodic product.
  const double lead = kPi * kPi / (8 * 16.0 * 16.0);
  CHECK(std::abs(r.rows.back().error - lead) < 0.05 * lead);

  // lambda^2 var_A approaches Delta(A_L, f) / ||f||^2 = pi^2.
  for (std::size_t i = 2; i < r.rows.size(); ++i) {
    CHECK(std::abs(r.rows[i].var_A_scaled - kPi * kPi) < std::abs(r.rows[i - 1].var_A_scaled - kPi * kPi));
  }
  CHECK(std::abs(r.rows.back().var_A_scaled - kPi * kPi) < 0.05 * kPi * kPi);
  CHECK(std::abs(r.rows.back().var_F_scaled - 1.0 / (4 * kPi * kPi)) < 1e-3);
}

TEST_CASE("coordinate-sum sweep in two dimensions") {
  const double L[] = {1.0, 1.0};
  const double lambdas[] = {2, 4, 8, 16};
  const auto r = convergence_sweep(CatalogFunction::gaussian_diag({1.0, 4.0}), L, lambdas, true);
  CHECK(std::abs(r.up_gg_reference - 0.390625) < 1e-8);
  for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].gg_error < r.rows[i - 1].gg_error);
  CHECK(r.rows.back().gg_error < 1e-2);
  CHECK(std::abs(r.up_reference - 0.390625) < 1e-8);
}

TEST_CASE("sweep keeps vanishing rows with a flag") {
  const double L[] = {1.0};
  const double lambdas[] = {0.1, 1.0, 2.0};
  const auto r = convergence_sweep(CatalogFunction::gaussian_diag({1.0}), L, lambdas, true);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].flag == "vanishing_commutator");
  CHECK(std::isnan(r.rows[0].up_periodic));
  CHECK(std::isnan(r.rows[0].error));
  CHECK(r.rows[1].flag.empty());
  CHECK(std::isfinite(r.rows[1].up_periodic));
}

TEST_CASE("periodization errors") {
  try {
    periodize(CatalogFunction::example1(), 2.0);
    FAIL("expected not_admissible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_admissible);
  }
  PeriodizeOptions opt;
  opt.truncation = 1;
  try {
    periodize(CatalogFunction::gaussian_diag({0.05}), 1.0, opt);
    FAIL("expected tail_tolerance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::tail_tolerance);
  }
  CHECK_THROWS_AS(periodize(CatalogFunction::gaussian_diag({1.0}), 0.0), Error);

  const double half[] = {0.5};
  const double one[] = {1.0};
  const double desc[] = {2.0, 1.0};
  const double lam[] = {1.0};
  try {
    convergence_sweep(CatalogFunction::gaussian_diag({1.0}), half, lam);
    FAIL("expected non_integer_direction");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_integer_direction);
  }
  CHECK_THROWS_AS(convergence_sweep(CatalogFunction::gaussian_diag({1.0}), one, desc), Error);
}
