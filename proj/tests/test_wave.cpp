#include "doctest.h"

#include "branchwave/wave.hpp"

#include <cmath>
#include <random>

using namespace branchwave;

TEST_CASE("unstable manifold seed") {
  const Params p{2, 0};
  const auto s = seed_unstable_manifold(2.0, p, 1e-6);
  CHECK(s.a == doctest::Approx(1e-6));
  CHECK(s.b > 0);
  CHECK(s.i < 2.0);

  // the field at the seed points along the seed direction, scaled by the unstable rate
  const double lam = -1 + std::sqrt(2.0);
  for (double eps : {1e-4, 1e-5, 1e-6}) {
    const auto q = seed_unstable_manifold(2.0, p, eps);
    const Eigen::Vector3d off = q.vec() - Eigen::Vector3d(0, 0, 2.0);
    const Eigen::Vector3d f = wave_rhs(q, p).vec();
    REQUIRE((f - lam * off).norm() < 10 * eps * eps);
  }
  const auto tiny = seed_unstable_manifold(1.5, {3, 1}, 1e-12);
  CHECK((tiny.vec() - Eigen::Vector3d(0, 0, 1.5)).norm() < 1e-10);

  CHECK_THROWS_AS(seed_unstable_manifold(1.0, p, 1e-7), Error);
  CHECK_THROWS_AS(seed_unstable_manifold(0.5, p, 1e-7), Error);
}

TEST_CASE("critical wave at c = 2") {
  const auto w = shoot_wave(2.0, {2, 0});
  CHECK(w.converged);
  CHECK(std::abs(w.i_plus_inf) < 1e-3);
  CHECK(w.mu_minus == doctest::Approx(std::sqrt(2.0) - 1).epsilon(0.02));
  CHECK(w.plus_tail == TailKind::critical);
  REQUIRE(w.tail_exponent);
  CHECK(std::abs(*w.tail_exponent - 1.0) <= 0.15);

  const auto rep = verify_profile(w);
  CHECK(rep.i_monotone);
  CHECK(rep.a_nonnegative);
  CHECK(rep.single_maximum);
  CHECK(rep.limit_sum_residual < 1e-3);
  CHECK(rep.mass.res1 < 1e-4);
  CHECK(rep.mass.res2 < 1e-4);
  CHECK(rep.mass.res3 < 1e-4);
  CHECK(rep.passed());

  // total mass from the limits
  CHECK(rep.mass.total_mass == doctest::Approx(2.0 * (w.i_minus_inf - w.i_plus_inf)).epsilon(1e-4));

  // the first maximum sits at z = 0 and matches the closed form
  CHECK(std::abs(w.z_first_max) < 1e-12);
  CHECK(std::abs(a_at_first_max(2.0, w.i_at_max, 2, 0) - w.a_max) / w.a_max < 1e-4);
  std::size_t k_max = 0;
  for (std::size_t k = 0; k < w.trajectory.states.size(); ++k)
    if (w.trajectory.states[k](0) > w.trajectory.states[k_max](0)) k_max = k;
  CHECK(std::abs(w.trajectory.zs[k_max]) < 0.2);
}

TEST_CASE("non-critical waves") {
  auto w = shoot_wave(1.8, {2, 0});
  CHECK(w.i_plus_inf == doctest::Approx(0.2).epsilon(5e-3));
  CHECK(verify_profile(w).passed());

  w = shoot_wave(1.8, {2, 1});
  CHECK(verify_profile(w).limit_sum_residual < 1e-3);

  w = shoot_wave(1.5, {2, 0});
  CHECK(w.plus_tail == TailKind::exponential);
  CHECK(w.mu_plus == doctest::Approx(decay_rate(0.5, 2)).epsilon(0.02));
  const auto rep = verify_profile(w);
  REQUIRE(rep.mu_plus_rel_error);
  CHECK(*rep.mu_plus_rel_error < 0.02);
}

TEST_CASE("seed size hardly matters") {
  ShootOptions a, b;
  b.seed_eps = a.seed_eps / 2;
  const double ia = shoot_wave(1.5, {2, 0}, a).i_plus_inf;
  const double ib = shoot_wave(1.5, {2, 0}, b).i_plus_inf;
  CHECK(std::abs(ia - ib) < 1e-5);
}

TEST_CASE("oscillatory regime fails on negativity") {
  try {
    shoot_wave(1.5, {1, 0});
    FAIL("expected a negativity failure");
  } catch (const NegativityFailure& e) {
    CHECK(e.code() == ErrorCode::oscillatory_failure);
    CHECK(e.a_min() < -1e-6);
  }
  CHECK_THROWS_AS(shoot_wave(0.9, {2, 0}), Error);
}

TEST_CASE("shots from the first maximum") {
  const Params p{2, 0};
  auto m = shoot_from_max(0.0, 0.5, p);
  CHECK(m.i_plus_inf == 0.5);
  for (const auto& y : m.trajectory.states) CHECK(y == Eigen::Vector3d(0, 0, 0.5));

  m = shoot_from_max(0.3, 0.5, p);
  CHECK(std::abs(m.i_plus_inf - i_plus_infinity(0.3, 0.5, 2, 0)) < 1e-4);

  m = shoot_from_max(a_star(0.5, 2, 0), 0.5, p);
  CHECK(std::abs(m.i_plus_inf) < 1e-3);

  CHECK_THROWS_AS(shoot_from_max(0.1, 1.0, p), Error);
  CHECK_THROWS_AS(shoot_from_max(-0.1, 0.5, p), Error);
}

TEST_CASE("attractor containment") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> c(1.5, 4.0), r(0.0, 2.0), u(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const Params p{c(rng), r(rng)};
    const double ic = minimal_inactive_limit(p.c);
    const double i0 = ic + 0.05 + (0.95 - ic - 0.05) * u(rng);
    const double a0 = a_star(i0, p.c, p.r) * u(rng);
    const auto m = shoot_from_max(a0, i0, p);
    REQUIRE(std::abs(m.i_plus_inf - i_plus_infinity(a0, i0, p.c, p.r)) < 1e-4);
    const auto t = triangle(ic, p.c);
    for (const auto& y : m.trajectory.states) {
      REQUIRE(triangle_contains(t, {y(0), y(1)}, 1e-6));
      REQUIRE(y(2) >= ic - 1e-6);
      REQUIRE(y(2) <= i0 + 1e-12);
    }
  }
}

TEST_CASE("constant profile verifies trivially") {
  WaveProfile w;
  w.params = {2, 0};
  w.i_minus_inf = w.i_plus_inf = 0.5;
  w.trajectory.zs = {0.0, 1.0, 2.0};
  w.trajectory.states.assign(3, Eigen::Vector3d(0, 0, 0.5));
  const auto rep = verify_profile(w);
  CHECK(rep.i_monotone);
  CHECK(rep.a_nonnegative);
  CHECK(rep.single_maximum);
  CHECK(rep.limit_sum_residual == 0.0);
}

TEST_CASE("critical tail fit recovers a planted exponent") {
  std::vector<double> z, a;
  for (double s = 0; s < 40; s += 0.05) {
    z.push_back(s);
    a.push_back(0.3 * std::pow(s + 2.0, 1.0) * std::exp(-s));
  }
  const auto fit = fit_critical_tail(z, a, 2.0);
  CHECK(fit.exponent == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(fit.shift == doctest::Approx(2.0).epsilon(1e-2));
}
