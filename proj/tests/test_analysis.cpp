#include "doctest.h"

#include "branchwave/analysis.hpp"
#include "branchwave/odeint.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace branchwave;

namespace {

// Root of f on [lo, hi] by bisection to full precision.
template <class F>
double bisect_root(F f, double lo, double hi) {
  auto tol = [](double a, double b) { return std::abs(a - b) < 1e-15; };
  auto [x0, x1] = boost::math::tools::bisect(f, lo, hi, tol);
  return 0.5 * (x0 + x1);
}

Vec2 point_in(const Triangle& t, double u, double v) {
  if (u + v > 1) {
    u = 1 - u;
    v = 1 - v;
  }
  return {t.v0.a + u * (t.v1.a - t.v0.a) + v * (t.apex.a - t.v0.a),
          t.v0.b + u * (t.v1.b - t.v0.b) + v * (t.apex.b - t.v0.b)};
}

}  // namespace

TEST_CASE("fixed point spectrum") {
  auto s = fixed_point_spectrum(1.0, 3.0);
  CHECK(std::abs(s.lambda_plus) < 1e-15);
  CHECK(s.lambda_minus.real() == doctest::Approx(-3.0));

  s = fixed_point_spectrum(2.0, 2.0);
  CHECK(s.lambda_plus.real() == doctest::Approx(-1 + std::sqrt(2.0)));
  CHECK(s.lambda_minus.real() == doctest::Approx(-1 - std::sqrt(2.0)));

  s = fixed_point_spectrum(0.0, 1.0);
  CHECK(s.discriminant < 0);
  CHECK(s.lambda_plus.real() == doctest::Approx(-0.5));
  CHECK(std::abs(s.lambda_plus.imag()) == doctest::Approx(std::sqrt(3.0) / 2));
  CHECK(s.lambda_minus == std::conj(s.lambda_plus));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> K(0.0, 3.0), c(0.2, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const double kk = K(rng), cc = c(rng);
    const auto sp = fixed_point_spectrum(kk, cc);
    REQUIRE(sp.lambda0 == 0.0);
    REQUIRE(std::abs(sp.lambda_plus + sp.lambda_minus + cc) < 1e-12);
    REQUIRE(std::abs(sp.lambda_plus * sp.lambda_minus - (1 - kk)) < 1e-12);
  }
}

TEST_CASE("eigenbasis diagonalizes the normal form") {
  const auto eb = eigenbasis(2.0, 2.0, 0.0);
  CHECK(eb.e0 == Eigen::Vector3cd(1, 0, 0));
  const Eigen::Matrix3cd M = normal_form_matrix(2.0, 2.0, 0.0).cast<cplx>();
  CHECK((M * eb.e_plus - eb.Ddiag(1) * eb.e_plus).norm() < 1e-10);
  CHECK((M * eb.e_minus - eb.Ddiag(2) * eb.e_minus).norm() < 1e-10);

  CHECK_THROWS_AS(eigenbasis(1.0, 2.0, 0.0), Error);
  CHECK_THROWS_AS(eigenbasis(1.0 - 0.25 + 1e-11, 1.0, 0.0), Error);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> K(0.0, 3.0), c(0.5, 4.0), r(0.0, 2.0);
  int used = 0;
  while (used < 200) {
    const double kk = K(rng), cc = c(rng), rr = r(rng);
    if (std::abs(kk - 1) < 1e-3 || std::abs(kk - (1 - cc * cc / 4)) < 1e-3) continue;
    ++used;
    const auto b = eigenbasis(kk, cc, rr);
    const Eigen::Matrix3cd Mk = normal_form_matrix(kk, cc, rr).cast<cplx>();
    const Eigen::Matrix3cd rebuilt = b.E * b.Ddiag.asDiagonal() * b.E_inv;
    REQUIRE((b.E * b.E_inv - Eigen::Matrix3cd::Identity()).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((Mk - rebuilt).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("fixed-level subsystem") {
  auto s = subsystem_spectrum(0.0, 2.0);
  CHECK(s.lambda_plus == doctest::Approx(-1.0));
  CHECK(s.lambda_minus == doctest::Approx(-1.0));
  CHECK(s.beta_plus == doctest::Approx(-1 + std::sqrt(2.0)));
  CHECK(s.beta_minus == doctest::Approx(-1 - std::sqrt(2.0)));

  s = subsystem_spectrum(0.5, 2.0);
  CHECK(s.lambda_plus == doctest::Approx(-1 + std::sqrt(0.5)));
  CHECK(s.lambda_minus == doctest::Approx(-1 - std::sqrt(0.5)));

  s = subsystem_spectrum(0.75, 1.0);
  CHECK(s.lambda_plus == doctest::Approx(-0.5));
  CHECK(s.lambda_minus == doctest::Approx(-0.5));

  CHECK_THROWS_AS(subsystem_spectrum(1.0, 2.0), Error);
  CHECK_THROWS_AS(subsystem_spectrum(0.2, 1.0), Error);

  // eigendirections of the Jacobians at both fixed points
  for (double i : {0.1, 0.5, 0.9}) {
    const double c = 2.3;
    const auto t = subsystem_spectrum(i, c);
    Eigen::Matrix2d J0, J1;
    J0 << 0, 1, i - 1, -c;
    J1 << 0, 1, 1 - i, -c;
    const Eigen::Vector2d lp(t.l_plus.a, t.l_plus.b), rp(t.r_plus.a, t.r_plus.b);
    CHECK((J0 * lp - t.lambda_plus * lp).norm() < 1e-12);
    CHECK((J1 * rp - t.beta_plus * rp).norm() < 1e-12);
  }
}

TEST_CASE("triangle apex solves the half-line intersection") {
  const double i = 0.5, c = 2.0;
  const auto t = triangle(i, c);
  const double disc0 = c * c / 4 + i - 1, disc1 = c * c / 4 + 1 - i;
  const double bp = -c / 2 + std::sqrt(disc1);
  // apex = p (1, lambda_+) direction from the origin = (1-i, 0) - q (1, beta_+)
  const double lp = -c / 2 + std::sqrt(disc0);
  Eigen::Matrix2d A;
  A << 1, 1, lp, bp;
  const Eigen::Vector2d pq = A.colPivHouseholderQr().solve(Eigen::Vector2d(1 - i, 0));
  CHECK(pq(0) > 0);
  CHECK(pq(1) > 0);
  CHECK(t.apex.a == doctest::Approx(pq(0)).epsilon(1e-12));
  CHECK(t.apex.b == doctest::Approx(pq(0) * lp).epsilon(1e-12));
  CHECK(t.apex.b < 0);
  CHECK(t.v1.a == doctest::Approx(1 - i));

  CHECK(triangle_contains(t, t.v0, 0.0));
  CHECK(triangle_contains(t, t.v1, 0.0));
  CHECK(triangle_contains(t, t.apex, 0.0));
  CHECK_FALSE(triangle_contains(t, {1 - i + 0.1, 0}, 0.0));
  CHECK(triangle_contains(t, {t.apex.a / 2, t.apex.b / 2}, 0.0));
  CHECK_FALSE(triangle_contains(t, {0.2, 0.05}, 0.0));
  CHECK(triangle_contains(t, {0.2, 1e-7}, 1e-6));

  const auto tiny = triangle(1 - 1e-9, c);
  CHECK(std::abs(tiny.v1.a - tiny.v0.a) < 1e-8);
  CHECK(std::hypot(tiny.apex.a, tiny.apex.b) < 1e-8);

  CHECK_THROWS_AS(triangle(1.0, 2.0), Error);
  CHECK_THROWS_AS(triangle(0.5, 1.0), Error);
}

TEST_CASE("triangles nest as the level decreases") {
  const auto big = triangle(0.2, 2.0), small = triangle(0.5, 2.0);
  for (const auto& v : {small.v0, small.v1, small.apex}) CHECK(triangle_contains(big, v, 1e-12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(0.5, 4.0), u(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double cc = c(rng), ic = minimal_inactive_limit(cc);
    double i1 = ic + (1 - ic) * u(rng) * 0.999, i2 = ic + (1 - ic) * u(rng) * 0.999;
    if (i1 > i2) std::swap(i1, i2);
    if (i2 - i1 < 1e-6) continue;
    const auto t1 = triangle(i1, cc), t2 = triangle(i2, cc);
    for (const auto& v : {t2.v0, t2.v1, t2.apex}) REQUIRE(triangle_contains(t1, v, 1e-12));
    REQUIRE(t1.gamma_l > t2.gamma_l);
    REQUIRE(t1.gamma_r > t2.gamma_r);
  }
}

TEST_CASE("triangles are invariant under the fixed-level flow") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> c(0.5, 4.0), u(0.0, 1.0);
  odeint::IntegratorOptions opts;
  opts.rel_tol = 1e-10;
  int escapes = 0;
  for (int k = 0; k < 200; ++k) {
    const double cc = c(rng), ic = minimal_inactive_limit(cc);
    const double i = ic + (1 - ic) * (0.001 + 0.998 * u(rng));
    const auto t = triangle(i, cc);
    const Vec2 p = point_in(t, u(rng), u(rng));
    auto rhs = [&](double, const Eigen::Vector2d& y) {
      const auto d = subsystem_rhs({y(0), y(1)}, i, cc);
      return Eigen::Vector2d(d.a, d.b);
    };
    const auto traj = odeint::integrate(rhs, Eigen::Vector2d(p.a, p.b), 0.0, 50.0, opts);
    for (const auto& y : traj.states)
      if (!triangle_contains(t, {y(0), y(1)}, 1e-6)) {
        ++escapes;
        break;
      }
  }
  CHECK(escapes == 0);
}

TEST_CASE("rates and limits") {
  CHECK(minimal_inactive_limit(2.0) == 0.0);
  CHECK(minimal_inactive_limit(1.0) == doctest::Approx(0.75));
  CHECK(minimal_inactive_limit(3.0) == 0.0);

  CHECK(decay_rate(0.0, 2.0) == doctest::Approx(-1.0));
  CHECK(decay_rate(2.0, 2.0) == doctest::Approx(std::sqrt(2.0) - 1));
  CHECK(decay_rate(1.0, 3.7) == doctest::Approx(0.0));
  CHECK_THROWS_AS(decay_rate(0.0, 1.0), Error);

  CHECK(limit_symmetry(2.0) == 0.0);
  CHECK(limit_symmetry(1.8) == doctest::Approx(0.2));
  CHECK(limit_symmetry(1.0) == 1.0);
}

TEST_CASE("attractor limit and threshold") {
  CHECK(i_plus_infinity(0.0, 0.37, 2.0, 0.4) == doctest::Approx(0.37));
  CHECK(i_plus_infinity(0.1, 0.5, 2, 0) > i_plus_infinity(0.2, 0.5, 2, 0));

  const double root = bisect_root([](double a) { return i_plus_infinity(a, 0.5, 2, 0); }, 0.0, 0.5);
  CHECK(root == doctest::Approx(0.47178).epsilon(1e-5));
  CHECK(std::abs(alpha_threshold(0.5, 2, 0) - root) < 1e-10);

  const double root_r1 = bisect_root([](double a) { return i_plus_infinity(a, 0.5, 2, 1); }, 0.0, 0.5);
  CHECK(std::abs(alpha_threshold(0.5, 2, 1) - root_r1) < 1e-10);

  CHECK(alpha_threshold(0.0, 2.0, 0.0) == doctest::Approx(0.0));
  CHECK(alpha_threshold(0.75, 1.0, 0.3) == doctest::Approx(0.0));
  CHECK_THROWS_AS(alpha_threshold(0.5, 1.0, 0.0), Error);

  const double al = alpha_threshold(0.9, 2, 0);
  CHECK(a_star(0.9, 2, 0) == doctest::Approx(std::min(al, 0.1)));
  CHECK(a_star(0.0, 2, 0) == doctest::Approx(0.0));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> c(0.5, 4.0), r(0.0, 2.0), u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double cc = c(rng), rr = r(rng), ic = minimal_inactive_limit(cc);
    const double i0 = ic + (1 - ic) * 0.999 * u(rng);
    const double a = alpha_threshold(i0, cc, rr);
    REQUIRE(std::abs(i_plus_infinity(a, i0, cc, rr) - ic) < 1e-10);
    REQUIRE(a_star(i0, cc, rr) <= 1 - i0);
    // monotone decrease on [0, 1 - i0]
    REQUIRE(i_plus_infinity(0.3 * (1 - i0), i0, cc, rr) > i_plus_infinity(0.6 * (1 - i0), i0, cc, rr));
  }
}

TEST_CASE("amplitude at the first maximum") {
  CHECK(a_at_first_max(1.0 + 1e-12, 1.0, 2, 0) < 1e-6);
  CHECK_THROWS_AS(a_at_first_max(1.2, 0.5, 2, 0), Error);
  CHECK_THROWS_AS(a_at_first_max(0.9, 0.95, 2, 0), Error);
  CHECK(a_at_first_max(2.0, 0.4, 2, 0) > 0);

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> c(0.5, 4.0), r(0.0, 2.0), u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double cc = c(rng), rr = r(rng), ic = minimal_inactive_limit(cc);
    const double iz = ic + (1 - ic) * (0.001 + 0.998 * u(rng));
    REQUIRE(std::abs(a_at_first_max(2 - ic, iz, cc, rr) - alpha_threshold(iz, cc, rr)) < 1e-10);
  }
}

TEST_CASE("mass residuals on a constant segment") {
  std::vector<double> z;
  std::vector<Eigen::Vector3d> s;
  for (int k = 0; k <= 20; ++k) {
    z.push_back(0.1 * k);
    s.emplace_back(0.0, 0.0, 0.6);
  }
  const auto m = mass_residuals(z, s, {2, 0});
  CHECK(m.res1 == 0.0);
  CHECK(m.res2 == 0.0);
  CHECK(m.res3 == 0.0);
  CHECK(m.total_mass == 0.0);

  s.back()(1) = 1e-3;
  CHECK_THROWS_AS(mass_residuals(z, s, {2, 0}), Error);
}
