#include "doctest.h"

#include "branchwave/pde.hpp"
#include "branchwave/wave.hpp"

#include <algorithm>
#include <cmath>

using namespace branchwave;

namespace {

std::vector<double> bump(const Grid& g, double amp) {
  std::vector<double> A(g.n);
  for (std::size_t k = 0; k < g.n; ++k) A[k] = amp * std::exp(-g.x(k) * g.x(k));
  return A;
}

// Linear interpolation of samples (zs, vs) at z, clamped to the end values.
double lerp_at(const std::vector<double>& zs, const std::vector<double>& vs, double z) {
  if (z <= zs.front()) return vs.front();
  if (z >= zs.back()) return vs.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(zs.begin(), zs.end(), z) - zs.begin());
  const double f = (z - zs[k - 1]) / (zs[k] - zs[k - 1]);
  return vs[k - 1] + f * (vs[k] - vs[k - 1]);
}

struct Sampled {
  std::vector<double> z, a, i;
};

Sampled sample(const WaveProfile& w) {
  const auto t = with_left_tail(w);
  Sampled s;
  for (std::size_t k = 0; k < t.zs.size(); ++k) {
    s.z.push_back(t.zs[k]);
    s.a.push_back(t.states[k](0));
    s.i.push_back(t.states[k](2));
  }
  return s;
}

const FieldSeries& fig1_run(double r) {
  static FieldSeries runs[2] = {};
  static bool done[2] = {false, false};
  const int k = r == 0.0 ? 0 : 1;
  if (!done[k]) {
    const Grid g = make_grid(-100, 100, 2001);
    runs[k] = simulate(bump(g, 0.5), std::vector<double>(g.n, 0.0), {2, r}, g, 20, 0.5);
    done[k] = true;
  }
  return runs[k];
}

}  // namespace

TEST_CASE("grid") {
  const auto g = make_grid(-1, 1, 21);
  CHECK(g.dx == doctest::Approx(0.1));
  CHECK(g.x(20) == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_grid(-1, 1, 15), Error);
  CHECK_THROWS_AS(make_grid(1, -1, 100), Error);
  CHECK(stable_time_step(g) <= 0.4 * g.dx * g.dx);
  CHECK(stable_time_step(make_grid(0, 1000, 20)) <= 0.1);
}

TEST_CASE("steady states do not move") {
  const auto g = make_grid(-10, 10, 101);
  const auto s = simulate(std::vector<double>(g.n, 0.0), std::vector<double>(g.n, 1.3), {2, 0.5}, g, 2.0, 0.5);
  CHECK(s.snapshots.size() == 5);
  for (const auto& f : s.snapshots) {
    for (double a : f.A) REQUIRE(a == 0.0);
    for (double i : f.I) REQUIRE(i == 1.3);
  }
}

TEST_CASE("mirror symmetry is preserved") {
  const auto g = make_grid(-20, 20, 401);
  const auto s = simulate(bump(g, 0.8), std::vector<double>(g.n, 0.1), {2, 1}, g, 5.0, 1.0);
  const auto& last = s.snapshots.back();
  for (std::size_t k = 0; k < g.n; ++k) {
    REQUIRE(std::abs(last.A[k] - last.A[g.n - 1 - k]) < 1e-10);
    REQUIRE(std::abs(last.I[k] - last.I[g.n - 1 - k]) < 1e-10);
  }
}

TEST_CASE("front position") {
  const auto g = make_grid(0, 10, 101);
  CHECK(front_position(std::vector<double>(g.n, 0.0), g, 0.1) == no_front);
  std::vector<double> step(g.n);
  for (std::size_t k = 0; k < g.n; ++k) step[k] = g.x(k) <= 5.0 + 1e-12 ? 1.0 : 0.0;
  CHECK(std::abs(front_position(step, g, 0.5) - 5.0) <= g.dx);
  CHECK_THROWS_AS(front_position(step, g, 0.0), Error);
}

TEST_CASE("front moves with a translated wave") {
  const auto w = shoot_wave(2.0, {2, 0});
  const auto ref = sample(w);
  const auto g = make_grid(-50, 50, 1001);
  auto place = [&](double shift) {
    std::vector<double> A(g.n);
    for (std::size_t k = 0; k < g.n; ++k) A[k] = lerp_at(ref.z, ref.a, g.x(k) - shift);
    return A;
  };
  const double c = 2.0, dt = 0.5;  // c dt spans exactly ten cells
  const double x1 = front_position(place(0.0), g, 0.1);
  const double x2 = front_position(place(c * dt), g, 0.1);
  CHECK(std::abs(x2 - x1 - c * dt) < 1e-9);
}

TEST_CASE("a travelling-wave start keeps its speed") {
  const double c = 3.0;
  const auto w = shoot_wave(2.0, {c, 0});
  const auto ref = sample(w);
  const auto g = make_grid(-100, 100, 2001);
  std::vector<double> A(g.n), I(g.n);
  for (std::size_t k = 0; k < g.n; ++k) {
    const double z = g.x(k) + 40.0;
    A[k] = z > ref.z.back() ? 0.0 : lerp_at(ref.z, ref.a, z);
    I[k] = lerp_at(ref.z, ref.i, z);
  }
  const auto s = simulate(A, I, {c, 0}, g, 15.0, 0.5);
  const auto fit = measure_speed(s, 0.1, {5.0, 15.0});
  CHECK(fit.c_est == doctest::Approx(c).epsilon(0.01));
}

TEST_CASE("front from a Gaussian bump") {
  for (double r : {0.0, 1.0}) {
    CAPTURE(r);
    const auto& s = fig1_run(r);
    const auto fit = measure_speed(s, 0.1, {10, 20});
    CHECK(fit.c_est == doctest::Approx(2.0).epsilon(0.05));
    CHECK(fit.samples >= 10);
    CHECK(plateau_level(s.snapshots.back(), s.grid, 0.1) == doctest::Approx(2.0).epsilon(0.02));
    CHECK(mass_balance_residual(s) < 0.01);

    double lowest = 0.0;
    bool i_grows = true;
    for (std::size_t n = 0; n < s.snapshots.size(); ++n) {
      const auto& f = s.snapshots[n];
      lowest = std::min({lowest, *std::min_element(f.A.begin(), f.A.end()), *std::min_element(f.I.begin(), f.I.end())});
      if (n > 0)
        for (std::size_t k = 0; k < f.I.size(); ++k)
          if (f.I[k] < s.snapshots[n - 1].I[k] - 1e-12) i_grows = false;
    }
    CHECK(lowest >= -1e-9);
    CHECK(i_grows);
  }
}

TEST_CASE("late profiles settle onto the shot wave") {
  for (double r : {0.0, 1.0}) {
    CAPTURE(r);
    const auto& s = fig1_run(r);
    const auto early = comoving_profile(s, 18.0, 2.0, 0.1);
    const auto late = comoving_profile(s, 20.0, 2.0, 0.1);
    CHECK(late.x_front > early.x_front);

    const auto drift = compare_shapes(late, early.z, early.a, early.i, -10, 10, 1.0);
    CHECK(drift.a_error < 0.02);
    CHECK(drift.i_error < 0.02);

    const auto ref = sample(shoot_wave(2.0, {2, r}));
    const auto m = compare_shapes(late, ref.z, ref.a, ref.i, -10, 10);
    CHECK(m.a_error < 0.05);
    CHECK(m.i_error < 0.05);
  }
}

TEST_CASE("grid refinement barely changes the speed") {
  const auto coarse = fig1_run(0.0);
  const auto g = make_grid(-100, 100, 4001);
  const auto fine = simulate(bump(g, 0.5), std::vector<double>(g.n, 0.0), {2, 0}, g, 20, 0.5);
  const double c1 = measure_speed(coarse, 0.1, {10, 20}).c_est;
  const double c2 = measure_speed(fine, 0.1, {10, 20}).c_est;
  CHECK(std::abs(c1 - c2) / c1 < 0.01);
}

TEST_CASE("failures") {
  const auto g = make_grid(-10, 10, 201);
  const auto s = simulate(bump(g, 0.5), std::vector<double>(g.n, 0.0), {2, 0}, g, 8, 0.5);
  try {
    measure_speed(s, 0.1, {2, 8});
    FAIL("expected contaminated measurement");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::contaminated_measurement);
  }

  try {
    simulate(std::vector<double>(g.n, 1e200), std::vector<double>(g.n, 0.0), {2, 0}, g, 1.0, 0.5);
    FAIL("expected blow up");
  } catch (const BlowUp& e) {
    CHECK(e.partial().snapshots.size() == 1);
  }

  CHECK_THROWS_AS(simulate(std::vector<double>(5), std::vector<double>(g.n), {2, 0}, g, 1, 0.5), Error);
  CHECK_THROWS_AS(simulate(std::vector<double>(g.n), std::vector<double>(g.n), {2, 0}, g, 0, 0.5), Error);
}
