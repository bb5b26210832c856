#pragma once

// Dormand-Prince 5(4) with dense output and event location. Header-only so that
// real and complex fixed-size Eigen states inline the right-hand side.

#include "branchwave/error.hpp"

#include <Eigen/Core>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace branchwave::odeint {

struct IntegratorOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  std::int64_t max_steps = 1'000'000;
  bool record = true;  // keep every accepted step, otherwise only the endpoints
};

void validate(const IntegratorOptions& opts);

enum class Crossing { rising = 1, falling = -1, either = 0 };

template <class Vec>
struct EventSpec {
  std::function<double(double, const Vec&)> fn;
  Crossing direction = Crossing::either;
  bool terminal = false;
};

template <class Vec>
struct EventHit {
  std::size_t index = 0;
  double z = 0.0;
  Vec state;
};

template <class Vec>
struct Trajectory {
  std::vector<double> zs;
  std::vector<Vec> states;
  std::vector<EventHit<Vec>> events;
  std::int64_t rejected = 0;
  bool stopped_early = false;  // observer or terminal event halted the run

  double z_end() const { return zs.back(); }
  const Vec& final_state() const { return states.back(); }
};

// Returning true from an observer stops the integration after the current step.
template <class Vec>
using Observer = std::function<bool(double, const Vec&)>;

template <class Vec>
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, Trajectory<Vec> partial)
      : Error(ErrorCode::non_convergence, what), partial_(std::move(partial)) {}
  const Trajectory<Vec>& partial() const noexcept { return partial_; }

 private:
  Trajectory<Vec> partial_;
};

namespace detail {

// Tableau of Dormand & Prince (1980), with Shampine's continuous extension.
struct DP {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

template <class Vec>
double scaled_norm(const Vec& err, const Vec& y0, const Vec& y1, const IntegratorOptions& o) {
  const auto scale = (o.abs_tol + o.rel_tol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).eval();
  const auto ratio = (err.cwiseAbs().array() / scale).eval();
  return std::sqrt(ratio.square().sum() / static_cast<double>(err.size()));
}

template <class Vec>
struct Dense {
  double z0 = 0.0, h = 0.0;
  Vec r1, r2, r3, r4, r5;

  Vec operator()(double z) const {
    const double t = (z - z0) / h;
    const double u = 1.0 - t;
    return r1 + t * (r2 + u * (r3 + t * (r4 + u * r5)));
  }
};

inline bool is_crossing(double g0, double g1, Crossing dir) {
  const bool up = g0 < 0.0 && g1 >= 0.0;
  const bool down = g0 > 0.0 && g1 <= 0.0;
  switch (dir) {
    case Crossing::rising: return up;
    case Crossing::falling: return down;
    case Crossing::either: return up || down;
  }
  return false;
}

}  // namespace detail

inline void validate(const IntegratorOptions& o) {
  auto ok = [](double t) { return t > 0.0 && t <= 1e-2; };
  if (!ok(o.rel_tol) || !ok(o.abs_tol)) fail(ErrorCode::invalid_argument, "tolerances must lie in (0, 1e-2]");
  if (!(o.max_step > 0.0)) fail(ErrorCode::invalid_argument, "max_step must be positive");
  if (o.max_steps < 1) fail(ErrorCode::invalid_argument, "max_steps must be at least 1");
}

// Forward integration over [z_start, z_end], z_end > z_start.
template <class Vec, class Rhs>
Trajectory<Vec> integrate(Rhs&& rhs, const Vec& y0, double z_start, double z_end,
                          const IntegratorOptions& opts = {},
                          const std::vector<EventSpec<Vec>>& events = {},
                          const Observer<Vec>& observer = {}) {
  using detail::DP;
  validate(opts);
  if (!(z_end > z_start)) fail(ErrorCode::invalid_argument, "integration span must satisfy z_end > z_start");

  Trajectory<Vec> traj;
  traj.zs.push_back(z_start);
  traj.states.push_back(y0);
  if (observer && observer(z_start, y0)) {
    traj.stopped_early = true;
    return traj;
  }

  std::vector<double> g_prev(events.size());
  for (std::size_t k = 0; k < events.size(); ++k) g_prev[k] = events[k].fn(z_start, y0);

  double z = z_start;
  Vec y = y0;
  Vec k1 = rhs(z, y);

  // Initial step guess (Hairer, Norsett & Wanner II.4)
  double h;
  {
    const Vec zero = Vec::Zero(y.size());
    const double d0 = detail::scaled_norm(y, zero, y, opts);
    const double d1 = detail::scaled_norm(k1, zero, y, opts);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, opts.max_step);
    const Vec y1 = y + h0 * k1;
    const Vec f1 = rhs(z + h0, y1);
    const double d2 = detail::scaled_norm((f1 - k1).eval(), zero, y, opts) / h0;
    const double dmax = std::max(d1, d2);
    const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    h = std::min({100.0 * h0, h1, opts.max_step, z_end - z});
  }

  auto fail_partial = [&](const std::string& why) -> void {
    if (!opts.record && (traj.zs.back() != z)) {
      traj.zs.push_back(z);
      traj.states.push_back(y);
    }
    throw NonConvergence<Vec>(why, std::move(traj));
  };

  std::int64_t steps = 0;
  bool last_rejected = false;
  while (z < z_end) {
    if (++steps > opts.max_steps) fail_partial("max_steps exceeded at z = " + std::to_string(z));
    if (h < 1e-14 * std::max(1.0, std::abs(z))) fail_partial("step size underflow at z = " + std::to_string(z));
    bool final_step = false;
    if (z + h >= z_end) {
      h = z_end - z;
      final_step = true;
    }

    const Vec k2 = rhs(z + DP::c2 * h, (y + h * DP::a21 * k1).eval());
    const Vec k3 = rhs(z + DP::c3 * h, (y + h * (DP::a31 * k1 + DP::a32 * k2)).eval());
    const Vec k4 = rhs(z + DP::c4 * h, (y + h * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3)).eval());
    const Vec k5 = rhs(z + DP::c5 * h, (y + h * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4)).eval());
    const Vec k6 = rhs(z + h, (y + h * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5)).eval());
    const Vec y_new = y + h * (DP::a71 * k1 + DP::a73 * k3 + DP::a74 * k4 + DP::a75 * k5 + DP::a76 * k6);
    const Vec k7 = rhs(z + h, y_new);
    const Vec err = h * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 + DP::e6 * k6 + DP::e7 * k7);
    double en = detail::scaled_norm(err, y, y_new, opts);
    if (!std::isfinite(en)) en = 1e10;

    if (en > 1.0) {
      ++traj.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
      continue;
    }

    const double z_new = final_step ? z_end : z + h;

    bool halt = false;
    if (!events.empty()) {
      detail::Dense<Vec> dense;
      dense.z0 = z;
      dense.h = h;
      dense.r1 = y;
      dense.r2 = y_new - y;
      dense.r3 = h * k1 - dense.r2;
      dense.r4 = dense.r2 - h * k7 - dense.r3;
      dense.r5 = h * (DP::d1 * k1 + DP::d3 * k3 + DP::d4 * k4 + DP::d5 * k5 + DP::d6 * k6 + DP::d7 * k7);

      struct Found {
        std::size_t index;
        double z;
      };
      std::vector<Found> found;
      for (std::size_t k = 0; k < events.size(); ++k) {
        const double g1 = events[k].fn(z_new, y_new);
        const double g0 = g_prev[k];
        g_prev[k] = g1;
        if (!detail::is_crossing(g0, g1, events[k].direction)) continue;
        double zr = z_new;
        if (g1 != 0.0) {
          auto g = [&](double s) { return events[k].fn(s, dense(s)); };
          std::uintmax_t iters = 100;
          const auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-13 * std::max(1.0, std::abs(lo)); };
          const auto bracket = boost::math::tools::toms748_solve(g, z, z_new, g0, g1, tol, iters);
          zr = 0.5 * (bracket.first + bracket.second);
        }
        found.push_back({k, zr});
      }
      std::sort(found.begin(), found.end(), [](const Found& l, const Found& r) { return l.z < r.z; });
      for (const Found& f : found) {
        const Vec s = f.z == z_new ? y_new : dense(f.z);
        traj.events.push_back({f.index, f.z, s});
        if (events[f.index].terminal) {
          // stop at the event itself
          if (opts.record || f.z != z) {
            traj.zs.push_back(f.z);
            traj.states.push_back(s);
          }
          traj.stopped_early = true;
          return traj;
        }
      }
    }

    z = z_new;
    y = y_new;
    k1 = k7;
    if (opts.record || z >= z_end) {
      traj.zs.push_back(z);
      traj.states.push_back(y);
    }
    if (observer && observer(z, y)) halt = true;

    double factor = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
    factor = std::clamp(factor, 0.2, 5.0);
    if (last_rejected) factor = std::min(factor, 1.0);
    last_rejected = false;
    h = std::min(h * factor, opts.max_step);

    if (halt) {
      if (!opts.record && traj.zs.back() != z) {
        traj.zs.push_back(z);
        traj.states.push_back(y);
      }
      traj.stopped_early = true;
      return traj;
    }
  }
  return traj;
}

// Same core over complex states; the error norm uses moduli componentwise.
template <class Vec, class Rhs>
Trajectory<Vec> integrate_complex(Rhs&& rhs, const Vec& y0, double z_start, double z_end,
                                  const IntegratorOptions& opts = {},
                                  const std::vector<EventSpec<Vec>>& events = {},
                                  const Observer<Vec>& observer = {}) {
  static_assert(Eigen::NumTraits<typename Vec::Scalar>::IsComplex, "integrate_complex needs a complex state");
  return integrate(std::forward<Rhs>(rhs), y0, z_start, z_end, opts, events, observer);
}

// Integration towards smaller z: runs the forward core on s = -z with the right-hand side negated.
template <class Vec, class Rhs>
Trajectory<Vec> integrate_backward(Rhs&& rhs, const Vec& y0, double z_start, double z_end,
                                   const IntegratorOptions& opts = {}) {
  if (!(z_end < z_start)) fail(ErrorCode::invalid_argument, "backward span must satisfy z_end < z_start");
  auto flipped = [&](double s, const Vec& y) -> Vec { return -rhs(-s, y); };
  Trajectory<Vec> t = integrate(flipped, y0, -z_start, -z_end, opts);
  for (double& s : t.zs) s = -s;
  return t;
}

}  // namespace branchwave::odeint
