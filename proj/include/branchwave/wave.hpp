#pragma once

#include "branchwave/analysis.hpp"
#include "branchwave/model.hpp"
#include "branchwave/odeint.hpp"

#include <Eigen/Core>

#include <optional>

namespace branchwave {

using WaveTrajectory = odeint::Trajectory<Eigen::Vector3d>;

struct ShootOptions {
  double seed_eps = 1e-7;
  double stop_tol = 1e-10;         // on max(|a|, |b|)
  double negativity_floor = -1e-6;  // a below this means the orbit spirals through zero
  double z_budget = 1000.0;         // pseudo-time allowed past the seed
  odeint::IntegratorOptions integrator{};
};

enum class TailKind { exponential, critical };

struct WaveProfile {
  WaveTrajectory trajectory;  // z = 0 at the first maximum of a
  Params params;
  double i_minus_inf = 0.0;
  double i_plus_inf = 0.0;
  double z_first_max = 0.0;
  double a_max = 0.0;
  double i_at_max = 0.0;
  double mu_minus = 0.0;
  double mu_plus = 0.0;
  TailKind plus_tail = TailKind::exponential;
  std::optional<double> tail_exponent;  // p in a ~ (z + z0)^p exp(-c z / 2), critical tails only
  double seed_eps = 0.0;
  double z_used = 0.0;  // pseudo-time actually integrated
  bool converged = false;  // stop tolerance reached inside the budget
};

// Raised when the orbit leaves the non-negative cone.
class NegativityFailure : public Error {
 public:
  NegativityFailure(const std::string& what, double z, double a_min)
      : Error(ErrorCode::oscillatory_failure, what), z_(z), a_min_(a_min) {}
  double z() const noexcept { return z_; }
  double a_min() const noexcept { return a_min_; }

 private:
  double z_;
  double a_min_;
};

WaveState seed_unstable_manifold(double i_minus_inf, const Params& p, double eps);

WaveProfile shoot_wave(double i_minus_inf, const Params& p, const ShootOptions& opts = {});

struct MaxShot {
  WaveTrajectory trajectory;
  double i_plus_inf = 0.0;
  bool converged = false;
};

MaxShot shoot_from_max(double a0, double i0, const Params& p, const ShootOptions& opts = {});

struct ProfileReport {
  bool i_monotone = false;
  bool a_nonnegative = false;
  bool single_maximum = false;
  double limit_sum_residual = 0.0;
  MassResiduals mass;
  double mu_minus_rel_error = 0.0;
  std::optional<double> mu_plus_rel_error;   // exponential tails
  std::optional<double> tail_exponent_error;  // critical tails, |p - 1|
  double first_max_rel_error = 0.0;          // measured a at the maximum vs the closed form

  bool passed() const;
};

ProfileReport verify_profile(const WaveProfile& w);

// Samples of the linear unstable manifold prepended below the seed, so the profile
// starts with |b| well under the mass-identity tolerance.
WaveTrajectory with_left_tail(const WaveProfile& w, double a_floor = 1e-13);

// Critical-tail fit of log a + c z / 2 = log C + p log(z + z0) on the window [lo, hi].
struct PowerFit {
  double exponent = 0.0;
  double shift = 0.0;
  double rms = 0.0;
};

PowerFit fit_critical_tail(std::span<const double> z, std::span<const double> a, double c);

}  // namespace branchwave
