#include "branchwave/wave.hpp"

#include "branchwave/error.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace branchwave {

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = y[k] - (f.intercept + f.slope * x[k]);
    ss += d * d;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

auto wave_field(const Params& p) {
  return [p](double, const Eigen::Vector3d& y) -> Eigen::Vector3d {
    return wave_rhs(WaveState::from(y), p).vec();
  };
}

// Collects (z, a) where lo <= a <= hi on the index range [from, to).
void window(const WaveTrajectory& t, std::size_t from, std::size_t to, double lo, double hi,
            std::vector<double>& zs, std::vector<double>& as) {
  for (std::size_t k = from; k < to; ++k) {
    const double a = t.states[k](0);
    if (a >= lo && a <= hi) {
      zs.push_back(t.zs[k]);
      as.push_back(a);
    }
  }
}

}  // namespace

WaveState seed_unstable_manifold(double i_minus_inf, const Params& p, double eps) {
  validate(p);
  if (!(i_minus_inf > 1.0))
    fail(ErrorCode::not_unstable, "fixed point (0,0," + std::to_string(i_minus_inf) + ") has no unstable direction");
  if (!(eps > 0.0 && eps <= 1e-4)) fail(ErrorCode::invalid_argument, "seed offset must lie in (0, 1e-4]");
  const double growth = decay_rate(i_minus_inf, p.c);
  const double drop = -(i_minus_inf + p.r) / (p.c * growth);
  return {eps, eps * growth, i_minus_inf + eps * drop};
}

PowerFit fit_critical_tail(std::span<const double> z, std::span<const double> a, double c) {
  if (z.size() != a.size() || z.size() < 4) fail(ErrorCode::invalid_argument, "critical tail fit needs four or more samples");
  std::vector<double> y(z.size()), lx(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) y[k] = std::log(a[k]) + 0.5 * c * z[k];

  const double z_lo = *std::min_element(z.begin(), z.end());
  auto misfit = [&](double shift) {
    for (std::size_t k = 0; k < z.size(); ++k) lx[k] = std::log(z[k] + shift);
    return least_squares(lx, y);
  };
  const double lo = -z_lo + 1e-3;
  const double hi = lo + 200.0;
  const auto best = boost::math::tools::brent_find_minima([&](double s) { return misfit(s).rms; }, lo, hi, 40);
  const LineFit f = misfit(best.first);
  return {f.slope, best.first, f.rms};
}

WaveProfile shoot_wave(double i_minus_inf, const Params& p, const ShootOptions& opts) {
  validate(p);
  const WaveState seed = seed_unstable_manifold(i_minus_inf, p, opts.seed_eps);
  const double ic = minimal_inactive_limit(p.c);

  bool descending = false;
  auto observer = [&](double z, const Eigen::Vector3d& y) {
    if (y(0) < opts.negativity_floor)
      throw NegativityFailure("a = " + std::to_string(y(0)) + " at z = " + std::to_string(z) +
                                  ": orbit leaves the non-negative cone",
                              z, y(0));
    if (y(1) < 0.0) descending = true;
    return descending && std::max(std::abs(y(0)), std::abs(y(1))) < opts.stop_tol && y(2) >= ic - 1e-6 && y(2) < 1.0;
  };
  std::vector<odeint::EventSpec<Eigen::Vector3d>> events{
      {[](double, const Eigen::Vector3d& y) { return y(1); }, odeint::Crossing::falling, false}};

  WaveTrajectory traj = odeint::integrate(wave_field(p), seed.vec(), 0.0, opts.z_budget, opts.integrator, events,
                                          odeint::Observer<Eigen::Vector3d>(observer));
  if (traj.events.empty())
    fail(ErrorCode::budget_exhausted, "no maximum of a within z budget " + std::to_string(opts.z_budget));

  WaveProfile w;
  w.params = p;
  w.seed_eps = opts.seed_eps;
  w.i_minus_inf = i_minus_inf;
  w.z_used = traj.zs.back() - traj.zs.front();
  w.converged = traj.stopped_early;
  const auto& peak = traj.events.front();
  const double z_peak = peak.z;
  w.a_max = peak.state(0);
  w.i_at_max = peak.state(2);
  for (double& z : traj.zs) z -= z_peak;
  for (auto& e : traj.events) e.z -= z_peak;
  w.z_first_max = 0.0;
  w.i_plus_inf = traj.states.back()(2);
  w.trajectory = std::move(traj);

  const auto& t = w.trajectory;
  const auto peak_it = std::lower_bound(t.zs.begin(), t.zs.end(), 0.0);
  const std::size_t peak_idx = static_cast<std::size_t>(peak_it - t.zs.begin());

  std::vector<double> zs, as;
  window(t, 0, peak_idx, 1e-8 * w.a_max, 1e-3 * w.a_max, zs, as);
  if (zs.size() >= 3) {
    std::vector<double> la(as.size());
    std::transform(as.begin(), as.end(), la.begin(), [](double a) { return std::log(a); });
    w.mu_minus = least_squares(zs, la).slope;
  } else {
    w.mu_minus = std::numeric_limits<double>::quiet_NaN();
  }

  zs.clear();
  as.clear();
  window(t, peak_idx, t.zs.size(), 1e-8 * w.a_max, 1e-3 * w.a_max, zs, as);
  const double disc = p.c * p.c / 4.0 + w.i_plus_inf - 1.0;
  w.plus_tail = disc > 0.01 ? TailKind::exponential : TailKind::critical;
  w.mu_plus = std::numeric_limits<double>::quiet_NaN();
  if (w.plus_tail == TailKind::exponential) {
    if (zs.size() >= 3) {
      std::vector<double> la(as.size());
      std::transform(as.begin(), as.end(), la.begin(), [](double a) { return std::log(a); });
      w.mu_plus = least_squares(zs, la).slope;
    }
  } else {
    w.mu_plus = -p.c / 2.0;
    if (zs.size() >= 4) w.tail_exponent = fit_critical_tail(zs, as, p.c).exponent;
  }
  return w;
}

MaxShot shoot_from_max(double a0, double i0, const Params& p, const ShootOptions& opts) {
  validate(p);
  const double ic = minimal_inactive_limit(p.c);
  if (!(i0 >= ic && i0 < 1.0)) fail(ErrorCode::domain, "i0 must lie in [i_c, 1), got " + std::to_string(i0));
  if (!(a0 >= 0.0)) fail(ErrorCode::domain, "a0 must be non-negative");

  auto observer = [&](double z, const Eigen::Vector3d& y) {
    if (y(0) < opts.negativity_floor)
      throw NegativityFailure("a = " + std::to_string(y(0)) + " at z = " + std::to_string(z), z, y(0));
    return std::max(std::abs(y(0)), std::abs(y(1))) < opts.stop_tol && y(2) >= ic - 1e-6;
  };
  MaxShot out;
  out.trajectory = odeint::integrate(wave_field(p), Eigen::Vector3d(a0, 0.0, i0), 0.0, opts.z_budget, opts.integrator,
                                     {}, odeint::Observer<Eigen::Vector3d>(observer));
  out.converged = out.trajectory.stopped_early;
  out.i_plus_inf = out.trajectory.states.back()(2);
  return out;
}

WaveTrajectory with_left_tail(const WaveProfile& w, double a_floor) {
  const auto& t = w.trajectory;
  const Eigen::Vector3d& first = t.states.front();
  const double a_seed = first(0);
  WaveTrajectory out;
  if (!(a_seed > a_floor) || w.i_minus_inf <= 1.0) return t;

  const double growth = decay_rate(w.i_minus_inf, w.params.c);
  const double drop = -(w.i_minus_inf + w.params.r) / (w.params.c * growth);
  const int n = 60;
  const double span = std::log(a_seed / a_floor) / growth;
  for (int k = 0; k < n; ++k) {
    const double dz = -span * (1.0 - static_cast<double>(k) / n);
    const double a = a_seed * std::exp(growth * dz);
    out.zs.push_back(t.zs.front() + dz);
    out.states.emplace_back(a, growth * a, w.i_minus_inf + drop * a);
  }
  out.zs.insert(out.zs.end(), t.zs.begin(), t.zs.end());
  out.states.insert(out.states.end(), t.states.begin(), t.states.end());
  out.events = t.events;
  return out;
}

bool ProfileReport::passed() const {
  const double mass_worst = std::max({mass.res1, mass.res2, mass.res3});
  bool ok = i_monotone && a_nonnegative && single_maximum && limit_sum_residual < 1e-3 && mass_worst < 1e-4 &&
            mu_minus_rel_error < 0.02 && first_max_rel_error < 1e-4;
  if (mu_plus_rel_error) ok = ok && *mu_plus_rel_error < 0.02;
  if (tail_exponent_error) ok = ok && *tail_exponent_error <= 0.15;
  return ok;
}

ProfileReport verify_profile(const WaveProfile& w) {
  ProfileReport rep;
  const auto& t = w.trajectory;
  const auto& st = t.states;

  rep.i_monotone = true;
  rep.a_nonnegative = true;
  int sign_changes = 0;
  int last_sign = 0;
  for (std::size_t k = 0; k < st.size(); ++k) {
    if (k > 0 && st[k](2) > st[k - 1](2) + 1e-8) rep.i_monotone = false;
    if (st[k](0) < -1e-8) rep.a_nonnegative = false;
    const double b = st[k](1);
    const int s = b > 1e-12 ? 1 : (b < -1e-12 ? -1 : 0);
    if (s != 0) {
      if (last_sign != 0 && s != last_sign) ++sign_changes;
      last_sign = s;
    }
  }
  const bool constant = std::all_of(st.begin(), st.end(), [](const Eigen::Vector3d& y) { return y(0) == 0.0 && y(1) == 0.0; });
  rep.single_maximum = constant || sign_changes == 1;

  if (constant) {
    rep.limit_sum_residual = 0.0;
    return rep;
  }

  rep.limit_sum_residual = std::abs(w.i_minus_inf + w.i_plus_inf - 2.0);

  const WaveTrajectory full = with_left_tail(w);
  rep.mass = mass_residuals(full.zs, full.states, w.params);

  const double c = w.params.c;
  const double mu_minus_ref = decay_rate(w.i_minus_inf, c);
  rep.mu_minus_rel_error = std::abs(w.mu_minus - mu_minus_ref) / std::abs(mu_minus_ref);
  if (!std::isfinite(rep.mu_minus_rel_error)) rep.mu_minus_rel_error = std::numeric_limits<double>::infinity();

  if (w.plus_tail == TailKind::exponential) {
    const double ref = decay_rate(w.i_plus_inf, c);
    double err = std::abs(w.mu_plus - ref) / std::abs(ref);
    rep.mu_plus_rel_error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
  } else {
    rep.tail_exponent_error =
        w.tail_exponent ? std::abs(*w.tail_exponent - 1.0) : std::numeric_limits<double>::infinity();
  }

  try {
    const double predicted = a_at_first_max(w.i_minus_inf, w.i_at_max, c, w.params.r);
    rep.first_max_rel_error = std::abs(predicted - w.a_max) / w.a_max;
  } catch (const Error&) {
    rep.first_max_rel_error = std::numeric_limits<double>::infinity();
  }
  return rep;
}

}  // namespace branchwave
