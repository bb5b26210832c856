#include "branchwave/acceptance.hpp"

#include "branchwave/analysis.hpp"
#include "branchwave/error.hpp"
#include "branchwave/pde.hpp"
#include "branchwave/spectral.hpp"
#include "branchwave/wave.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace branchwave {

namespace {

const std::map<std::string, double>& defaults() {
  static const std::map<std::string, double> table{
      {"limits", 1e-3},         {"attractor", 1e-4},  {"thresholds", 1e-10},      {"mu_minus", 0.02},
      {"tail_exponent", 0.15},  {"triangle_slack", 1e-6}, {"mass", 1e-4},       {"speed", 0.05},
      {"plateau", 0.02},        {"shape", 0.05},      {"winding_deviation", 0.1}, {"rescaling", 1e-12},
  };
  return table;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct GridWave {
  double c, r, i_minus;
  std::optional<WaveProfile> wave;
  std::string error;
};

class Runner {
 public:
  explicit Runner(const AcceptanceOptions& o) : opts_(o), rng_(o.seed) {}

  double tol(const std::string& name) const {
    const auto it = opts_.tolerances.find(name);
    return it != opts_.tolerances.end() ? it->second : default_tolerance(name);
  }

  // The (c, r, i_minus) grid shared by the limit, rate and mass criteria.
  std::vector<GridWave>& grid_waves() {
    if (!grid_) {
      grid_.emplace();
      for (double c : {2.0, 3.0})
        for (double r : {0.0, 1.0})
          for (double im : {1.2, 1.5, 1.8, 2.0}) {
            if (im > 2.0 - minimal_inactive_limit(c) + 1e-12) continue;
            GridWave g{c, r, im, std::nullopt, {}};
            try {
              g.wave = shoot_wave(im, {c, r});
            } catch (const std::exception& e) {
              g.error = e.what();
            }
            grid_->push_back(std::move(g));
          }
    }
    return *grid_;
  }

  const FieldSeries& fig1_run(double r) {
    auto& slot = r == 0.0 ? run0_ : run1_;
    if (!slot) {
      const Grid g = make_grid(-100.0, 100.0, 2001);
      std::vector<double> A(g.n), I(g.n, 0.0);
      for (std::size_t k = 0; k < g.n; ++k) A[k] = 0.5 * std::exp(-g.x(k) * g.x(k));
      slot = simulate(std::move(A), std::move(I), {2.0, r}, g, 20.0, 0.5);
    }
    return *slot;
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  CriterionResult limits();
  CriterionResult attractor();
  CriterionResult thresholds();
  CriterionResult rates();
  CriterionResult triangles();
  CriterionResult mass();
  CriterionResult pde_front();
  CriterionResult pde_shape();
  CriterionResult evans_winding();
  CriterionResult oscillation();
  CriterionResult rescaling();

 private:
  AcceptanceOptions opts_;
  std::mt19937_64 rng_;
  std::optional<std::vector<GridWave>> grid_;
  std::optional<FieldSeries> run0_, run1_;
};

CriterionResult Runner::limits() {
  CriterionResult res;
  double worst = 0.0;
  int failures = 0;
  std::ostringstream bad;
  for (const auto& g : grid_waves()) {
    double err = g.wave ? std::abs(g.wave->i_plus_inf + g.i_minus - 2.0) : INFINITY;
    worst = std::max(worst, err);
    if (!(err < tol("limits"))) {
      ++failures;
      bad << " (c=" << g.c << ",r=" << g.r << ",i-=" << g.i_minus << ": " << (g.wave ? fmt("%.3g", err) : g.error) << ")";
    }
  }
  res.passed = failures == 0;
  res.detail = std::to_string(grid_waves().size()) + " waves, worst |i+ + i- - 2| = " + fmt("%.3g", worst) +
               " (tol " + fmt("%.3g", tol("limits")) + ")" + bad.str();
  return res;
}

CriterionResult Runner::attractor() {
  CriterionResult res;
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < 50; ++k) {
    const double c = uniform(1.5, 4.0), r = uniform(0.0, 2.0);
    const double ic = minimal_inactive_limit(c);
    const double i0 = uniform(ic + 0.05, 0.95);
    const double a0 = uniform(0.0, a_star(i0, c, r));
    double err;
    try {
      const MaxShot shot = shoot_from_max(a0, i0, {c, r});
      err = std::abs(shot.i_plus_inf - i_plus_infinity(a0, i0, c, r));
    } catch (const std::exception&) {
      err = INFINITY;
    }
    worst = std::max(worst, err);
    if (!(err < tol("attractor"))) ++failures;
  }
  res.passed = failures == 0;
  res.detail = "50 draws, worst |measured - formula| = " + fmt("%.3g", worst) + ", failures " + std::to_string(failures);
  return res;
}

CriterionResult Runner::thresholds() {
  CriterionResult res;
  double worst_inv = 0.0, worst_sym = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double c = uniform(0.5, 4.0), r = uniform(0.0, 2.0);
    const double ic = minimal_inactive_limit(c);
    const double i0 = uniform(ic, 1.0);
    worst_inv = std::max(worst_inv, std::abs(i_plus_infinity(alpha_threshold(i0, c, r), i0, c, r) - ic));
    const double iz = uniform(ic, 1.0);
    if (iz <= ic) continue;
    worst_sym = std::max(worst_sym, std::abs(a_at_first_max(2.0 - ic, iz, c, r) - alpha_threshold(iz, c, r)));
  }
  const double t = tol("thresholds");
  res.passed = worst_inv < t && worst_sym < t;
  res.detail = "inversion " + fmt("%.3g", worst_inv) + ", first-max identity " + fmt("%.3g", worst_sym) + " (tol " +
               fmt("%.3g", t) + ")";
  return res;
}

CriterionResult Runner::rates() {
  CriterionResult res;
  double worst = 0.0;
  bool ok = true;
  for (const auto& g : grid_waves()) {
    if (!g.wave) {
      ok = false;
      continue;
    }
    const double ref = decay_rate(g.i_minus, g.c);
    const double err = std::abs(g.wave->mu_minus - ref) / ref;
    worst = std::max(worst, std::isfinite(err) ? err : INFINITY);
  }
  ok = ok && worst < tol("mu_minus");

  double exponent = NAN;
  try {
    const WaveProfile crit = shoot_wave(2.0, {2.0, 0.0});
    if (crit.tail_exponent) exponent = *crit.tail_exponent;
  } catch (const std::exception&) {
  }
  const bool exp_ok = std::abs(exponent - 1.0) <= tol("tail_exponent");
  res.passed = ok && exp_ok;
  res.detail = "worst mu_minus rel. error " + fmt("%.3g", worst) + ", critical tail exponent " + fmt("%.4f", exponent);
  return res;
}

CriterionResult Runner::triangles() {
  CriterionResult res;
  const double slack = tol("triangle_slack");
  int escapes = 0;
  odeint::IntegratorOptions o;
  for (int k = 0; k < 200; ++k) {
    const double c = uniform(0.5, 4.0);
    const double ic = minimal_inactive_limit(c);
    const double i = uniform(ic, 0.99);
    const Triangle t = triangle(i, c);
    double u = uniform(0.0, 1.0), v = uniform(0.0, 1.0);
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Eigen::Vector2d start(u * t.v1.a + v * t.apex.a, u * t.v1.b + v * t.apex.b);
    auto rhs = [i, c](double, const Eigen::Vector2d& y) -> Eigen::Vector2d {
      const Vec2 d = subsystem_rhs({y(0), y(1)}, i, c);
      return {d.a, d.b};
    };
    bool escaped = false;
    const auto traj = odeint::integrate(rhs, start, 0.0, 50.0, o);
    for (const auto& y : traj.states) {
      if (!triangle_contains(t, {y(0), y(1)}, slack)) escaped = true;
    }
    if (escaped) ++escapes;
  }

  int nest_failures = 0;
  for (int k = 0; k < 50; ++k) {
    const double c = uniform(0.5, 4.0);
    const double ic = minimal_inactive_limit(c);
    double i1 = uniform(ic, 0.999), i2 = uniform(ic, 0.999);
    if (i1 > i2) std::swap(i1, i2);
    if (i1 == i2) continue;
    const Triangle outer = triangle(i1, c), inner = triangle(i2, c);
    const bool inside = triangle_contains(outer, inner.v0, 1e-12) && triangle_contains(outer, inner.v1, 1e-12) &&
                        triangle_contains(outer, inner.apex, 1e-12);
    const bool wider = outer.gamma_l > inner.gamma_l && outer.gamma_r > inner.gamma_r;
    if (!inside || !wider) ++nest_failures;
  }
  res.passed = escapes == 0 && nest_failures == 0;
  res.detail = "200 trajectories, " + std::to_string(escapes) + " escapes beyond slack " + fmt("%.1g", slack) +
               "; 50 nested pairs, " + std::to_string(nest_failures) + " failures";
  return res;
}

CriterionResult Runner::mass() {
  CriterionResult res;
  double worst = 0.0;
  bool ok = true;
  for (const auto& g : grid_waves()) {
    if (!g.wave) {
      ok = false;
      continue;
    }
    const ProfileReport rep = verify_profile(*g.wave);
    worst = std::max({worst, rep.mass.res1, rep.mass.res2, rep.mass.res3});
  }
  res.passed = ok && worst < tol("mass");
  res.detail = "worst residual over " + std::to_string(grid_waves().size()) + " waves " + fmt("%.3g", worst) +
               " (tol " + fmt("%.3g", tol("mass")) + ")";
  return res;
}

CriterionResult Runner::pde_front() {
  CriterionResult res;
  res.passed = true;
  for (double r : {0.0, 1.0}) {
    const FieldSeries& s = fig1_run(r);
    const SpeedFit fit = measure_speed(s, 0.1, {10.0, 20.0});
    const double plateau = plateau_level(s.snapshots.back(), s.grid, 0.1);
    const bool ok = std::abs(fit.c_est - 2.0) / 2.0 < tol("speed") && std::abs(plateau - 2.0) / 2.0 < tol("plateau");
    res.passed = res.passed && ok;
    res.detail += (r == 0.0 ? "" : "; ") + std::string("r=") + fmt("%g", r) + ": c_est " + fmt("%.4f", fit.c_est) +
                  ", plateau I " + fmt("%.4f", plateau);
  }
  return res;
}

CriterionResult Runner::pde_shape() {
  CriterionResult res;
  const FieldSeries& s = fig1_run(0.0);
  const WaveProfile w = shoot_wave(2.0, {2.0, 0.0});
  std::vector<double> z, a, i;
  for (std::size_t k = 0; k < w.trajectory.zs.size(); ++k) {
    z.push_back(w.trajectory.zs[k]);
    a.push_back(w.trajectory.states[k](0));
    i.push_back(w.trajectory.states[k](2));
  }
  const ComovingProfile prof = comoving_profile(s, 20.0, 2.0, 0.1);
  const ShapeMismatch m = compare_shapes(prof, z, a, i, -10.0, 10.0);
  res.passed = std::max(m.a_error, m.i_error) < tol("shape");
  res.detail = "sup-norm error a " + fmt("%.4f", m.a_error) + ", i " + fmt("%.4f", m.i_error) + " after shift " +
               fmt("%.3f", m.shift);
  return res;
}

CriterionResult Runner::evans_winding() {
  CriterionResult res;
  res.passed = true;
  const auto contour = contour_of_S(1e-3, 1000.0, opts_.contour_points);
  for (double r : {0.0, 1.0}) {
    std::string part = "r=" + fmt("%g", r) + ": ";
    try {
      const SpectralSetup setup = make_spectral_setup(Params{2.0, r});
      const WindingResult w = winding_number(setup, contour, 12, opts_.threads);
      const bool ok = w.winding == 0 && w.deviation < tol("winding_deviation");
      res.passed = res.passed && ok;
      part += "winding " + std::to_string(w.winding) + ", deviation " + fmt("%.2g", w.deviation) + ", " +
              std::to_string(w.samples.size()) + " samples, depth " + std::to_string(w.deepest_level);
    } catch (const std::exception& e) {
      res.passed = false;
      part += e.what();
    }
    res.detail += (r == 0.0 ? "" : "; ") + part;
  }
  return res;
}

CriterionResult Runner::oscillation() {
  CriterionResult res;
  try {
    const WaveProfile w = shoot_wave(1.5, {1.0, 0.0});
    res.passed = false;
    res.detail = "shooting returned a profile with i+ = " + fmt("%.4f", w.i_plus_inf);
  } catch (const NegativityFailure& e) {
    res.passed = e.a_min() < -1e-6;
    res.detail = "negativity failure at z = " + fmt("%.2f", e.z()) + ", a = " + fmt("%.3g", e.a_min());
  } catch (const std::exception& e) {
    res.passed = false;
    res.detail = std::string("unexpected error: ") + e.what();
  }
  return res;
}

CriterionResult Runner::rescaling() {
  CriterionResult res;
  double worst = 0.0;
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
  auto log_uniform = [&](double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); };
  for (int k = 0; k < 100; ++k) {
    GeneralParams g{log_uniform(0.1, 10.0), log_uniform(0.1, 10.0), uniform(0.0, 5.0), log_uniform(0.1, 10.0)};
    const double c_min = 2.0 * std::sqrt(g.r_A * g.D);
    const double c = uniform(0.3, 2.0) * c_min;
    const GeneralPredictions gp = general_wave_predictions(g, c);
    const Normalized n = normalize(g);
    const double df = n.scaling.density_factor;
    const double cn = normalized_speed(c, n.scaling);

    worst = std::max(worst, rel(gp.i_c, minimal_inactive_limit(cn) / df));
    worst = std::max(worst, rel(gp.limit_sum, 2.0 / df));
    const double i_plus = gp.i_c + 0.5 * (g.r_A / g.r_S - gp.i_c);
    for (double level : {i_plus, gp.limit_sum - i_plus}) {
      const double direct = general_decay_rate(g, c, level);
      const double via = decay_rate(level * df, cn) / n.scaling.space_factor;
      worst = std::max(worst, rel(direct, via));
    }
    const GeneralParams back = denormalize(n.params, n.scaling);
    for (auto [x, y] : {std::pair{back.r_S, g.r_S}, {back.r_A, g.r_A}, {back.r_I, g.r_I}, {back.D, g.D}})
      worst = std::max(worst, rel(x, y));
  }
  res.passed = worst < tol("rescaling");
  res.detail = "100 draws, worst relative mismatch " + fmt("%.3g", worst);
  return res;
}

}  // namespace

const std::vector<CriterionInfo>& acceptance_criteria() {
  static const std::vector<CriterionInfo> list{
      {1, "limits", "limit symmetry over the (c, r, i-) grid"},
      {2, "attractor", "attractor limit formula on random first maxima"},
      {3, "thresholds", "threshold and first-maximum identities"},
      {4, "rates", "tail decay rates and critical tail exponent"},
      {5, "triangles", "triangle invariance and nesting"},
      {6, "mass", "integral mass identities on grid waves"},
      {7, "pde-front", "PDE front speed and plateau"},
      {8, "pde-shape", "PDE comoving profile vs shot critical wave"},
      {9, "evans", "Evans function winding number"},
      {10, "oscillation", "oscillatory regime rejected by negativity"},
      {11, "rescaling", "general-parameter predictions vs normalized"},
  };
  return list;
}

std::vector<std::string> tolerance_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : defaults()) names.push_back(k);
  return names;
}

double default_tolerance(const std::string& name) {
  const auto it = defaults().find(name);
  if (it == defaults().end()) fail(ErrorCode::invalid_argument, "unknown tolerance '" + name + "'");
  return it->second;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& report) {
  for (const auto& [name, v] : opts.tolerances) default_tolerance(name);
  for (const auto& tag : opts.only) {
    const auto& all = acceptance_criteria();
    if (std::none_of(all.begin(), all.end(), [&](const CriterionInfo& c) { return c.tag == tag; }))
      fail(ErrorCode::invalid_argument, "unknown criterion '" + tag + "'");
  }

  Runner run(opts);
  using Fn = CriterionResult (Runner::*)();
  const Fn fns[] = {&Runner::limits,    &Runner::attractor, &Runner::thresholds,    &Runner::rates,
                    &Runner::triangles, &Runner::mass,      &Runner::pde_front,     &Runner::pde_shape,
                    &Runner::evans_winding, &Runner::oscillation, &Runner::rescaling};

  std::vector<CriterionResult> out;
  const auto& infos = acceptance_criteria();
  for (std::size_t k = 0; k < infos.size(); ++k) {
    if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), infos[k].tag) == opts.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = (run.*fns[k])();
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.info = infos[k];
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace branchwave
