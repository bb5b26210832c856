#include "branchwave/branchwave.h"

#include "branchwave/acceptance.hpp"
#include "branchwave/analysis.hpp"
#include "branchwave/error.hpp"
#include "branchwave/model.hpp"
#include "branchwave/pde.hpp"
#include "branchwave/spectral.hpp"
#include "branchwave/wave.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

using namespace branchwave;

struct bw_wave {
  WaveProfile profile;
  bool from_max = false;
};

struct bw_series {
  FieldSeries series;
};

struct bw_spectral {
  SpectralSetup setup;
};

struct bw_winding {
  WindingResult result;
};

struct bw_verify {
  std::vector<CriterionResult> results;
};

namespace {

thread_local std::string last_error;

bw_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return BW_ERR_INVALID_ARGUMENT;
    case ErrorCode::shape_mismatch: return BW_ERR_SHAPE;
    case ErrorCode::domain: return BW_ERR_DOMAIN;
    case ErrorCode::degenerate_basis: return BW_ERR_DEGENERATE_BASIS;
    case ErrorCode::oscillatory_regime: return BW_ERR_OSCILLATORY_REGIME;
    case ErrorCode::imaginary_root: return BW_ERR_IMAGINARY_ROOT;
    case ErrorCode::invalid_segment: return BW_ERR_INVALID_SEGMENT;
    case ErrorCode::not_unstable: return BW_ERR_NOT_UNSTABLE;
    case ErrorCode::non_convergence: return BW_ERR_NON_CONVERGENCE;
    case ErrorCode::oscillatory_failure: return BW_ERR_NEGATIVITY;
    case ErrorCode::budget_exhausted: return BW_ERR_BUDGET;
    case ErrorCode::blow_up: return BW_ERR_BLOW_UP;
    case ErrorCode::contaminated_measurement: return BW_ERR_CONTAMINATED;
    case ErrorCode::splitting_failure: return BW_ERR_SPLITTING;
    case ErrorCode::contour_resolution: return BW_ERR_RESOLUTION;
  }
  return BW_ERR_INTERNAL;
}

template <class F>
bw_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return BW_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return BW_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return BW_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

ShootOptions shoot_options(const bw_shoot_options* o) {
  ShootOptions s;
  if (o) {
    if (o->seed_eps > 0.0) s.seed_eps = o->seed_eps;
    if (o->z_budget > 0.0) s.z_budget = o->z_budget;
  }
  return s;
}

GeneralParams general(const bw_general_params* g) {
  require(g, "general parameters");
  return {g->r_S, g->r_A, g->r_I, g->D};
}

std::vector<std::string> split_list(const char* s) {
  std::vector<std::string> out;
  if (!s) return out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

extern "C" {

const char* bw_version(void) { return "0.1.0"; }

const char* bw_status_name(bw_status status) {
  switch (status) {
    case BW_OK: return "ok";
    case BW_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BW_ERR_SHAPE: return "shape mismatch";
    case BW_ERR_DOMAIN: return "domain error";
    case BW_ERR_DEGENERATE_BASIS: return "degenerate basis";
    case BW_ERR_OSCILLATORY_REGIME: return "oscillatory regime";
    case BW_ERR_IMAGINARY_ROOT: return "imaginary root";
    case BW_ERR_INVALID_SEGMENT: return "invalid segment";
    case BW_ERR_NOT_UNSTABLE: return "not unstable";
    case BW_ERR_NON_CONVERGENCE: return "non-convergence";
    case BW_ERR_NEGATIVITY: return "negativity failure";
    case BW_ERR_BUDGET: return "budget exhausted";
    case BW_ERR_BLOW_UP: return "blow-up";
    case BW_ERR_CONTAMINATED: return "contaminated measurement";
    case BW_ERR_SPLITTING: return "splitting failure";
    case BW_ERR_RESOLUTION: return "resolution failure";
    case BW_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* bw_last_error(void) { return last_error.c_str(); }

double bw_minimal_inactive_limit(double c) { return minimal_inactive_limit(c); }

bw_status bw_decay_rate(double i_limit, double c, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = decay_rate(i_limit, c);
  });
}

double bw_i_plus_infinity(double a0, double i0, double c, double r) { return i_plus_infinity(a0, i0, c, r); }

bw_status bw_alpha_threshold(double i0, double c, double r, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = alpha_threshold(i0, c, r);
  });
}

bw_status bw_a_star(double i0, double c, double r, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = a_star(i0, c, r);
  });
}

bw_status bw_a_at_first_max(double i_minus_inf, double i_z0, double c, double r, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = a_at_first_max(i_minus_inf, i_z0, c, r);
  });
}

double bw_limit_symmetry(double i_minus_inf) { return limit_symmetry(i_minus_inf); }

bw_status bw_normalize(const bw_general_params* g, double* r_out, bw_scaling* scaling_out) {
  return guarded([&] {
    const Normalized n = normalize(general(g));
    if (r_out) *r_out = n.params.r;
    if (scaling_out) *scaling_out = {n.scaling.time_factor, n.scaling.space_factor, n.scaling.density_factor};
  });
}

bw_status bw_general_predictions_eval(const bw_general_params* g, double c, bw_general_predictions* out) {
  return guarded([&] {
    require(out, "out");
    const GeneralParams gp = general(g);
    const GeneralPredictions p = general_wave_predictions(gp, c);
    *out = {p.i_c, p.limit_sum, p.c_min, normalized_speed(c, normalize(gp).scaling)};
  });
}

bw_status bw_general_decay_rate(const bw_general_params* g, double c, double level, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = general_decay_rate(general(g), c, level);
  });
}

bw_status bw_wave_shoot(double c, double r, double i_minus_inf, const bw_shoot_options* opts, bw_wave** out,
                        double* a_min_out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    try {
      auto w = std::make_unique<bw_wave>();
      w->profile = shoot_wave(i_minus_inf, {c, r}, shoot_options(opts));
      *out = w.release();
    } catch (const NegativityFailure& e) {
      if (a_min_out) *a_min_out = e.a_min();
      throw;
    }
  });
}

bw_status bw_wave_from_max(double c, double r, double a0, double i0, const bw_shoot_options* opts, bw_wave** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    MaxShot shot = shoot_from_max(a0, i0, {c, r}, shoot_options(opts));
    auto w = std::make_unique<bw_wave>();
    w->from_max = true;
    WaveProfile& p = w->profile;
    p.params = {c, r};
    p.a_max = a0;
    p.i_at_max = i0;
    p.i_plus_inf = shot.i_plus_inf;
    p.i_minus_inf = std::numeric_limits<double>::quiet_NaN();
    p.mu_minus = p.mu_plus = std::numeric_limits<double>::quiet_NaN();
    p.converged = shot.converged;
    p.z_used = shot.trajectory.zs.back() - shot.trajectory.zs.front();
    p.trajectory = std::move(shot.trajectory);
    *out = w.release();
  });
}

void bw_wave_destroy(bw_wave* w) { delete w; }

size_t bw_wave_size(const bw_wave* w) { return w ? w->profile.trajectory.zs.size() : 0; }

bw_status bw_wave_samples(const bw_wave* w, double* z, double* a, double* b, double* i) {
  return guarded([&] {
    require(w, "wave");
    const auto& t = w->profile.trajectory;
    for (std::size_t k = 0; k < t.zs.size(); ++k) {
      if (z) z[k] = t.zs[k];
      if (a) a[k] = t.states[k](0);
      if (b) b[k] = t.states[k](1);
      if (i) i[k] = t.states[k](2);
    }
  });
}

bw_status bw_wave_summary_get(const bw_wave* w, bw_wave_summary* out) {
  return guarded([&] {
    require(w, "wave");
    require(out, "out");
    const WaveProfile& p = w->profile;
    out->c = p.params.c;
    out->r = p.params.r;
    out->i_minus_inf = p.i_minus_inf;
    out->i_plus_inf = p.i_plus_inf;
    out->a_max = p.a_max;
    out->i_at_max = p.i_at_max;
    out->mu_minus = p.mu_minus;
    out->mu_plus = p.mu_plus;
    out->critical_tail = p.plus_tail == TailKind::critical ? 1 : 0;
    out->tail_exponent = p.tail_exponent.value_or(std::numeric_limits<double>::quiet_NaN());
    out->z_used = p.z_used;
    out->converged = p.converged ? 1 : 0;
  });
}

bw_status bw_wave_verify(const bw_wave* w, bw_wave_report* out) {
  return guarded([&] {
    require(w, "wave");
    require(out, "out");
    if (w->from_max) fail(ErrorCode::invalid_argument, "profile verification needs a heteroclinic wave");
    const ProfileReport rep = verify_profile(w->profile);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out->i_monotone = rep.i_monotone;
    out->a_nonnegative = rep.a_nonnegative;
    out->single_maximum = rep.single_maximum;
    out->limit_sum_residual = rep.limit_sum_residual;
    out->mass_res1 = rep.mass.res1;
    out->mass_res2 = rep.mass.res2;
    out->mass_res3 = rep.mass.res3;
    out->total_mass = rep.mass.total_mass;
    out->mu_minus_rel_error = rep.mu_minus_rel_error;
    out->mu_plus_rel_error = rep.mu_plus_rel_error.value_or(nan);
    out->tail_exponent_error = rep.tail_exponent_error.value_or(nan);
    out->first_max_rel_error = rep.first_max_rel_error;
    out->passed = rep.passed();
  });
}

bw_status bw_pde_simulate(const double* A0, const double* I0, size_t n, double x_min, double x_max, double r,
                          double t_end, double snapshot_dt, bw_series** out) {
  return guarded([&] {
    require(out, "out");
    require(A0, "A0");
    require(I0, "I0");
    *out = nullptr;
    const Grid g = make_grid(x_min, x_max, n);
    auto s = std::make_unique<bw_series>();
    try {
      s->series = simulate(std::vector<double>(A0, A0 + n), std::vector<double>(I0, I0 + n), {2.0, r}, g, t_end,
                           snapshot_dt);
    } catch (const BlowUp& e) {
      s->series = e.partial();
      *out = s.release();
      throw;
    }
    *out = s.release();
  });
}

void bw_series_destroy(bw_series* s) { delete s; }

size_t bw_series_count(const bw_series* s) { return s ? s->series.snapshots.size() : 0; }

size_t bw_series_grid_size(const bw_series* s) { return s ? s->series.grid.n : 0; }

bw_status bw_series_grid(const bw_series* s, double* x) {
  return guarded([&] {
    require(s, "series");
    require(x, "x");
    for (std::size_t k = 0; k < s->series.grid.n; ++k) x[k] = s->series.grid.x(k);
  });
}

namespace {
const FieldPair& snapshot(const bw_series* s, size_t k) {
  require(s, "series");
  if (k >= s->series.snapshots.size()) fail(ErrorCode::invalid_argument, "snapshot index out of range");
  return s->series.snapshots[k];
}
}  // namespace

bw_status bw_series_snapshot(const bw_series* s, size_t k, double* t, double* A, double* I) {
  return guarded([&] {
    const FieldPair& f = snapshot(s, k);
    if (t) *t = f.t;
    if (A) std::copy(f.A.begin(), f.A.end(), A);
    if (I) std::copy(f.I.begin(), f.I.end(), I);
  });
}

bw_status bw_series_front(const bw_series* s, size_t k, double threshold, double* x_out) {
  return guarded([&] {
    require(x_out, "x_out");
    *x_out = front_position(snapshot(s, k).A, s->series.grid, threshold);
  });
}

bw_status bw_series_speed(const bw_series* s, double threshold, double t1, double t2, double* c_est,
                          double* residual) {
  return guarded([&] {
    require(s, "series");
    const SpeedFit fit = measure_speed(s->series, threshold, {t1, t2});
    if (c_est) *c_est = fit.c_est;
    if (residual) *residual = fit.residual;
  });
}

bw_status bw_series_plateau(const bw_series* s, size_t k, double threshold, double* level) {
  return guarded([&] {
    require(level, "level");
    *level = plateau_level(snapshot(s, k), s->series.grid, threshold);
  });
}

bw_status bw_series_mass_balance(const bw_series* s, double* residual) {
  return guarded([&] {
    require(s, "series");
    require(residual, "residual");
    *residual = mass_balance_residual(s->series);
  });
}

bw_status bw_spectral_create(double c, double r, double L, bw_spectral** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    SpectralOptions o;
    if (L > 0.0) o.L = L;
    auto s = std::make_unique<bw_spectral>();
    s->setup = make_spectral_setup(Params{c, r}, o);
    *out = s.release();
  });
}

void bw_spectral_destroy(bw_spectral* s) { delete s; }

double bw_spectral_length(const bw_spectral* s) { return s ? s->setup.L : 0.0; }

bw_status bw_evans(const bw_spectral* s, double re, double im, double* re_out, double* im_out) {
  return guarded([&] {
    require(s, "spectral setup");
    const cplx e = evans({re, im}, s->setup);
    if (re_out) *re_out = e.real();
    if (im_out) *im_out = e.imag();
  });
}

bw_status bw_contour(double r_min, double r_max, size_t base_n, double* re, double* im, size_t cap, size_t* count) {
  return guarded([&] {
    const auto pts = contour_of_S(r_min, r_max, base_n);
    if (count) *count = pts.size();
    for (std::size_t k = 0; k < pts.size() && k < cap; ++k) {
      if (re) re[k] = pts[k].real();
      if (im) im[k] = pts[k].imag();
    }
  });
}

bw_status bw_winding_run(const bw_spectral* s, const double* re, const double* im, size_t n, bw_winding** out) {
  return guarded([&] {
    require(out, "out");
    require(re, "re");
    require(im, "im");
    *out = nullptr;
    std::vector<cplx> pts(n);
    for (std::size_t k = 0; k < n; ++k) pts[k] = {re[k], im[k]};
    auto w = std::make_unique<bw_winding>();
    if (s)
      w->result = winding_number(s->setup, pts);
    else
      w->result = winding_number([](cplx g) { return g; }, pts);
    *out = w.release();
  });
}

void bw_winding_destroy(bw_winding* w) { delete w; }
int bw_winding_number(const bw_winding* w) { return w ? w->result.winding : 0; }
double bw_winding_deviation(const bw_winding* w) { return w ? w->result.deviation : 0.0; }
double bw_winding_max_step(const bw_winding* w) { return w ? w->result.max_arg_step : 0.0; }
int bw_winding_depth(const bw_winding* w) { return w ? w->result.deepest_level : 0; }
size_t bw_winding_sample_count(const bw_winding* w) { return w ? w->result.samples.size() : 0; }

bw_status bw_winding_samples(const bw_winding* w, double* re_gamma, double* im_gamma, double* re_e, double* im_e) {
  return guarded([&] {
    require(w, "winding");
    const auto& s = w->result.samples;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (re_gamma) re_gamma[k] = s[k].gamma.real();
      if (im_gamma) im_gamma[k] = s[k].gamma.imag();
      if (re_e) re_e[k] = s[k].value.real();
      if (im_e) im_e[k] = s[k].value.imag();
    }
  });
}

bw_status bw_verify_run(unsigned long long seed, const char* only, const char* tolerances, bw_verify_callback cb,
                        void* user, bw_verify** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    AcceptanceOptions o;
    o.seed = seed;
    o.only = split_list(only);
    for (const auto& item : split_list(tolerances)) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) fail(ErrorCode::invalid_argument, "tolerance override '" + item + "' needs name=value");
      std::size_t used = 0;
      const std::string value = item.substr(eq + 1);
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) fail(ErrorCode::invalid_argument, "bad tolerance value in '" + item + "'");
      o.tolerances[item.substr(0, eq)] = v;
    }
    auto v = std::make_unique<bw_verify>();
    v->results = run_acceptance(o, [&](const CriterionResult& r) {
      if (cb) cb(r.info.id, r.info.tag.c_str(), r.info.title.c_str(), r.passed ? 1 : 0, r.detail.c_str(), r.seconds, user);
    });
    *out = v.release();
  });
}

void bw_verify_destroy(bw_verify* v) { delete v; }
size_t bw_verify_count(const bw_verify* v) { return v ? v->results.size() : 0; }
int bw_verify_passed(const bw_verify* v, size_t k) { return v && k < v->results.size() && v->results[k].passed; }
const char* bw_verify_tag(const bw_verify* v, size_t k) {
  return v && k < v->results.size() ? v->results[k].info.tag.c_str() : "";
}
const char* bw_verify_detail(const bw_verify* v, size_t k) {
  return v && k < v->results.size() ? v->results[k].detail.c_str() : "";
}

}  // extern "C"
