#include "branchwave/pde.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace branchwave {

namespace {

double lerp_clamped(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

double trapezoid(std::span<const double> f, double dx) {
  double s = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) s += 0.5 * (f[k - 1] + f[k]);
  return s * dx;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

Grid make_grid(double x_min, double x_max, std::size_t n) {
  if (n < 16) fail(ErrorCode::invalid_argument, "grid needs at least 16 points");
  if (!(x_max > x_min)) fail(ErrorCode::invalid_argument, "grid needs x_max > x_min");
  return {x_min, x_max, n, (x_max - x_min) / static_cast<double>(n - 1)};
}

const FieldPair& FieldSeries::at(double t) const {
  if (snapshots.empty()) fail(ErrorCode::invalid_argument, "empty field series");
  const FieldPair* best = &snapshots.front();
  for (const auto& s : snapshots)
    if (std::abs(s.t - t) < std::abs(best->t - t)) best = &s;
  const double gap = snapshots.size() > 1 ? snapshots[1].t - snapshots[0].t : 0.0;
  if (std::abs(best->t - t) > 0.5 * gap + 1e-9)
    fail(ErrorCode::domain, "no snapshot near t = " + std::to_string(t));
  return *best;
}

double stable_time_step(const Grid& g) { return std::min(0.4 * g.dx * g.dx, 0.1); }

FieldSeries simulate(std::vector<double> A0, std::vector<double> I0, const Params& p, const Grid& grid,
                     double t_end, double snapshot_dt) {
  validate(p);
  if (A0.size() != grid.n || I0.size() != grid.n) fail(ErrorCode::shape_mismatch, "initial fields must match the grid");
  if (!(t_end > 0.0)) fail(ErrorCode::invalid_argument, "t_end must be positive");
  if (!(snapshot_dt > 0.0)) fail(ErrorCode::invalid_argument, "snapshot interval must be positive");

  FieldSeries series;
  series.grid = grid;
  series.params = p;
  series.snapshots.push_back({0.0, A0, I0});

  const std::size_t n = grid.n;
  const double dt_cap = stable_time_step(grid);
  std::vector<double> A = std::move(A0), I = std::move(I0);
  std::vector<double> kA[4], kI[4];
  for (int s = 0; s < 4; ++s) {
    kA[s].resize(n);
    kI[s].resize(n);
  }
  std::vector<double> tA(n), tI(n);

  auto stage = [&](double h, int from, int into) {
    for (std::size_t k = 0; k < n; ++k) {
      tA[k] = A[k] + h * kA[from][k];
      tI[k] = I[k] + h * kI[from][k];
    }
    pde_rhs_into(tA, tI, p, grid.dx, kA[into], kI[into]);
  };

  double t = 0.0;
  while (t < t_end - 1e-12) {
    const double interval = std::min(snapshot_dt, t_end - t);
    const auto substeps = static_cast<std::size_t>(std::ceil(interval / dt_cap - 1e-9));
    const double dt = interval / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s) {
      pde_rhs_into(A, I, p, grid.dx, kA[0], kI[0]);
      stage(0.5 * dt, 0, 1);
      stage(0.5 * dt, 1, 2);
      stage(dt, 2, 3);
      for (std::size_t k = 0; k < n; ++k) {
        A[k] += dt / 6.0 * (kA[0][k] + 2.0 * kA[1][k] + 2.0 * kA[2][k] + kA[3][k]);
        I[k] += dt / 6.0 * (kI[0][k] + 2.0 * kI[1][k] + 2.0 * kI[2][k] + kI[3][k]);
      }
    }
    t = std::min(t_end, static_cast<double>(series.snapshots.size()) * snapshot_dt);
    if (!all_finite(A) || !all_finite(I))
      throw BlowUp("non-finite field values before t = " + std::to_string(t), std::move(series));
    series.snapshots.push_back({t, A, I});
  }
  return series;
}

double front_position(std::span<const double> A, const Grid& grid, double threshold) {
  if (!(threshold > 0.0)) fail(ErrorCode::invalid_argument, "front threshold must be positive");
  for (std::size_t k = A.size(); k-- > 0;) {
    if (A[k] >= threshold) {
      if (k + 1 == A.size()) return grid.x(k);
      const double f = (A[k] - threshold) / (A[k] - A[k + 1]);
      return grid.x(k) + f * grid.dx;
    }
  }
  return no_front;
}

SpeedFit measure_speed(const FieldSeries& series, double threshold, std::pair<double, double> window) {
  const auto [t1, t2] = window;
  if (!(t2 > t1)) fail(ErrorCode::invalid_argument, "speed window needs t2 > t1");
  if (series.snapshots.empty() || t1 < series.snapshots.front().t - 1e-9 || t2 > series.snapshots.back().t + 1e-9)
    fail(ErrorCode::domain, "speed window lies outside the simulated times");

  const Grid& g = series.grid;
  const double guard = g.x_max - 10.0 * g.dx;
  std::vector<double> ts, xs;
  for (const auto& s : series.snapshots) {
    if (s.t < t1 - 1e-9 || s.t > t2 + 1e-9) continue;
    const double x = front_position(s.A, g, threshold);
    if (x == no_front)
      fail(ErrorCode::contaminated_measurement, "no front above threshold at t = " + std::to_string(s.t));
    if (x > guard)
      fail(ErrorCode::contaminated_measurement, "front within 10 cells of the boundary at t = " + std::to_string(s.t));
    ts.push_back(s.t);
    xs.push_back(x);
  }
  if (ts.size() < 2) fail(ErrorCode::domain, "speed window holds fewer than two snapshots");

  const double n = static_cast<double>(ts.size());
  double mt = 0, mx = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k] / n;
    mx += xs[k] / n;
  }
  double stt = 0, stx = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - mt) * (ts[k] - mt);
    stx += (ts[k] - mt) * (xs[k] - mx);
  }
  SpeedFit fit;
  fit.c_est = stx / stt;
  double ss = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double d = xs[k] - (mx + fit.c_est * (ts[k] - mt));
    ss += d * d;
  }
  fit.residual = std::sqrt(ss / n);
  fit.t1 = t1;
  fit.t2 = t2;
  fit.samples = ts.size();
  return fit;
}

ComovingProfile comoving_profile(const FieldSeries& series, double t, double c_est, double anchor) {
  const FieldPair& snap = series.at(t);
  const Grid& g = series.grid;
  ComovingProfile prof;
  prof.t = snap.t;
  prof.c_est = c_est;
  prof.anchor = anchor;
  prof.x_front = front_position(snap.A, g, anchor);
  const double origin = prof.x_front == no_front ? 0.0 : prof.x_front;
  prof.z.resize(g.n);
  for (std::size_t k = 0; k < g.n; ++k) prof.z[k] = g.x(k) - origin;
  prof.a = snap.A;
  prof.i = snap.I;
  return prof;
}

double plateau_level(const FieldPair& snap, const Grid& grid, double threshold, double lo, double hi) {
  const double xf = front_position(snap.A, grid, threshold);
  if (xf == no_front || !(xf > 0.0)) fail(ErrorCode::domain, "no right-moving front to measure a plateau behind");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double x = grid.x(k);
    if (x >= lo * xf && x <= hi * xf) {
      sum += snap.I[k];
      ++count;
    }
  }
  if (count == 0) fail(ErrorCode::domain, "plateau window holds no grid points");
  return sum / static_cast<double>(count);
}

ShapeMismatch compare_shapes(const ComovingProfile& prof, std::span<const double> ref_z,
                             std::span<const double> ref_a, std::span<const double> ref_i, double z_lo,
                             double z_hi, double max_shift) {
  if (ref_z.size() != ref_a.size() || ref_z.size() != ref_i.size() || ref_z.size() < 2)
    fail(ErrorCode::shape_mismatch, "reference profile arrays must match");

  double ref_front = ref_z.front();
  for (std::size_t k = ref_z.size(); k-- > 0;) {
    if (ref_a[k] >= prof.anchor) {
      ref_front = ref_z[k];
      if (k + 1 < ref_z.size()) {
        const double f = (ref_a[k] - prof.anchor) / (ref_a[k] - ref_a[k + 1]);
        ref_front = ref_z[k] + f * (ref_z[k + 1] - ref_z[k]);
      }
      break;
    }
  }
  const double a_scale = *std::max_element(ref_a.begin(), ref_a.end());
  const double i_scale = std::max(*std::max_element(ref_i.begin(), ref_i.end()), 1e-300);

  auto errors = [&](double shift) {
    ShapeMismatch m;
    m.shift = shift;
    for (std::size_t k = 0; k < prof.z.size(); ++k) {
      const double z = prof.z[k];
      if (z < z_lo || z > z_hi) continue;
      const double zr = z + ref_front + shift;
      m.a_error = std::max(m.a_error, std::abs(prof.a[k] - lerp_clamped(ref_z, ref_a, zr)) / a_scale);
      m.i_error = std::max(m.i_error, std::abs(prof.i[k] - lerp_clamped(ref_z, ref_i, zr)) / i_scale);
    }
    return m;
  };
  auto worst = [&](double s) {
    const ShapeMismatch m = errors(s);
    return std::max(m.a_error, m.i_error);
  };

  double best = 0.0, best_val = worst(0.0);
  const int steps = 200;
  for (int k = 0; k <= steps; ++k) {
    const double s = -max_shift + 2.0 * max_shift * k / steps;
    const double v = worst(s);
    if (v < best_val) {
      best_val = v;
      best = s;
    }
  }
  const double h = 2.0 * max_shift / steps;
  const auto refined = boost::math::tools::brent_find_minima(worst, best - h, best + h, 40);
  return refined.second < best_val ? errors(refined.first) : errors(best);
}

double mass_balance_residual(const FieldSeries& series) {
  const auto& snaps = series.snapshots;
  if (snaps.size() < 3) fail(ErrorCode::invalid_argument, "mass balance needs at least three snapshots");
  const double dx = series.grid.dx;
  const double rate = 1.0 + series.params.r;
  std::vector<double> total(snaps.size()), source(snaps.size());
  std::vector<double> sum(series.grid.n);
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = snaps[s].A[k] + snaps[s].I[k];
    total[s] = trapezoid(sum, dx);
    source[s] = rate * trapezoid(snaps[s].A, dx);
  }
  double produced = 0.0;
  for (std::size_t s = 1; s < snaps.size(); ++s)
    produced += 0.5 * (snaps[s].t - snaps[s - 1].t) * (source[s] + source[s - 1]);
  const double change = total.back() - total.front();
  return std::abs(change - produced) / std::max(std::abs(change), 1e-300);
}

}  // namespace branchwave
