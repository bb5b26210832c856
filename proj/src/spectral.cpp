#include "branchwave/spectral.hpp"

#include "branchwave/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

namespace branchwave {

namespace {

using Vec3c = Eigen::Vector3cd;

// Second exterior power of a 3x3 matrix in the basis (e1^e2, e1^e3, e2^e3).
Eigen::Matrix3cd compound(const Eigen::Matrix3cd& m) {
  Eigen::Matrix3cd out;
  out << m(0, 0) + m(1, 1), m(1, 2), -m(0, 2),
         m(2, 1), m(0, 0) + m(2, 2), m(0, 1),
         -m(2, 0), m(1, 0), m(1, 1) + m(2, 2);
  return out;
}

Eigen::Matrix3cd bare_matrix(double a, double i, cplx gamma, const Params& p) {
  const double c = p.c;
  Eigen::Matrix3cd m;
  m << 0.0, 1.0, 0.0,
       gamma + 2.0 * a + i - 1.0, -c, a,
       -(2.0 * a + i + p.r) / c, 0.0, (gamma - a) / c;
  return m;
}

struct Limits {
  cplx mu_up;      // unstable a-mode at -inf
  cplx mu_down;    // its partner
  cplx nu_stable;  // stable a-mode at +inf
  cplx nu_other;
};

Limits limit_roots(cplx gamma, const SpectralSetup& s) {
  const double c = s.params.c;
  const cplx left = std::sqrt(c * c / 4.0 + gamma + s.wave.i_minus_inf - 1.0);
  const cplx right = std::sqrt(c * c / 4.0 + gamma + s.wave.i_plus_inf - 1.0);
  return {-c / 2.0 + left, -c / 2.0 - left, -c / 2.0 - right, -c / 2.0 + right};
}

}  // namespace

ProfileInterpolant::ProfileInterpolant(const WaveProfile& w) {
  const auto& t = w.trajectory;
  const std::size_t n = t.zs.size();
  z_.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!z_.empty() && !(t.zs[k] > z_.back())) continue;
    const WaveState s = WaveState::from(t.states[k]);
    const WaveState d = wave_rhs(s, w.params);
    z_.push_back(t.zs[k]);
    a_.push_back(s.a);
    da_.push_back(d.a);
    i_.push_back(s.i);
    di_.push_back(d.i);
  }
  if (z_.size() < 2) fail(ErrorCode::invalid_argument, "profile needs at least two samples to interpolate");
  i_left_ = w.i_minus_inf;
  i_right_ = w.i_plus_inf;
}

std::pair<double, double> ProfileInterpolant::operator()(double z) const {
  if (z < z_.front()) return {0.0, i_left_};
  if (z > z_.back()) return {0.0, i_right_};
  auto it = std::upper_bound(z_.begin(), z_.end(), z);
  std::size_t k = it == z_.end() ? z_.size() - 1 : static_cast<std::size_t>(it - z_.begin());
  const std::size_t j = k - 1;
  const double h = z_[k] - z_[j];
  const double t = (z - z_[j]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double a = h00 * a_[j] + h10 * h * da_[j] + h01 * a_[k] + h11 * h * da_[k];
  const double i = h00 * i_[j] + h10 * h * di_[j] + h01 * i_[k] + h11 * h * di_[k];
  return {a, i};
}

SpectralSetup make_spectral_setup(WaveProfile wave, const SpectralOptions& opts) {
  if (!(opts.L > 0.0)) fail(ErrorCode::invalid_argument, "truncation length must be positive");
  SpectralSetup s;
  s.params = wave.params;
  s.w_exp = opts.w_exp > 0.0 ? opts.w_exp : wave.params.c / 2.0;
  s.L = opts.L;
  s.integrator = opts.integrator;
  s.profile = ProfileInterpolant(wave);
  s.wave = std::move(wave);

  const double bound = 1e-8 * s.wave.a_max;
  const auto& t = s.wave.trajectory;
  if (-s.L < t.zs.front())
    fail(ErrorCode::domain, "profile starts at z = " + std::to_string(t.zs.front()) + ", after -L; use a smaller seed");
  for (double z : {-s.L, s.L}) {
    double level = 0.0;
    if (z <= t.zs.back()) {
      const auto it = std::lower_bound(t.zs.begin(), t.zs.end(), z);
      const auto k = static_cast<std::size_t>(it - t.zs.begin());
      level = t.states[k].head<2>().cwiseAbs().maxCoeff();
      if (k > 0) level = std::max(level, t.states[k - 1].head<2>().cwiseAbs().maxCoeff());
    }
    if (level > bound)
      fail(ErrorCode::domain, "truncation L = " + std::to_string(s.L) + " too short: |(a,b)| = " +
                                  std::to_string(level) + " at z = " + std::to_string(z));
  }
  return s;
}

SpectralSetup make_spectral_setup(const Params& p, const SpectralOptions& opts) {
  validate(p);
  ShootOptions shoot;
  shoot.seed_eps = opts.seed_eps;
  const double i_minus = 2.0 - minimal_inactive_limit(p.c);
  return make_spectral_setup(shoot_wave(i_minus, p, shoot), opts);
}

Eigen::Matrix3cd linearization_matrix(double z, cplx gamma, const SpectralSetup& s) {
  if (z < -s.L - 1e-12 || z > s.L + 1e-12)
    fail(ErrorCode::domain, "z = " + std::to_string(z) + " outside the truncated line");
  const auto [a, i] = s.profile(z);
  Eigen::Matrix3cd m = bare_matrix(a, i, gamma, s.params);
  m.diagonal().array() += s.w_exp;
  return m;
}

Splitting limit_splitting(cplx gamma, const SpectralSetup& s) {
  if (gamma.real() < -1e-12) fail(ErrorCode::splitting_failure, "gamma left of the imaginary axis");
  if (std::abs(gamma) == 0.0) fail(ErrorCode::splitting_failure, "gamma = 0 lies on the essential spectrum");
  const double c = s.params.c, w = s.w_exp;
  const Limits lim = limit_roots(gamma, s);

  Splitting out;
  out.shifted_minus = {gamma / c + w, lim.mu_up + w, lim.mu_down + w};
  out.shifted_plus = {gamma / c + w, lim.nu_other + w, lim.nu_stable + w};
  for (const cplx& e : out.shifted_minus) {
    if (std::abs(e.real()) < 1e-10) fail(ErrorCode::splitting_failure, "neutral mode at -inf");
    if (e.real() > 0.0) ++out.k_minus;
  }
  for (const cplx& e : out.shifted_plus) {
    if (std::abs(e.real()) < 1e-10) fail(ErrorCode::splitting_failure, "neutral mode at +inf");
    if (e.real() < 0.0) ++out.k_plus;
  }

  const double il = s.wave.i_minus_inf, ir = s.wave.i_plus_inf, r = s.params.r;
  cplx g = gamma;
  if (std::abs(c * lim.mu_up - g) < 1e-9) g *= 1.0 + 1e-6;  // collision of gamma/c with mu+
  const cplx mu = -c / 2.0 + std::sqrt(c * c / 4.0 + g + il - 1.0);
  out.unstable_minus[0] = Vec3c(0.0, 0.0, 1.0);
  out.unstable_minus[1] = Vec3c(1.0, mu, -(il + r) / (c * mu - g));
  out.stable_plus = Vec3c(1.0, lim.nu_stable, -(ir + r) / (c * lim.nu_stable - gamma));
  return out;
}

cplx evans(cplx gamma, const SpectralSetup& s) {
  const Splitting split = limit_splitting(gamma, s);
  if (split.k_minus != 2 || split.k_plus != 1)
    fail(ErrorCode::splitting_failure, "unexpected splitting dimensions at gamma = " + std::to_string(gamma.real()) +
                                           "+" + std::to_string(gamma.imag()) + "i");
  const Limits lim = limit_roots(gamma, s);
  const double c = s.params.c;

  // wedge of the two unstable directions at -L; growth gamma/c + mu+ removed
  const cplx sigma = gamma / c + lim.mu_up;
  const Vec3c w0(0.0, -1.0, -lim.mu_up);
  auto wedge_rhs = [&](double z, const Vec3c& y) -> Vec3c {
    const auto [a, i] = s.profile(z);
    Eigen::Matrix3cd m = compound(bare_matrix(a, i, gamma, s.params));
    m.diagonal().array() -= sigma;
    return m * y;
  };
  const auto left = odeint::integrate_complex(wedge_rhs, w0, -s.L, 0.0, s.integrator);

  const cplx nu = lim.nu_stable;
  auto stable_rhs = [&](double z, const Vec3c& y) -> Vec3c {
    const auto [a, i] = s.profile(z);
    Eigen::Matrix3cd m = bare_matrix(a, i, gamma, s.params);
    m.diagonal().array() -= nu;
    return m * y;
  };
  const auto right = odeint::integrate_backward(stable_rhs, split.stable_plus, s.L, 0.0, s.integrator);

  const Vec3c& W = left.final_state();
  const Vec3c& X = right.final_state();
  return X(0) * W(2) - X(1) * W(1) + X(2) * W(0);
}

std::vector<cplx> contour_of_S(double r_min, double r_max, std::size_t base_n) {
  if (!(r_min > 0.0 && r_max > r_min)) fail(ErrorCode::invalid_argument, "contour needs 0 < r_min < r_max");
  if (base_n < 2) fail(ErrorCode::invalid_argument, "contour needs at least two points per piece");
  const double half_pi = std::numbers::pi / 2.0;
  const double n = static_cast<double>(base_n);
  std::vector<cplx> pts;
  pts.reserve(4 * base_n + 1);
  for (std::size_t k = 0; k < base_n; ++k) pts.push_back(std::polar(r_max, -half_pi + std::numbers::pi * k / n));
  const double decades = std::log(r_max / r_min);
  for (std::size_t k = 0; k < base_n; ++k) pts.emplace_back(0.0, r_max * std::exp(-decades * k / n));
  for (std::size_t k = 0; k < base_n; ++k) pts.push_back(std::polar(r_min, half_pi - std::numbers::pi * k / n));
  for (std::size_t k = 0; k < base_n; ++k) pts.emplace_back(0.0, -r_min * std::exp(decades * k / n));
  pts.push_back(pts.front());
  // exact zero real parts on the axis pieces
  for (auto& g : pts)
    if (std::abs(g.real()) < 1e-12 * std::abs(g)) g.real(0.0);
  return pts;
}

std::vector<EvansSample> evaluate_on(const ComplexMap& f, const std::vector<cplx>& points, unsigned threads) {
  std::vector<EvansSample> out(points.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(points.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < points.size();) {
      try {
        out[k] = {points[k], f(points[k])};
      } catch (...) {
        std::lock_guard<std::mutex> guard(error_lock);
        if (!error) error = std::current_exception();
        next = points.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

namespace {

cplx polar_midpoint(cplx g0, cplx g1) {
  const double r0 = std::abs(g0), r1 = std::abs(g1);
  if (r0 == 0.0 || r1 == 0.0) return 0.5 * (g0 + g1);
  const double turn = std::arg(g1 / g0);
  return std::polar(std::sqrt(r0 * r1), std::arg(g0) + 0.5 * turn);
}

struct Refiner {
  const ComplexMap& f;
  int max_level;
  WindingResult& res;

  double step(const EvansSample& s0, const EvansSample& s1, int level) {
    const double d = std::arg(s1.value / s0.value);
    if (std::abs(d) <= std::numbers::pi / 3.0) {
      res.max_arg_step = std::max(res.max_arg_step, std::abs(d));
      res.deepest_level = std::max(res.deepest_level, level);
      res.samples.push_back(s1);
      return d;
    }
    if (level >= max_level)
      fail(ErrorCode::contour_resolution, "argument step " + std::to_string(d) + " unresolved after " +
                                              std::to_string(max_level) + " bisections");
    const cplx gm = polar_midpoint(s0.gamma, s1.gamma);
    const EvansSample mid{gm, f(gm)};
    return step(s0, mid, level + 1) + step(mid, s1, level + 1);
  }
};

}  // namespace

WindingResult winding_number(const ComplexMap& f, const std::vector<cplx>& contour, int max_level, unsigned threads) {
  if (contour.size() < 3) fail(ErrorCode::invalid_argument, "contour needs at least three points");
  if (std::abs(contour.front() - contour.back()) > 1e-12 * std::max(1.0, std::abs(contour.front())))
    fail(ErrorCode::invalid_argument, "contour must be closed");
  const auto base = evaluate_on(f, contour, threads);
  for (const auto& s : base)
    if (!std::isfinite(s.value.real()) || !std::isfinite(s.value.imag()) || s.value == cplx(0.0))
      fail(ErrorCode::contour_resolution, "zero or non-finite value on the contour");

  WindingResult res;
  res.samples.push_back(base.front());
  Refiner refine{f, max_level, res};
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < base.size(); ++k) total += refine.step(base[k], base[k + 1], 0);
  res.turns = total / (2.0 * std::numbers::pi);
  res.winding = static_cast<int>(std::lround(res.turns));
  res.deviation = std::abs(res.turns - res.winding);
  return res;
}

WindingResult winding_number(const SpectralSetup& s, const std::vector<cplx>& contour, int max_level,
                             unsigned threads) {
  return winding_number([&s](cplx g) { return evans(g, s); }, contour, max_level, threads);
}

}  // namespace branchwave
