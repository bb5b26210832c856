#include "branchwave/analysis.hpp"

#include "branchwave/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace branchwave {

namespace {

// sqrt(q^2 + d) - q without cancellation, q >= 0.
double root_excess(double q, double d) {
  const double root = std::sqrt(q * q + d);
  const double denom = q + root;
  if (q > 0.0 && denom > 0.0) return d / denom;
  return root - q;
}

double cross(const Vec2& u, const Vec2& v) { return u.a * v.b - u.b * v.a; }
Vec2 sub(const Vec2& u, const Vec2& v) { return {u.a - v.a, u.b - v.b}; }

double angle_between(const Vec2& u, const Vec2& v) {
  return std::atan2(std::abs(cross(u, v)), u.a * v.a + u.b * v.b);
}

}  // namespace

Spectrum3 fixed_point_spectrum(double K, double c) {
  Spectrum3 s;
  s.discriminant = c * c / 4.0 + K - 1.0;
  const cplx root = std::sqrt(cplx(s.discriminant, 0.0));
  s.lambda_plus = -c / 2.0 + root;
  s.lambda_minus = -c / 2.0 - root;
  return s;
}

Eigen::Matrix3d normal_form_matrix(double K, double c, double r) {
  Eigen::Matrix3d M;
  M << 0.0, -(K + r) / c, 0.0,
       0.0, 0.0, 1.0,
       0.0, K - 1.0, -c;
  return M;
}

Eigenbasis eigenbasis(double K, double c, double r) {
  if (!(c > 0.0)) fail(ErrorCode::domain, "speed must be positive");
  if (std::abs(K - 1.0) < 1e-9 || std::abs(K - (1.0 - c * c / 4.0)) < 1e-9)
    fail(ErrorCode::degenerate_basis, "eigenvectors do not span at K = " + std::to_string(K));

  const Spectrum3 s = fixed_point_spectrum(K, c);
  const cplx lp = s.lambda_plus, lm = s.lambda_minus;
  const cplx delta = std::sqrt(cplx(s.discriminant, 0.0));
  const double p = (K + r) / c;

  Eigenbasis eb;
  eb.e0 << 1.0, 0.0, 0.0;
  eb.e_plus << p * lm / lp, -lm, K - 1.0;
  eb.e_minus << p * lp / lm, -lp, K - 1.0;
  eb.E.col(0) = eb.e0;
  eb.E.col(1) = eb.e_plus;
  eb.E.col(2) = eb.e_minus;
  eb.Ddiag << 0.0, lp, lm;

  const cplx two_delta = 2.0 * delta;
  const double one_minus_K = 1.0 - K;
  eb.E_inv << 1.0, -(K + r) / one_minus_K, -(K + r) / (c * one_minus_K),
              0.0, 1.0 / two_delta, -lp / (two_delta * one_minus_K),
              0.0, -1.0 / two_delta, lm / (two_delta * one_minus_K);
  return eb;
}

Subsystem2 subsystem_spectrum(double i, double c) {
  if (!(c > 0.0)) fail(ErrorCode::domain, "speed must be positive");
  if (!(i < 1.0) || !(i >= 0.0)) fail(ErrorCode::domain, "subsystem level must lie in [0, 1), got " + std::to_string(i));
  double disc = c * c / 4.0 + i - 1.0;
  if (disc < 0.0) {
    if (disc < -1e-12) fail(ErrorCode::oscillatory_regime, "spiral at the origin for i below i_c");
    disc = 0.0;
  }
  Subsystem2 s;
  s.i = i;
  s.lambda_plus = -c / 2.0 + std::sqrt(disc);
  s.lambda_minus = -c / 2.0 - std::sqrt(disc);
  const double saddle = std::sqrt(c * c / 4.0 + 1.0 - i);
  s.beta_plus = -c / 2.0 + saddle;
  s.beta_minus = -c / 2.0 - saddle;
  s.l_plus = {s.lambda_minus, 1.0 - i};
  s.l_minus = {s.lambda_plus, 1.0 - i};
  s.r_plus = {-s.beta_minus, 1.0 - i};
  s.r_minus = {-s.beta_plus, 1.0 - i};
  return s;
}

Vec2 subsystem_rhs(const Vec2& s, double i, double c) {
  return {s.b, s.a * (s.a + i) - s.a - c * s.b};
}

Triangle triangle(double i, double c) {
  const double ic = minimal_inactive_limit(c);
  if (i < ic - 1e-12 || !(i < 1.0))
    fail(ErrorCode::domain, "triangle needs i in [i_c, 1), got " + std::to_string(i));
  const Subsystem2 s = subsystem_spectrum(std::max(i, 0.0), c);

  Triangle t;
  t.i = i;
  t.v0 = {0.0, 0.0};
  t.v1 = {1.0 - i, 0.0};
  // -p l+ meets v1 - q r+ with p = q
  const double p = (1.0 - i) / (-s.lambda_minus - s.beta_minus);
  t.apex = {-p * s.lambda_minus, -p * (1.0 - i)};
  t.gamma_l = angle_between(sub(t.v1, t.v0), sub(t.apex, t.v0));
  t.gamma_r = angle_between(sub(t.v0, t.v1), sub(t.apex, t.v1));
  return t;
}

bool triangle_contains(const Triangle& t, const Vec2& p, double tol) {
  // v0 -> apex -> v1 runs counter-clockwise
  const Vec2 verts[3] = {t.v0, t.apex, t.v1};
  bool any_edge = false;
  for (int k = 0; k < 3; ++k) {
    const Vec2& from = verts[k];
    const Vec2& to = verts[(k + 1) % 3];
    const Vec2 edge = sub(to, from);
    const double len = std::hypot(edge.a, edge.b);
    if (len == 0.0) continue;
    any_edge = true;
    if (cross(edge, sub(p, from)) / len < -tol) return false;
  }
  if (!any_edge) return std::hypot(p.a - t.v0.a, p.b - t.v0.b) <= tol;
  return true;
}

double minimal_inactive_limit(double c) { return std::max(0.0, 1.0 - c * c / 4.0); }

double decay_rate(double i_limit, double c) {
  const double disc = c * c / 4.0 + i_limit - 1.0;
  if (disc < 0.0)
    fail(ErrorCode::oscillatory_regime, "complex rate at i = " + std::to_string(i_limit) + ", c = " + std::to_string(c));
  return -c / 2.0 + std::sqrt(disc);
}

double i_plus_infinity(double a0, double i0, double c, double r) {
  const double shift = i0 + a0 - 1.0;
  return 1.0 - std::sqrt(shift * shift + (1.0 + r) / (c * c) * (a0 * a0 + 2.0 * c * c * a0));
}

double alpha_threshold(double i0, double c, double r) {
  const double ic = minimal_inactive_limit(c);
  if (i0 < ic || !(i0 < 1.0))
    fail(ErrorCode::domain, "alpha threshold needs i0 in [i_c, 1), got " + std::to_string(i0));
  const double k = (c * c + 1.0 + r) / (c * c);
  const double gap = (1.0 - ic) * (1.0 - ic) - (1.0 - i0) * (1.0 - i0);
  return c * c / (1.0 + c * c + r) * root_excess(i0 + r, k * std::max(gap, 0.0));
}

double a_star(double i0, double c, double r) { return std::min(alpha_threshold(i0, c, r), 1.0 - i0); }

double a_at_first_max(double i_minus_inf, double i_z0, double c, double r) {
  const double lead = (i_minus_inf - 1.0) * (i_minus_inf - 1.0);
  const double gap = lead - (1.0 - i_z0) * (1.0 - i_z0);
  if (!(i_minus_inf > 1.0) || !(gap > 0.0))
    fail(ErrorCode::imaginary_root, "first-maximum formula needs (i_minus - 1)^2 > (1 - i_z0)^2");
  const double k = (c * c + 1.0 + r) / (c * c);
  return c * c / (1.0 + c * c + r) * root_excess(i_z0 + r, k * gap);
}

double limit_symmetry(double i_minus_inf) { return 2.0 - i_minus_inf; }

MassResiduals mass_residuals(std::span<const double> z, std::span<const Eigen::Vector3d> states, const Params& p) {
  if (z.size() != states.size() || z.size() < 2)
    fail(ErrorCode::shape_mismatch, "segment needs at least two matching samples");
  const Eigen::Vector3d& first = states.front();
  const Eigen::Vector3d& last = states.back();
  if (std::abs(first(1)) >= 1e-8 || std::abs(last(1)) >= 1e-8)
    fail(ErrorCode::invalid_segment, "segment endpoints must have |b| < 1e-8");

  double mass = 0.0, production = 0.0;
  for (std::size_t k = 1; k < z.size(); ++k) {
    const double h = z[k] - z[k - 1];
    const auto& u = states[k - 1];
    const auto& v = states[k];
    mass += 0.5 * h * (u(0) + v(0));
    production += 0.5 * h * (u(0) * (u(0) + u(2)) + v(0) * (v(0) + v(2)));
  }

  const double c = p.c, r = p.r;
  const double a1 = first(0), a2 = last(0), i1 = first(2), i2 = last(2);
  MassResiduals out;
  out.total_mass = mass;
  out.res1 = std::abs(production - (mass + c * (a2 - a1)));
  out.res2 = std::abs((i1 - i2) - ((1.0 + r) / c * mass + a2 - a1));
  out.res3 = std::abs(production -
                      ((i2 + a2) * mass + (1.0 + r) / (2.0 * c) * mass * mass + (a1 * a1 - a2 * a2) / (2.0 * c)));
  return out;
}

}  // namespace branchwave
