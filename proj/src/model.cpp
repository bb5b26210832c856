#include "branchwave/model.hpp"

#include "branchwave/error.hpp"

#include <cmath>
#include <string>

namespace branchwave {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::shape_mismatch: return "input shape mismatch";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::degenerate_basis: return "degenerate eigenbasis";
    case ErrorCode::oscillatory_regime: return "oscillatory regime";
    case ErrorCode::imaginary_root: return "imaginary root";
    case ErrorCode::invalid_segment: return "invalid segment";
    case ErrorCode::not_unstable: return "fixed point not unstable";
    case ErrorCode::non_convergence: return "integrator did not converge";
    case ErrorCode::oscillatory_failure: return "negativity detected";
    case ErrorCode::budget_exhausted: return "z budget exhausted";
    case ErrorCode::blow_up: return "blow-up";
    case ErrorCode::contaminated_measurement: return "contaminated measurement";
    case ErrorCode::splitting_failure: return "splitting failure";
    case ErrorCode::contour_resolution: return "contour resolution failure";
  }
  return "unknown error";
}

void validate(const Params& p) {
  if (!(p.c > 0.0) || !std::isfinite(p.c)) fail(ErrorCode::domain, "speed c must be positive, got " + std::to_string(p.c));
  if (!(p.r >= 0.0) || !std::isfinite(p.r)) fail(ErrorCode::domain, "rate r must be non-negative, got " + std::to_string(p.r));
}

void validate(const GeneralParams& g) {
  if (!(g.r_S > 0.0)) fail(ErrorCode::domain, "r_S must be positive");
  if (!(g.r_A > 0.0)) fail(ErrorCode::domain, "r_A must be positive");
  if (!(g.D > 0.0)) fail(ErrorCode::domain, "D must be positive");
  if (!(g.r_I >= 0.0)) fail(ErrorCode::domain, "r_I must be non-negative");
}

WaveState wave_rhs(const WaveState& s, const Params& p) {
  const double a = s.a, b = s.b, i = s.i, c = p.c;
  return {b, a * (a + i) - a - c * b, -(1.0 / c) * a * (a + i + p.r)};
}

Eigen::Matrix3d wave_jacobian(const WaveState& s, const Params& p) {
  const double a = s.a, i = s.i, c = p.c;
  Eigen::Matrix3d J;
  J << 0.0, 1.0, 0.0,
       2.0 * a + i - 1.0, -c, a,
       -(2.0 * a + i + p.r) / c, 0.0, -a / c;
  return J;
}

void pde_rhs_into(std::span<const double> A, std::span<const double> I, const Params& p, double dx,
                  std::span<double> dA, std::span<double> dI) {
  const std::size_t n = A.size();
  if (I.size() != n || dA.size() != n || dI.size() != n)
    fail(ErrorCode::shape_mismatch, "A and I fields must have equal length");
  if (n < 3) fail(ErrorCode::shape_mismatch, "fields need at least 3 points");
  if (!(dx > 0.0)) fail(ErrorCode::domain, "dx must be positive");

  const double inv = 1.0 / (dx * dx);
  for (std::size_t k = 0; k < n; ++k) {
    double lap;
    if (k == 0)
      lap = 2.0 * (A[1] - A[0]) * inv;
    else if (k == n - 1)
      lap = 2.0 * (A[n - 2] - A[n - 1]) * inv;
    else
      lap = (A[k + 1] - 2.0 * A[k] + A[k - 1]) * inv;
    const double growth = A[k] * (A[k] + I[k]);
    dA[k] = lap + A[k] - growth;
    dI[k] = growth + p.r * A[k];
  }
}

FieldRates pde_rhs(std::span<const double> A, std::span<const double> I, const Params& p, double dx) {
  if (A.size() != I.size()) fail(ErrorCode::shape_mismatch, "A and I fields must have equal length");
  FieldRates out{std::vector<double>(A.size()), std::vector<double>(A.size())};
  pde_rhs_into(A, I, p, dx, out.dA, out.dI);
  return out;
}

Normalized normalize(const GeneralParams& g) {
  validate(g);
  Normalized n;
  n.params.r = g.r_I / g.r_A;
  n.scaling.time_factor = g.r_A;
  n.scaling.space_factor = std::sqrt(g.D / g.r_A);
  n.scaling.density_factor = g.r_S / g.r_A;
  return n;
}

GeneralParams denormalize(const Params& p, const Scaling& s) {
  if (!(s.time_factor > 0.0 && s.space_factor > 0.0 && s.density_factor > 0.0))
    fail(ErrorCode::domain, "scaling factors must be positive");
  GeneralParams g;
  g.r_A = s.time_factor;
  g.D = s.space_factor * s.space_factor * g.r_A;
  g.r_S = s.density_factor * g.r_A;
  g.r_I = p.r * g.r_A;
  return g;
}

double normalized_speed(double c, const Scaling& s) { return c / (s.space_factor * s.time_factor); }

GeneralPredictions general_wave_predictions(const GeneralParams& g, double c) {
  validate(g);
  if (!(c > 0.0)) fail(ErrorCode::domain, "speed must be positive");
  GeneralPredictions out;
  out.i_c = std::max(0.0, (g.r_A - c * c / (4.0 * g.D)) / g.r_S);
  out.limit_sum = 2.0 * g.r_A / g.r_S;
  out.c_min = 2.0 * std::sqrt(g.r_A * g.D);
  return out;
}

double general_decay_rate(const GeneralParams& g, double c, double level) {
  validate(g);
  const double disc = c * c / (4.0 * g.D * g.D) + (g.r_S * level - g.r_A) / g.D;
  if (disc < 0.0) fail(ErrorCode::oscillatory_regime, "complex decay rate: discriminant " + std::to_string(disc));
  return -c / (2.0 * g.D) + std::sqrt(disc);
}

}  // namespace branchwave
