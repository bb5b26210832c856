#pragma once

#include "branchwave/error.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace branchwave {

// Normalized constants: speed c and direct production rate r.
struct Params {
  double c = 2.0;
  double r = 0.0;
};

void validate(const Params& p);

// Constants of the dimensional system before rescaling.
struct GeneralParams {
  double r_S = 1.0;  // saturation
  double r_A = 1.0;  // branching
  double r_I = 0.0;  // direct production
  double D = 1.0;    // diffusion
};

void validate(const GeneralParams& g);

struct Scaling {
  double time_factor = 1.0;     // r_A
  double space_factor = 1.0;    // sqrt(D / r_A)
  double density_factor = 1.0;  // r_S / r_A
};

// A point (a, b, i) of the wave ODE, b = a'.
struct WaveState {
  double a = 0.0;
  double b = 0.0;
  double i = 0.0;

  Eigen::Vector3d vec() const { return {a, b, i}; }
  static WaveState from(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

WaveState wave_rhs(const WaveState& s, const Params& p);
Eigen::Matrix3d wave_jacobian(const WaveState& s, const Params& p);

struct FieldRates {
  std::vector<double> dA;
  std::vector<double> dI;
};

FieldRates pde_rhs(std::span<const double> A, std::span<const double> I, const Params& p, double dx);

// Allocation-free variant used by the time stepper; outputs must be sized like A.
void pde_rhs_into(std::span<const double> A, std::span<const double> I, const Params& p, double dx,
                  std::span<double> dA, std::span<double> dI);

struct Normalized {
  Params params;  // c is left at its default; speed is converted separately
  Scaling scaling;
};

Normalized normalize(const GeneralParams& g);
GeneralParams denormalize(const Params& p, const Scaling& s);

// Speed in normalized units for a front moving at c in general units.
double normalized_speed(double c, const Scaling& s);

struct GeneralPredictions {
  double i_c = 0.0;        // minimal inactive limit
  double limit_sum = 0.0;  // i_{-inf} + i_{+inf}
  double c_min = 0.0;      // minimal invasion speed 2 sqrt(r_A D)
};

GeneralPredictions general_wave_predictions(const GeneralParams& g, double c);

// Decay/growth rate of the active density near the fixed point with inactive level `level`.
double general_decay_rate(const GeneralParams& g, double c, double level);

}  // namespace branchwave
