#pragma once

#include "branchwave/analysis.hpp"
#include "branchwave/odeint.hpp"
#include "branchwave/wave.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace branchwave {

struct SpectralOptions {
  double L = 50.0;
  double w_exp = 0.0;        // <= 0 selects c / 2
  double seed_eps = 1e-10;   // the profile must reach back past -L
  odeint::IntegratorOptions integrator{1e-8, 1e-11, 0.25, 2'000'000, false};
};

// Cubic Hermite interpolation of (a, i) along a shot profile, frozen at the limits outside it.
class ProfileInterpolant {
 public:
  ProfileInterpolant() = default;
  explicit ProfileInterpolant(const WaveProfile& w);

  // returns (a, i)
  std::pair<double, double> operator()(double z) const;
  double z_min() const { return z_.front(); }
  double z_max() const { return z_.back(); }

 private:
  std::vector<double> z_, a_, da_, i_, di_;
  double i_left_ = 0.0, i_right_ = 0.0;
};

struct SpectralSetup {
  WaveProfile wave;
  ProfileInterpolant profile;
  double w_exp = 1.0;
  double L = 50.0;
  Params params;
  odeint::IntegratorOptions integrator;
};

// Critical wave (i_{-inf} = 2 - i_c) for p.
SpectralSetup make_spectral_setup(const Params& p, const SpectralOptions& opts = {});
SpectralSetup make_spectral_setup(WaveProfile wave, const SpectralOptions& opts);

Eigen::Matrix3cd linearization_matrix(double z, cplx gamma, const SpectralSetup& s);

struct Splitting {
  std::array<Eigen::Vector3cd, 2> unstable_minus;
  Eigen::Vector3cd stable_plus;
  std::array<cplx, 3> shifted_minus;  // gamma/c, mu+, mu- at -inf, each plus w_exp
  std::array<cplx, 3> shifted_plus;   // same at +inf
  int k_minus = 0;                    // shifted eigenvalues with positive real part at -inf
  int k_plus = 0;                     // shifted eigenvalues with negative real part at +inf
};

Splitting limit_splitting(cplx gamma, const SpectralSetup& s);

cplx evans(cplx gamma, const SpectralSetup& s);

struct EvansSample {
  cplx gamma;
  cplx value;
};

std::vector<cplx> contour_of_S(double r_min, double r_max, std::size_t base_n);

struct WindingResult {
  int winding = 0;
  double turns = 0.0;          // total argument change / 2 pi
  double deviation = 0.0;      // distance of turns from the nearest integer
  double max_arg_step = 0.0;   // worst accepted step, radians
  int deepest_level = 0;       // refinement depth reached
  std::vector<EvansSample> samples;  // in contour order, refinements included
};

using ComplexMap = std::function<cplx(cplx)>;

// Parallel evaluation over the points; threads = 0 uses the hardware concurrency.
std::vector<EvansSample> evaluate_on(const ComplexMap& f, const std::vector<cplx>& points, unsigned threads = 0);

WindingResult winding_number(const ComplexMap& f, const std::vector<cplx>& contour, int max_level = 12,
                             unsigned threads = 0);
WindingResult winding_number(const SpectralSetup& s, const std::vector<cplx>& contour, int max_level = 12,
                             unsigned threads = 0);

}  // namespace branchwave
