#pragma once

#include "branchwave/error.hpp"
#include "branchwave/model.hpp"

#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace branchwave {

struct Grid {
  double x_min = -100.0;
  double x_max = 100.0;
  std::size_t n = 2001;
  double dx = 0.1;

  double x(std::size_t k) const { return x_min + static_cast<double>(k) * dx; }
};

Grid make_grid(double x_min, double x_max, std::size_t n);

struct FieldPair {
  double t = 0.0;
  std::vector<double> A;
  std::vector<double> I;
};

struct FieldSeries {
  Grid grid;
  Params params;
  std::vector<FieldPair> snapshots;

  const FieldPair& at(double t) const;  // nearest snapshot, error if none within half a snapshot gap
};

class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, FieldSeries partial)
      : Error(ErrorCode::blow_up, what), partial_(std::move(partial)) {}
  const FieldSeries& partial() const noexcept { return partial_; }

 private:
  FieldSeries partial_;
};

double stable_time_step(const Grid& g);

FieldSeries simulate(std::vector<double> A0, std::vector<double> I0, const Params& p, const Grid& grid,
                     double t_end, double snapshot_dt);

inline constexpr double no_front = -std::numeric_limits<double>::infinity();

double front_position(std::span<const double> A, const Grid& grid, double threshold);

struct SpeedFit {
  double c_est = 0.0;
  double residual = 0.0;  // rms misfit of the front positions
  double t1 = 0.0, t2 = 0.0;
  std::size_t samples = 0;
};

SpeedFit measure_speed(const FieldSeries& series, double threshold, std::pair<double, double> window);

struct ComovingProfile {
  std::vector<double> z;
  std::vector<double> a;
  std::vector<double> i;
  double t = 0.0;
  double c_est = 0.0;
  double x_front = 0.0;
  double anchor = 0.0;
};

ComovingProfile comoving_profile(const FieldSeries& series, double t, double c_est, double anchor);

// Mean of I over [lo, hi] * x_front behind the right-moving front.
double plateau_level(const FieldPair& snap, const Grid& grid, double threshold, double lo = 0.25, double hi = 0.5);

struct ShapeMismatch {
  double shift = 0.0;
  double a_error = 0.0;  // sup |a_pde - a_ref| / max a_ref on the window
  double i_error = 0.0;  // same for i
};

// Compares a comoving profile with a reference (z, a, i) sampled on increasing z. The reference
// is first aligned on its own leading anchor crossing, then shifted within [-max_shift, max_shift].
ShapeMismatch compare_shapes(const ComovingProfile& prof, std::span<const double> ref_z,
                             std::span<const double> ref_a, std::span<const double> ref_i, double z_lo,
                             double z_hi, double max_shift = 5.0);

// Mass balance d/dt int(A + I) = (1 + r) int A, checked by trapezoid rules in x and t.
double mass_balance_residual(const FieldSeries& series);

}  // namespace branchwave
