#pragma once

#include "branchwave/model.hpp"

#include <Eigen/Core>

#include <complex>
#include <span>

namespace branchwave {

using cplx = std::complex<double>;

struct Spectrum3 {
  double lambda0 = 0.0;
  cplx lambda_plus;
  cplx lambda_minus;
  double discriminant = 0.0;  // c^2/4 + K - 1
};

Spectrum3 fixed_point_spectrum(double K, double c);

// Diagonalization of the linear part at (0,0,K) in (j, a, b) coordinates, j = i - K.
struct Eigenbasis {
  Eigen::Vector3cd e0, e_plus, e_minus;
  Eigen::Matrix3cd E;
  Eigen::Matrix3cd E_inv;
  Eigen::Vector3cd Ddiag;
};

Eigen::Matrix3d normal_form_matrix(double K, double c, double r);
Eigenbasis eigenbasis(double K, double c, double r);

struct Vec2 {
  double a = 0.0;
  double b = 0.0;
};

// Fixed-i reduction of the (a, b) dynamics.
struct Subsystem2 {
  double i = 0.0;
  double lambda_plus = 0.0, lambda_minus = 0.0;  // at (0, 0)
  double beta_plus = 0.0, beta_minus = 0.0;      // at (1 - i, 0)
  Vec2 l_plus, l_minus, r_plus, r_minus;
};

Subsystem2 subsystem_spectrum(double i, double c);
Vec2 subsystem_rhs(const Vec2& s, double i, double c);

struct Triangle {
  double i = 0.0;
  Vec2 v0, v1, apex;
  double gamma_l = 0.0, gamma_r = 0.0;
};

Triangle triangle(double i, double c);
bool triangle_contains(const Triangle& t, const Vec2& p, double tol);

double minimal_inactive_limit(double c);
double decay_rate(double i_limit, double c);
double i_plus_infinity(double a0, double i0, double c, double r);
double alpha_threshold(double i0, double c, double r);
double a_star(double i0, double c, double r);
double a_at_first_max(double i_minus_inf, double i_z0, double c, double r);
double limit_symmetry(double i_minus_inf);

struct MassResiduals {
  double res1 = 0.0;  // int a(a+i) = A + c (a2 - a1)
  double res2 = 0.0;  // i1 - i2 = (1+r)/c A + a2 - a1
  double res3 = 0.0;  // int a(a+i) in terms of A and endpoint values
  double total_mass = 0.0;
};

// Samples are (a, b, i) triples; both ends must be critical points of a (|b| < 1e-8).
MassResiduals mass_residuals(std::span<const double> z, std::span<const Eigen::Vector3d> states, const Params& p);

}  // namespace branchwave
