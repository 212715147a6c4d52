#pragma once

// Plane (Fock) analogue of the disk machinery: growth checks on the radial
// profile Psi(x) = 2 phi(sqrt x), kernels with reciprocal-moment
// coefficients, and the plane Schur integral in the split e^{-phi} pairing.

#include <complex>

#include "berglab/moments.hpp"
#include "berglab/weights.hpp"

namespace berglab::fock {

using weights::WeightSpec;

// Closed-form derivatives of Psi(x) = 2 phi(sqrt x) on a grid, with the
// admission verdicts: Psi' > 0, Psi'' >= 0, Psi''' >= 0, and boundedness of
//   ratio(x) = (2 Psi''(x) + x Psi'''(x)) sqrt(x) / (Psi'(x) + x Psi''(x))^{1+eta}
// toward infinity. Failing a condition is a reported verdict, not an error.
struct ProfileReport {
  Scalar eta = 0;
  Array x;
  Array psi1, psi2, psi3;  // Psi', Psi'', Psi'''
  Array ratio;
  bool slope_positive = false;  // Psi' > 0 everywhere
  bool convex = false;          // Psi'' >= 0 everywhere
  bool third_nonneg = false;    // Psi''' >= 0 everywhere
  bool ratio_bounded = false;   // finite sup, nonincreasing tail
  Scalar ratio_sup = 0;
  bool admissible = false;  // all four verdicts hold
};

// Requires a plane family, eta < 1/2, and a positive increasing grid.
ProfileReport class_s_check(const WeightSpec& spec, const Array& x_grid,
                            Scalar eta);

struct FockKernelModel {
  WeightSpec spec;
  Array log_coeffs;  // log(1/m_n), m_n the 2n-th radial weight moment
  long n_max = 0;
  Scalar tol = 1e-10;
};

// Tabulates log m_n via the plane moment quadrature and validates that the
// moment sequence is log-convex. n_max >= 16, tol >= 1e-12.
FockKernelModel build_fock_kernel(const WeightSpec& spec, long n_max,
                                  Scalar tol);

// Series sum_n u^n / m_n, every term exponentiated from one combined log so
// no intermediate power overflows. Throws when the term ladder has not
// dropped a factor tol below its peak by n_max. The value itself still
// overflows to inf once log K exceeds ~709; the Schur integral below works
// in logs and has no such ceiling.
Complex eval_fock_kernel(const FockKernelModel& model, Complex u);

// log of the circle mean (1/2pi) int |K(x e^{it})| dt at x >= 0, the plane
// counterpart of the disk kernel's integral mean: coefficients folded onto
// an FFT grid (exact on equispaced angles), doubled until stable to 1e-6.
Scalar fock_mean_m1(const FockKernelModel& model, Scalar x);

struct FockSchur {
  Array t;      // |z| grid
  Array value;  // I(t)
  Scalar sup = 0;
};

// Plane Schur integral reduced by rotation invariance (area measure dA/pi):
//   I(t) = int_0^inf 2 s mean|K|(t s) e^{-phi(t) - phi(s)} ds.
// The upper limit is found per t by stepping outward in fixed cells until
// the log-integrand drops 40 e-folds below its running peak; reaching r_max
// without that drop is an error. The quadrature then runs cell by cell, so
// a peak much narrower than the integration range cannot slip between the
// nodes of one wide panel. tol is the per-cell relative quadrature target.
FockSchur fock_schur_integral(const FockKernelModel& model,
                              const Array& t_grid, Scalar r_max, Scalar tol);

// Decay of phi^{(n)}/(phi')^n on a plane grid; the plane twin of
// weights::check_limit_condition, restricted to Fock families.
weights::LimitCheck fock_limit_condition_check(const WeightSpec& spec, int n,
                                               const Array& r_grid);

}  // namespace berglab::fock
