#pragma once

// Reproducing kernel of the exponentially weighted space on the disk:
// K(z,zeta) = sum_k u^k / v_{2k+1} with u = z * conj(zeta). A KernelModel
// tabulates log coefficients once; evaluation, certified truncation, integral
// means and the h(x) peak analysis all run off that table.
//
// Integral means and their bounds are returned as LOG values: at the radii
// the band checks need (r ~ 0.999+), M1 reaches e^2000 and would overflow.

#include "berglab/numerics.hpp"
#include "berglab/weights.hpp"

namespace berglab::kernel {

struct KernelModel {
  weights::WeightSpec spec;  // ExpDisk(alpha)
  Scalar alpha = 1.0;
  Array log_coeffs;          // log c_k = -log v_{2k+1}, k = 0..n_max
  long n_max = 0;
  Scalar tol = 1e-10;
  // max_k [log c_k - (3/4) log(2k+1) - 2 sqrt(alpha (2k+1))]: empirical
  // majorant constant used by the truncation bound
  Scalar log_band_const = 0;
};

// Tabulates coefficients via the moment quadrature; validates that log c_k
// increases strictly. n_max >= 16, tol >= 1e-12.
KernelModel build_kernel(Scalar alpha, long n_max, Scalar tol = 1e-10);

// argmax_k [log c_k + k log r]: the dominant series index at radius r.
long coeff_peak_index(const KernelModel& m, Scalar r);

// Smallest N whose certified geometric tail majorant falls below
// tol * (largest single term). Throws std::runtime_error("kernel model too
// small...") when n_max cannot certify radius r.
long truncation_index(const KernelModel& m, Scalar r, Scalar tol);

// Plain complex evaluation (Horner on rescaled coefficients). Intended for
// moderate |u|; overflows to inf when log K exceeds ~709.
Complex eval_kernel(const KernelModel& m, Complex u);

// log of M1(r, K) = int_0^{2pi} |K(r e^{it})| dt. Uniform angle grid of
// n_angles (power of two, >= 256) evaluated exactly via an FFT of the
// mod-n_angles folded coefficients, doubled until stable to 1e-6.
Scalar integral_mean_m1(const KernelModel& m, Scalar r, int n_angles = 256);

// log of exp(alpha/(1 - sqrt(r))) / (1-r)^{3/2}.
Scalar m1_asymptote(Scalar alpha, Scalar r);

// h(x) = (3/4) log x + 2 sqrt(alpha x) + x log rho, and its maximizer
// x_rho = ((sqrt(alpha + 3 log(1/rho)) + sqrt(alpha)) / (2 log(1/rho)))^2.
Scalar h_function(Scalar alpha, Scalar rho, Scalar x);
Scalar x_rho(Scalar alpha, Scalar rho);

// log of 2 pi max_k c_k r^k: the coefficient lower bound for M1.
Scalar m1_lower_bound(const KernelModel& m, Scalar r);

}  // namespace berglab::kernel
