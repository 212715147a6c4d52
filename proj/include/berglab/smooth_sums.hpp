#pragma once

// Smooth dyadic partial sums on the circle: a concrete C-infinity cutoff, the
// polynomial blocks it generates, Hardy norms by circle sampling, and the
// block-envelope chain that upper-bounds the kernel integral means.

#include "berglab/kernel.hpp"

namespace berglab::smooth_sums {

// cutoff: 1 for t <= 1, 0 for t >= 2, strictly decreasing and C-infinity
// in between (glued from exp(-1/x) edges)
Scalar bump_psi(Scalar t);

// band profile psi(t) = bump_psi(t/2) - bump_psi(t); supported on (1,4),
// equal to 1 at t = 2
Scalar psi(Scalar t);

// dyadic polynomial block; coeffs[i] multiplies z^{k_min + i}
struct PolyBlock {
  int n = 0;
  long k_min = 0;
  Array coeffs;
};

// block 0 is 1 + z; block n >= 1 carries psi(k / 2^{n-1}) on
// [2^{n-1}, 2^{n+1} - 1]
PolyBlock vn_block(int n);

// coefficientwise product; result has f's shape
Array hadamard(const Array& f, const PolyBlock& b);

// ((1/2pi) int |sum_k c_k e^{ikt}|^p dt)^{1/p} by exact mod-M coefficient
// folding + FFT, doubling the angle count until 1e-6 relative stability
Scalar hardy_norm(const Array& coeffs, Scalar p, int n_angles = 256);

// least-squares slope of log2 of the block H^p norm against n on [n_lo, n_hi]
Scalar vn_norm_scaling(Scalar p, int n_lo = 5, int n_hi = 12);

// max of F(x) = r^x / v_{2x+1} over the dyadic window [2^{n-1}, 2^{n+1}]
struct BlockEnvelope {
  Scalar log_max = kNegInf;
  Scalar argmax = 0;
};
BlockEnvelope phi_n_envelope(const kernel::KernelModel& model, Scalar r, int n);

// recorded constant: max over (n, r) probes of the un-normalized block H1
// norm divided by the block envelope max (calibration table in the tests)
inline constexpr Scalar kChainKappa = 8.0;

// C' + sum_{n>=3} kappa * M_n against M1(r, K): blocks below 3 contribute
// their exact circle norms, the rest their envelope maxima
struct ChainBound {
  Scalar log_bound = kNegInf;
  Scalar log_m1 = kNegInf;
  Scalar ratio = 0;  // bound / M1, >= 1 when kappa covers every block
};
ChainBound upper_bound_chain(const kernel::KernelModel& model, Scalar r,
                             Scalar kappa = kChainKappa);

// window identity: the n-th block of the kernel slice equals the block
// profile (F times a plateau bump) Hadamard-multiplied into the block.
// Returns the max coefficient discrepancy relative to the largest
// coefficient, folding in any deviation of the bump from 1 on the plateau.
Scalar wphi_identity_check(const kernel::KernelModel& model, Scalar r, int n);

// empirical constants for the smoothed-block norm inequality
// ||profile block||_{H1} <= kappa * (max|Phi| + max|Phi''|) * ||V_n||_{H1}
struct CesaroProbe {
  Scalar log_lhs = kNegInf;  // log H1 norm (normalized) of the profile block
  Scalar log_a2 = kNegInf;   // log(max|Phi| + max|Phi''|) by dense sampling
  Scalar vn_h1 = 0;
  Scalar kappa = 0;          // exp(log_lhs - log_a2) / vn_h1
};
CesaroProbe cesaro_probe(const kernel::KernelModel& model, Scalar r, int n);

}  // namespace berglab::smooth_sums
