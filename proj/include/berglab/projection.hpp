#pragma once

// Discretized weighted projection on the disk: boundary-clustered polar
// quadrature, the radial Schur-test integral, the piecewise bounds on the
// f_r integrand, and p-norm power iteration on the quadrature operator.
//
// Two weight frames are supported. kTheorem5 splits the operator weight v
// symmetrically (v^{1/2} on each side), giving the frame in which the
// operator stays bounded for every p. kDostanic keeps the natural L^p(v)
// pairing, i.e. v^{1/p} on the output and v^{1/p'} on the input side, which
// is bounded only at p = 2.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "berglab/kernel.hpp"

namespace berglab::projection {

struct PolarGrid {
  Array s;       // radial nodes, strictly increasing, inside (0,1)
  Array w;       // ds-quadrature weights
  int n_angles;  // equispaced circle samples
  Scalar u_max;  // clustering depth: s(t) = 1 - e^{-u_max t}, t in (0,1)
};

// Composite Gauss-Legendre in the exponentially clustered variable. The grid
// covers [0, ~1-e^{-u_max}]: refining n_radial keeps the depth fixed, so the
// mass deficit of int 2s ds is ~2 e^{-u_max}. Radial-integral grids take
// u_max ~ 25 (deficit < 1e-10); operator grids stay shallow so the kernel
// stays certifiable at pairwise node products. n_radial must be a positive
// multiple of 8, n_angles a power of two >= 8.
PolarGrid make_polar_grid(int n_radial, int n_angles, Scalar u_max);

enum class Pairing { kTheorem5, kDostanic };

// Left side minus right side of
//   1/(1-sqrt(sr)) - 1/(2(1-r)) - 1/(2(1-s))
//     = (1/2) (sqrt(s)-sqrt(r))/(1-sqrt(sr)) (sqrt(r)/(1-r) - sqrt(s)/(1-s)).
Scalar ident2_residual(Scalar r, Scalar s);
// The left side itself (never positive on (0,1)^2).
Scalar ident2_lhs(Scalar r, Scalar s);

// exp(alpha/(1-sqrt(sr)) - alpha/(2(1-r)) - alpha/(2(1-s))) s/(1-sqrt(sr))^{3/2},
// exponent combined before exponentiation so nothing overflows.
Scalar f_r_integrand(Scalar alpha, Scalar r, Scalar s);

struct PiecewiseBounds {
  Scalar head = 0;        // [0, 1/2]
  Scalar middle = 0;      // [r - (1-r)^{3/2}, r + (1-r)^{3/2}]
  Scalar tail = 0;        // [r + (1-r)^{3/2}, 1]
  Scalar inner = 0;       // [1/2, r - (1-r)^{3/2}]; zero when empty
  Scalar middle_cap = 0;  // interval length times the prefactor sup
};

// Integrates f_r over the four proof intervals. Requires r > 1/2.
PiecewiseBounds piecewise_bounds(Scalar alpha, Scalar r);

// Row integral of the weighted kernel over the normalized disk area,
//   I(r) = (1/pi) int_0^1 int_0^{2pi} |K(r s e^{it})| W_z(r) W_zeta(s) s dt ds,
// with the pairing's weight factors: kTheorem5 uses v^{1/2}(r) v^{1/2}(s),
// kDostanic the unsplit v(s). The grid sets the clustering depth and base
// panel density; panels are regraded around s = r, where the integrand
// concentrates on a width no fixed layout resolves at deep r.
Scalar schur_integral(const kernel::KernelModel& model, Scalar r,
                      const PolarGrid& grid, Pairing pairing);

// Quadrature operator restricted to angular modes 0..n_angles-1, in
// block-circulant form. Each mode acts as a rank-one radial matrix
//   block_m = left.col(m) * right.col(m)^T
// (kernel coefficient, frame factors and quadrature weights folded into the
// factors). Restricting beats sampling: an equispaced angular sample of the
// kernel folds every unresolved coefficient onto the stored modes, and the
// folded terms inflate operator norms by orders of magnitude, while the mode
// restriction is a genuine compression of the projection, so every norm
// lower bound computed here transfers to the full operator. Node vectors are
// radial-major (index = radial * n_angles + angle); norms weight node i by
// node_w[radial(i)] / n_angles.
struct DiscreteProjection {
  int n_radial = 0;
  int n_angles = 0;
  Pairing pairing = Pairing::kTheorem5;
  Scalar p = 2;
  Scalar alpha = 0;
  Array s;
  Array node_w;     // 2 s_j w_j, sums to ~1
  Array log_left;   // log of the output-side frame factor at s_j
  Array log_right;  // log of the input-side frame factor at s_j
  Eigen::MatrixXd left;   // n_radial x n_angles rank-one factors, output side
  Eigen::MatrixXd right;  // n_radial x n_angles rank-one factors, input side
};

// Builds the per-mode rank-one factors,
//   left(i,m) right(j,m) = c_m (s_i s_j)^m W_z(s_i) W_zeta(s_j) s_j w_j,
// so apply_raw realizes (P_M f)(z_i) = sum_j w_j s_j K_M(z_i conj(zeta_j))
// v(zeta_j) f(zeta_j) with K_M the kernel cut to angular degree < n_angles.
// Throws std::length_error past the memory budget, std::runtime_error when
// the model cannot certify that many coefficients at the deepest node pair,
// and std::overflow_error if a frame factor leaves double range.
DiscreteProjection assemble_projection(const kernel::KernelModel& model,
                                       const PolarGrid& grid, Pairing pairing,
                                       Scalar p);

// Flat-frame apply: the conjugated operator acting on plain node vectors.
Eigen::VectorXcd apply_flat(const DiscreteProjection& proj,
                            const Eigen::VectorXcd& x);

// Raw projection values (P f)(z_i) from node samples of f. Needs the frame
// factors nonzero in double range; throws std::domain_error on grids so deep
// that the raw frame underflows.
Eigen::VectorXcd apply_raw(const DiscreteProjection& proj,
                           const Eigen::VectorXcd& f);

// Weighted p-norm of a node vector in the projection's flat frame.
Scalar node_pnorm(const DiscreteProjection& proj, const Eigen::VectorXcd& x);

// Lower bound on the flat-frame p -> p operator norm: nonlinear power
// iteration (dual-exponent signed-power map), 8 seeded restarts, running max
// over iterations. One restart starts dense, the rest start on single
// angular modes (invariant subspaces, so each converges to that mode's exact
// rank-one norm, including the top mode). iterations >= 16.
Scalar opnorm_lower(const DiscreteProjection& proj, int iterations,
                    std::uint64_t seed);

}  // namespace berglab::projection
