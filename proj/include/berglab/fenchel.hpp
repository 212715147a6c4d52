#pragma once

// Legendre-Fenchel machinery: the numeric transform inf_{t>0}[v(t) + x t],
// closed forms for the weighted-moment exponent and its inverse transform,
// and the boundary series whose growth the inverse transform predicts.

#include "berglab/numerics.hpp"

#include <functional>

namespace berglab::fenchel {

struct LFResult {
  Scalar x = 0;
  Scalar value = 0;
  Scalar minimizer_t = 0;
  Scalar curvature = 0;  // d^2/dt^2 [v(t) + x t] at the minimizer
};

// inf over t in (0, inf) of v(t) + x t, for v unimodal-convex on the searched
// range. Coarse log-grid scan brackets the minimum inside [1e-12, 1e12],
// derivative-free refinement narrows it, and a Newton polish on f' finishes
// once the bracket is tight. Any real x is accepted; the minimum must be
// interior (an edge minimum throws ConvergenceError).
LFResult lf_transform(const std::function<Scalar(Scalar)>& v, Scalar x);

// L(x) = sqrt(n^2 + 4 alpha x) + n log(2x / (sqrt(n^2 + 4 alpha x) + n)),
// the transform of v(t) = alpha/t - n log t; n = 0 collapses to 2 sqrt(a x).
Scalar lf_closed_form(Scalar alpha, int n, Scalar x);

// u(t) = (2a + t + 2 sqrt(a(a-t)))/(4t) - log((sqrt a + sqrt(a-t))/(2t))/2
// on 0 < t < alpha.
Scalar inverse_lf_closed_form(Scalar alpha, Scalar t);

// e^{u(t)} / (sqrt(t) e^{alpha/t}); tends to alpha^{-1/4} as t -> 0+.
Scalar inverse_lf_ratio(Scalar alpha, Scalar t);

struct SeriesAsymptote {
  Scalar log_partial_sum = kNegInf;
  Scalar log_asymptote = 0;
  Scalar ratio = 0;  // partial_sum / asymptote
};

// sum_{n=2}^{N} n^{-1/4} e^{2 sqrt(alpha n)} rho^n compared against
// exp(alpha/(1-rho))/(1-rho). The tail beyond N must be provably below
// e^{-30} of the largest term (geometric majorant), else ConvergenceError.
SeriesAsymptote series_boundary_asymptote(Scalar alpha, Scalar rho,
                                          long n_terms);

}  // namespace berglab::fenchel
