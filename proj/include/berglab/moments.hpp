#pragma once

// Weighted power moments of radial weights: on the disk
//   v_{lambda, log^n} = int_0^1 r^lambda (log 1/r)^n w(r) dr,
// computed after the substitution t = log(1/r) as a Laplace-type integral
// with a located peak, a fixed e-fold window, and adaptive quadrature inside
// the window. Everything is accumulated in log space; values returned as
// (log_value, rel_err).

#include "berglab/weights.hpp"

namespace berglab::moments {

using weights::WeightSpec;

struct MomentResult {
  Scalar log_value = kNegInf;
  Scalar rel_err = 0;
};

// Disk families; lambda >= 0 real, logpow >= 0 integer, tol >= 1e-14.
MomentResult moment(const WeightSpec& spec, Scalar lambda, int logpow,
                    Scalar tol = 1e-12);

// Plane families; m_n = 2 int_0^inf r^{2n+1} w(r) dr (n real >= 0 allowed).
MomentResult fock_moment(const WeightSpec& spec, Scalar n, Scalar tol = 1e-12);

// log( lambda^{-(2 logpow + 3)/4} exp(-2 sqrt(alpha lambda)) ).
Scalar moment_asymptote(Scalar alpha, Scalar lambda, int logpow);

// exp(-alpha/(1-r)) <= exp(-alpha/log(1/r)) <= e^alpha exp(-alpha/(1-r)),
// integrated against r^lambda: checks the two-sided bound and reports slack.
struct SandwichCheck {
  Scalar log_lower = 0, log_mid = 0, log_upper = 0;
  Scalar slack_low = 0, slack_high = 0;  // log(mid/lower), log(upper/mid)
  bool holds = false;
};
SandwichCheck moment_sandwich_check(Scalar alpha, Scalar lambda,
                                    Scalar tol = 1e-12);

struct MomentTable {
  WeightSpec spec;
  int logpow = 0;
  Array lambda, log_value, err, log_asymptote, ratio;
};

// Table over a strictly increasing lambda grid; validates monotone decay of
// log v. The asymptote/ratio columns are populated for ExpDisk only.
MomentTable make_moment_table(const WeightSpec& spec, int logpow,
                              const Array& lambdas, Scalar tol = 1e-12);

namespace detail {
// Shared Laplace-window integrator: given g(t) (log integrand) unimodal on
// (lo, hi), returns log int_lo^hi e^{g}. A positive peak_hint skips the
// geometric scan and brackets the peak at [hint/4, 4 hint] (used on the hot
// path where the peak solves a known quadratic). Exposed for the sandwich
// middle integral and the Fock radial integral.
MomentResult log_integral_peaked(const std::function<Scalar(Scalar)>& g,
                                 Scalar scan_lo, Scalar scan_hi, Scalar tol,
                                 const char* what, Scalar peak_hint = -1);
}  // namespace detail

}  // namespace berglab::moments
