#include "berglab/moments.hpp"

#include <functional>

namespace berglab::moments {

namespace {

constexpr Scalar kWindowEfolds = 40.0;

// Bisects for g == target between a point where g < target and the peak.
Scalar window_edge(const std::function<Scalar(Scalar)>& g, Scalar t_peak,
                   Scalar target, bool left) {
  Scalar far = t_peak;
  const Scalar factor = left ? 0.5 : 2.0;
  for (int i = 0; i < 2000; ++i) {
    far *= factor;
    if (g(far) < target) break;
    if (left && far < 1e-300) break;
    if (!left && far > 1e300)
      throw ConvergenceError("window_edge: no decay found", far, 0);
  }
  Scalar inside = t_peak, outside = far;
  for (int i = 0; i < 48; ++i) {
    const Scalar mid = 0.5 * (inside + outside);
    if (g(mid) > target) inside = mid; else outside = mid;
  }
  return outside;
}

}  // namespace

namespace detail {

MomentResult log_integral_peaked(const std::function<Scalar(Scalar)>& g,
                                 Scalar scan_lo, Scalar scan_hi, Scalar tol,
                                 const char* what, Scalar peak_hint) {
  // Locate the peak: geometric scan (the integrands here are unimodal in
  // log t), then Brent refinement. A 1e-6 relative abscissa suffices: the
  // induced bias in g at a quadratic peak is ~|g''| (1e-6 t)^2, far below
  // the quadrature tolerance.
  MinResult peak;
  if (peak_hint > 0) {
    auto neg = [&](Scalar t) { return -g(t); };
    peak = brent_minimize(neg, 0.25 * peak_hint, 4.0 * peak_hint, 1e-6);
    peak.f = -peak.f;
    // Fall back to the full scan if the hinted bracket clipped the peak.
    if (g(0.26 * peak_hint) >= peak.f || g(3.9 * peak_hint) >= peak.f)
      peak = maximize_scan_brent([&](Scalar t) { return g(t); }, scan_lo,
                                 scan_hi, 80, 1e-7);
  } else {
    peak = maximize_scan_brent([&](Scalar t) { return g(t); }, scan_lo,
                               scan_hi, 80, 1e-7);
  }
  if (!std::isfinite(peak.f))
    throw ConvergenceError(std::string(what) + ": peak location failed",
                           kNegInf, 0);
  const Scalar target = peak.f - kWindowEfolds;
  const Scalar tl = window_edge(g, peak.x, target, true);
  const Scalar tr = window_edge(g, peak.x, target, false);
  const Scalar gmax = peak.f;
  QuadResult q = gk15_adaptive(
      [&](Scalar t) { return std::exp(g(t) - gmax); }, tl, tr, 0.5 * tol, 0.0,
      6000);
  if (!(q.value > 0))
    throw ConvergenceError(std::string(what) + ": vanishing integral", kNegInf,
                           0);
  MomentResult res;
  res.log_value = gmax + std::log(q.value);
  // Window tail sits kWindowEfolds below the peak and decays at least
  // geometrically; its relative weight is far below the quadrature floor.
  res.rel_err = q.abs_err / q.value + 5e-16;
  if (!q.converged)
    throw ConvergenceError(std::string(what) + ": quadrature budget exhausted",
                           res.log_value, res.rel_err);
  return res;
}

}  // namespace detail

MomentResult moment(const WeightSpec& spec, Scalar lambda, int logpow,
                    Scalar tol) {
  if (!spec.is_disk()) throw std::invalid_argument("moment: disk families only");
  if (!(lambda >= 0)) throw std::invalid_argument("moment: lambda must be >= 0");
  if (logpow < 0) throw std::invalid_argument("moment: logpow must be >= 0");
  if (!(tol >= 1e-14)) throw std::invalid_argument("moment: tol must be >= 1e-14");
  // t = log(1/r):  v = int_0^inf exp(-(lambda+1) t + logpow*log t + log w(e^-t)) dt.
  auto g = [&](Scalar t) -> Scalar {
    const Scalar r = -std::expm1(-t);  // 1 - e^{-t}, accurate near 0
    Scalar lw;
    if (spec.family == weights::Family::ExpDisk) {
      lw = -spec.alpha / r;
    } else {
      const Scalar rr = std::exp(-t);
      lw = rr < 1 ? weights::log_weight(spec, rr) : kNegInf;
    }
    Scalar v = -(lambda + 1) * t + lw;
    if (logpow > 0) v += logpow * std::log(t);
    return v;
  };
  // For ExpDisk the peak of -(lambda+1)t - alpha/t + n log t solves a
  // quadratic; the exact-kernel-table hot path goes through this hint.
  Scalar hint = -1;
  if (spec.family == weights::Family::ExpDisk) {
    const Scalar L = lambda + 1;
    hint = (logpow + std::sqrt(Scalar(logpow) * logpow + 4 * spec.alpha * L)) /
           (2 * L);
  }
  return detail::log_integral_peaked(g, 1e-9, 60.0, tol, "moment", hint);
}

MomentResult fock_moment(const WeightSpec& spec, Scalar n, Scalar tol) {
  if (spec.is_disk()) throw std::invalid_argument("fock_moment: plane families only");
  if (!(n >= 0)) throw std::invalid_argument("fock_moment: n must be >= 0");
  if (!(tol >= 1e-14)) throw std::invalid_argument("fock_moment: tol must be >= 1e-14");
  auto g = [&](Scalar s) -> Scalar {
    return (2 * n + 1) * std::log(s) + weights::log_weight(spec, s);
  };
  // Expand the scan top until the peak is interior (monomial peaks scale like
  // ((2n+1)/(2m))^{1/m}).
  Scalar hi = 64.0;
  for (int round = 0; round < 12; ++round) {
    const Scalar g_top = g(hi);
    const Scalar g_in = g(hi * 0.5);
    if (g_top < g_in) break;
    hi *= 4;
  }
  MomentResult res = detail::log_integral_peaked(g, 1e-8, hi, tol, "fock_moment");
  res.log_value += std::log(2.0);
  return res;
}

Scalar moment_asymptote(Scalar alpha, Scalar lambda, int logpow) {
  if (!(alpha > 0)) throw std::invalid_argument("moment_asymptote: alpha > 0");
  if (!(lambda > 0)) throw std::invalid_argument("moment_asymptote: lambda > 0");
  return -0.25 * (2 * logpow + 3) * std::log(lambda) -
         2 * std::sqrt(alpha * lambda);
}

SandwichCheck moment_sandwich_check(Scalar alpha, Scalar lambda, Scalar tol) {
  SandwichCheck out;
  const WeightSpec spec = WeightSpec::exp_disk(alpha);
  out.log_lower = moment(spec, lambda, 0, tol).log_value;
  // Middle integrand r^lambda exp(-alpha/log(1/r)) = e^{-(lambda+1)t - alpha/t}.
  auto g = [&](Scalar t) { return -(lambda + 1) * t - alpha / t; };
  out.log_mid =
      detail::log_integral_peaked(g, 1e-9, 60.0, tol, "sandwich").log_value;
  out.log_upper = alpha + out.log_lower;
  out.slack_low = out.log_mid - out.log_lower;
  out.slack_high = out.log_upper - out.log_mid;
  out.holds = out.slack_low >= -1e-9 && out.slack_high >= -1e-9;
  return out;
}

MomentTable make_moment_table(const WeightSpec& spec, int logpow,
                              const Array& lambdas, Scalar tol) {
  if (lambdas.size() < 1) throw std::invalid_argument("make_moment_table: empty grid");
  MomentTable t;
  t.spec = spec;
  t.logpow = logpow;
  t.lambda = lambdas;
  t.log_value.resize(lambdas.size());
  t.err.resize(lambdas.size());
  t.log_asymptote = Array::Constant(lambdas.size(), std::numeric_limits<Scalar>::quiet_NaN());
  t.ratio = t.log_asymptote;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw std::invalid_argument("make_moment_table: lambdas must increase");
    const MomentResult m = moment(spec, lambdas[i], logpow, tol);
    t.log_value[i] = m.log_value;
    t.err[i] = m.rel_err;
    if (spec.family == weights::Family::ExpDisk && lambdas[i] > 0) {
      t.log_asymptote[i] = moment_asymptote(spec.alpha, lambdas[i], logpow);
      t.ratio[i] = std::exp(t.log_value[i] - t.log_asymptote[i]);
    }
    if (i > 0 && !(t.log_value[i] < t.log_value[i - 1]))
      throw std::runtime_error("make_moment_table: log moments must decrease");
  }
  return t;
}

}  // namespace berglab::moments
