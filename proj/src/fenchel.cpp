#include "berglab/fenchel.hpp"

#include <cmath>

namespace berglab::fenchel {

namespace {

constexpr Scalar kTLo = 1e-12;
constexpr Scalar kTHi = 1e12;

}  // namespace

LFResult lf_transform(const std::function<Scalar(Scalar)>& v, Scalar x) {
  if (!std::isfinite(x)) throw std::invalid_argument("lf_transform: x must be finite");
  auto f = [&](Scalar t) { return v(t) + x * t; };

  // coarse bracket on a log grid, 10 points per decade
  const int kScan = 241;
  Scalar best_f = std::numeric_limits<Scalar>::infinity();
  int best_i = -1;
  const Scalar step = std::log(kTHi / kTLo) / (kScan - 1);
  for (int i = 0; i < kScan; ++i) {
    const Scalar t = kTLo * std::exp(i * step);
    const Scalar ft = f(t);
    if (ft < best_f) {
      best_f = ft;
      best_i = i;
    }
  }
  if (best_i <= 0 || best_i >= kScan - 1)
    throw ConvergenceError("lf_transform: minimum not interior to [1e-12, 1e12]",
                           best_f, std::abs(best_f));

  Scalar lo = kTLo * std::exp((best_i - 1) * step);
  Scalar hi = kTLo * std::exp((best_i + 1) * step);
  auto m = brent_minimize(f, lo, hi, 1e-8);

  // Newton polish on f' once the bracket is tight: the scan/brent stage
  // guarantees we are inside the convex basin
  Scalar t = m.x;
  for (int it = 0; it < 12; ++it) {
    const Scalar h = std::max(t * 1e-6, 1e-14);
    const Scalar fp = (f(t + h) - f(t - h)) / (2 * h);
    const Scalar fpp = (f(t + h) - 2 * f(t) + f(t - h)) / (h * h);
    if (!(fpp > 0)) break;
    const Scalar step_n = fp / fpp;
    const Scalar tn = t - step_n;
    if (!(tn > lo && tn < hi)) break;
    t = tn;
    if (std::abs(step_n) <= 1e-12 * t) break;
  }

  LFResult out;
  out.x = x;
  out.minimizer_t = t;
  out.value = f(t);
  const Scalar h = std::max(t * 1e-5, 1e-13);
  out.curvature = (f(t + h) - 2 * f(t) + f(t - h)) / (h * h);
  return out;
}

Scalar lf_closed_form(Scalar alpha, int n, Scalar x) {
  if (!(alpha > 0)) throw std::invalid_argument("lf_closed_form: alpha > 0");
  if (n < 0) throw std::invalid_argument("lf_closed_form: n >= 0");
  if (!(x > 0)) throw std::invalid_argument("lf_closed_form: x > 0");
  const Scalar s = std::sqrt(Scalar(n) * n + 4 * alpha * x);
  if (n == 0) return s;  // 2 sqrt(alpha x) exactly
  return s + n * std::log(2 * x / (s + n));
}

Scalar inverse_lf_closed_form(Scalar alpha, Scalar t) {
  if (!(alpha > 0)) throw std::invalid_argument("inverse_lf_closed_form: alpha > 0");
  if (!(t > 0) || !(t < alpha))
    throw std::domain_error("inverse_lf_closed_form: need 0 < t < alpha");
  const Scalar root = std::sqrt(alpha * (alpha - t));
  return (2 * alpha + t + 2 * root) / (4 * t) -
         0.5 * std::log((std::sqrt(alpha) + std::sqrt(alpha - t)) / (2 * t));
}

Scalar inverse_lf_ratio(Scalar alpha, Scalar t) {
  const Scalar log_ratio =
      inverse_lf_closed_form(alpha, t) - 0.5 * std::log(t) - alpha / t;
  return std::exp(log_ratio);
}

SeriesAsymptote series_boundary_asymptote(Scalar alpha, Scalar rho,
                                          long n_terms) {
  if (!(alpha > 0)) throw std::invalid_argument("series_boundary_asymptote: alpha > 0");
  if (!(rho > 0) || !(rho < 1))
    throw std::invalid_argument("series_boundary_asymptote: rho in (0,1)");
  if (n_terms < 2) throw std::invalid_argument("series_boundary_asymptote: n_terms >= 2");

  const Scalar log_rho = std::log(rho);
  auto log_term = [&](Scalar n) {
    return -0.25 * std::log(n) + 2 * std::sqrt(alpha * n) + n * log_rho;
  };

  // streaming log-sum-exp
  Scalar peak = kNegInf, acc = 0;
  for (long n = 2; n <= n_terms; ++n) {
    const Scalar g = log_term(Scalar(n));
    if (g <= peak) {
      acc += std::exp(g - peak);
    } else {
      acc = acc * std::exp(peak - g) + 1.0;
      peak = g;
    }
  }
  const Scalar log_sum = peak + std::log(acc);

  // geometric tail majorant: for n >= N the term ratio is at most
  // rho * exp(sqrt(alpha/N)) (since 2(sqrt(n+1)-sqrt(n)) <= 1/sqrt(n) and the
  // n^{-1/4} factor only shrinks)
  const Scalar log_q = log_rho + std::sqrt(alpha / Scalar(n_terms));
  if (log_q >= 0)
    throw ConvergenceError("series_boundary_asymptote: n_terms below the series peak",
                           log_sum, 0.0);
  const Scalar q = std::exp(log_q);
  const Scalar log_tail = log_term(Scalar(n_terms)) + log_q - std::log1p(-q);
  if (log_tail > peak - 30.0)
    throw ConvergenceError("series_boundary_asymptote: truncated tail above e^-30 of peak",
                           log_sum, std::exp(log_tail - log_sum));

  SeriesAsymptote out;
  out.log_partial_sum = log_sum;
  out.log_asymptote = alpha / (1 - rho) - std::log1p(-rho);
  out.ratio = std::exp(log_sum - out.log_asymptote);
  return out;
}

}  // namespace berglab::fenchel
