#include "berglab/kernel.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <string>
#include <vector>

#include "berglab/moments.hpp"

namespace berglab::kernel {

namespace {

Scalar log_term(const KernelModel& m, long k, Scalar log_r) {
  return m.log_coeffs[k] + Scalar(k) * log_r;
}

// log of the majorant coefficient bound at index k
Scalar log_majorant(const KernelModel& m, Scalar k, Scalar log_r) {
  return m.log_band_const + 0.75 * std::log(2 * k + 1) +
         2 * std::sqrt(m.alpha * (2 * k + 1)) + k * log_r;
}

void check_disk_radius(Scalar r) {
  if (!(r >= 0) || !(r < 1))
    throw std::domain_error("kernel: radius must lie in [0,1)");
}

}  // namespace

KernelModel build_kernel(Scalar alpha, long n_max, Scalar tol) {
  if (!(alpha > 0)) throw std::invalid_argument("build_kernel: alpha > 0");
  if (n_max < 16) throw std::invalid_argument("build_kernel: n_max >= 16");
  if (!(tol >= 1e-12)) throw std::invalid_argument("build_kernel: tol >= 1e-12");

  KernelModel m;
  m.spec = weights::WeightSpec::exp_disk(alpha);
  m.alpha = alpha;
  m.tol = tol;
  m.n_max = n_max;
  m.log_coeffs.resize(n_max + 1);

  const Scalar coeff_tol = std::min(tol * 0.1, 1e-11);
  for (long k = 0; k <= n_max; ++k) {
    try {
      const auto v = moments::moment(m.spec, Scalar(2 * k + 1), 0, coeff_tol);
      m.log_coeffs[k] = -v.log_value;
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(
          "build_kernel: moment quadrature failed at index " + std::to_string(k) +
              ": " + e.what(),
          e.best_estimate, e.error_estimate);
    }
  }
  for (long k = 0; k < n_max; ++k)
    if (!(m.log_coeffs[k + 1] > m.log_coeffs[k]))
      throw std::runtime_error("build_kernel: log coefficients not increasing at " +
                               std::to_string(k));

  Scalar band = kNegInf;
  for (long k = 0; k <= n_max; ++k)
    band = std::max(band, m.log_coeffs[k] - 0.75 * std::log(Scalar(2 * k + 1)) -
                              2 * std::sqrt(alpha * (2 * k + 1)));
  m.log_band_const = band;
  return m;
}

long coeff_peak_index(const KernelModel& m, Scalar r) {
  check_disk_radius(r);
  if (r == 0) return 0;
  const Scalar log_r = std::log(r);
  // log c_k is convex-in-lambda turned concave against k log r: the forward
  // difference decreases, so binary-search its sign change
  auto diff_nonpos = [&](long k) {
    return m.log_coeffs[k + 1] - m.log_coeffs[k] + log_r <= 0;
  };
  if (diff_nonpos(0)) return 0;
  long lo = 0, hi = m.n_max;  // diff(lo) > 0; peak in (lo, hi]
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (mid == m.n_max || diff_nonpos(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

long truncation_index(const KernelModel& m, Scalar r, Scalar tol) {
  check_disk_radius(r);
  if (!(tol > 0)) throw std::invalid_argument("truncation_index: tol > 0");
  if (r == 0) return 0;
  const Scalar log_r = std::log(r);
  const long peak = coeff_peak_index(m, r);
  const Scalar log_peak_term = log_term(m, peak, log_r);
  const Scalar target = std::log(tol) + log_peak_term;

  // certified log tail bound after index N (geometric majorant)
  auto log_tail = [&](long n) {
    const Scalar w = Scalar(2 * n + 3);
    const Scalar log_q = log_r + 2 * std::sqrt(m.alpha / w) +
                         0.75 * std::log1p(2.0 / (2 * n + 1));
    if (log_q >= 0) return std::numeric_limits<Scalar>::infinity();
    return log_majorant(m, Scalar(n + 1), log_r) - std::log1p(-std::exp(log_q));
  };

  if (!(log_tail(m.n_max) < target))
    throw std::runtime_error("kernel model too small for radius " + std::to_string(r));
  if (log_tail(peak) < target) return peak;
  long lo = peak, hi = m.n_max;  // tail(lo) >= target > tail(hi)
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (log_tail(mid) < target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

Complex eval_kernel(const KernelModel& m, Complex u) {
  const Scalar r = std::abs(u);
  check_disk_radius(r);
  if (r == 0) return Complex(std::exp(m.log_coeffs[0]), 0.0);
  const long n = truncation_index(m, r, m.tol);
  const Scalar log_r = std::log(r);
  const Scalar scale = log_term(m, coeff_peak_index(m, r), log_r);
  const Complex phase = u / r;
  Complex s(0.0, 0.0);
  for (long k = n; k >= 0; --k)
    s = s * phase + Complex(std::exp(log_term(m, k, log_r) - scale), 0.0);
  return s * std::exp(scale);
}

Scalar integral_mean_m1(const KernelModel& m, Scalar r, int n_angles) {
  check_disk_radius(r);
  if (n_angles < 256 || (n_angles & (n_angles - 1)) != 0)
    throw std::invalid_argument("integral_mean_m1: n_angles must be a power of two >= 256");
  if (r == 0) return std::log(2 * M_PI) + m.log_coeffs[0];

  const long n = truncation_index(m, r, m.tol);
  const Scalar log_r = std::log(r);
  const Scalar scale = log_term(m, coeff_peak_index(m, r), log_r);
  std::vector<Scalar> w(n + 1);
  for (long k = 0; k <= n; ++k) w[k] = std::exp(log_term(m, k, log_r) - scale);

  Eigen::FFT<Scalar> fft;
  Scalar prev = std::numeric_limits<Scalar>::quiet_NaN();
  for (int angles = n_angles; angles <= (1 << 20); angles *= 2) {
    // the kernel restricted to the uniform angle grid depends only on the
    // coefficient residues mod angles: folding is exact, not an approximation
    std::vector<Scalar> bins(angles, 0.0);
    for (long k = 0; k <= n; ++k) bins[k % angles] += w[k];
    std::vector<Complex> spec;
    fft.fwd(spec, bins);
    Scalar sum = 0;
    for (const Complex& x : spec) sum += std::abs(x);
    const Scalar log_val = scale + std::log(sum * (2 * M_PI / angles));
    if (std::isfinite(prev) && std::abs(log_val - prev) < 1e-6) return log_val;
    prev = log_val;
  }
  throw ConvergenceError("integral_mean_m1: angle doubling did not stabilize", prev, 1e-6);
}

Scalar m1_asymptote(Scalar alpha, Scalar r) {
  if (!(alpha > 0)) throw std::invalid_argument("m1_asymptote: alpha > 0");
  if (!(r > 0) || !(r < 1)) throw std::domain_error("m1_asymptote: r in (0,1)");
  return alpha / (1 - std::sqrt(r)) - 1.5 * std::log1p(-r);
}

Scalar h_function(Scalar alpha, Scalar rho, Scalar x) {
  if (!(alpha > 0) || !(rho > 0) || !(rho < 1) || !(x > 0))
    throw std::invalid_argument("h_function: need alpha>0, rho in (0,1), x>0");
  return 0.75 * std::log(x) + 2 * std::sqrt(alpha * x) + x * std::log(rho);
}

Scalar x_rho(Scalar alpha, Scalar rho) {
  if (!(alpha > 0) || !(rho > 0) || !(rho < 1))
    throw std::invalid_argument("x_rho: need alpha>0, rho in (0,1)");
  const Scalar ell = std::log(1 / rho);
  const Scalar t = (std::sqrt(alpha + 3 * ell) + std::sqrt(alpha)) / (2 * ell);
  return t * t;
}

Scalar m1_lower_bound(const KernelModel& m, Scalar r) {
  check_disk_radius(r);
  if (r == 0) return std::log(2 * M_PI) + m.log_coeffs[0];
  const long peak = coeff_peak_index(m, r);
  return std::log(2 * M_PI) + log_term(m, peak, std::log(r));
}

}  // namespace berglab::kernel
