#include "berglab/smooth_sums.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <string>
#include <vector>

#include "berglab/moments.hpp"

namespace berglab::smooth_sums {

namespace {

// term of the kernel slice, safe at k = 0 for r = 0
Scalar log_slice_term(const kernel::KernelModel& m, long k, Scalar log_r) {
  return m.log_coeffs[k] + (k == 0 ? 0.0 : Scalar(k) * log_r);
}

// plateau bump: 1 on [2q, 8q], 0 outside (q, 16q), C-infinity
Scalar plateau_chi(Scalar x, Scalar q) {
  return bump_psi(3.0 - x / q) * bump_psi(x / (8.0 * q));
}

void check_radius(Scalar r) {
  if (!(r >= 0) || !(r < 1))
    throw std::domain_error("smooth_sums: radius must lie in [0,1)");
}

// rescaled coefficients of the n-th block of the kernel slice; returns the
// log scale that was divided out (kNegInf when every term vanishes)
Scalar block_slice(const kernel::KernelModel& m, Scalar r, const PolyBlock& b,
                   Array& out) {
  const Scalar log_r = r > 0 ? std::log(r) : kNegInf;
  Scalar s = kNegInf;
  for (long i = 0; i < b.coeffs.size(); ++i) {
    const long k = b.k_min + i;
    if (k > m.n_max)
      throw std::invalid_argument("smooth_sums: block beyond the coefficient table");
    if (b.coeffs[i] != 0) s = std::max(s, log_slice_term(m, k, log_r));
  }
  out = Array::Zero(b.coeffs.size());
  if (s == kNegInf) return s;
  for (long i = 0; i < b.coeffs.size(); ++i) {
    const long k = b.k_min + i;
    if (b.coeffs[i] != 0)
      out[i] = b.coeffs[i] * std::exp(log_slice_term(m, k, log_r) - s);
  }
  return s;
}

}  // namespace

Scalar bump_psi(Scalar t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const Scalar down = std::exp(-1.0 / (2.0 - t));
  const Scalar up = std::exp(-1.0 / (t - 1.0));
  return down / (down + up);
}

Scalar psi(Scalar t) { return bump_psi(0.5 * t) - bump_psi(t); }

PolyBlock vn_block(int n) {
  if (n < 0) throw std::invalid_argument("vn_block: n >= 0");
  PolyBlock b;
  b.n = n;
  if (n == 0) {
    b.k_min = 0;
    b.coeffs = Array::Ones(2);
    return b;
  }
  const long half = 1L << (n - 1);
  b.k_min = half;
  b.coeffs = Array(3 * half);
  for (long i = 0; i < b.coeffs.size(); ++i)
    b.coeffs[i] = psi(Scalar(b.k_min + i) / Scalar(half));
  return b;
}

Array hadamard(const Array& f, const PolyBlock& b) {
  Array out = Array::Zero(f.size());
  const long lo = std::max<long>(b.k_min, 0);
  const long hi = std::min<long>(b.k_min + b.coeffs.size() - 1, f.size() - 1);
  for (long k = lo; k <= hi; ++k) out[k] = f[k] * b.coeffs[k - b.k_min];
  return out;
}

Scalar hardy_norm(const Array& coeffs, Scalar p, int n_angles) {
  if (!(p > 0)) throw std::invalid_argument("hardy_norm: p > 0");
  if (n_angles < 64 || (n_angles & (n_angles - 1)) != 0)
    throw std::invalid_argument("hardy_norm: n_angles must be a power of two >= 64");
  if (coeffs.size() == 0) return 0.0;
  const Scalar top = coeffs.abs().maxCoeff();
  if (top == 0.0) return 0.0;

  Eigen::FFT<Scalar> fft;
  Scalar prev = std::numeric_limits<Scalar>::quiet_NaN();
  for (int angles = n_angles; angles <= (1 << 20); angles *= 2) {
    // grid values depend only on coefficient residues mod angles: exact fold
    std::vector<Scalar> bins(angles, 0.0);
    for (long k = 0; k < coeffs.size(); ++k) bins[k % angles] += coeffs[k] / top;
    std::vector<Complex> spec;
    fft.fwd(spec, bins);
    Scalar acc = 0;
    for (const Complex& x : spec) acc += std::pow(std::abs(x), p);
    const Scalar val = top * std::pow(acc / angles, 1.0 / p);
    if (std::isfinite(prev) && std::abs(val - prev) <= 1e-6 * std::max(val, 1e-300))
      return val;
    prev = val;
  }
  throw ConvergenceError("hardy_norm: angle doubling did not stabilize", prev, 1e-6);
}

Scalar vn_norm_scaling(Scalar p, int n_lo, int n_hi) {
  if (!(p > 0)) throw std::invalid_argument("vn_norm_scaling: p > 0");
  if (n_lo < 1 || n_hi > 12 || n_hi - n_lo < 3)
    throw std::invalid_argument("vn_norm_scaling: need 1 <= n_lo < n_hi <= 12 spanning >= 3");
  // the z^{k_min} prefactor is unimodular on the circle: norms ignore it
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int count = n_hi - n_lo + 1;
  for (int n = n_lo; n <= n_hi; ++n) {
    const Scalar y = std::log2(hardy_norm(vn_block(n).coeffs, p));
    sx += n;
    sy += y;
    sxx += Scalar(n) * n;
    sxy += n * y;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

BlockEnvelope phi_n_envelope(const kernel::KernelModel& model, Scalar r, int n) {
  check_radius(r);
  if (n < 0) throw std::invalid_argument("phi_n_envelope: n >= 0");
  if ((1L << (n + 1)) > 2 * model.n_max)
    throw std::invalid_argument("phi_n_envelope: block beyond the table scale");
  const Scalar lo = std::pow(2.0, n - 1), hi = std::pow(2.0, n + 1);
  if (r == 0) return {kNegInf, lo};
  const Scalar log_r = std::log(r);
  auto neg_log_f = [&](Scalar x) {
    return moments::moment(model.spec, 2 * x + 1, 0, 1e-10).log_value - x * log_r;
  };
  // log F is concave in x (moment log-convexity): one interior dip at most
  MinResult m = brent_minimize(neg_log_f, lo, hi, 1e-9);
  BlockEnvelope env{-m.f, m.x};
  for (Scalar e : {lo, hi}) {
    const Scalar fe = -neg_log_f(e);
    if (fe > env.log_max) env = {fe, e};
  }
  return env;
}

ChainBound upper_bound_chain(const kernel::KernelModel& model, Scalar r,
                             Scalar kappa) {
  check_radius(r);
  if (!(kappa > 0)) throw std::invalid_argument("upper_bound_chain: kappa > 0");
  ChainBound out;
  out.log_m1 = kernel::integral_mean_m1(model, r);

  // low blocks enter with their exact circle norms
  Scalar acc = kNegInf;
  for (int n = 0; n < 3; ++n) {
    Array c;
    const Scalar s = block_slice(model, r, vn_block(n), c);
    if (s == kNegInf) continue;
    acc = log_sum_exp(acc, std::log(2 * M_PI) + std::log(hardy_norm(c, 1.0)) + s);
  }

  const long peak = kernel::coeff_peak_index(model, r);
  const long tail = kernel::truncation_index(model, r, model.tol);
  for (int n = 3;; ++n) {
    // blocks past the certified truncation index hold a provably immaterial
    // share of the series; the straddling block is still summed
    if ((1L << (n - 1)) > tail) break;
    if ((1L << (n + 1)) > 2 * model.n_max)
      throw std::runtime_error("upper_bound_chain: table too small for radius " +
                               std::to_string(r));
    const Scalar term = std::log(kappa) + phi_n_envelope(model, r, n).log_max;
    acc = log_sum_exp(acc, term);
    // blocks decay once past the series peak; stop when negligible
    if ((1L << (n - 1)) > peak && term < acc - 40.0) break;
  }
  out.log_bound = acc;
  out.ratio = std::exp(out.log_bound - out.log_m1);
  return out;
}

Scalar wphi_identity_check(const kernel::KernelModel& model, Scalar r, int n) {
  check_radius(r);
  if (n < 3) throw std::invalid_argument("wphi_identity_check: n >= 3");
  const PolyBlock b = vn_block(n);
  Array lhs;
  const Scalar s = block_slice(model, r, b, lhs);
  if (s == kNegInf) return 0.0;

  const Scalar q = Scalar(1L << (n - 2));
  Scalar worst = 0.0;
  // the bump must sit exactly at 1 across the whole carrier window
  for (long k = 2 * long(q); k <= 8 * long(q); ++k)
    worst = std::max(worst, std::abs(plateau_chi(Scalar(k), q) - 1.0));

  const Scalar log_r = std::log(r);
  const Scalar top = lhs.abs().maxCoeff();
  for (long i = 0; i < b.coeffs.size(); ++i) {
    const long k = b.k_min + i;
    const Scalar profile =
        plateau_chi(Scalar(k), q) * std::exp(log_slice_term(model, k, log_r) - s);
    worst = std::max(worst, std::abs(profile * b.coeffs[i] - lhs[i]) / top);
  }
  return worst;
}

CesaroProbe cesaro_probe(const kernel::KernelModel& model, Scalar r, int n) {
  check_radius(r);
  if (!(r > 0)) throw std::domain_error("cesaro_probe: r > 0");
  if (n < 3) throw std::invalid_argument("cesaro_probe: n >= 3");
  const PolyBlock b = vn_block(n);
  Array c;
  const Scalar s = block_slice(model, r, b, c);

  CesaroProbe probe;
  probe.log_lhs = std::log(hardy_norm(c, 1.0)) + s;
  probe.vn_h1 = hardy_norm(b.coeffs, 1.0);

  // profile and its curvature over the carrier window, by dense sampling
  const Scalar q = Scalar(1L << (n - 2));
  const Scalar log_r = std::log(r);
  const int samples = 10'000;
  const Scalar dx = (16.0 * q - q) / (samples - 1);
  std::vector<Scalar> phi(samples);
  for (int i = 0; i < samples; ++i) {
    const Scalar x = q + dx * i;
    phi[i] = plateau_chi(x, q) *
             std::exp(x * log_r -
                      moments::moment(model.spec, 2 * x + 1, 0, 1e-10).log_value - s);
  }
  Scalar max_phi = 0, max_curv = 0;
  for (int i = 0; i < samples; ++i) max_phi = std::max(max_phi, std::abs(phi[i]));
  for (int i = 1; i + 1 < samples; ++i)
    max_curv = std::max(max_curv,
                        std::abs(phi[i + 1] - 2 * phi[i] + phi[i - 1]) / (dx * dx));
  probe.log_a2 = s + std::log(max_phi + max_curv);
  probe.kappa = std::exp(probe.log_lhs - probe.log_a2) / probe.vn_h1;
  return probe;
}

}  // namespace berglab::smooth_sums
