#include "berglab/projection.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace berglab::projection {

namespace {

// 8-point Gauss-Legendre rule on [-1,1], positive half
constexpr Scalar kGlX[4] = {0.1834346424956498, 0.5255324099163290,
                            0.7966664774136267, 0.9602898564975363};
constexpr Scalar kGlW[4] = {0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

void check_radius(Scalar r, const char* who) {
  if (!(r >= 0) || !(r < 1))
    throw std::domain_error(std::string(who) + ": radius must lie in [0,1)");
}

// shared FFT sandwich for the block-circulant operator and its adjoint;
// every angular mode is rank-one, so each block apply is two dot products
Eigen::VectorXcd apply_blocks(const DiscreteProjection& proj,
                              const Eigen::VectorXcd& x, bool adjoint) {
  const int nr = proj.n_radial, M = proj.n_angles;
  if (x.size() != long(nr) * M)
    throw std::invalid_argument("apply: vector size does not match the grid");
  Eigen::FFT<Scalar> fft;
  Eigen::MatrixXcd hat(nr, M);
  std::vector<Complex> in(M), out(M);
  for (int b = 0; b < nr; ++b) {
    for (int t = 0; t < M; ++t) in[t] = x[long(b) * M + t];
    fft.fwd(out, in);
    for (int t = 0; t < M; ++t) hat(b, t) = out[t];
  }
  Eigen::VectorXd re(nr), im(nr);
  for (int m = 0; m < M; ++m) {
    re = hat.col(m).real();
    im = hat.col(m).imag();
    const auto& into = adjoint ? proj.right : proj.left;
    const auto& from = adjoint ? proj.left : proj.right;
    hat.col(m).real() = into.col(m) * from.col(m).dot(re);
    hat.col(m).imag() = into.col(m) * from.col(m).dot(im);
  }
  Eigen::VectorXcd y(long(nr) * M);
  for (int b = 0; b < nr; ++b) {
    for (int t = 0; t < M; ++t) in[t] = hat(b, t);
    fft.inv(out, in);
    for (int t = 0; t < M; ++t) y[long(b) * M + t] = out[t];
  }
  return y;
}

}  // namespace

PolarGrid make_polar_grid(int n_radial, int n_angles, Scalar u_max) {
  if (n_radial < 8 || n_radial % 8 != 0)
    throw std::invalid_argument(
        "make_polar_grid: n_radial must be a positive multiple of 8");
  if (n_angles < 8 || (n_angles & (n_angles - 1)) != 0)
    throw std::invalid_argument(
        "make_polar_grid: n_angles must be a power of two >= 8");
  if (!(u_max > 0) || !(u_max < 700))
    throw std::invalid_argument("make_polar_grid: u_max must lie in (0, 700)");
  const int panels = n_radial / 8;
  PolarGrid g;
  g.s.resize(n_radial);
  g.w.resize(n_radial);
  g.n_angles = n_angles;
  g.u_max = u_max;
  int idx = 0;
  for (int pnl = 0; pnl < panels; ++pnl) {
    const Scalar t0 = Scalar(pnl) / panels, t1 = Scalar(pnl + 1) / panels;
    const Scalar c = 0.5 * (t0 + t1), h = 0.5 * (t1 - t0);
    for (int i = 0; i < 8; ++i) {
      const int k = i < 4 ? 3 - i : i - 4;
      const Scalar t = i < 4 ? c - h * kGlX[k] : c + h * kGlX[k];
      g.s[idx] = -std::expm1(-u_max * t);
      g.w[idx] = kGlW[k] * h * u_max * std::exp(-u_max * t);
      ++idx;
    }
  }
  return g;
}

Scalar ident2_lhs(Scalar r, Scalar s) {
  const Scalar root = std::sqrt(s) * std::sqrt(r);
  return 1.0 / (1.0 - root) - 0.5 / (1.0 - r) - 0.5 / (1.0 - s);
}

Scalar ident2_residual(Scalar r, Scalar s) {
  const Scalar sr = std::sqrt(r), ss = std::sqrt(s);
  const Scalar rhs =
      0.5 * ((ss - sr) / (1.0 - ss * sr)) * (sr / (1.0 - r) - ss / (1.0 - s));
  return ident2_lhs(r, s) - rhs;
}

Scalar f_r_integrand(Scalar alpha, Scalar r, Scalar s) {
  const Scalar root = std::sqrt(s) * std::sqrt(r);
  return std::exp(alpha * ident2_lhs(r, s) + std::log(s) -
                  1.5 * std::log1p(-root));
}

PiecewiseBounds piecewise_bounds(Scalar alpha, Scalar r) {
  if (!(alpha > 0)) throw std::invalid_argument("piecewise_bounds: alpha > 0");
  if (!(r > 0.5) || !(r < 1))
    throw std::invalid_argument("piecewise_bounds: r must lie in (1/2, 1)");
  auto f = [&](Scalar s) { return f_r_integrand(alpha, r, s); };
  auto run = [&](Scalar a, Scalar b) {
    if (!(b > a)) return 0.0;
    const QuadResult q = gk15_adaptive(f, a, b, 1e-8, 1e-300, 20000);
    if (!q.converged)
      throw ConvergenceError("piecewise_bounds: quadrature failed", q.value,
                             q.abs_err);
    return q.value;
  };
  const Scalar hw = std::pow(1.0 - r, 1.5);
  PiecewiseBounds out;
  out.head = run(0.0, 0.5);
  out.middle = run(r - hw, r + hw);
  // the integrand varies on scale (1-r)^{3/2} around s = r; one adaptive
  // pass over a long flank can sample nothing but underflowed zeros and
  // miss the spike shoulder entirely, so the flanks are summed over
  // segments receding geometrically from r
  for (Scalar h = 4 * hw, hi = r - hw; hi > 0.5; h *= 4) {
    const Scalar lo = std::max(0.5, r - h);
    out.inner += run(lo, hi);
    hi = lo;
  }
  for (Scalar h = 4 * hw, lo = r + hw; lo < 1.0; h *= 4) {
    const Scalar hi = std::min(1.0, r + h);
    out.tail += run(lo, hi);
    lo = hi;
  }
  out.middle_cap = 2.0 * hw / std::pow(1.0 - std::sqrt(r), 1.5);
  return out;
}

Scalar schur_integral(const kernel::KernelModel& model, Scalar r,
                      const PolarGrid& grid, Pairing pairing) {
  check_radius(r, "schur_integral");
  if (r > 0) kernel::truncation_index(model, r, model.tol);
  const Scalar a = model.alpha;
  const Scalar U = grid.u_max;
  const int base = std::max(1, int(grid.s.size()) / 8);

  // panel breakpoints in u = -log(1-s): the grid fixes depth and base panel
  // density, but the integrand concentrates around s = r on a width that
  // shrinks like sqrt((1-r)/alpha) in u, far below any fixed layout once r
  // is deep, so extra geometrically graded panels straddle that point
  std::vector<Scalar> brk{0.0, U};
  const Scalar ur = -std::log1p(-r);
  const bool spike = r > 0.5 && ur < U;
  const Scalar wlo = ur - 2.2, whi = ur + 2.2;
  for (int k = 1; k < base; ++k) {
    const Scalar u = U * k / base;
    if (!spike || u < wlo || u > whi) brk.push_back(u);
  }
  if (spike) {
    brk.push_back(std::max(wlo, 0.0));
    if (whi < U) brk.push_back(whi);
    for (Scalar h = 0.25 * std::sqrt((1 - r) / a); h < 2.2; h *= 1.6) {
      if (ur - h > 0) brk.push_back(ur - h);
      if (ur + h < U) brk.push_back(ur + h);
    }
    brk.push_back(ur);
  }
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

  Scalar total = 0;
  for (std::size_t q = 0; q + 1 < brk.size(); ++q) {
    const Scalar c = 0.5 * (brk[q] + brk[q + 1]);
    const Scalar h = 0.5 * (brk[q + 1] - brk[q]);
    if (!(h > 0)) continue;
    for (int i = 0; i < 8; ++i) {
      const int k = i < 4 ? 3 - i : i - 4;
      const Scalar u = i < 4 ? c - h * kGlX[k] : c + h * kGlX[k];
      const Scalar s = -std::expm1(-u);
      const Scalar lm1 = kernel::integral_mean_m1(model, r * s);
      const Scalar lw = pairing == Pairing::kTheorem5
                            ? -a / (2 * (1 - r)) - a / (2 * (1 - s))
                            : -a / (1 - s);
      total += kGlW[k] * h * std::exp(-u) * s * std::exp(lm1 + lw);
    }
  }
  // integral_mean_m1 carries the full angular integral; dividing by pi makes
  // this the row integral over normalized disk area
  return total / M_PI;
}

DiscreteProjection assemble_projection(const kernel::KernelModel& model,
                                       const PolarGrid& grid, Pairing pairing,
                                       Scalar p) {
  const int nr = int(grid.s.size()), M = grid.n_angles;
  if (!(p >= 1) || !std::isfinite(p))
    throw std::invalid_argument("assemble_projection: p must lie in [1, inf)");
  // factor storage plus a handful of node vectors, ~100 bytes per node
  if (double(nr) * M > 4e6)
    throw std::length_error(
        "assemble_projection: grid exceeds the memory budget");

  Array x(nr);
  for (int j = 0; j < nr; ++j) x[j] = -std::log(grid.s[j]);
  const Scalar x_lo = 2 * x.minCoeff();
  // the retained modes must all be certified at the deepest node pair,
  // otherwise the section would use coefficients the grid cannot support
  if (kernel::truncation_index(model, std::exp(-x_lo), model.tol) < M)
    throw std::runtime_error(
        "assemble_projection: kernel model too small for the angular section");

  DiscreteProjection proj;
  proj.n_radial = nr;
  proj.n_angles = M;
  proj.pairing = pairing;
  proj.p = p;
  proj.alpha = model.alpha;
  proj.s = grid.s;
  proj.node_w = 2.0 * grid.s * grid.w;

  const Scalar a = model.alpha;
  proj.log_left.resize(nr);
  proj.log_right.resize(nr);
  for (int j = 0; j < nr; ++j) {
    const Scalar full = -a / (1 - grid.s[j]);
    if (pairing == Pairing::kTheorem5) {
      proj.log_left[j] = 0.5 * full;
      proj.log_right[j] = 0.5 * full;
    } else {
      proj.log_left[j] = full / p;
      proj.log_right[j] = full * (1 - 1 / p);
    }
  }

  // the kernel coefficients reproduce against s ds dtheta/(2pi), half the
  // normalized-area node mass used for norms; the coefficient is split
  // evenly between the factors to keep both inside double range
  const Array log_nw = (grid.s * grid.w).log();
  proj.left.resize(nr, M);
  proj.right.resize(nr, M);
  for (int m = 0; m < M; ++m) {
    const Scalar half = 0.5 * model.log_coeffs[m];
    for (int i = 0; i < nr; ++i) {
      proj.left(i, m) = std::exp(half + proj.log_left[i] - m * x[i]);
      proj.right(i, m) =
          std::exp(half + proj.log_right[i] - m * x[i] + log_nw[i]);
    }
  }
  if (!proj.left.allFinite() || !proj.right.allFinite())
    throw std::overflow_error(
        "assemble_projection: frame factors leave double range");
  return proj;
}

Eigen::VectorXcd apply_flat(const DiscreteProjection& proj,
                            const Eigen::VectorXcd& x) {
  return apply_blocks(proj, x, false);
}

Eigen::VectorXcd apply_raw(const DiscreteProjection& proj,
                           const Eigen::VectorXcd& f) {
  const int nr = proj.n_radial, M = proj.n_angles;
  if (f.size() != long(nr) * M)
    throw std::invalid_argument("apply_raw: vector size does not match the grid");
  Array left = proj.log_left.exp();
  if ((left <= 0.0).any())
    throw std::domain_error("apply_raw: grid too deep for the raw frame");
  Eigen::VectorXcd scaled(f.size());
  for (int b = 0; b < nr; ++b)
    for (int t = 0; t < M; ++t)
      scaled[long(b) * M + t] = f[long(b) * M + t] * left[b];
  Eigen::VectorXcd y = apply_blocks(proj, scaled, false);
  for (int b = 0; b < nr; ++b)
    for (int t = 0; t < M; ++t) y[long(b) * M + t] /= left[b];
  return y;
}

Scalar node_pnorm(const DiscreteProjection& proj, const Eigen::VectorXcd& x) {
  const int nr = proj.n_radial, M = proj.n_angles;
  Scalar acc = 0;
  for (int b = 0; b < nr; ++b) {
    const Scalar wb = proj.node_w[b] / M;
    for (int t = 0; t < M; ++t)
      acc += wb * std::pow(std::abs(x[long(b) * M + t]), proj.p);
  }
  return std::pow(acc, 1.0 / proj.p);
}

Scalar opnorm_lower(const DiscreteProjection& proj, int iterations,
                    std::uint64_t seed) {
  if (iterations < 16)
    throw std::invalid_argument("opnorm_lower: iterations >= 16");
  const int nr = proj.n_radial, M = proj.n_angles;
  const long n = long(nr) * M;
  const Scalar p = proj.p;
  Array w(n);
  for (int b = 0; b < nr; ++b)
    for (int t = 0; t < M; ++t) w[long(b) * M + t] = proj.node_w[b] / M;

  Scalar best = 0;
  for (int restart = 0; restart < 8; ++restart) {
    std::mt19937_64 rng(seed + 1000003ULL * restart + 1);
    std::normal_distribution<Scalar> gauss(0.0, 1.0);
    Eigen::VectorXcd x(n);
    if (restart == 0) {
      for (long i = 0; i < n; ++i) x[i] = Complex(gauss(rng), gauss(rng));
    } else {
      // single-mode start: each angular mode is an invariant subspace of the
      // iteration, so this restart resolves the exact rank-one norm of its
      // mode; the spread always includes the top mode M-1
      const int m = int(long(restart) * (M - 1) / 7);
      for (int b = 0; b < nr; ++b) {
        const Complex prof(gauss(rng), gauss(rng));
        for (int t = 0; t < M; ++t)
          x[long(b) * M + t] =
              prof * std::polar(1.0, 2 * M_PI * m * t / Scalar(M));
      }
    }
    Scalar nx = node_pnorm(proj, x);
    if (!(nx > 0)) continue;
    x /= nx;

    for (int it = 0; it < iterations; ++it) {
      Eigen::VectorXcd u = apply_flat(proj, x);
      Scalar est = node_pnorm(proj, u);
      if (!std::isfinite(est)) {
        u = apply_flat(proj, x * Complex(1e-120, 0.0));
        est = node_pnorm(proj, u) * 1e120;
        if (!std::isfinite(est))
          throw ConvergenceError("opnorm_lower: power iteration overflowed",
                                 best, 0.0);
      }
      best = std::max(best, est);
      if (!(est > 0)) break;

      // gradient of the p-norm objective, then the dual-exponent step
      Eigen::VectorXcd g(n);
      for (long i = 0; i < n; ++i) {
        const Scalar mag = std::abs(u[i]);
        g[i] = mag > 0 ? Complex(w[i] * std::pow(mag, p - 1), 0) * (u[i] / mag)
                       : Complex(0, 0);
      }
      const Eigen::VectorXcd h = apply_blocks(proj, g, true);
      if (p == 1.0) {
        long jb = 0;
        Scalar fb = -1;
        for (long i = 0; i < n; ++i) {
          const Scalar v = std::abs(h[i]) / w[i];
          if (v > fb) {
            fb = v;
            jb = i;
          }
        }
        if (!(fb > 0)) break;
        x.setZero();
        x[jb] = h[jb] / std::abs(h[jb]);
      } else {
        const Scalar dual = 1.0 / (p - 1.0);
        for (long i = 0; i < n; ++i) {
          const Scalar mag = std::abs(h[i]);
          x[i] = mag > 0 ? Complex(std::pow(mag / w[i], dual), 0) *
                               (h[i] / mag)
                         : Complex(0, 0);
        }
      }
      nx = node_pnorm(proj, x);
      if (!(nx > 0) || !std::isfinite(nx)) break;
      x /= nx;
    }
  }
  return best;
}

}  // namespace berglab::projection
