#pragma once

// Shared scalar numerics: log-space accumulation, adaptive Gauss-Kronrod
// quadrature, and bracketed 1-d minimization. Everything here is deterministic
// and allocation-light; the heavier array work lives in the module headers.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace berglab {

using Scalar = double;
using Array = Eigen::ArrayXd;
using Complex = std::complex<Scalar>;

inline constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();

// Thrown when an iterative routine exhausts its budget. Carries the best
// available estimate so callers can report partial results.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, Scalar best, Scalar err)
      : std::runtime_error(what), best_estimate(best), error_estimate(err) {}
  Scalar best_estimate;
  Scalar error_estimate;
};

// log(e^a + e^b) without overflow; tolerates -inf on either side.
inline Scalar log_sum_exp(Scalar a, Scalar b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;  // covers both -inf
  return a + std::log1p(std::exp(b - a));
}

// log sum over an array of log-values (two-pass, rescaled by the max).
template <typename Derived>
Scalar log_sum_exp(const Eigen::ArrayBase<Derived>& logs) {
  if (logs.size() == 0) return kNegInf;
  const Scalar m = logs.maxCoeff();
  if (m == kNegInf) return kNegInf;
  return m + std::log((logs - m).exp().sum());
}

inline int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod (7,15) quadrature.

struct QuadResult {
  Scalar value = 0;
  Scalar abs_err = 0;
  int panels = 0;
  bool converged = false;
};

namespace detail {
// Nodes/weights of the 15-point Kronrod rule with embedded 7-point Gauss rule
// on [-1,1] (QUADPACK dqk15 constants).
inline constexpr Scalar kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr Scalar kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr Scalar kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
void gk15_panel(F&& f, Scalar a, Scalar b, Scalar& value, Scalar& err) {
  const Scalar c = 0.5 * (a + b);
  const Scalar h = 0.5 * (b - a);
  const Scalar fc = f(c);
  Scalar kron = kWgk[7] * fc;
  Scalar gauss = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const Scalar x = h * kXgk[i];
    const Scalar fs = f(c - x) + f(c + x);
    kron += kWgk[i] * fs;
    if (i % 2 == 1) gauss += kWg[i / 2] * fs;
  }
  value = kron * h;
  err = std::abs((kron - gauss) * h);
}

struct Panel {
  Scalar a, b, value, err;
  bool operator<(const Panel& o) const { return err < o.err; }
};
}  // namespace detail

// Integrates f over [a,b], splitting the worst panel until the accumulated
// error estimate drops below max(rel_tol*|integral|, abs_floor) or the panel
// budget runs out (converged=false in that case; caller decides how hard to
// fail).
template <typename F>
QuadResult gk15_adaptive(F&& f, Scalar a, Scalar b, Scalar rel_tol,
                         Scalar abs_floor = 0.0, int max_panels = 4000) {
  QuadResult res;
  if (!(b > a)) {
    res.converged = true;
    return res;
  }
  std::priority_queue<detail::Panel> heap;
  detail::Panel whole{a, b, 0, 0};
  detail::gk15_panel(f, a, b, whole.value, whole.err);
  heap.push(whole);
  Scalar total = whole.value, toterr = whole.err;
  int panels = 1;
  while (toterr > std::max(rel_tol * std::abs(total), abs_floor) &&
         panels < max_panels) {
    detail::Panel worst = heap.top();
    heap.pop();
    const Scalar mid = 0.5 * (worst.a + worst.b);
    detail::Panel left{worst.a, mid, 0, 0}, right{mid, worst.b, 0, 0};
    detail::gk15_panel(f, left.a, left.b, left.value, left.err);
    detail::gk15_panel(f, right.a, right.b, right.value, right.err);
    total += left.value + right.value - worst.value;
    toterr += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  res.value = total;
  res.abs_err = toterr;
  res.panels = panels;
  res.converged = toterr <= std::max(rel_tol * std::abs(total), abs_floor);
  return res;
}

// ---------------------------------------------------------------------------
// Bracketed derivative-free minimization (Brent: golden section with
// parabolic acceleration). rel_tol is on the abscissa.

struct MinResult {
  Scalar x = 0;
  Scalar f = 0;
  int evals = 0;
};

template <typename F>
MinResult brent_minimize(F&& fn, Scalar a, Scalar b, Scalar rel_tol,
                         int max_iter = 200) {
  const Scalar gold = 0.3819660112501051;
  Scalar x = a + gold * (b - a), w = x, v = x;
  Scalar fx = fn(x), fw = fx, fv = fx;
  Scalar d = 0, e = 0;
  int evals = 1;
  for (int it = 0; it < max_iter; ++it) {
    const Scalar m = 0.5 * (a + b);
    const Scalar tol = rel_tol * std::abs(x) + 1e-300;
    if (std::abs(x - m) <= 2 * tol - 0.5 * (b - a)) break;
    Scalar p = 0, q = 0, r = 0;
    bool parabolic = false;
    if (std::abs(e) > tol) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2 * (q - r);
      if (q > 0) p = -p;
      q = std::abs(q);
      if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) &&
          p < q * (b - x)) {
        e = d;
        d = p / q;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = gold * e;
    }
    const Scalar u =
        (std::abs(d) >= tol) ? x + d : x + (d > 0 ? tol : -tol);
    const Scalar fu = fn(u);
    ++evals;
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

// Maximizes a unimodal-on-log-grid function over [lo,hi]: coarse geometric
// scan to bracket the peak, then Brent on the negated function.
template <typename F>
MinResult maximize_scan_brent(F&& fn, Scalar lo, Scalar hi, int scan_points,
                              Scalar rel_tol) {
  if (!(lo > 0 && hi > lo)) throw std::domain_error("maximize_scan_brent: need 0<lo<hi");
  const Scalar step = std::log(hi / lo) / (scan_points - 1);
  int best = 0;
  Scalar fbest = kNegInf;
  std::vector<Scalar> ts(scan_points);
  for (int i = 0; i < scan_points; ++i) {
    ts[i] = lo * std::exp(step * i);
    const Scalar fi = fn(ts[i]);
    if (fi > fbest) { fbest = fi; best = i; }
  }
  const Scalar a = ts[std::max(0, best - 1)];
  const Scalar b = ts[std::min(scan_points - 1, best + 1)];
  auto neg = [&fn](Scalar t) { return -fn(t); };
  MinResult m = brent_minimize(neg, a, b, rel_tol);
  m.f = -m.f;
  if (fbest > m.f) { m.x = ts[best]; m.f = fbest; }
  return m;
}

// Bisection for a monotone-decreasing function g with g(lo) > target >= g(hi):
// returns t with g(t) ~= target. Used to cut quadrature windows at a fixed
// number of e-folds below a peak.
template <typename F>
Scalar bisect_decreasing(F&& g, Scalar lo, Scalar hi, Scalar target,
                         int iters = 80) {
  for (int i = 0; i < iters; ++i) {
    const Scalar mid = 0.5 * (lo + hi);
    if (g(mid) > target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace berglab
