#include "berglab/weights.hpp"

#include <map>
#include <utility>

namespace berglab::weights {

WeightSpec WeightSpec::exp_disk(Scalar alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("exp_disk: alpha must be positive");
  WeightSpec s;
  s.family = Family::ExpDisk;
  s.alpha = alpha;
  return s;
}

WeightSpec WeightSpec::gen_exp_disk(Scalar A, Scalar B, Scalar kappa) {
  if (!(B > 0) || !(kappa > 0))
    throw std::invalid_argument("gen_exp_disk: need B>0 and kappa>0");
  WeightSpec s;
  s.family = Family::GenExpDisk;
  s.A = A;
  s.B = B;
  s.kappa = kappa;
  return s;
}

WeightSpec WeightSpec::triple_exp_disk() {
  WeightSpec s;
  s.family = Family::TripleExpDisk;
  return s;
}

WeightSpec WeightSpec::fock_monomial(Scalar m) {
  if (!(m > 0)) throw std::invalid_argument("fock_monomial: m must be positive");
  WeightSpec s;
  s.family = Family::FockMonomial;
  s.m = m;
  return s;
}

WeightSpec WeightSpec::fock_gaussian() {
  WeightSpec s;
  s.family = Family::FockGaussian;
  return s;
}

std::string WeightSpec::name() const {
  switch (family) {
    case Family::ExpDisk: return "exp_disk(alpha=" + std::to_string(alpha) + ")";
    case Family::GenExpDisk:
      return "gen_exp_disk(A=" + std::to_string(A) + ",B=" + std::to_string(B) +
             ",kappa=" + std::to_string(kappa) + ")";
    case Family::TripleExpDisk: return "triple_exp_disk";
    case Family::FockMonomial: return "fock_monomial(m=" + std::to_string(m) + ")";
    case Family::FockGaussian: return "fock_gaussian";
  }
  return "?";
}

void check_radius(const WeightSpec& spec, Scalar r) {
  if (!(r >= 0)) throw std::domain_error("radius must be nonnegative");
  if (spec.is_disk() && !(r < 1))
    throw std::domain_error("disk weight evaluated at r >= 1");
}

Scalar phi(const WeightSpec& spec, Scalar r) {
  check_radius(spec, r);
  switch (spec.family) {
    case Family::ExpDisk:
      return 0.5 * spec.alpha / (1 - r);
    case Family::GenExpDisk: {
      const Scalar y = 1 - r * r;
      return -0.5 * spec.A * std::log(y) +
             0.5 * spec.B * std::pow(y, -spec.kappa);
    }
    case Family::TripleExpDisk:
      return 0.5 * std::exp(std::exp(1.0 / (1 - r)));
    case Family::FockMonomial:
      return std::pow(r, spec.m);
    case Family::FockGaussian:
      return 0.5 * r * r;
  }
  return 0;
}

Scalar log_weight(const WeightSpec& spec, Scalar r) { return -2 * phi(spec, r); }

Scalar eval_weight(const WeightSpec& spec, Scalar r) {
  return std::exp(log_weight(spec, r));
}

namespace {

// Term lists for the nested chain-rule derivatives of the two non-elementary
// disk families. Generated once per call by an exact integer/real recurrence
// and evaluated in plain doubles (magnitudes checked fine for the default
// grids, which stop at 1 - 1e-6).

// GenExpDisk: for n >= 1, phi^{(n)} = sum c * r^j * (1-r^2)^{-e};
// d/dr [r^j y^{-e}] = j r^{j-1} y^{-e} + 2e r^{j+1} y^{-e-1},  y = 1-r^2.
using GenTerms = std::map<std::pair<int, Scalar>, Scalar>;  // (j,e) -> c

GenTerms gen_exp_terms(const WeightSpec& spec, int n) {
  GenTerms t;
  // phi' = A r y^{-1} + B kappa r y^{-kappa-1}
  t[{1, 1.0}] = spec.A;
  t[{1, spec.kappa + 1}] = spec.B * spec.kappa;
  for (int level = 1; level < n; ++level) {
    GenTerms next;
    for (const auto& [key, c] : t) {
      const auto [j, e] = key;
      if (j > 0) next[{j - 1, e}] += c * j;
      next[{j + 1, e + 1}] += 2 * c * e;
    }
    t = std::move(next);
  }
  return t;
}

// TripleExpDisk: phi^{(n)} = (1/2) E2 * sum c * x^a * E1^b with x = 1/(1-r),
// E1 = e^x, E2 = e^{E1};
// d/dr [x^a E1^b E2] = a x^{a+1} E1^b E2 + b x^{a+2} E1^b E2 + x^{a+2} E1^{b+1} E2.
using TripleTerms = std::map<std::pair<int, int>, Scalar>;  // (a,b) -> c

TripleTerms triple_exp_terms(int n) {
  TripleTerms t;
  t[{2, 1}] = 1.0;  // phi' = (1/2) x^2 E1 E2
  for (int level = 1; level < n; ++level) {
    TripleTerms next;
    for (const auto& [key, c] : t) {
      const auto [a, b] = key;
      if (a > 0) next[{a + 1, b}] += c * a;
      if (b > 0) next[{a + 2, b}] += c * b;
      next[{a + 2, b + 1}] += c;
    }
    t = std::move(next);
  }
  return t;
}

Scalar falling_factorial(Scalar m, int n) {
  Scalar p = 1;
  for (int i = 0; i < n; ++i) p *= (m - i);
  return p;
}

}  // namespace

Scalar phi_derivative(const WeightSpec& spec, int n, Scalar r) {
  if (n < 0) throw std::invalid_argument("phi_derivative: n must be >= 0");
  if (n == 0) return phi(spec, r);
  check_radius(spec, r);
  switch (spec.family) {
    case Family::ExpDisk: {
      // (alpha/2) n! / (1-r)^{n+1}
      Scalar v = 0.5 * spec.alpha;
      for (int i = 1; i <= n; ++i) v *= i;
      return v * std::pow(1 - r, -(n + 1));
    }
    case Family::GenExpDisk: {
      const Scalar y = 1 - r * r;
      Scalar sum = 0;
      for (const auto& [key, c] : gen_exp_terms(spec, n)) {
        const auto [j, e] = key;
        sum += c * std::pow(r, j) * std::pow(y, -e);
      }
      return sum;
    }
    case Family::TripleExpDisk: {
      const Scalar x = 1.0 / (1 - r);
      const Scalar e1 = std::exp(x);
      const Scalar e2 = std::exp(e1);
      Scalar sum = 0;
      for (const auto& [key, c] : triple_exp_terms(n)) {
        const auto [a, b] = key;
        sum += c * std::pow(x, a) * std::pow(e1, b);
      }
      return 0.5 * e2 * sum;
    }
    case Family::FockMonomial:
      return falling_factorial(spec.m, n) * std::pow(r, spec.m - n);
    case Family::FockGaussian:
      if (n == 1) return r;
      return n == 2 ? 1.0 : 0.0;
  }
  return 0;
}

Scalar phi_ratio(const WeightSpec& spec, int n, Scalar r) {
  if (n < 1) throw std::invalid_argument("phi_ratio: n must be >= 1");
  check_radius(spec, r);
  switch (spec.family) {
    case Family::ExpDisk: {
      // n! (2/alpha)^{n-1} (1-r)^{n-1}
      Scalar v = 1;
      for (int i = 1; i <= n; ++i) v *= i;
      return v * std::pow(2 * (1 - r) / spec.alpha, n - 1);
    }
    case Family::TripleExpDisk: {
      // Each term of phi^{(n)}/(phi')^n is exp(log c + (a-2n) log x
      // + (b-n) x + (1-n) E1 + (n-1) log 2); evaluated in log space because
      // E1 = e^{1/(1-r)} overflows long before the ratio stops being finite.
      const Scalar x = 1.0 / (1 - r);
      const Scalar logx = std::log(x);
      const Scalar e1 = std::exp(std::min(x, 709.0));  // saturates; only used scaled by (1-n)<=0
      Scalar acc = kNegInf;
      for (const auto& [key, c] : triple_exp_terms(n)) {
        const auto [a, b] = key;
        Scalar lg = std::log(c) + (n - 1) * std::log(2.0);
        if (a != 2 * n) lg += (a - 2 * n) * logx;
        if (b != n) lg += (b - n) * x;
        if (n != 1) lg += (1 - n) * e1;
        acc = log_sum_exp(acc, lg);
      }
      return std::exp(acc);
    }
    default: {
      const Scalar num = phi_derivative(spec, n, r);
      const Scalar den = std::pow(phi_derivative(spec, 1, r), n);
      return num / den;
    }
  }
}

Array default_grid(const WeightSpec& spec, int n_points) {
  if (n_points < 2) throw std::invalid_argument("default_grid: need >= 2 points");
  Array g(n_points);
  if (spec.is_disk()) {
    // r = 1 - 10^{-6 u}, u in [0,1]: clustered toward the boundary.
    for (int i = 0; i < n_points; ++i)
      g[i] = 1 - std::pow(10.0, -6.0 * i / (n_points - 1));
  } else {
    for (int i = 0; i < n_points; ++i)
      g[i] = std::exp(std::log(100.0) * i / (n_points - 1));
  }
  return g;
}

LimitCheck check_limit_condition(const WeightSpec& spec, int n,
                                 const Array& r_grid) {
  if (r_grid.size() < 2) throw std::invalid_argument("check_limit_condition: grid too small");
  LimitCheck out;
  out.r_grid = r_grid;
  out.ratio.resize(r_grid.size());
  for (Eigen::Index i = 0; i < r_grid.size(); ++i)
    out.ratio[i] = phi_ratio(spec, n, r_grid[i]);
  bool nonincreasing = true;
  const Eigen::Index half = r_grid.size() / 2;
  for (Eigen::Index i = half; i + 1 < r_grid.size(); ++i)
    if (std::abs(out.ratio[i + 1]) > std::abs(out.ratio[i]) * (1 + 1e-12))
      nonincreasing = false;
  const Scalar first = std::abs(out.ratio[0]);
  const Scalar last = std::abs(out.ratio[r_grid.size() - 1]);
  out.decays = nonincreasing && last < 1e-3 * std::max(1.0, first);
  return out;
}

}  // namespace berglab::weights
