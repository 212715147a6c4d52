#include "berglab/deriv_ledger.hpp"

#include <algorithm>
#include <sstream>

namespace berglab::ledger {

namespace {

// Canonical order: compare multiplicity vectors from low derivative order up,
// larger multiplicity first. Puts (d1)^n before mixed products before (dn).
bool term_before(const DerivProduct& a, const DerivProduct& b) {
  const int top = std::max(a.powers.empty() ? 0 : a.powers.rbegin()->first,
                           b.powers.empty() ? 0 : b.powers.rbegin()->first);
  for (int j = 1; j <= top; ++j) {
    const auto ita = a.powers.find(j);
    const auto itb = b.powers.find(j);
    const int ma = ita == a.powers.end() ? 0 : ita->second;
    const int mb = itb == b.powers.end() ? 0 : itb->second;
    if (ma != mb) return ma > mb;
  }
  return false;
}

}  // namespace

DerivPolynomial make_polynomial(int level, std::vector<DerivProduct> terms) {
  std::map<std::map<int, int>, std::int64_t> acc;
  for (const auto& t : terms) {
    if (t.level() != level)
      throw std::invalid_argument(
          "make_polynomial: term level mismatch (sum j*m(j) != level)");
    for (const auto& [j, m] : t.powers)
      if (j < 1 || m < 1)
        throw std::invalid_argument("make_polynomial: invalid product exponents");
    acc[t.powers] += t.coeff;
  }
  DerivPolynomial p;
  p.level = level;
  for (auto& [pow, c] : acc)
    if (c != 0) p.terms.push_back({c, pow});
  std::sort(p.terms.begin(), p.terms.end(), term_before);
  return p;
}

DerivPolynomial differentiate_level(const DerivPolynomial& p) {
  std::vector<DerivProduct> out;
  for (const auto& t : p.terms) {
    for (const auto& [j, m] : t.powers) {
      DerivProduct d = t;
      d.coeff *= m;
      if (--d.powers[j] == 0) d.powers.erase(j);
      d.powers[j + 1] += 1;
      out.push_back(std::move(d));
    }
  }
  return make_polynomial(p.level + 1, std::move(out));
}

DerivPolynomial multiply_phi_prime(const DerivPolynomial& p, std::int64_t scale) {
  std::vector<DerivProduct> out;
  for (const auto& t : p.terms) {
    DerivProduct d = t;
    d.coeff *= scale;
    d.powers[1] += 1;
    out.push_back(std::move(d));
  }
  return make_polynomial(p.level + 1, std::move(out));
}

DerivPolynomial build_Pn(int n) {
  if (n < 0) throw std::invalid_argument("build_Pn: n must be >= 0");
  if (n == 0) return make_polynomial(0, {DerivProduct{1, {}}});
  DerivPolynomial p = make_polynomial(1, {DerivProduct{-2, {{1, 1}}}});
  for (int level = 1; level < n; ++level) {
    DerivPolynomial diff = differentiate_level(p);
    DerivPolynomial prod = multiply_phi_prime(p, -2);
    std::vector<DerivProduct> merged = diff.terms;
    merged.insert(merged.end(), prod.terms.begin(), prod.terms.end());
    p = make_polynomial(level + 1, std::move(merged));
  }
  return p;
}

std::string render(const DerivPolynomial& p) {
  if (p.terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : p.terms) {
    if (first) {
      if (t.coeff < 0) os << "-";
      first = false;
    } else {
      os << (t.coeff < 0 ? " - " : " + ");
    }
    os << std::abs(t.coeff);
    for (const auto& [j, m] : t.powers) {
      os << "*(d" << j << ")";
      if (m > 1) os << "^" << m;
    }
  }
  return os.str();
}

Scalar eval(const DerivPolynomial& p, const weights::WeightSpec& spec, Scalar r) {
  Scalar sum = 0;
  for (const auto& t : p.terms) {
    Scalar prod = static_cast<Scalar>(t.coeff);
    for (const auto& [j, m] : t.powers)
      prod *= std::pow(weights::phi_derivative(spec, j, r), m);
    sum += prod;
  }
  return sum;
}

std::int64_t leading_coefficient(const DerivPolynomial& p) {
  for (const auto& t : p.terms)
    if (t.powers.size() == 1 && t.powers.count(1) &&
        t.powers.at(1) == p.level)
      return t.coeff;
  return 0;
}

SignCheck check_sign_condition(const weights::WeightSpec& spec, int n,
                               const Array& r_grid, int max_level) {
  if (n < 1 || n > max_level)
    throw std::invalid_argument("check_sign_condition: level out of range");
  const DerivPolynomial pn = build_Pn(n);
  SignCheck out;
  out.r_grid = r_grid;
  out.signed_values.resize(r_grid.size());
  const Scalar sign = (n % 2 == 0) ? 1.0 : -1.0;
  for (Eigen::Index i = 0; i < r_grid.size(); ++i)
    out.signed_values[i] = sign * eval(pn, spec, r_grid[i]);
  Eigen::Index first = r_grid.size();
  for (Eigen::Index i = r_grid.size(); i-- > 0;) {
    if (out.signed_values[i] >= 0) first = i;
    else break;
  }
  out.holds_near_boundary = first < r_grid.size();
  out.first_radius = out.holds_near_boundary ? r_grid[first]
                                             : std::numeric_limits<Scalar>::quiet_NaN();
  return out;
}

}  // namespace berglab::ledger
