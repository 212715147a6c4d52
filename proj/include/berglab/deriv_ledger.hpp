#pragma once

// Integer bookkeeping for derivatives of w = e^{-2 phi}: each derivative is a
// polynomial in phi', phi'', ... times the weight, w^{(n)} = P_n(phi) e^{-2 phi}.
// Terms are integer-coefficient products  c * prod_j (phi^{(j)})^{m(j)}  whose
// level sum_j j*m(j) is conserved by the calculus below.

#include "berglab/weights.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace berglab::ledger {

using berglab::Scalar;

struct DerivProduct {
  std::int64_t coeff = 0;
  std::map<int, int> powers;  // derivative order j >= 1 -> multiplicity m(j) >= 1

  int level() const {
    int s = 0;
    for (const auto& [j, m] : powers) s += j * m;
    return s;
  }
};

struct DerivPolynomial {
  int level = 0;
  std::vector<DerivProduct> terms;  // canonical order, deduped, nonzero coeffs
};

// Validates level homogeneity, merges duplicate products, drops zeros, sorts.
DerivPolynomial make_polynomial(int level, std::vector<DerivProduct> terms);

// Product-rule derivative: level n -> level n+1.
DerivPolynomial differentiate_level(const DerivPolynomial& p);

// Multiplication by phi' (appends one to m(1)): level n -> level n+1.
DerivPolynomial multiply_phi_prime(const DerivPolynomial& p, std::int64_t scale = 1);

// P_1 = -2 phi',  P_{n+1} = P_n' - 2 phi' P_n.
DerivPolynomial build_Pn(int n);

// "4*(d1)^2 - 2*(d2)" style rendering; (dj) stands for phi^{(j)}.
std::string render(const DerivPolynomial& p);

// Plain-double evaluation of P(phi)(r) for a concrete weight.
Scalar eval(const DerivPolynomial& p, const weights::WeightSpec& spec, Scalar r);

// Coefficient of (phi')^n in a level-n polynomial (the leading product).
std::int64_t leading_coefficient(const DerivPolynomial& p);

struct SignCheck {
  Array r_grid;
  Array signed_values;       // (-1)^n P_n(phi)(r)
  bool holds_near_boundary;  // signed value >= 0 from some grid point onward
  Scalar first_radius;       // earliest grid radius from which it holds
};

// Sign condition (-1)^n w^{(n)} >= 0 near the boundary, decided through the
// ledger polynomial (the e^{-2 phi} factor is positive and is omitted).
SignCheck check_sign_condition(const weights::WeightSpec& spec, int n,
                               const Array& r_grid, int max_level = 8);

}  // namespace berglab::ledger
