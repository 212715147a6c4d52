#pragma once

// Radial weight families on the unit disk and on the plane, with closed-form
// derivatives of the exponent phi (w = e^{-2 phi}). Disk families live on
// 0 <= r < 1, plane (Fock) families on r >= 0.

#include "berglab/numerics.hpp"

#include <string>

namespace berglab::weights {

enum class Family {
  ExpDisk,        // w(r) = exp(-alpha/(1-r)),            phi = alpha/(2(1-r))
  GenExpDisk,     // w(r) = (1-r^2)^A exp(-B/(1-r^2)^k),  phi = -(A/2)log(1-r^2) + B/(2(1-r^2)^k)
  TripleExpDisk,  // w(r) = exp(-e^{e^{1/(1-r)}}),        phi = e^{e^{1/(1-r)}}/2
  FockMonomial,   // phi(r) = r^m
  FockGaussian,   // phi(r) = r^2/2
};

struct WeightSpec {
  Family family = Family::ExpDisk;
  Scalar alpha = 1.0;                      // ExpDisk
  Scalar A = 0.0, B = 1.0, kappa = 1.0;    // GenExpDisk
  Scalar m = 2.0;                          // FockMonomial exponent

  static WeightSpec exp_disk(Scalar alpha);
  static WeightSpec gen_exp_disk(Scalar A, Scalar B, Scalar kappa);
  static WeightSpec triple_exp_disk();
  static WeightSpec fock_monomial(Scalar m);
  static WeightSpec fock_gaussian();

  bool is_disk() const {
    return family == Family::ExpDisk || family == Family::GenExpDisk ||
           family == Family::TripleExpDisk;
  }
  std::string name() const;
};

// Checks 0 <= r (and r < 1 for disk families); throws std::domain_error.
void check_radius(const WeightSpec& spec, Scalar r);

Scalar phi(const WeightSpec& spec, Scalar r);
Scalar log_weight(const WeightSpec& spec, Scalar r);  // = -2 phi(r)
Scalar eval_weight(const WeightSpec& spec, Scalar r);

// n-th derivative of phi; n = 0 returns phi itself.
Scalar phi_derivative(const WeightSpec& spec, int n, Scalar r);

// phi^{(n)}(r) / (phi'(r))^n, evaluated stably (log-space where the pieces
// individually overflow, e.g. TripleExpDisk near the boundary).
Scalar phi_ratio(const WeightSpec& spec, int n, Scalar r);

// Default evaluation grids: 64 points clustered at the natural boundary
// (r = 1 - 10^{-6u} on the disk, geometric [1,100] on the plane).
Array default_grid(const WeightSpec& spec, int n_points = 64);

struct LimitCheck {
  Array r_grid;
  Array ratio;      // phi^{(n)} / (phi')^n
  bool decays;      // nonincreasing tail and small terminal value
};

// Limit condition phi^{(n)}/(phi')^n -> 0 toward the boundary (r->1 on the
// disk, r->inf on the plane).
LimitCheck check_limit_condition(const WeightSpec& spec, int n,
                                 const Array& r_grid);

}  // namespace berglab::weights
