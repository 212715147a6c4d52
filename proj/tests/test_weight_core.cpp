#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <berglab/deriv_ledger.hpp>
#include <berglab/weights.hpp>
#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace berglab;
using namespace berglab::weights;
namespace ledger = berglab::ledger;

namespace {

// Step size for FD probes: the local variation rate of phi's derivatives is
// |phi''/phi'| (each derivative order multiplies by roughly that factor), so
// shrink h with it and keep the whole stencil window inside the domain.
Scalar fd_h(const WeightSpec& s, Scalar r, int n, bool weight_probe = false) {
  const int m = (n + 1) / 2 + 2;
  const Scalar d1 = phi_derivative(s, 1, r);
  const Scalar d2 = phi_derivative(s, 2, r);
  Scalar scale = 1.0;
  if (d1 != 0.0) scale = std::max(1.0, std::abs(d2 / d1));
  // probing w = e^{-2 phi} itself: successive derivatives also grow by 2 phi'
  if (weight_probe) scale = std::max(scale, 2.0 * std::abs(d1));
  Scalar h = 0.7 * std::pow(2.2e-16, 1.0 / (2 * m + 2)) / scale;
  const Scalar room = s.is_disk() ? std::min(r, 1.0 - r) : r;
  return std::min(h, 0.8 * room / (m + 1));
}

void check_close(Scalar got, Scalar want, Scalar rel, Scalar noise) {
  CAPTURE(got);
  CAPTURE(want);
  CAPTURE(noise);
  CHECK(std::abs(got - want) <= rel * std::abs(want) + 8.0 * noise + 1e-300);
}

}  // namespace

TEST_CASE("weight values match their defining formulas") {
  const auto e1 = WeightSpec::exp_disk(1.0);
  CHECK(eval_weight(e1, 0.9) == doctest::Approx(std::exp(-10.0)).epsilon(1e-13));
  CHECK(eval_weight(e1, 0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));

  const auto g = WeightSpec::gen_exp_disk(1.5, 0.8, 2.0);
  const Scalar r = 0.55, y = 1.0 - r * r;
  CHECK(eval_weight(g, r) ==
        doctest::Approx(std::pow(y, 1.5) * std::exp(-0.8 / (y * y))).epsilon(1e-13));

  const auto t = WeightSpec::triple_exp_disk();
  CHECK(eval_weight(t, 0.3) ==
        doctest::Approx(std::exp(-std::exp(std::exp(1.0 / 0.7)))).epsilon(1e-12));

  const auto fg = WeightSpec::fock_gaussian();
  CHECK(eval_weight(fg, 0.0) == 1.0);
  CHECK(eval_weight(fg, 2.0) == doctest::Approx(std::exp(-4.0)).epsilon(1e-13));

  const auto fm = WeightSpec::fock_monomial(3.0);
  CHECK(eval_weight(fm, 1.5) == doctest::Approx(std::exp(-2.0 * std::pow(1.5, 3.0))).epsilon(1e-13));
}

TEST_CASE("radius domain is enforced") {
  const auto e1 = WeightSpec::exp_disk(2.0);
  CHECK_THROWS_AS(phi(e1, 1.0), std::domain_error);
  CHECK_THROWS_AS(phi(e1, -0.1), std::domain_error);
  CHECK_THROWS_AS(eval_weight(e1, 1.5), std::domain_error);
  const auto fg = WeightSpec::fock_gaussian();
  CHECK_THROWS_AS(phi(fg, -1.0), std::domain_error);
  CHECK_NOTHROW(phi(fg, 1e6));  // plane weights have no upper cutoff
}

TEST_CASE("spec factories validate parameters") {
  CHECK_THROWS_AS(WeightSpec::exp_disk(0.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightSpec::exp_disk(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightSpec::gen_exp_disk(1.0, -0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightSpec::gen_exp_disk(1.0, 0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(WeightSpec::fock_monomial(0.0), std::invalid_argument);
}

TEST_CASE("closed-form phi derivatives agree with finite differences") {
  struct Probe {
    WeightSpec spec;
    Scalar lo, hi;
  };
  const Probe probes[] = {
      {WeightSpec::exp_disk(1.0), 0.05, 0.60},
      {WeightSpec::exp_disk(2.5), 0.05, 0.55},
      {WeightSpec::gen_exp_disk(1.5, 0.8, 2.0), 0.05, 0.60},
      {WeightSpec::gen_exp_disk(-0.5, 1.2, 1.0), 0.05, 0.60},
      {WeightSpec::triple_exp_disk(), 0.05, 0.40},
      {WeightSpec::fock_gaussian(), 0.30, 3.00},
      {WeightSpec::fock_monomial(3.0), 0.60, 2.50},
      {WeightSpec::fock_monomial(2.5), 0.60, 2.50},
  };
  std::mt19937_64 rng(20240811);
  for (const auto& pr : probes) {
    std::uniform_real_distribution<Scalar> dist(pr.lo, pr.hi);
    for (int n = 1; n <= 8; ++n) {
      for (int k = 0; k < 4; ++k) {
        const Scalar r = dist(rng);
        const Scalar h = fd_h(pr.spec, r, n);
        const Scalar want = phi_derivative(pr.spec, n, r);
        const auto got = oracles::fd_probe(
            [&](Scalar x) { return phi(pr.spec, x); }, r, n, h);
        check_close(got.value, want, 1e-4, got.noise);
      }
    }
  }
}

TEST_CASE("triple exponential first derivative pinpointed at r = 0.3") {
  const auto t = WeightSpec::triple_exp_disk();
  const Scalar got = phi_derivative(t, 1, 0.3);
  const Scalar fd = oracles::fd_derivative([&](Scalar x) { return phi(t, x); },
                                           0.3, 1, fd_h(t, 0.3, 1));
  CHECK(got == doctest::Approx(fd).epsilon(1e-6));
  // hand-assembled chain rule: phi' = e^{e^x} e^x x^2 / 2 at x = 1/(1-r)
  const Scalar x = 1.0 / 0.7;
  const Scalar hand = 0.5 * std::exp(std::exp(x)) * std::exp(x) * x * x;
  CHECK(got == doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("derivative ratios follow the exponential-disk law") {
  // phi^{(n)}/(phi')^n = n! (2(1-r)/alpha)^{n-1} for the exponential weight
  for (Scalar alpha : {1.0, 2.0}) {
    const auto s = WeightSpec::exp_disk(alpha);
    for (int n = 2; n <= 6; ++n) {
      for (Scalar r : {0.3, 0.7, 0.9, 0.99}) {
        Scalar law = 1.0;
        for (int j = 2; j <= n; ++j) law *= j;
        law *= std::pow(2.0 * (1.0 - r) / alpha, n - 1);
        CHECK(phi_ratio(s, n, r) == doctest::Approx(law).epsilon(1e-11));
      }
    }
  }
  // the worked value: alpha = 1, n = 2, r = 0.9 -> 2 * 0.2 = 0.4
  CHECK(phi_ratio(WeightSpec::exp_disk(1.0), 2, 0.9) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("derivative ratios match the direct quotient away from overflow") {
  for (const auto& s : {WeightSpec::gen_exp_disk(1.5, 0.8, 2.0),
                        WeightSpec::fock_monomial(3.0), WeightSpec::fock_gaussian()}) {
    for (int n = 2; n <= 5; ++n) {
      for (Scalar r : {0.4, 0.7}) {
        const Scalar direct = phi_derivative(s, n, r) /
                              std::pow(phi_derivative(s, 1, r), n);
        CHECK(phi_ratio(s, n, r) == doctest::Approx(direct).epsilon(1e-10));
      }
    }
  }
  // triple exponential: log-space path must agree with the direct quotient
  // at a radius where both are finite
  const auto t = WeightSpec::triple_exp_disk();
  for (int n = 2; n <= 5; ++n) {
    const Scalar direct = phi_derivative(t, n, 0.35) /
                          std::pow(phi_derivative(t, 1, 0.35), n);
    CHECK(phi_ratio(t, n, 0.35) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("phi ratio stays finite where the pieces overflow") {
  const auto t = WeightSpec::triple_exp_disk();
  // at r = 0.9, e^{e^{10}} overflows double but the ratio is ~0
  CHECK(!std::isfinite(phi_derivative(t, 2, 0.9)));
  const Scalar ratio = phi_ratio(t, 2, 0.9);
  CHECK(std::isfinite(ratio));
  CHECK(ratio >= 0.0);
  CHECK(ratio < 1e-3);
}

TEST_CASE("limit condition: disk families decay, rates fit on the plane") {
  for (const auto& s : {WeightSpec::exp_disk(1.0),
                        WeightSpec::gen_exp_disk(1.5, 0.8, 2.0)}) {
    for (int n = 2; n <= 4; ++n) {
      const auto chk = check_limit_condition(s, n, default_grid(s));
      CHECK(chk.decays);
    }
  }
  // triple exponential on a grid where evaluation stays finite
  {
    const auto t = WeightSpec::triple_exp_disk();
    const auto chk = check_limit_condition(t, 2, default_grid(t));
    CHECK(chk.decays);
  }
  // gaussian: phi''/(phi')^2 = r^{-2} exactly
  {
    const auto fg = WeightSpec::fock_gaussian();
    CHECK(phi_ratio(fg, 2, 10.0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(check_limit_condition(fg, 2, default_grid(fg)).decays);
  }
  // monomial phi = r^3: ratio_n ~ r^{-3(n-1)}; fit the log-log slope
  {
    const auto fm = WeightSpec::fock_monomial(3.0);
    for (int n : {2, 3}) {
      const auto chk = check_limit_condition(fm, n, default_grid(fm));
      CHECK(chk.decays);
      const int last = int(chk.r_grid.size()) - 1;
      const Scalar slope =
          (std::log(chk.ratio(last)) - std::log(chk.ratio(last - 8))) /
          (std::log(chk.r_grid(last)) - std::log(chk.r_grid(last - 8)));
      CHECK(slope == doctest::Approx(-3.0 * (n - 1)).epsilon(1e-6));
    }
  }
}

TEST_CASE("ledger polynomials render canonically") {
  CHECK(ledger::render(ledger::build_Pn(0)) == "1");
  CHECK(ledger::render(ledger::build_Pn(1)) == "-2*(d1)");
  CHECK(ledger::render(ledger::build_Pn(2)) == "4*(d1)^2 - 2*(d2)");
  CHECK(ledger::render(ledger::build_Pn(3)) ==
        "-8*(d1)^3 + 12*(d1)*(d2) - 2*(d3)");
}

TEST_CASE("ledger term counts equal integer partition counts") {
  const int partitions[] = {1, 1, 2, 3, 5, 7, 11, 15, 22};
  for (int n = 0; n <= 8; ++n)
    CHECK(int(ledger::build_Pn(n).terms.size()) == partitions[n]);
}

TEST_CASE("ledger leading coefficient is (-2)^n") {
  for (int n = 1; n <= 10; ++n) {
    const auto p = ledger::build_Pn(n);
    CHECK(ledger::leading_coefficient(p) ==
          (n % 2 == 0 ? 1 : -1) * (std::int64_t(1) << n));
    CHECK(p.level == n);
  }
}

TEST_CASE("level homogeneity is enforced") {
  using ledger::DerivProduct;
  // (d1)^2 has level 2, (d3) has level 3: cannot live in one polynomial
  CHECK_THROWS_AS(ledger::make_polynomial(
                      2, {DerivProduct{1, {{1, 2}}}, DerivProduct{1, {{3, 1}}}}),
                  std::invalid_argument);
  CHECK_NOTHROW(ledger::make_polynomial(
      3, {DerivProduct{1, {{1, 1}, {2, 1}}}, DerivProduct{-4, {{3, 1}}}}));
}

TEST_CASE("make_polynomial merges duplicates and drops zeros") {
  using ledger::DerivProduct;
  const auto p = ledger::make_polynomial(
      2, {DerivProduct{3, {{2, 1}}}, DerivProduct{-3, {{2, 1}}},
          DerivProduct{5, {{1, 2}}}});
  CHECK(p.terms.size() == 1);
  CHECK(ledger::render(p) == "5*(d1)^2");
}

TEST_CASE("symbolic derivative equals numeric derivative of the evaluation") {
  const auto specs = {WeightSpec::exp_disk(1.3), WeightSpec::fock_gaussian()};
  for (const auto& s : specs) {
    for (int n = 1; n <= 5; ++n) {
      const auto p = ledger::build_Pn(n);
      const auto dp = ledger::differentiate_level(p);
      CHECK(dp.level == n + 1);
      for (Scalar r : {0.25, 0.45}) {
        const Scalar got = ledger::eval(dp, s, r);
        const auto fd = oracles::fd_probe(
            [&](Scalar x) { return ledger::eval(p, s, x); }, r, 1,
            fd_h(s, r, 1));
        check_close(got, fd.value, 1e-8, fd.noise);
      }
    }
  }
}

TEST_CASE("multiply_phi_prime scales by phi' pointwise") {
  const auto s = WeightSpec::exp_disk(2.0);
  const auto p = ledger::build_Pn(3);
  const auto q = ledger::multiply_phi_prime(p, -2);
  const Scalar r = 0.4;
  CHECK(ledger::eval(q, s, r) ==
        doctest::Approx(-2.0 * phi_derivative(s, 1, r) * ledger::eval(p, s, r))
            .epsilon(1e-13));
}

TEST_CASE("weight derivatives factor through the ledger polynomials") {
  struct Probe {
    WeightSpec spec;
    Scalar lo, hi;
  };
  const Probe probes[] = {
      {WeightSpec::exp_disk(1.0), 0.05, 0.55},
      {WeightSpec::gen_exp_disk(1.5, 0.8, 2.0), 0.05, 0.55},
      {WeightSpec::triple_exp_disk(), 0.08, 0.38},
      {WeightSpec::fock_gaussian(), 0.30, 2.50},
      {WeightSpec::fock_monomial(3.0), 0.60, 2.20},
  };
  std::mt19937_64 rng(977113);
  for (const auto& pr : probes) {
    std::uniform_real_distribution<Scalar> dist(pr.lo, pr.hi);
    for (int n = 1; n <= 8; ++n) {
      const auto p = ledger::build_Pn(n);
      for (int k = 0; k < 3; ++k) {
        const Scalar r = dist(rng);
        const Scalar w = eval_weight(pr.spec, r);
        const Scalar want = ledger::eval(p, pr.spec, r) * w;
        const auto got = oracles::fd_probe(
            [&](Scalar x) { return eval_weight(pr.spec, x); }, r, n,
            fd_h(pr.spec, r, n, true));
        check_close(got.value, want, 2e-4, got.noise);
      }
    }
  }
}

TEST_CASE("alternating sign condition for the exponential weight") {
  const auto s = WeightSpec::exp_disk(1.0);
  const auto grid = default_grid(s);

  // n = 1: -w' >= 0 everywhere (w decreasing), so it holds from the start
  const auto c1 = ledger::check_sign_condition(s, 1, grid);
  CHECK(c1.holds_near_boundary);
  CHECK(c1.first_radius == doctest::Approx(grid(0)));

  // n = 2: P_2 = 4 phi'^2 - 2 phi'' changes sign exactly at r = 1 - alpha/2
  const auto c2 = ledger::check_sign_condition(s, 2, grid);
  CHECK(c2.holds_near_boundary);
  CHECK(c2.first_radius > 0.45);
  CHECK(c2.first_radius < 0.65);
  CHECK(ledger::eval(ledger::build_Pn(2), s, 0.5) == doctest::Approx(0.0).scale(1).epsilon(1e-12));

  for (int n = 3; n <= 6; ++n)
    CHECK(ledger::check_sign_condition(s, n, grid).holds_near_boundary);
}

TEST_CASE("sign condition holds for the other disk families in-range") {
  {
    const auto g = WeightSpec::gen_exp_disk(1.5, 0.8, 2.0);
    for (int n = 1; n <= 5; ++n)
      CHECK(ledger::check_sign_condition(g, n, default_grid(g)).holds_near_boundary);
  }
  {
    // triple exponential: evaluate on a finite-range grid
    const auto t = WeightSpec::triple_exp_disk();
    Array grid = Array::LinSpaced(40, 0.05, 0.42);
    for (int n = 1; n <= 5; ++n)
      CHECK(ledger::check_sign_condition(t, n, grid).holds_near_boundary);
  }
}
