#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <berglab/moments.hpp>
#include <cmath>

#include "oracles.hpp"

using namespace berglab;
using namespace berglab::moments;
using weights::WeightSpec;

namespace {

Scalar brute_disk_moment(const WeightSpec& s, Scalar lambda, int logpow,
                         long panels = 2'000'000) {
  auto f = [&](Scalar r) {
    if (r <= 0.0)
      return (lambda == 0.0 && logpow == 0) ? weights::eval_weight(s, 0.0) : 0.0;
    if (r >= 1.0) return 0.0;
    Scalar v = std::pow(r, lambda) * weights::eval_weight(s, r);
    for (int j = 0; j < logpow; ++j) v *= std::log(1.0 / r);
    return v;
  };
  return oracles::trapezoid(f, 0.0, 1.0, panels);
}

}  // namespace

TEST_CASE("plain moment of the exponential weight matches brute quadrature") {
  const auto s = WeightSpec::exp_disk(1.0);
  const auto m = moment(s, 0.0, 0);
  const Scalar brute = brute_disk_moment(s, 0.0, 0);
  CHECK(std::exp(m.log_value) == doctest::Approx(brute).epsilon(1e-10));
  // also pin the value itself (int_0^1 e^{-1/s} ds)
  CHECK(std::exp(m.log_value) == doctest::Approx(0.148495506775922).epsilon(1e-11));
  CHECK(m.rel_err < 1e-10);
}

TEST_CASE("moments with powers and logs match brute quadrature") {
  struct Case {
    WeightSpec spec;
    Scalar lambda;
    int logpow;
  };
  const Case cases[] = {
      {WeightSpec::exp_disk(1.5), 2.0, 0},
      {WeightSpec::exp_disk(1.0), 10.0, 2},
      {WeightSpec::exp_disk(2.0), 2.7, 1},
      {WeightSpec::gen_exp_disk(1.0, 1.0, 1.0), 3.0, 0},
      {WeightSpec::triple_exp_disk(), 0.0, 0},
  };
  for (const auto& c : cases) {
    const auto m = moment(c.spec, c.lambda, c.logpow);
    const Scalar brute = brute_disk_moment(c.spec, c.lambda, c.logpow);
    CHECK(std::exp(m.log_value) == doctest::Approx(brute).epsilon(1e-9));
  }
}

TEST_CASE("moment survives huge lambda without under/overflow") {
  const auto s = WeightSpec::exp_disk(1.0);
  const auto m = moment(s, 1e8, 0);
  CHECK(std::isfinite(m.log_value));
  // log v ~ -2 sqrt(lambda) = -20000 at lambda = 1e8
  CHECK(m.log_value < -19000.0);
  CHECK(m.log_value > -21000.0);
}

TEST_CASE("gaussian plane moments are factorials") {
  const auto fg = WeightSpec::fock_gaussian();
  for (int n = 0; n <= 20; n += 4) {
    const auto m = fock_moment(fg, Scalar(n));
    CHECK(m.log_value == doctest::Approx(std::lgamma(n + 1.0)).epsilon(1e-11));
  }
  // real order: m_n = Gamma(n+1)
  const auto mh = fock_moment(fg, 0.5);
  CHECK(mh.log_value == doctest::Approx(std::lgamma(1.5)).epsilon(1e-11));
}

TEST_CASE("monomial plane moments have a closed form") {
  // phi = r^2 means w = e^{-2r^2}: m_n = n! / 2^{n+1}
  const auto fm = WeightSpec::fock_monomial(2.0);
  for (int n : {0, 1, 3, 7}) {
    const auto m = fock_moment(fm, Scalar(n));
    const Scalar want = std::lgamma(n + 1.0) - (n + 1.0) * std::log(2.0);
    CHECK(m.log_value == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("asymptote ratio stabilizes for the exponential weight") {
  const auto s = WeightSpec::exp_disk(1.0);
  Array lam(4);
  lam << 1e3, 1e4, 1e5, 1e6;
  const auto table = make_moment_table(s, 0, lam);
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    CHECK(std::isfinite(table.ratio(i)));
    CHECK(table.ratio(i) > 1.0 / 3.0);
    CHECK(table.ratio(i) < 3.0);
  }
  // successive-decade drift tightens as lambda grows
  CHECK(std::abs(table.ratio(3) / table.ratio(2) - 1.0) < 0.02);
}

TEST_CASE("asymptote formula value") {
  // log(lambda^{-3/4} exp(-2 sqrt(lambda))) at alpha=1, logpow=0
  CHECK(moment_asymptote(1.0, 1e4, 0) ==
        doctest::Approx(-0.75 * std::log(1e4) - 200.0).epsilon(1e-13));
  CHECK(moment_asymptote(2.0, 100.0, 1) ==
        doctest::Approx(-1.25 * std::log(100.0) - 2.0 * std::sqrt(200.0)).epsilon(1e-13));
}

TEST_CASE("weight sandwich between the two boundary exponents") {
  for (Scalar lambda : {5.0, 50.0, 5000.0}) {
    const auto chk = moment_sandwich_check(1.0, lambda);
    CHECK(chk.holds);
    CHECK(chk.slack_low >= -1e-9);
    CHECK(chk.slack_high >= -1e-9);
    // the full gap is exactly alpha in log scale
    CHECK(chk.slack_low + chk.slack_high == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto chk2 = moment_sandwich_check(2.5, 100.0);
  CHECK(chk2.holds);
  CHECK(chk2.slack_low + chk2.slack_high == doctest::Approx(2.5).epsilon(1e-9));
}

TEST_CASE("moments decrease and are log-convex in lambda") {
  const auto s = WeightSpec::exp_disk(1.0);
  for (Scalar lambda : {5.0, 50.0, 500.0}) {
    const Scalar lo = moment(s, lambda - 1.0, 0).log_value;
    const Scalar mid = moment(s, lambda, 0).log_value;
    const Scalar hi = moment(s, lambda + 1.0, 0).log_value;
    CHECK(lo > mid);
    CHECK(mid > hi);
    CHECK(lo + hi >= 2.0 * mid - 1e-12);
  }
}

TEST_CASE("tightening the tolerance does not move the answer") {
  const auto s = WeightSpec::exp_disk(1.0);
  const auto coarse = moment(s, 123.4, 1, 1e-8);
  const auto fine = moment(s, 123.4, 1, 1e-13);
  CHECK(std::abs(coarse.log_value - fine.log_value) <=
        5.0 * (coarse.rel_err + fine.rel_err));
  CHECK(fine.rel_err <= coarse.rel_err + 1e-15);
}

TEST_CASE("moment argument validation") {
  const auto s = WeightSpec::exp_disk(1.0);
  CHECK_THROWS_AS(moment(s, -1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(moment(s, 1.0, -1), std::invalid_argument);
  CHECK_THROWS_AS(moment(s, 1.0, 0, 1e-16), std::invalid_argument);
  CHECK_THROWS_AS(moment(WeightSpec::fock_gaussian(), 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(fock_moment(s, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(moment_asymptote(-1.0, 10.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(moment_asymptote(1.0, 0.0, 0), std::invalid_argument);
}

TEST_CASE("moment table validates its grid") {
  const auto s = WeightSpec::exp_disk(1.0);
  Array bad(3);
  bad << 10.0, 5.0, 20.0;
  CHECK_THROWS_AS(make_moment_table(s, 0, bad), std::invalid_argument);
  Array good(3);
  good << 1.0, 10.0, 100.0;
  const auto t = make_moment_table(s, 1, good);
  CHECK(t.log_value(0) > t.log_value(1));
  CHECK(t.log_value(1) > t.log_value(2));
  CHECK(t.lambda.size() == 3);
}
