#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <berglab/fenchel.hpp>
#include <cmath>
#include <random>

using namespace berglab;
using namespace berglab::fenchel;

TEST_CASE("transform of v = alpha/t has the 2 sqrt(alpha x) form") {
  auto v = [](Scalar t) { return 1.0 / t; };
  const auto r = lf_transform(v, 4.0);
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(r.minimizer_t == doctest::Approx(0.5).epsilon(1e-8));
  // curvature of 1/t + 4t at t = 1/2 is 2/t^3 = 16
  CHECK(r.curvature == doctest::Approx(16.0).epsilon(1e-3));
  CHECK(r.curvature >= 0.0);
}

TEST_CASE("transform with a log term matches the closed form") {
  auto v = [](Scalar t) { return 1.0 / t - 2.0 * std::log(t); };
  const auto r = lf_transform(v, 100.0);
  CHECK(r.value == doctest::Approx(lf_closed_form(1.0, 2, 100.0)).epsilon(1e-8));
}

TEST_CASE("parabola conjugate: interior minimum needs negative slope") {
  auto v = [](Scalar t) { return 0.5 * t * t; };
  const auto r = lf_transform(v, -3.0);
  CHECK(r.value == doctest::Approx(-4.5).epsilon(1e-9));
  CHECK(r.minimizer_t == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("edge minima are reported as failures") {
  // increasing f: infimum at t -> 0
  CHECK_THROWS_AS(lf_transform([](Scalar t) { return t; }, 1.0), ConvergenceError);
  // decreasing f: infimum at t -> inf
  CHECK_THROWS_AS(lf_transform([](Scalar t) { return -2.0 * std::log(t); }, 0.0),
                  ConvergenceError);
}

TEST_CASE("fenchel-young inequality with equality at the minimizer") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<Scalar> xs(0.5, 500.0), ts(1e-3, 1e3);
  auto v = [](Scalar t) { return 2.0 / t; };
  for (int k = 0; k < 25; ++k) {
    const Scalar x = xs(rng);
    const auto r = lf_transform(v, x);
    for (int j = 0; j < 10; ++j) {
      const Scalar t = ts(rng);
      CHECK(v(t) + x * t >= r.value - 1e-9 * std::abs(r.value));
    }
    CHECK(v(r.minimizer_t) + x * r.minimizer_t ==
          doctest::Approx(r.value).epsilon(1e-9));
    CHECK(r.minimizer_t > 0.0);
    CHECK(r.curvature >= 0.0);
  }
}

TEST_CASE("closed form values") {
  CHECK(lf_closed_form(1.0, 0, 9.0) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(lf_closed_form(1.0, 1, 1.0) ==
        doctest::Approx(std::sqrt(5.0) + std::log(2.0 / (std::sqrt(5.0) + 1.0)))
            .epsilon(1e-14));
  // n = 0 collapse for arbitrary parameters
  CHECK(lf_closed_form(2.3, 0, 7.7) ==
        doctest::Approx(2.0 * std::sqrt(2.3 * 7.7)).epsilon(1e-15));
}

TEST_CASE("numeric transform reproduces the closed form across a grid") {
  for (Scalar alpha : {1.0, 2.0}) {
    for (int n : {0, 1, 2, 3}) {
      for (Scalar x : {1.0, 10.0, 100.0, 1e4, 1e6}) {
        auto v = [&](Scalar t) { return alpha / t - Scalar(n) * std::log(t); };
        const auto r = lf_transform(v, x);
        const Scalar want = lf_closed_form(alpha, n, x);
        CHECK(r.value == doctest::Approx(want).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("curvature of L scales like -x^{-3/2}") {
  for (int n : {0, 2}) {
    Scalar lo = std::numeric_limits<Scalar>::infinity(), hi = 0;
    for (Scalar x : {1e2, 1e3, 1e4, 1e5, 1e6}) {
      const Scalar d = 1e-3 * x;
      const Scalar second = (lf_closed_form(1.0, n, x + d) -
                             2 * lf_closed_form(1.0, n, x) +
                             lf_closed_form(1.0, n, x - d)) /
                            (d * d);
      const Scalar ratio = -second * std::pow(x, 1.5);
      CHECK(ratio > 0.0);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    CHECK(hi / lo < 10.0);
    // for n = 0, L'' = -(sqrt(alpha)/2) x^{-3/2} exactly
    if (n == 0) {
      CHECK(lo == doctest::Approx(0.5).epsilon(1e-4));
      CHECK(hi == doctest::Approx(0.5).epsilon(1e-4));
    }
  }
}

TEST_CASE("inverse transform closed form: values and domain") {
  // t -> alpha limit: u -> 3/4 - log(1/2)/2
  CHECK(inverse_lf_closed_form(1.0, 1.0 - 1e-12) ==
        doctest::Approx(0.75 - 0.5 * std::log(0.5)).epsilon(1e-5));
  // alpha=4, t=2: all pieces by hand
  const Scalar want = (8.0 + 2.0 + 2.0 * std::sqrt(8.0)) / 8.0 -
                      0.5 * std::log((2.0 + std::sqrt(2.0)) / 4.0);
  CHECK(inverse_lf_closed_form(4.0, 2.0) == doctest::Approx(want).epsilon(1e-14));
  CHECK_THROWS_AS(inverse_lf_closed_form(1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(inverse_lf_closed_form(1.0, 1.5), std::domain_error);
  CHECK_THROWS_AS(inverse_lf_closed_form(1.0, 0.0), std::domain_error);
}

TEST_CASE("inverse transform equals the direct sup along the dual variable") {
  // u(t) = sup_x [ -t x + 2 sqrt(alpha x) - (1/4) log x ]: maximize over the
  // upper stationary branch and compare. Independent of the closed form.
  struct P {
    Scalar alpha, t;
  };
  for (const P& p : {P{1.0, 0.01}, P{1.0, 0.3}, P{1.0, 0.9}, P{4.0, 2.0},
                     P{2.5, 1.1}}) {
    const Scalar sa = std::sqrt(p.alpha);
    const Scalar sp = (sa + std::sqrt(p.alpha - p.t)) / (2 * p.t);  // upper root in s = sqrt(x)
    auto g = [&](Scalar s) {
      return -p.t * s * s + 2 * sa * s - 0.5 * std::log(s);
    };
    // between the roots g increases; start at the geometric mean scale
    const auto m = brent_minimize([&](Scalar s) { return -g(s); },
                                  0.5 / (2 * std::sqrt(p.t)), 10 * sp, 1e-12);
    CHECK(-m.f == doctest::Approx(inverse_lf_closed_form(p.alpha, p.t)).epsilon(1e-9));
  }
}

TEST_CASE("inverse transform ratio approaches alpha^{-1/4}") {
  for (Scalar alpha : {1.0, 2.0}) {
    const Scalar limit = std::pow(alpha, -0.25);
    Scalar prev_gap = std::numeric_limits<Scalar>::infinity();
    for (Scalar t : {0.3, 0.1, 0.03, 0.01, 0.003}) {
      const Scalar ratio = inverse_lf_ratio(alpha, t);
      CHECK(ratio > 0.5 * limit);
      CHECK(ratio < 1.5 * limit);
      const Scalar gap = std::abs(ratio - limit);
      CHECK(gap <= prev_gap + 1e-12);
      prev_gap = gap;
    }
    CHECK(prev_gap < 0.02 * limit);
  }
}

TEST_CASE("series degenerates to its first term as rho -> 0") {
  const Scalar alpha = 1.3, rho = 1e-15;
  const auto s = series_boundary_asymptote(alpha, rho, 2);
  const Scalar g2 = -0.25 * std::log(2.0) + 2.0 * std::sqrt(2.0 * alpha) +
                    2.0 * std::log(rho);
  CHECK(s.log_partial_sum == doctest::Approx(g2).epsilon(1e-12));
}

TEST_CASE("series tracks the boundary asymptote across rho") {
  Scalar lo = std::numeric_limits<Scalar>::infinity(), hi = 0;
  Scalar r99 = 0, r999 = 0;
  for (Scalar rho : {0.9, 0.99, 0.995, 0.999}) {
    const Scalar L = std::log(1.0 / rho);
    const long n = long(40.0 / (L * L)) + 4000;
    const auto s = series_boundary_asymptote(1.0, rho, n);
    CHECK(std::isfinite(s.ratio));
    CHECK(s.ratio > 0.0);
    lo = std::min(lo, s.ratio);
    hi = std::max(hi, s.ratio);
    if (rho == 0.99) r99 = s.ratio;
    if (rho == 0.999) r999 = s.ratio;
  }
  CHECK(hi / lo < 5.0);
  CHECK(std::abs(r999 / r99 - 1.0) < 0.5);  // stabilization
}

TEST_CASE("series refuses an unproven tail") {
  // peak sits near alpha/log(1/rho)^2 ~ 9900; N=100 cannot cover it
  CHECK_THROWS_AS(series_boundary_asymptote(1.0, 0.99, 100), ConvergenceError);
}

TEST_CASE("series argument validation") {
  CHECK_THROWS_AS(series_boundary_asymptote(0.0, 0.5, 100), std::invalid_argument);
  CHECK_THROWS_AS(series_boundary_asymptote(1.0, 1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(series_boundary_asymptote(1.0, 0.5, 1), std::invalid_argument);
}
