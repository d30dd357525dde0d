#include "doctest.h"
#include "scorelab/quadrature.hpp"
#include "scorelab/special.hpp"

#include <cmath>
#include <numbers>

using namespace scorelab;

TEST_CASE("erf family against frozen values") {
  CHECK(scorelab::erf(1.0) == doctest::Approx(0.8427007929497149).epsilon(1e-15));
  CHECK(scorelab::erf(-0.5) == doctest::Approx(-0.5204998778130465).epsilon(1e-15));
  CHECK(scorelab::erfc(3.0) == doctest::Approx(2.209049699858544e-05).epsilon(1e-13));
  CHECK(scorelab::erfcx(10.0) == doctest::Approx(0.05614099274382259).epsilon(1e-13));
  CHECK(scorelab::erfcx(0.3) == doctest::Approx(std::exp(0.09) * std::erfc(0.3)).epsilon(1e-14));
  for (double x = -5.5; x < 5.5; x += 0.37) {
    CHECK(scorelab::erf(x) == doctest::Approx(std::erf(x)).epsilon(1e-14));
  }
}

TEST_CASE("truncated gaussian moments") {
  // full line: mass sqrt(pi), mean 0, var 1/2
  auto full = truncated_gauss_moments(-INFINITY, INFINITY);
  CHECK(full.log_mass == doctest::Approx(0.5 * std::log(std::numbers::pi)));
  CHECK(full.mean == doctest::Approx(0.0));
  CHECK(full.var == doctest::Approx(0.5));
  // deep tail stays finite
  auto tail = truncated_gauss_moments(30.0, 31.0);
  CHECK(std::isfinite(tail.log_mass));
  CHECK(tail.mean == doctest::Approx(30.0 + 1.0 / 60.0).epsilon(1e-3));
  auto mirrored = truncated_gauss_moments(-31.0, -30.0);
  CHECK(mirrored.mean == doctest::Approx(-tail.mean));
  // brute-force oracle on a mixed-sign interval
  const double a = -0.7, b = 1.9;
  const int m = 200000;
  double s0 = 0, s1 = 0, s2 = 0;
  for (int i = 0; i < m; ++i) {
    const double u = a + (b - a) * (i + 0.5) / m;
    const double w = std::exp(-u * u) * (b - a) / m;
    s0 += w;
    s1 += w * u;
    s2 += w * u * u;
  }
  auto r = truncated_gauss_moments(a, b);
  CHECK(std::exp(r.log_mass) == doctest::Approx(s0).epsilon(1e-9));
  CHECK(r.mean == doctest::Approx(s1 / s0).epsilon(1e-8));
  CHECK(r.var == doctest::Approx(s2 / s0 - (s1 / s0) * (s1 / s0)).epsilon(1e-8));
}

TEST_CASE("gauss-hermite integrates polynomials exactly") {
  for (std::size_t order : {8u, 40u, 200u, 400u}) {
    auto rule = gauss_hermite(order);
    REQUIRE(rule.order() == order);
    double m0 = 0, m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < order; ++i) {
      const double w = std::exp(rule.log_weights[i]);
      const double u = rule.nodes[i];
      m0 += w;
      m2 += w * u * u;
      m4 += w * u * u * u * u;
    }
    const double sp = std::sqrt(std::numbers::pi);
    CHECK(m0 == doctest::Approx(sp).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(sp / 2).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(3 * sp / 4).epsilon(1e-12));
  }
}

TEST_CASE("gauss-legendre") {
  auto rule = gauss_legendre(20);
  double s = 0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], 10);
  CHECK(s == doctest::Approx(2.0 / 11.0).epsilon(1e-14));
}
