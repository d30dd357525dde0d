#include "doctest.h"
#include "scorelab/bounds.hpp"

#include <cmath>

using namespace scorelab;

TEST_CASE("thm31 formulas") {
  auto b = thm31_bounds(2, 2, std::log(4.0 / 3.0));
  CHECK(b.lower == doctest::Approx(-3.0).epsilon(1e-14));
  CHECK(b.horizon == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(thm31_bounds(2, 2, std::log(2.0)).lower == -kInf);
  auto z = thm31_bounds(3.5, 1.25, 0.0);
  CHECK(z.upper == 1.25);
  CHECK(z.lower == -3.5);
  CHECK(thm31_bounds(0.8, 1, 0).horizon == kInf);
  // lower bound decreasing towards the horizon
  for (double M0 : {1.1, 2.0, 5.0, 10.0}) {
    const double h = thm31_bounds(M0, 0, 0).horizon;
    double prev = -M0;
    for (int i = 1; i < 100; ++i) {
      const double lo = thm31_bounds(M0, 0, h * i / 100.0).lower;
      CHECK(lo < prev);
      prev = lo;
    }
    CHECK(thm31_bounds(M0, 0, h * (1 - 1e-9)).lower < -1e6);
  }
}

TEST_CASE("cor32") {
  CHECK(cor32_Ct(0.7, 2.5, 0.0) == doctest::Approx(2.5));
  CHECK(cor32_Ct(3.0, 1.0, 0.0) == doctest::Approx(3.0));
  CHECK(cor32_Ct(-1.0, 3.0, std::log(2.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(cor32_Ct(1.0, 1.0, std::log(4.0 / 3.0)) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK_THROWS_AS(cor32_Ct(1.0, 1.0, std::log(2.0)), HorizonError);
  // between the pole of the formula and the horizon the bound is vacuous
  CHECK(cor32_Ct(1.0, 1.0, 0.5) == kInf);
  CHECK(cor32_max(1.0, 1.0, std::log(4.0 / 3.0)) == doctest::Approx(5.0));
}

TEST_CASE("prior horizon comparison") {
  CHECK(prior_horizon(3.0) == doctest::Approx(0.166474365768372919).epsilon(1e-12));
  const double prior[] = {0.19966815779841512666, 0.16647436576837291924, 0.09995838013869733046};
  const double ours[] = {1.0986122886681096914, 0.69314718055994530942, 0.28768207245178092744};
  const double M0s[] = {1.5, 2.0, 4.0};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(prior_horizon(M0s[i] + 1) - prior[i]) < 1e-12);
    CHECK(std::abs(thm31_bounds(M0s[i], 0, 0).horizon - ours[i]) < 1e-12);
  }
  for (double M0 = 1.1; M0 <= 10.0; M0 += 0.1) {
    CHECK(prior_horizon(M0 + 1) < thm31_bounds(M0, 0, 0).horizon);
  }
  double prev = kInf;
  for (double L = 0.5; L < 1e4; L *= 1.7) {
    CHECK(prior_horizon(L) < prev);
    prev = prior_horizon(L);
  }
}

TEST_CASE("thm33 constants and scaling") {
  Thm33Params p;
  p.n = 1;
  p.beta1 = 1;
  p.L = 1;
  p.x0 = Vec::Zero(1);
  p.grad_g_x0 = Vec::Zero(1);
  auto c = thm33_constants(p);
  CHECK(c.C_n == doctest::Approx(6.3907246449760868).epsilon(1e-14));
  CHECK(c.C_beta == doctest::Approx(4.0));
  const Vec x = Vec::Constant(1, 2.5);
  auto a = thm33_bounds(p, 0.25, x);
  auto b = thm33_bounds(p, 1.0, x);
  CHECK(a.time == doctest::Approx(2 * b.time).epsilon(1e-15));
  Thm33Params q;
  q.n = 1;
  q.beta2 = 0.7;
  CHECK(thm33_bounds(q, 0.5, x).grad == doctest::Approx(0.7));
  // translating target and x0 together leaves the bounds unchanged
  p.alpha2 = 0.3;
  p.grad_g_x0 = Vec::Constant(1, 0.4);
  Thm33Params s = p;
  s.x0 = Vec::Constant(1, 5.0);
  for (double xv : {-3.0, 0.1, 2.0}) {
    auto u = thm33_bounds(p, 0.3, Vec::Constant(1, xv));
    auto v = thm33_bounds(s, 0.3, Vec::Constant(1, xv + 5.0));
    CHECK(u.grad == doctest::Approx(v.grad));
    CHECK(u.hess == doctest::Approx(v.hess));
    CHECK(u.time == doctest::Approx(v.time));
  }
  p.alpha2 = 1.0;
  CHECK_THROWS_AS(thm33_bounds(p, 0.5, x), DomainError);
}

TEST_CASE("thm5 / thm37 / misc") {
  auto z = thm5_bounds(0, 0);
  CHECK((z.grad == 0 && z.hess_lower == 0 && z.hess_upper == 0));
  auto a = thm5_bounds(1, 2);
  CHECK((a.grad == 1 && a.hess_lower == -3 && a.hess_upper == 2));
  CHECK(thm5_bounds(2, 0).hess_lower == -4);
  auto b = thm37_bounds(1, 0.5, Vec::Zero(1));
  CHECK(b.grad == 2);
  CHECK(b.hess == 6);
  auto c = thm37_bounds(0, 0.25, Vec::Constant(1, -1.5));
  CHECK(c.grad == 6);
  CHECK(c.hess == 4);
  CHECK(early_stopping_lipschitz(0.1, 1) == doctest::Approx(111.0));
  CHECK(kl_predicted(1, 1, 3, 0, 1e300, 1) == doctest::Approx(0.09957413673572789).epsilon(1e-13));
  const double base = kl_predicted(1, 1, 3, 0, 1e300, 1);
  CHECK(kl_predicted(1, 1, 3, 0.2, 1e300, 1) - base ==
        doctest::Approx(4 * (kl_predicted(1, 1, 3, 0.1, 1e300, 1) - base)));
  CHECK(kl_predicted(1, 1, 3, 0, 20, 2) - base == doctest::Approx(2 * (kl_predicted(1, 1, 3, 0, 40, 2) - base)));
}

TEST_CASE("sweeps") {
  SUBCASE("std_normal thm31 margins match zero bounds") {
    auto rep = sweep_verify(catalog("std_normal", {}), "thm31", SweepGrid::standard(1));
    CHECK(rep.violation_count() == 0);
    for (const auto& r : rep.rows) CHECK(std::abs(r.margin) < 1e-9);
  }
  SUBCASE("cosine M0=2 thm31 up to 0.45") {
    SweepGrid g = SweepGrid::standard(1);
    g.t_bars = {0.05, 0.1, 0.2, 0.35, 0.45};
    auto rep = sweep_verify(catalog("cosine_potential", {{"a", 2.0}, {"b", 1.0}}), "thm31", g);
    CHECK(rep.violation_count() == 0);
    CHECK(rep.skipped_count() == 0);
  }
  SUBCASE("beyond-horizon points are skipped") {
    auto rep = sweep_verify(catalog("cosine_potential", {{"a", 2.0}, {"b", 1.0}}), "thm31", SweepGrid::standard(1));
    CHECK(rep.violation_count() == 0);
    CHECK(rep.skipped_count() == 3 * 41);
  }
  SUBCASE("two_point thm37") {
    SweepGrid g;
    g.t_bars = {0.05, 0.1, 0.5};
    for (int i = 0; i <= 60; ++i) g.points.push_back(Vec::Constant(1, -3.0 + 0.1 * i));
    auto rep = sweep_verify(catalog("two_point", {}), "thm37", g);
    CHECK(rep.violation_count() == 0);
    CHECK(rep.rows.size() == 2 * 3 * 61);
  }
  SUBCASE("other theorems on smooth targets") {
    for (const char* id : {"cor32", "thm33", "thm35"}) {
      auto rep = sweep_verify(catalog("cosine_potential", {}), id, SweepGrid::standard(1));
      CHECK_MESSAGE(rep.violation_count() == 0, id);
    }
    auto rep = sweep_verify(catalog("mixture2", {}), "thm33", SweepGrid::standard(1));
    CHECK(rep.violation_count() == 0);
  }
  SUBCASE("inapplicable pairs") {
    CHECK_THROWS_AS(sweep_verify(catalog("two_point", {}), "thm31", SweepGrid::standard(1)), UnsupportedError);
    CHECK_THROWS_AS(sweep_verify(catalog("mixture2", {}), "thm37", SweepGrid::standard(1)), UnsupportedError);
    CHECK_THROWS_AS(sweep_verify(catalog("mixture2", {}), "thm35", SweepGrid::standard(1)), UnsupportedError);
    CHECK_THROWS_AS(sweep_verify(catalog("mixture2", {}), "thm99", SweepGrid::standard(1)), DomainError);
  }
  SUBCASE("report serialization") {
    SweepGrid g;
    g.t_bars = {0.5};
    g.points = {Vec::Zero(1)};
    auto rep = sweep_verify(catalog("std_normal", {}), "thm31", g);
    auto csv = rep.to_csv();
    CHECK(csv.find("theorem,check,t_bar,t,x0,bound,observed,margin,violated,skipped") == 0);
    CHECK(rep.to_json().find("\"theorem_id\": \"thm31\"") != std::string::npos);
  }
}
