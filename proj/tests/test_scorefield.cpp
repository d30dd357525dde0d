#include "doctest.h"
#include "scorelab/scorefield.hpp"

#include <cmath>

using namespace scorelab;

namespace {
Vec v1(double x) { return Vec::Constant(1, x); }
}

TEST_CASE("gaussian target matches closed form") {
  auto target = catalog("gaussian", {{"var", 2.0}});
  ScoreField field(target);
  for (double t : {0.1, 0.7, 2.0}) {
    for (double x : {-3.0, 0.0, 1.3}) {
      auto q = field.forward(t, v1(x));
      const double var_t = 2.0 * std::exp(-t) + 1.0 - std::exp(-t);
      CHECK(q.score(0) == doctest::Approx(-q.x(0) / var_t).epsilon(1e-10));
      CHECK(q.score_jacobian(0, 0) == doctest::Approx(-1.0 / var_t).epsilon(1e-10));
    }
  }
}

TEST_CASE("mixture2 quadrature against closed form") {
  auto target = catalog("mixture2", {});
  const auto& mix = std::get<GaussianMixtureSpec>(target.payload);
  ScoreField field(target);
  for (double t : {0.05, 0.3, 1.5}) {
    for (double x : {-2.0, -0.4, 0.0, 0.9, 3.0}) {
      auto q = field.forward(t, v1(x));
      auto exact = closed_form_mixture(mix, t, q.x);
      CHECK(q.score(0) == doctest::Approx(exact.score(0)).epsilon(1e-9));
      CHECK(q.score_jacobian(0, 0) == doctest::Approx(exact.jacobian(0, 0)).epsilon(1e-8));
      double lean = 0;
      auto evolved = mixture_at_time(mix, t);
      mixture_score_into(evolved, q.x.data(), &lean, 1);
      CHECK(lean == doctest::Approx(exact.score(0)).epsilon(1e-13));
    }
  }
}

TEST_CASE("counterexample block hessian at the block center") {
  const double ratio[] = {2.0034071277063610, 7.6395927512356643, 26.976870515060952, 97.658248434984413};
  const double Ms[] = {1, 2, 4, 8};
  for (int i = 0; i < 4; ++i) {
    auto target = catalog("counterexample_block", {{"M", Ms[i]}});
    auto h = hess_qbar(target, 0.5, v1(0.0));
    CHECK(-h(0, 0) == doctest::Approx(ratio[i]).epsilon(1e-9));
  }
}

TEST_CASE("time derivatives match finite differences") {
  for (const char* name : {"mixture2", "cosine_potential", "counterexample_block"}) {
    ParamMap params;
    if (std::string(name) == "counterexample_block") params["M"] = 1.0;
    auto target = catalog(name, params);
    ScoreField field(target);
    for (double t : {0.1, 0.4}) {
      for (double x : {-0.8, 0.3, 1.7}) {
        auto e = field.evaluate(t, v1(x), true);
        const double h = 1e-5;
        const double dq =
            (-field.log_pbar(t + h, v1(x)) + field.log_pbar(t - h, v1(x))) / (2 * h);
        const double dg = (field.grad_qbar(t + h, v1(x))(0) - field.grad_qbar(t - h, v1(x))(0)) / (2 * h);
        CHECK(*e.qbar_t == doctest::Approx(dq).epsilon(1e-6));
        CHECK((*e.grad_qbar_t)(0) == doctest::Approx(dg).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("hessian sandwiched by the averaged potential hessian") {
  auto target = catalog("cosine_potential", {});
  ScoreField field(target);
  for (double t : {0.05, 0.5, 0.95}) {
    for (double x = -3; x <= 3; x += 0.5) {
      auto e = field.evaluate(t, v1(x));
      CHECK(e.hess_qbar(0, 0) <= (*e.hess_upper)(0, 0) + 1e-12);
    }
  }
}

TEST_CASE("compact moments: analytic vs two-scale grid") {
  auto target = catalog("notched_square", {});
  const auto& spec = std::get<CompactMeasureSpec>(target.payload);
  QuadratureConfig grid;
  grid.compact_method = CompactMethod::grid;
  for (double t : {0.01, 0.1, 0.6}) {
    for (auto p : {std::pair{0.3, 0.2}, std::pair{0.3, 0.95}, std::pair{-2.1, 2.05}}) {
      Vec x(2);
      x << p.first, p.second;
      auto a = compact_moments(spec, 2, t, x);
      auto g = compact_moments(spec, 2, t, x, grid);
      CHECK(a.log_phat == doctest::Approx(g.log_phat).epsilon(1e-3));
      CHECK((a.ybar - g.ybar).norm() < 5e-3);
      CHECK((a.cov - g.cov).norm() < 2e-3 * std::max(1.0, a.cov.norm()));
    }
  }
}

TEST_CASE("two-point measure") {
  auto target = catalog("two_point", {});
  const double t = 0.25;
  auto e = ScoreField(target).evaluate(t, v1(0.0));
  CHECK(e.log_pbar == doctest::Approx(-1.0 / (2 * t)));
  CHECK(e.grad_qbar(0) == doctest::Approx(0.0));
  CHECK(e.hess_qbar(0, 0) == doctest::Approx(1.0 / t - 1.0 / (t * t)));
  CHECK_THROWS_AS(qbar_time_derivs(target, t, v1(0.0)), UnsupportedError);
}

TEST_CASE("contracts") {
  auto target = catalog("mixture2", {});
  ScoreField field(target);
  CHECK_THROWS_AS(field.evaluate(0.0, v1(0.0)), DomainError);
  CHECK_THROWS_AS(field.evaluate(1.5, v1(0.0)), DomainError);
  auto e = field.evaluate(0.3, v1(0.0));
  CHECK_THROWS_AS(q_coords(e, 0.3), ContractError);
  CHECK_NOTHROW(q_coords(e, -std::log1p(-0.3)));
  QuadratureConfig bad;
  bad.gh_order_1d = 4;
  CHECK_THROWS_AS(ScoreField(target, bad), DomainError);
}
