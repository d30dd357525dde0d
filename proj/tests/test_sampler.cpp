#include "doctest.h"
#include "scorelab/rng.hpp"
#include "scorelab/sampler.hpp"

#include <cmath>
#include <numeric>

using namespace scorelab;

namespace {
double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }
double var(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}
}  // namespace

TEST_CASE("philox known answers") {
  auto a = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(a == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  auto b = Philox4x32::block({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u});
  CHECK(b == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  auto c = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  CHECK(c == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal stream moments") {
  double s1 = 0, s2 = 0, s4 = 0;
  const int n = 400000;
  for (int i = 0; i < n / 4; ++i) {
    NormalStream r(7, i, 3);
    for (int k = 0; k < 4; ++k) {
      const double z = r.normal();
      s1 += z;
      s2 += z * z;
      s4 += z * z * z * z;
    }
  }
  CHECK(std::abs(s1 / n) < 5 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3) < 5 * std::sqrt(96.0 / n));
}

TEST_CASE("exp_step") {
  const Vec x = Vec::Constant(1, 0.7);
  const Vec z = Vec::Zero(1);
  CHECK(exp_step(x, 0.3, z, z)(0) == doctest::Approx(std::exp(0.15) * 0.7));
  CHECK(exp_step(z, 2 * std::log(2.0), Vec::Ones(1), z)(0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(exp_step(z, std::log(2.0), z, Vec::Ones(1))(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(exp_step(x, 0.0, z, z), DomainError);
  // linear test problem: s = -x frozen per step gives the affine recursion
  const double dt = 0.17;
  double xv = 1.3;
  for (int k = 0; k < 50; ++k) {
    const Vec next = exp_step(Vec::Constant(1, xv), dt, Vec::Constant(1, -xv), Vec::Constant(1, 0.25));
    const double oracle = (2 - std::exp(dt / 2)) * xv + std::sqrt(std::exp(dt) - 1) * 0.25;
    CHECK(next(0) == doctest::Approx(oracle).epsilon(1e-15));
    xv = next(0);
  }
}

TEST_CASE("forward sampling") {
  SUBCASE("OU second moment, mixture") {
    auto target = catalog("mixture2", {});
    for (double t : {0.0, 0.4, 2.0}) {
      auto e = forward_sample(target, t, 200000, 11);
      auto c = e.column(0);
      double m2 = 0, m4 = 0;
      for (double v : c) {
        m2 += v * v;
        m4 += v * v * v * v;
      }
      m2 /= c.size();
      m4 /= c.size();
      const double expect = std::exp(-t) * 1.25 + (1 - std::exp(-t));
      CHECK(std::abs(m2 - expect) < 5 * std::sqrt((m4 - m2 * m2) / c.size()));
    }
  }
  SUBCASE("std_normal stationary") {
    auto e = forward_sample(catalog("std_normal", {}), 0.8, 100000, 5);
    CHECK(std::abs(var(e.column(0)) - 1) < 0.02);
  }
  SUBCASE("rejection sampling of a smooth potential") {
    auto target = catalog("cosine_potential", {});
    auto e = forward_sample(target, 0.0, 50000, 3);
    CHECK(e.size() == 50000);
    // symmetric target
    CHECK(std::abs(mean(e.column(0))) < 0.03);
  }
  SUBCASE("compact targets") {
    auto e = forward_sample(catalog("two_point", {}), 0.0, 1000, 1);
    for (double v : e.column(0)) CHECK(std::abs(v) == 1.0);
    auto sq = forward_sample(catalog("notched_square", {}), 0.0, 2000, 1);
    for (std::size_t i = 0; i < sq.size(); ++i) {
      const double* r = sq.row(i);
      const bool notch = r[0] > 0 && std::abs(r[1]) < 1;
      CHECK(!notch);
    }
  }
  SUBCASE("deterministic") {
    auto a = forward_sample(catalog("mixture2", {}), 0.3, 5000, 9);
    auto b = forward_sample(catalog("mixture2", {}), 0.3, 5000, 9);
    CHECK(a.data == b.data);
  }
}

TEST_CASE("score sources") {
  auto sn = make_score_source(SourceKind::exact, catalog("std_normal", {}));
  CHECK(sn(0.7, Vec::Constant(1, 1.5))(0) == doctest::Approx(-1.5));
  auto mix = catalog("mixture2", {});
  auto ex = make_score_source(SourceKind::exact, mix);
  auto qd = make_score_source(SourceKind::quadrature, mix);
  for (double x : {-2.0, 0.7, 1.1}) {
    CHECK(qd(0.5, Vec::Constant(1, x))(0) == doctest::Approx(ex(0.5, Vec::Constant(1, x))(0)).epsilon(1e-8));
    const auto cf = closed_form_mixture(std::get<GaussianMixtureSpec>(mix.payload), 0.5, Vec::Constant(1, x));
    CHECK(ex(0.5, Vec::Constant(1, x))(0) == doctest::Approx(cf.score(0)).epsilon(1e-13));
  }
  SourceOptions o;
  o.eta = Perturbation{Perturbation::Shape::constant, 0.1, 0};
  auto pe = make_score_source(SourceKind::exact, mix, o);
  CHECK(pe(0.3, Vec::Constant(1, 0.2))(0) == doctest::Approx(ex(0.3, Vec::Constant(1, 0.2))(0) + 0.1));
  CHECK_THROWS_AS(make_score_source(SourceKind::quadrature, catalog("two_point", {})), ContractError);
  SourceOptions d;
  d.delta = 0.05;
  CHECK_NOTHROW(make_score_source(SourceKind::quadrature, catalog("two_point", {}), d));
  CHECK_THROWS_AS(make_score_source(SourceKind::exact, catalog("cosine_potential", {})), UnsupportedError);
}

TEST_CASE("backward run") {
  SUBCASE("single step closed form") {
    SamplerConfig cfg{std::log(4.0), 1, 0.0, 100000, 21};
    ScoreSource zero{1, "zero", [](double, const double*, double* o) { o[0] = 0; }};
    auto e = backward_run(cfg, zero);
    // 2 * N(0,1) + sqrt(3) N(0,1): variance 7
    CHECK(std::abs(var(e.column(0)) - 7.0) < 5 * 7.0 * std::sqrt(2.0 / 100000));
  }
  SUBCASE("stationarity and the variance recursion") {
    auto src = make_score_source(SourceKind::exact, catalog("std_normal", {}));
    for (std::size_t N : {10u, 40u}) {
      SamplerConfig cfg{2.0, N, 0.0, 200000, 3};
      auto e = backward_run(cfg, src);
      const double dt = cfg.T / N;
      double v = 1;
      for (std::size_t k = 0; k < N; ++k) v = std::pow(2 - std::exp(dt / 2), 2) * v + std::exp(dt) - 1;
      // the frozen-score recursion settles at 1 + dt/2 + O(dt^2)
      const double drift = 0.5 * dt * (1 - std::exp(-cfg.T));
      CHECK(std::abs(v - 1 - drift) < 5 * dt * dt);
      CHECK(std::abs(var(e.column(0)) - 1) <= std::max(3 / std::sqrt(200000.0), drift + 5 * dt * dt));
      CHECK(std::abs(var(e.column(0)) - v) < 5 * std::sqrt(2.0 / 200000));
    }
  }
  SUBCASE("constant perturbation shifts the mean by the affine recursion") {
    SamplerConfig cfg{2.0, 20, 0.0, 200000, 4};
    auto base = make_score_source(SourceKind::exact, catalog("std_normal", {}));
    auto e = backward_run(cfg, perturb(base, Perturbation{Perturbation::Shape::constant, 0.2, 0}));
    const double dt = cfg.T / cfg.N;
    double m = 0;
    for (std::size_t k = 0; k < cfg.N; ++k) m = (2 - std::exp(dt / 2)) * m + 2 * (std::exp(dt / 2) - 1) * 0.2;
    CHECK(std::abs(mean(e.column(0)) - m) < 5 / std::sqrt(200000.0));
  }
  SUBCASE("early stopping never evaluates before delta") {
    SamplerConfig cfg{1.0, 7, 0.1, 10, 0};
    auto times = score_eval_times(cfg);
    CHECK(times.front() == 1.0);
    CHECK(times.back() > 0.1);
    CHECK(times.back() == doctest::Approx(0.1 + 0.9 / 7));
    double smallest = kInf;
    ScoreSource spy{1, "spy", [&smallest](double t, const double* x, double* o) {
                      smallest = std::min(smallest, t);
                      o[0] = -x[0];
                    }};
    set_thread_count(1);
    backward_run(cfg, spy);
    set_thread_count(0);
    CHECK(smallest > 0.1);
  }
  SUBCASE("reproducible and non-finite trajectories are excluded") {
    SamplerConfig cfg{1.0, 5, 0.0, 3000, 8};
    auto src = make_score_source(SourceKind::exact, catalog("mixture2", {}));
    CHECK(backward_run(cfg, src).data == backward_run(cfg, src).data);
    ScoreSource bad{1, "bad", [](double, const double* x, double* o) { o[0] = x[0] > 1.5 ? NAN : -x[0]; }};
    auto e = backward_run(cfg, bad);
    CHECK(e.excluded > 0);
    CHECK(e.excluded + e.size() == cfg.ensemble);
  }
  CHECK_THROWS_AS(backward_run(SamplerConfig{1.0, 5, 1.0, 10, 0}, make_score_source(SourceKind::exact, catalog("std_normal", {}))), DomainError);
}
