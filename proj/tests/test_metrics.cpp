#include "doctest.h"
#include "scorelab/metrics.hpp"
#include "scorelab/rng.hpp"

#include <cmath>
#include <numbers>

using namespace scorelab;

namespace {
std::vector<double> normals(std::size_t n, std::uint64_t seed, double mu = 0, double sd = 1) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    NormalStream r(seed, i, 0);
    v[i] = mu + sd * r.normal();
  }
  return v;
}
double gauss_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2 * std::numbers::pi));
}
}  // namespace

TEST_CASE("w1 basics and metric axioms") {
  auto a = normals(1000, 1);
  CHECK(w1_1d(a, a) == 0.0);
  auto b = a;
  for (double& v : b) v += 0.37;
  CHECK(w1_1d(a, b) == doctest::Approx(0.37).epsilon(1e-12));
  std::vector<double> u, u1;
  for (int i = 0; i < 101; ++i) {
    u.push_back(i / 100.0);
    u1.push_back(i / 100.0 + 1);
  }
  CHECK(w1_1d(u, u1) == doctest::Approx(1.0));
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto x = normals(300, 3 * s + 1, 0.1, 1.0);
    auto y = normals(300, 3 * s + 2, -0.3, 2.0);
    auto z = normals(300, 3 * s + 3, 0.5, 0.5);
    CHECK(w1_1d(x, y) == w1_1d(y, x));
    CHECK(w1_1d(x, z) <= w1_1d(x, y) + w1_1d(y, z) + 1e-12);
  }
  // unequal sizes reduce by quantiles
  CHECK(w1_1d(normals(20000, 5), normals(5000, 6)) < 0.05);
  CHECK_THROWS_AS(w1_1d({}, {1.0}), DomainError);
}

TEST_CASE("sliced w1 on a shifted 2D cloud") {
  Ensemble a, b;
  a.dim = b.dim = 2;
  auto x = normals(20000, 10), y = normals(20000, 11);
  for (std::size_t i = 0; i < x.size(); ++i) {
    a.data.insert(a.data.end(), {x[i], y[i]});
    b.data.insert(b.data.end(), {x[i] + 1.0, y[i]});
  }
  // E|cos theta| over uniform directions is 2/pi
  CHECK(sliced_w1(a, b, 64, 0) == doctest::Approx(2 / std::numbers::pi).epsilon(0.1));
}

TEST_CASE("kde kl") {
  auto s = normals(100000, 2);
  auto self = kl_kde_1d(s, [](double x) { return gauss_pdf(x, 0, 1); });
  CHECK(self.value <= 0.02);
  CHECK(self.bandwidth > 0);
  auto shifted = kl_kde_1d(s, [](double x) { return gauss_pdf(x, 1, 1); });
  CHECK(shifted.value == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(shifted.value - 0.5) < 0.05);
  auto narrow = normals(2000, 3, 10.0, 0.01);
  auto far = kl_kde_1d(narrow, [](double x) { return gauss_pdf(x, -10, 0.01); });
  CHECK(std::isfinite(far.value));
  CHECK(far.value > 100);
  CHECK_THROWS_AS(kl_kde_1d(normals(10, 1), [](double) { return 1.0; }), DomainError);
}

TEST_CASE("eps0") {
  auto target = catalog("mixture2", {});
  auto exact = make_score_source(SourceKind::exact, target);
  std::vector<double> sched;
  for (int k = 0; k <= 40; ++k) sched.push_back(0.05 + 2.95 * k / 40.0);
  auto zero = eps0(exact, exact, target, sched, 2000, 1);
  CHECK(zero.value == 0.0);
  auto c = eps0(perturb(exact, {Perturbation::Shape::constant, 0.1, 0}), exact, target, sched, 2000, 1);
  CHECK(std::abs(c.value - 0.1) <= std::max(3 * c.stderr_, 1e-12));
  std::vector<double> fine;
  for (int k = 0; k <= 1000; ++k) fine.push_back(3.0 * k / 1000.0 + 1e-3);
  auto half = eps0(perturb(exact, {Perturbation::Shape::early_half, 0.2, fine.back() + fine.front()}), exact, target,
                   fine, 50, 2);
  CHECK(half.value == doctest::Approx(0.2 / std::sqrt(2.0)).epsilon(2e-3));
  // consistency under MC refinement with a state-dependent error
  ScoreSource wobble{1, "wobble", [](double, const double* x, double* o) { o[0] = 0.1 * std::sin(3 * x[0]); }};
  ScoreSource none{1, "zero", [](double, const double*, double* o) { o[0] = 0; }};
  auto e1 = eps0(wobble, none, target, sched, 4000, 3);
  auto e2 = eps0(wobble, none, target, sched, 8000, 4);
  CHECK(std::abs(e1.value - e2.value) < 3 * std::hypot(e1.stderr_, e2.stderr_));
  CHECK_THROWS_AS(eps0(exact, exact, target, {0.5, 0.4}, 10, 0), DomainError);
}

TEST_CASE("rate fit") {
  std::vector<RatePoint> pts;
  for (double N : {5.0, 10.0, 20.0, 40.0, 80.0}) pts.push_back({N, 0.1 + 2.0 / N});
  auto f = rate_fit(pts);
  CHECK(f.a == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(f.b == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f.gamma == doctest::Approx(1.0).epsilon(1e-6));
  pts.clear();
  for (double N : {4.0, 8.0, 16.0, 32.0, 64.0}) pts.push_back({N, 3.0 / (N * N)});
  auto g = rate_fit(pts);
  CHECK(g.gamma == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(g.a == doctest::Approx(0.0).epsilon(1e-6));
  for (std::uint64_t s = 0; s < 10; ++s) {
    pts.clear();
    int i = 0;
    for (double N : {5.0, 10.0, 20.0, 40.0, 80.0, 160.0}) {
      NormalStream r(s, i++, 0);
      pts.push_back({N, (0.02 + 1.5 / N) * (1 + 0.01 * r.normal())});
    }
    auto h = rate_fit(pts);
    CHECK(h.gamma >= 0.9);
    CHECK(h.gamma <= 1.1);
  }
  pts = {{1, 0.5}, {2, 0.5}, {3, 0.5}, {4, 0.5}};
  CHECK(rate_fit(pts).degenerate);
  CHECK_THROWS_AS(rate_fit({{1, 1}, {2, 1}, {3, 1}}), DomainError);
  CHECK_THROWS_AS(rate_fit({{1, 1}, {1, 2}, {3, 1}, {4, 2}}), DomainError);
}

TEST_CASE("moments") {
  CHECK(target_moment(catalog("std_normal", {}), 2) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(target_moment(catalog("std_normal", {}), 4) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(target_moment(catalog("std_normal", {}), 8) == doctest::Approx(105.0).epsilon(1e-12));
  CHECK(target_moment(catalog("mixture2", {}), 2) == doctest::Approx(1.25).epsilon(1e-13));
  CHECK(target_moment(catalog("std_normal", {{"dim", 2.0}}), 2) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(target_moment(catalog("two_point", {}), 8) == doctest::Approx(1.0));
  // 2D: sum of two independent uniform second moments on the notched square
  const double m2 = target_moment(catalog("notched_square", {}), 2);
  auto e = forward_sample(catalog("notched_square", {}), 0.0, 400000, 2);
  CHECK(sample_moment(e, 2) == doctest::Approx(m2).epsilon(5e-3));
  // smooth potential path against samples
  auto cos_t = catalog("cosine_potential", {});
  auto ce = forward_sample(cos_t, 0.0, 400000, 4);
  CHECK(sample_moment(ce, 2) == doctest::Approx(target_moment(cos_t, 2)).epsilon(1e-2));
  // quadrature path agrees with the closed-form path on a Gaussian potential
  TargetSpec g = catalog("gaussian", {{"var", 2.0}});
  auto pot = potential_view(g);
  pot.mixture.reset();
  TargetSpec g2{"gaussian_potential", 1, pot};
  CHECK(target_moment(g2, 4) == doctest::Approx(12.0).epsilon(1e-10));
  CHECK_THROWS_AS(target_moment(g, 3), DomainError);
}

TEST_CASE("metric row") {
  CHECK(metric_row("w1", 0.5, 0.01, {{"N", "10"}}) == "w1,5.0000000000000000e-01,1.0000000000000000e-02,N=10");
}
