#include "doctest.h"
#include "scorelab/targets.hpp"

#include <cmath>

using namespace scorelab;

TEST_CASE("catalog targets carry consistent metadata") {
  for (const auto& [name, params] : std::vector<std::pair<std::string, ParamMap>>{
           {"std_normal", {}},
           {"gaussian", {{"var", 4.0}}},
           {"cosine_potential", {{"a", 2.0}}},
           {"counterexample_block", {{"M", 2.0}}}}) {
    CAPTURE(name);
    const auto t = catalog(name, params);
    const auto rep = validate_metadata(t, ValidationGrid::lattice(1, -6.0, 6.0, 601));
    CHECK(rep.ok());
    CHECK(rep.max_fd_grad_error < 1e-5);
    CHECK(rep.max_fd_hess_error < 1e-4);
  }
}

TEST_CASE("compact targets stay inside their declared radius") {
  for (const char* name : {"two_point", "notched_square", "point_mass"}) {
    CAPTURE(name);
    const auto t = catalog(name);
    const auto rep = validate_metadata(t, ValidationGrid::lattice(t.dim, -3.0, 3.0, 21));
    CHECK(rep.ok());
    CHECK(rep.support_excess <= 1e-12);
  }
}

TEST_CASE("catalog rejects bad parameters") {
  CHECK_THROWS_AS(catalog("gaussian", {{"var", -1.0}}), DomainError);
  CHECK_THROWS_AS(catalog("mixture2", {{"w", 1.5}}), DomainError);
  CHECK_THROWS_AS(catalog("std_normal", {{"nope", 1.0}}), DomainError);
  CHECK_THROWS_AS(catalog("counterexample_chain", {{"K", 2.5}}), DomainError);
  CHECK_THROWS_AS(catalog("not_a_target"), DomainError);
  for (const auto& n : catalog_names()) CHECK_NOTHROW(catalog(n));
}

TEST_CASE("lattice covers the box") {
  const auto g = ValidationGrid::lattice(2, -1.0, 1.0, 5);
  REQUIRE(g.points.size() == 25);
  double lo = 0.0, hi = 0.0;
  for (const auto& p : g.points) {
    lo = std::min(lo, p.minCoeff());
    hi = std::max(hi, p.maxCoeff());
  }
  CHECK(lo == -1.0);
  CHECK(hi == 1.0);
}
