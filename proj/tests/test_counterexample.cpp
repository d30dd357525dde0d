#include "doctest.h"
#include "scorelab/counterexample.hpp"

#include <cmath>

using namespace scorelab;

TEST_CASE("block profile joins smoothly") {
  for (double M : {0.5, 1.0, 3.0, 8.0}) {
    for (double s : {M, 2 * M, -M, -2 * M}) {
      const double h = 1e-9 * M;
      CHECK(block_potential(M, s - h) == doctest::Approx(block_potential(M, s + h)).epsilon(1e-7));
      CHECK(block_potential_d1(M, s - h) == doctest::Approx(block_potential_d1(M, s + h)).epsilon(1e-6));
    }
    CHECK(block_potential(M, M) == doctest::Approx(M * M));
    CHECK(block_potential(M, 2.5 * M) == 0.0);
  }
}

TEST_CASE("block ratio: closed form vs quadrature") {
  const double frozen[] = {2.0034071277063610, 7.6395927512356643, 26.976870515060952, 97.658248434984413};
  const double Ms[] = {1, 2, 4, 8};
  for (int i = 0; i < 4; ++i) {
    auto c = block_ratio(Ms[i]);
    auto q = block_ratio(Ms[i], BlockPath::quadrature);
    CHECK(c.ratio == doctest::Approx(frozen[i]).epsilon(1e-13));
    CHECK(q.ratio == doctest::Approx(c.ratio).epsilon(1e-6));
    CHECK(c.ratio > Ms[i] * Ms[i] / 3.0);
    CHECK((c.A + c.B) / (c.C + c.D + c.E) == doctest::Approx(c.ratio).epsilon(1e-12));
  }
  CHECK(block_ratio(0.01).ratio < 1e-3);
  CHECK(block_ratio(1e-4).ratio >= 0.0);
  const double r = block_ratio(4).ratio / block_ratio(2).ratio;
  CHECK(r > 4 * 0.7);
  CHECK(r < 4 * 1.3);
  CHECK(std::isfinite(block_ratio(30).ratio));
}

TEST_CASE("chain layout") {
  auto c1 = assemble_chain(1, 10);
  CHECK(c1.blocks.size() == 1);
  CHECK(c1.blocks[0].center == 0.0);
  CHECK(assemble_chain(2, 10).blocks[1].center == 16.0);
  auto c3 = assemble_chain(3, 10);
  CHECK(c3.blocks[2].center == 36.0);
  auto md = validate_metadata(c3.target, ValidationGrid::lattice(1, -5, 45, 2001));
  CHECK(md.ok());
  CHECK(md.observed_hess_max == doctest::Approx(2.0));
  CHECK(md.observed_hess_min == doctest::Approx(-2.0));
}

TEST_CASE("chain verification") {
  auto rep1 = verify_chain(assemble_chain(1, 10));
  CHECK(rep1.blocks[0].ratio == doctest::Approx(block_ratio(1).ratio).epsilon(1e-8));
  auto rep = verify_chain(assemble_chain(3, 10));
  CHECK(rep.all_pass());
  CHECK(rep.report.violation_count() == 0);
  for (const auto& b : rep.blocks) CHECK(b.crosstalk < 1e-6);
  CHECK(rep.normalizable);
  CHECK(rep.to_csv().find("k,x_k,M,ratio,bound,pass\n1,") == 0);
}
