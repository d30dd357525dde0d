#pragma once

#include "scorelab/bounds.hpp"
#include "scorelab/scorefield.hpp"
#include "scorelab/targets.hpp"

#include <string>
#include <vector>

namespace scorelab {

enum class BlockPath { closed_form, quadrature };

/// The five integrals behind (log h_M)_xx(1/2, 0) = (A + B) / (C + D + E).
/// A..E are the true values (they underflow for M beyond ~18); ratio is
/// always formed from the e^{2M^2}-rescaled values.
struct BlockIntegrals {
  double A = kNaN;
  double B = kNaN;
  double C = kNaN;
  double D = kNaN;
  double E = kNaN;
  double ratio = kNaN;
};

/// Quadrature path fills only `ratio`, from -D^2 qbar(1/2, 0) of a single block.
BlockIntegrals block_ratio(double M, BlockPath path = BlockPath::closed_form, const QuadratureConfig& cfg = {});

struct Chain {
  std::vector<BlockPlacement> blocks;
  double margin = 0.0;
  TargetSpec target;
};

Chain assemble_chain(int K, double margin = 10.0);

struct ChainBlockResult {
  int k = 0;
  double x_k = 0.0;
  double M = 0.0;
  double ratio = kNaN;     // (log pbar)_xx at (t_bar, x_k)
  double isolated = kNaN;  // same block alone
  double crosstalk = kNaN;
  double bound = 0.0;  // k^2 / 3
  bool pass = false;
  std::string error;  // quadrature failure, if any
};

struct ChainReport {
  double t_bar = 0.5;
  std::vector<ChainBlockResult> blocks;
  double log_normalizer = kNaN;  // log of the integral of e^{-g - x^2/2}
  bool normalizable = false;
  BoundReport report;  // check "log_density_hess" per block, bound k^2/3

  bool all_pass() const;
  std::string to_csv() const;
};

ChainReport verify_chain(const Chain& chain, double t_bar = 0.5, const QuadratureConfig& cfg = {});

/// Sweep grid around the blocks of a chain: `per_block` points over each
/// block's support widened by 2.
SweepGrid chain_grid(const Chain& chain, const std::vector<double>& t_bars, int per_block = 41);

}  // namespace scorelab
