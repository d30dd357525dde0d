#include "scorelab/counterexample.hpp"

#include "scorelab/quadrature.hpp"
#include "scorelab/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace scorelab {

BlockIntegrals block_ratio(double M, BlockPath path, const QuadratureConfig& cfg) {
  if (!(M > 0.0) || !std::isfinite(M)) throw DomainError("block_ratio: M must be > 0");
  BlockIntegrals r;
  if (path == BlockPath::quadrature) {
    const TargetSpec t = catalog("counterexample_block", {{"M", M}});
    r.ratio = -hess_qbar(t, 0.5, Vec::Zero(1), cfg)(0, 0);
    return r;
  }
  // Everything below is multiplied by e^{2M^2}.
  const double e = std::exp(-2.0 * M * M);
  const double I0 = std::sqrt(std::numbers::pi / 8.0) * erf(std::sqrt(2.0) * M);
  const double A = 4.0 * M * M * M / 3.0 + 2.0 * M;
  const double B = (4.0 * M * M - 1.0) * I0 - 2.0 * M + M * e;
  const double C = M;
  const double D = I0;
  const double E = 0.5 * std::sqrt(std::numbers::pi) * erfcx(2.0 * M) * e;
  r.ratio = (A + B) / (C + D + E);
  r.A = A * e;
  r.B = B * e;
  r.C = C * e;
  r.D = D * e;
  r.E = 0.5 * std::sqrt(std::numbers::pi) * erfc(2.0 * M);
  return r;
}

Chain assemble_chain(int K, double margin) {
  Chain c;
  c.blocks = chain_blocks(K, margin);
  c.margin = margin;
  c.target.name = "counterexample_chain";
  c.target.dim = 1;
  c.target.payload = block_sum_potential(c.blocks);
  return c;
}

bool ChainReport::all_pass() const {
  return normalizable &&
         std::all_of(blocks.begin(), blocks.end(), [](const ChainBlockResult& b) { return b.pass; });
}

std::string ChainReport::to_csv() const {
  std::ostringstream os;
  os << "k,x_k,M,ratio,bound,pass\n";
  for (const auto& b : blocks) {
    os << b.k << ',' << fmt17(b.x_k) << ',' << fmt17(b.M) << ',' << fmt17(b.ratio) << ',' << fmt17(b.bound)
       << ',' << (b.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

namespace {

double log_normalizer(const SmoothPotentialSpec& pot, double lo, double hi) {
  const auto rule = gauss_legendre(20);
  std::vector<double> cuts{lo};
  for (double b : pot.breakpoints) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  std::vector<double> logs;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p];
    const double b = cuts[p + 1];
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / 0.25));
    const double w = (b - a) / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
      const double mid = a + w * (k + 0.5);
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double y = mid + 0.5 * w * rule.nodes[j];
        logs.push_back(std::log(0.5 * w * rule.weights[j]) - pot.g(Vec::Constant(1, y)).value - 0.5 * y * y);
      }
    }
  }
  return log_sum_exp(logs);
}

}  // namespace

ChainReport verify_chain(const Chain& chain, double t_bar, const QuadratureConfig& cfg) {
  if (chain.blocks.empty()) throw DomainError("verify_chain: empty chain");
  const ScoreField field(chain.target, cfg);
  ChainReport rep;
  rep.t_bar = t_bar;
  rep.blocks.resize(chain.blocks.size());
  parallel_for(chain.blocks.size(), [&](std::size_t i) {
    const auto& b = chain.blocks[i];
    ChainBlockResult& r = rep.blocks[i];
    r.k = static_cast<int>(i) + 1;
    r.x_k = b.center;
    r.M = b.M;
    r.bound = r.k * r.k / 3.0;
    try {
      const Vec x = Vec::Constant(1, b.center);
      r.ratio = -field.hess_qbar(t_bar, x)(0, 0);
      TargetSpec alone{"counterexample_block", 1, block_sum_potential({b})};
      r.isolated = -ScoreField(alone, cfg).hess_qbar(t_bar, x)(0, 0);
      r.crosstalk = std::abs(r.ratio - r.isolated);
      r.pass = r.ratio > r.bound;
    } catch (const Error& e) {
      r.error = e.what();
      r.pass = false;
    }
  });
  const auto pot = potential_view(chain.target);
  const auto& last = chain.blocks.back();
  rep.log_normalizer = log_normalizer(pot, -20.0, last.center + 2.0 * last.M + 20.0);
  rep.normalizable = std::isfinite(rep.log_normalizer);

  rep.report.theorem_id = "chain_lower";
  rep.report.target = chain.target.name;
  for (const auto& r : rep.blocks) {
    BoundRow row;
    row.check = "log_density_hess";
    row.t_bar = t_bar;
    row.t = -std::log1p(-t_bar);
    row.x = Vec::Constant(1, r.x_k);
    row.bound = r.bound;
    row.observed = r.ratio;
    row.margin = r.ratio - r.bound;
    row.violated = !(row.margin >= -rep.report.tolerance);
    rep.report.rows.push_back(row);
  }
  return rep;
}

SweepGrid chain_grid(const Chain& chain, const std::vector<double>& t_bars, int per_block) {
  SweepGrid g;
  g.t_bars = t_bars;
  for (const auto& b : chain.blocks) {
    const double lo = b.center - 2.0 * b.M - 2.0;
    const double hi = b.center + 2.0 * b.M + 2.0;
    for (int i = 0; i < per_block; ++i) {
      g.points.push_back(Vec::Constant(1, lo + (hi - lo) * i / std::max(1, per_block - 1)));
    }
  }
  return g;
}

}  // namespace scorelab
