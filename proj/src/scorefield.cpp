#include "scorelab/scorefield.hpp"

#include "scorelab/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace scorelab {

void QuadratureConfig::validate() const {
  if (gh_order_1d < 8 || gh_order_2d < 8) throw DomainError("quadrature: gh_order must be >= 8");
  if (!(compact_fine_spacing_factor > 0.0 && compact_fine_spacing_factor <= 0.25)) {
    throw DomainError("quadrature: fine spacing factor must lie in (0, 1/4]");
  }
  if (!(compact_fine_radius_factor >= 4.0)) throw DomainError("quadrature: fine radius factor must be >= 4");
  if (compact_coarse_cells < 1) throw DomainError("quadrature: coarse cells must be >= 1");
  if (panel_order < 2 || !(panel_width_factor > 0.0) || !(window_radius >= 8.0)) {
    throw DomainError("quadrature: bad panel settings");
  }
}

namespace {

void check_time(double t_bar) {
  if (!(t_bar > 0.0 && t_bar <= 1.0)) {
    std::ostringstream os;
    os << "t_bar must lie in (0, 1], got " << t_bar;
    throw DomainError(os.str());
  }
}

// One quadrature node of the tilted measure exp(-|x-y|^2/2t) h(y) dy.
struct Node {
  double log_w;
  Vec y;
  Vec u;  // (x - y) / sqrt(2 t)
};

// Weighted accumulation of the smooth-path integrals over a node set.
ScoreEval integrate_smooth(const SmoothPotentialSpec& pot, const std::vector<Node>& nodes,
                           double log_norm, double t_bar, const Vec& x, bool with_time) {
  const auto n = x.size();
  std::vector<double> logs(nodes.size());
  std::vector<PotentialEval> evals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    evals[i] = pot.g(nodes[i].y);
    logs[i] = nodes[i].log_w - evals[i].value;
  }
  const double lse = log_sum_exp(logs);
  if (!std::isfinite(lse)) {
    std::ostringstream os;
    os << "heat-kernel quadrature lost all mass at t_bar = " << t_bar << ", |x| = " << x.norm()
       << " (" << nodes.size() << " nodes)";
    throw NumericalError(os.str());
  }
  std::vector<double> w(nodes.size());
  Vec grad = Vec::Zero(n);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    w[i] = std::exp(logs[i] - lse);
    grad += w[i] * evals[i].grad;
  }
  Mat upper = Mat::Zero(n, n);
  Mat spread = Mat::Zero(n, n);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (w[i] == 0.0) continue;
    const Vec d = evals[i].grad - grad;
    upper += w[i] * evals[i].hess;
    spread += w[i] * d * d.transpose();
  }
  upper = 0.5 * (upper + upper.transpose());
  Mat hess = upper - spread;
  hess = 0.5 * (hess + hess.transpose());

  ScoreEval out;
  out.t_bar = t_bar;
  out.x = x;
  out.log_pbar = lse + log_norm;
  out.grad_qbar = grad;
  out.hess_qbar = hess;
  out.hess_upper = upper;
  if (!std::isfinite(out.log_pbar) || !grad.allFinite() || !hess.allFinite()) {
    throw NumericalError("heat-kernel quadrature produced non-finite output");
  }
  if (with_time) {
    // d/dt of grad q = (1/sqrt(2t)) (E[(grad g . u)(grad g - grad q)] - E[D^2 g u])
    const double scale = 1.0 / std::sqrt(2.0 * t_bar);
    Vec acc = Vec::Zero(n);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double gu = evals[i].grad.dot(nodes[i].u);
      acc += w[i] * (gu * (evals[i].grad - grad) - evals[i].hess * nodes[i].u);
    }
    out.qbar_t = 0.5 * (hess.trace() - grad.squaredNorm());
    out.grad_qbar_t = scale * acc;
  }
  return out;
}

std::vector<Node> hermite_nodes(const GaussHermiteRule& rule, double t_bar, const Vec& x) {
  const int n = static_cast<int>(x.size());
  const std::size_t m = rule.order();
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= m;
  const double s = std::sqrt(2.0 * t_bar);
  std::vector<Node> nodes(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Node& nd = nodes[idx];
    nd.u.resize(n);
    nd.log_w = 0.0;
    std::size_t rem = idx;
    for (int d = 0; d < n; ++d) {
      const std::size_t k = rem % m;
      rem /= m;
      nd.u(d) = rule.nodes[k];
      nd.log_w += rule.log_weights[k];
    }
    nd.y = x - s * nd.u;
  }
  return nodes;
}

std::vector<Node> panel_nodes(const GaussLegendreRule& rule, const std::vector<double>& breakpoints,
                              const QuadratureConfig& cfg, double t_bar, double x) {
  const double s = std::sqrt(2.0 * t_bar);
  const double lo = x - cfg.window_radius * s;
  const double hi = x + cfg.window_radius * s;
  std::vector<double> cuts{lo};
  for (double b : breakpoints) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  const double max_width = cfg.panel_width_factor * s;
  std::vector<Node> nodes;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double a = cuts[p];
    const double b = cuts[p + 1];
    if (!(b > a)) continue;
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / max_width));
    const double width = (b - a) / static_cast<double>(panels);
    for (std::size_t k = 0; k < panels; ++k) {
      const double pa = a + width * k;
      const double half = 0.5 * width;
      const double mid = pa + half;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double y = mid + half * rule.nodes[j];
        Node nd;
        nd.y = Vec::Constant(1, y);
        nd.u = Vec::Constant(1, (x - y) / s);
        nd.log_w = std::log(half * rule.weights[j]) - (x - y) * (x - y) / (2.0 * t_bar);
        nodes.push_back(std::move(nd));
      }
    }
  }
  return nodes;
}

// Mixture of per-cell Gaussian moments, combined in log domain.
struct CellMoments {
  double log_mass;
  Vec mean;
  Vec var;  // diagonal
};

CompactMoments combine_cells(const std::vector<CellMoments>& cells, int dim) {
  std::vector<double> logs(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) logs[i] = cells[i].log_mass;
  const double lse = log_sum_exp(logs);
  if (!std::isfinite(lse)) throw NumericalError("compact_moments: empty effective support");
  CompactMoments out;
  out.log_phat = lse;
  out.ybar = Vec::Zero(dim);
  std::vector<double> r(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    r[i] = std::exp(logs[i] - lse);
    out.ybar += r[i] * cells[i].mean;
  }
  out.cov = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (r[i] == 0.0) continue;
    const Vec d = cells[i].mean - out.ybar;
    out.cov += r[i] * d * d.transpose();
    out.cov.diagonal() += r[i] * cells[i].var;
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

// Kernel moments of the uniform density on a box, exact per axis.
CellMoments box_moments(const Vec& lo, const Vec& hi, double log_density, double t_bar, const Vec& x) {
  const auto n = x.size();
  const double s = std::sqrt(2.0 * t_bar);
  CellMoments c{log_density, Vec(n), Vec(n)};
  for (Eigen::Index d = 0; d < n; ++d) {
    const auto tg = truncated_gauss_moments((lo(d) - x(d)) / s, (hi(d) - x(d)) / s);
    c.log_mass += std::log(s) + tg.log_mass;
    c.mean(d) = x(d) + s * tg.mean;
    c.var(d) = s * s * tg.var;
  }
  return c;
}

// Midpoint cells of a box, split into `cells` per axis (at least one).
void midpoint_cells(const Vec& lo, const Vec& hi, double log_density, double spacing,
                    std::size_t max_cells, double t_bar, const Vec& x, std::vector<CellMoments>& out) {
  const auto n = x.size();
  std::vector<std::size_t> counts(n);
  std::size_t total = 1;
  for (Eigen::Index d = 0; d < n; ++d) {
    const double len = hi(d) - lo(d);
    if (!(len > 0.0)) return;
    counts[d] = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(len / spacing)), 1, max_cells);
    total *= counts[d];
  }
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    Vec y(n);
    double log_vol = log_density;
    for (Eigen::Index d = 0; d < n; ++d) {
      const std::size_t k = rem % counts[d];
      rem /= counts[d];
      const double h = (hi(d) - lo(d)) / static_cast<double>(counts[d]);
      y(d) = lo(d) + h * (k + 0.5);
      log_vol += std::log(h);
    }
    out.push_back({log_vol - (x - y).squaredNorm() / (2.0 * t_bar), y, Vec::Zero(n)});
  }
}

// Two-scale grid on a box: a fine window around the point of the box closest
// to x, and coarse cells on the remaining strips.
void two_scale_box(const Vec& lo, const Vec& hi, double log_density, double coarse_spacing,
                   const QuadratureConfig& cfg, double t_bar, const Vec& x, std::vector<CellMoments>& out) {
  const auto n = x.size();
  const double root_t = std::sqrt(t_bar);
  const double radius = cfg.compact_fine_radius_factor * root_t;
  const double fine = cfg.compact_fine_spacing_factor * root_t;
  const Vec anchor = x.cwiseMax(lo).cwiseMin(hi);
  const Vec wlo = (anchor.array() - radius).matrix().cwiseMax(lo);
  const Vec whi = (anchor.array() + radius).matrix().cwiseMin(hi);
  constexpr std::size_t kMaxCells = 1 << 14;
  midpoint_cells(wlo, whi, log_density, fine, kMaxCells, t_bar, x, out);
  // Box minus window, peeled one axis at a time.
  Vec rlo = lo;
  Vec rhi = hi;
  for (Eigen::Index d = 0; d < n; ++d) {
    if (wlo(d) > rlo(d)) {
      Vec slo = rlo, shi = rhi;
      shi(d) = wlo(d);
      midpoint_cells(slo, shi, log_density, coarse_spacing, kMaxCells, t_bar, x, out);
    }
    if (whi(d) < rhi(d)) {
      Vec slo = rlo, shi = rhi;
      slo(d) = whi(d);
      midpoint_cells(slo, shi, log_density, coarse_spacing, kMaxCells, t_bar, x, out);
    }
    rlo(d) = wlo(d);
    rhi(d) = whi(d);
  }
}

}  // namespace

CompactMoments compact_moments(const CompactMeasureSpec& spec, int dim, double t_bar, const Vec& x,
                               const QuadratureConfig& cfg) {
  check_time(t_bar);
  if (x.size() != dim) throw ContractError("compact_moments: point dimension mismatch");
  std::vector<CellMoments> cells;
  const bool grid = cfg.compact_method == CompactMethod::grid;
  const double coarse_spacing = 2.0 * std::max(spec.M, 1e-300) / static_cast<double>(cfg.compact_coarse_cells);
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, WeightedPoints>) {
          for (std::size_t i = 0; i < f.points.size(); ++i) {
            if (f.weights[i] == 0.0) continue;
            cells.push_back({std::log(f.weights[i]) - (x - f.points[i]).squaredNorm() / (2.0 * t_bar),
                             f.points[i], Vec::Zero(dim)});
          }
        } else if constexpr (std::is_same_v<F, UniformRectangles>) {
          double area = 0.0;
          for (const auto& r : f.rects) area += (r.x_hi - r.x_lo) * (r.y_hi - r.y_lo);
          const double log_density = -std::log(area);
          for (const auto& r : f.rects) {
            const Vec lo = (Vec(2) << r.x_lo, r.y_lo).finished();
            const Vec hi = (Vec(2) << r.x_hi, r.y_hi).finished();
            if (grid) {
              two_scale_box(lo, hi, log_density, coarse_spacing, cfg, t_bar, x, cells);
            } else {
              cells.push_back(box_moments(lo, hi, log_density, t_bar, x));
            }
          }
        } else {
          double length = 0.0;
          for (const auto& iv : f.intervals) length += iv.hi - iv.lo;
          const double log_density = -std::log(length);
          for (const auto& iv : f.intervals) {
            const Vec lo = Vec::Constant(1, iv.lo);
            const Vec hi = Vec::Constant(1, iv.hi);
            if (grid) {
              two_scale_box(lo, hi, log_density, coarse_spacing, cfg, t_bar, x, cells);
            } else {
              cells.push_back(box_moments(lo, hi, log_density, t_bar, x));
            }
          }
        }
      },
      spec.form);
  CompactMoments m = combine_cells(cells, dim);
  // Clamp round-off negatives so the covariance is PSD.
  if (dim == 1) {
    m.cov(0, 0) = std::max(0.0, m.cov(0, 0));
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(m.cov);
    Vec ev = es.eigenvalues().cwiseMax(0.0);
    m.cov = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    m.cov = 0.5 * (m.cov + m.cov.transpose());
  }
  return m;
}

ScoreField::ScoreField(TargetSpec target, QuadratureConfig cfg) : target_(std::move(target)), cfg_(cfg) {
  cfg_.validate();
  target_.validate();
  if (target_.kind() != TargetKind::compact_measure) {
    potential_ = potential_view(target_);
    if (!potential_->breakpoints.empty()) {
      gl_ = gauss_legendre(cfg_.panel_order);
    } else {
      gh_ = gauss_hermite(target_.dim == 1 ? cfg_.gh_order_1d : cfg_.gh_order_2d);
    }
  }
}

ScoreEval ScoreField::evaluate(double t_bar, const Vec& x, bool with_time) const {
  check_time(t_bar);
  if (x.size() != target_.dim) throw ContractError("ScoreField: point dimension mismatch");
  if (!x.allFinite()) throw DomainError("ScoreField: non-finite point");
  if (!potential_) {
    if (with_time) throw UnsupportedError("time derivatives are defined for smooth targets only");
    const auto& spec = std::get<CompactMeasureSpec>(target_.payload);
    CompactMoments m = compact_moments(spec, target_.dim, t_bar, x, cfg_);
    const auto n = x.size();
    ScoreEval out;
    out.t_bar = t_bar;
    out.x = x;
    out.log_pbar = m.log_phat;
    out.grad_qbar = (x - m.ybar) / t_bar;
    out.hess_qbar = Mat::Identity(n, n) / t_bar - m.cov / (t_bar * t_bar);
    out.moments = std::move(m);
    return out;
  }
  if (!potential_->breakpoints.empty()) {
    const auto nodes = panel_nodes(gl_, potential_->breakpoints, cfg_, t_bar, x(0));
    return integrate_smooth(*potential_, nodes, -0.5 * std::log(2.0 * std::numbers::pi * t_bar), t_bar, x,
                            with_time);
  }
  const auto nodes = hermite_nodes(gh_, t_bar, x);
  const double log_norm = -0.5 * static_cast<double>(x.size()) * std::log(std::numbers::pi);
  return integrate_smooth(*potential_, nodes, log_norm, t_bar, x, with_time);
}

double ScoreField::log_pbar(double t_bar, const Vec& x) const { return evaluate(t_bar, x).log_pbar; }
Vec ScoreField::grad_qbar(double t_bar, const Vec& x) const { return evaluate(t_bar, x).grad_qbar; }
Mat ScoreField::hess_qbar(double t_bar, const Vec& x) const { return evaluate(t_bar, x).hess_qbar; }

QCoords ScoreField::forward(double t, const Vec& x) const {
  if (!(t > 0.0)) throw DomainError("forward: t must be > 0");
  const double t_bar = -std::expm1(-t);
  if (!(t_bar > 0.0)) throw DomainError("forward: t too small for the rescaled clock");
  return q_coords(evaluate(std::min(t_bar, 1.0), std::exp(-0.5 * t) * x), t);
}

double log_pbar(const TargetSpec& target, double t_bar, const Vec& x, const QuadratureConfig& cfg) {
  return ScoreField(target, cfg).log_pbar(t_bar, x);
}

Vec grad_qbar(const TargetSpec& target, double t_bar, const Vec& x, const QuadratureConfig& cfg) {
  return ScoreField(target, cfg).grad_qbar(t_bar, x);
}

Mat hess_qbar(const TargetSpec& target, double t_bar, const Vec& x, const QuadratureConfig& cfg) {
  return ScoreField(target, cfg).hess_qbar(t_bar, x);
}

TimeDerivs qbar_time_derivs(const TargetSpec& target, double t_bar, const Vec& x, const QuadratureConfig& cfg) {
  if (target.kind() == TargetKind::compact_measure) {
    throw UnsupportedError("qbar_time_derivs: compact targets are not supported");
  }
  const ScoreEval e = ScoreField(target, cfg).evaluate(t_bar, x, true);
  return {*e.qbar_t, *e.grad_qbar_t};
}

QCoords q_coords(const ScoreEval& eval, double t) {
  if (!(t >= 0.0)) throw DomainError("q_coords: t must be >= 0");
  const double expected = -std::expm1(-t);
  if (std::abs(eval.t_bar - expected) > 1e-12 * std::max(1.0, expected)) {
    std::ostringstream os;
    os << "q_coords: evaluation made at t_bar = " << eval.t_bar << " but forward time " << t
       << " needs t_bar = " << expected;
    throw ContractError(os.str());
  }
  const auto n = eval.x.size();
  QCoords q;
  q.t = t;
  q.x = std::exp(0.5 * t) * eval.x;
  q.grad_q = std::exp(-0.5 * t) * eval.grad_qbar;
  q.hess_q = std::exp(-t) * eval.hess_qbar;
  q.score = -q.grad_q - q.x;
  q.score_jacobian = -q.hess_q - Mat::Identity(n, n);
  return q;
}

MixtureScore closed_form_mixture(const GaussianMixtureSpec& spec, double t, const Vec& x) {
  const GaussianMixtureSpec ev = mixture_at_time(spec, t);
  const auto n = x.size();
  if (n != ev.dim()) throw ContractError("closed_form_mixture: point dimension mismatch");
  std::vector<double> logs(ev.weights.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    logs[i] = std::log(ev.weights[i]) - 0.5 * n * std::log(ev.variances[i]) -
              (x - ev.means[i]).squaredNorm() / (2.0 * ev.variances[i]);
  }
  const double lse = log_sum_exp(logs);
  MixtureScore out{Vec::Zero(n), Mat::Zero(n, n)};
  std::vector<Vec> s(logs.size());
  std::vector<double> r(logs.size());
  double precision = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    r[i] = std::exp(logs[i] - lse);
    s[i] = -(x - ev.means[i]) / ev.variances[i];
    out.score += r[i] * s[i];
    precision += r[i] / ev.variances[i];
  }
  out.jacobian = -precision * Mat::Identity(n, n);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const Vec d = s[i] - out.score;
    out.jacobian += r[i] * d * d.transpose();
  }
  return out;
}

void mixture_score_into(const GaussianMixtureSpec& evolved, const double* x, double* out, int dim) {
  const std::size_t k = evolved.weights.size();
  double best = -kInf;
  // Two passes: max log weight, then normalized accumulation.
  constexpr std::size_t kStack = 16;
  double stack_logs[kStack];
  std::vector<double> heap_logs;
  double* logs = stack_logs;
  if (k > kStack) {
    heap_logs.resize(k);
    logs = heap_logs.data();
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double v = evolved.variances[i];
    double d2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double diff = x[d] - evolved.means[i](d);
      d2 += diff * diff;
    }
    logs[i] = std::log(evolved.weights[i]) - 0.5 * dim * std::log(v) - d2 / (2.0 * v);
    best = std::max(best, logs[i]);
  }
  for (int d = 0; d < dim; ++d) out[d] = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = std::exp(logs[i] - best);
    total += r;
    const double v = evolved.variances[i];
    for (int d = 0; d < dim; ++d) out[d] -= r * (x[d] - evolved.means[i](d)) / v;
  }
  for (int d = 0; d < dim; ++d) out[d] /= total;
}

}  // namespace scorelab
