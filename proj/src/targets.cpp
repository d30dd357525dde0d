#include "scorelab/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace scorelab {

namespace {

double param(const ParamMap& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::string& name, const ParamMap& params,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : params) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw DomainError("catalog: target '" + name + "' has no parameter '" + key + "'");
  }
}

int dim_param(const ParamMap& params) {
  const double d = param(params, "dim", 1.0);
  if (d < 1 || d != std::floor(d)) throw DomainError("catalog: dim must be a positive integer");
  return static_cast<int>(d);
}

Vec constant_vec(int dim, double v) { return Vec::Constant(dim, v); }

}  // namespace

void GaussianMixtureSpec::validate() const {
  if (weights.empty()) throw DomainError("mixture: no components");
  if (weights.size() != means.size() || weights.size() != variances.size()) {
    throw DomainError("mixture: weights, means and variances differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture: weights do not sum to 1");
  for (double v : variances) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("mixture: variances must be > 0");
  }
  const auto n = means.front().size();
  if (n < 1) throw DomainError("mixture: dimension must be >= 1");
  for (const auto& m : means) {
    if (m.size() != n) throw DomainError("mixture: means differ in dimension");
    if (!m.allFinite()) throw DomainError("mixture: non-finite mean");
  }
}

void PotentialMetadata::validate() const {
  if (!(alpha2 >= 0.0 && alpha2 < 1.0)) throw DomainError("metadata: need 0 <= alpha2 < 1");
  if (M0 < 0 || M1 < 0 || L < 0) throw DomainError("metadata: M0, M1, L must be >= 0");
  if (beta1 < 0 || beta2 < 0) throw DomainError("metadata: beta1, beta2 must be >= 0");
  if (beta1 == 0.0 && beta2 > 0.0) {
    throw DomainError("metadata: beta1 = 0 with beta2 > 0 leaves beta2^2/beta1 undefined");
  }
  if (!std::isfinite(alpha1)) throw DomainError("metadata: alpha1 must be finite");
}

void CompactMeasureSpec::validate(int dim) const {
  if (!(M >= 0.0) || !std::isfinite(M)) throw DomainError("compact: support radius must be >= 0");
  constexpr double tol = 1e-12;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, WeightedPoints>) {
          if (f.points.empty() || f.points.size() != f.weights.size()) {
            throw DomainError("compact: points and weights must be nonempty and match");
          }
          double total = 0.0;
          for (double w : f.weights) {
            if (!(w >= 0.0)) throw DomainError("compact: negative weight");
            total += w;
          }
          if (std::abs(total - 1.0) > 1e-12) throw DomainError("compact: weights do not sum to 1");
          for (const auto& p : f.points) {
            if (p.size() != dim) throw DomainError("compact: point dimension mismatch");
            if (p.norm() > M + tol) throw DomainError("compact: support point outside radius M");
          }
        } else if constexpr (std::is_same_v<F, UniformRectangles>) {
          if (dim != 2) throw DomainError("compact: rectangles need dim = 2");
          if (f.rects.empty()) throw DomainError("compact: empty region");
          for (const auto& r : f.rects) {
            if (!(r.x_lo < r.x_hi && r.y_lo < r.y_hi)) throw DomainError("compact: degenerate rectangle");
            for (double cx : {r.x_lo, r.x_hi}) {
              for (double cy : {r.y_lo, r.y_hi}) {
                if (std::hypot(cx, cy) > M + tol) throw DomainError("compact: rectangle outside radius M");
              }
            }
          }
        } else {
          if (dim != 1) throw DomainError("compact: segments need dim = 1");
          if (f.intervals.empty()) throw DomainError("compact: empty region");
          for (const auto& iv : f.intervals) {
            if (!(iv.lo < iv.hi)) throw DomainError("compact: degenerate interval");
            if (std::max(std::abs(iv.lo), std::abs(iv.hi)) > M + tol) {
              throw DomainError("compact: interval outside radius M");
            }
          }
        }
      },
      form);
}

void TargetSpec::validate() const {
  if (dim < 1) throw DomainError("target: dim must be >= 1");
  switch (kind()) {
    case TargetKind::gaussian_mixture: {
      const auto& m = std::get<GaussianMixtureSpec>(payload);
      m.validate();
      if (m.dim() != dim) throw DomainError("target: mixture dimension mismatch");
      break;
    }
    case TargetKind::smooth_potential: {
      const auto& s = std::get<SmoothPotentialSpec>(payload);
      if (!s.g) throw DomainError("target: smooth potential without evaluator");
      if (s.metadata) s.metadata->validate();
      if (!s.breakpoints.empty() && dim != 1) throw DomainError("target: breakpoints need dim = 1");
      break;
    }
    case TargetKind::compact_measure: {
      if (dim > 2) throw DomainError("target: compact measures support dim 1 or 2");
      std::get<CompactMeasureSpec>(payload).validate(dim);
      break;
    }
  }
}

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::gaussian_mixture: return "gaussian_mixture";
    case TargetKind::smooth_potential: return "smooth_potential";
    case TargetKind::compact_measure: return "compact_measure";
  }
  return "unknown";
}

GaussianMixtureSpec mixture_at_time(const GaussianMixtureSpec& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("mixture_at_time: t must be >= 0");
  GaussianMixtureSpec out = spec;
  const double decay = std::exp(-t);
  const double scale = std::exp(-0.5 * t);
  const double added = -std::expm1(-t);
  for (auto& m : out.means) m *= scale;
  for (auto& v : out.variances) v = v * decay + added;
  return out;
}

namespace {

// log N(x; mean, var I) for every component plus log weight.
void component_logs(const GaussianMixtureSpec& spec, const Vec& x, std::vector<double>& logs) {
  const double n = static_cast<double>(x.size());
  logs.resize(spec.weights.size());
  for (std::size_t i = 0; i < spec.weights.size(); ++i) {
    const double v = spec.variances[i];
    logs[i] = std::log(spec.weights[i]) - 0.5 * n * std::log(2.0 * std::numbers::pi * v) -
              (x - spec.means[i]).squaredNorm() / (2.0 * v);
  }
}

PotentialEval mixture_g(const GaussianMixtureSpec& spec, const Vec& x) {
  const auto n = x.size();
  std::vector<double> logs;
  component_logs(spec, x, logs);
  const double lse = log_sum_exp(logs);
  Vec score = Vec::Zero(n);
  double precision = 0.0;
  std::vector<Vec> s(logs.size());
  std::vector<double> r(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    r[i] = std::exp(logs[i] - lse);
    s[i] = -(x - spec.means[i]) / spec.variances[i];
    score += r[i] * s[i];
    precision += r[i] / spec.variances[i];
  }
  Mat cov = Mat::Zero(n, n);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const Vec d = s[i] - score;
    cov += r[i] * d * d.transpose();
  }
  // D^2 log p0 = -precision I + cov
  PotentialEval e;
  e.value = -lse - 0.5 * x.squaredNorm();
  e.grad = -score - x;
  e.hess = precision * Mat::Identity(n, n) - cov - Mat::Identity(n, n);
  return e;
}

}  // namespace

SmoothPotentialSpec mixture_potential(const GaussianMixtureSpec& spec) {
  spec.validate();
  SmoothPotentialSpec out;
  out.mixture = spec;
  out.g = [spec](const Vec& x) { return mixture_g(spec, x); };

  const double var = spec.variances.front();
  const bool equal_var = std::all_of(spec.variances.begin(), spec.variances.end(),
                                     [&](double v) { return v == var; });
  if (!equal_var) return out;

  const int n = spec.dim();
  double diameter = 0.0;
  double radius = 0.0;
  for (std::size_t i = 0; i < spec.means.size(); ++i) {
    radius = std::max(radius, spec.means[i].norm());
    for (std::size_t j = i + 1; j < spec.means.size(); ++j) {
      diameter = std::max(diameter, (spec.means[i] - spec.means[j]).norm());
    }
  }
  // D^2 g = (1/var - 1) I - Cov_r(means)/var^2, and Cov_r <= diameter^2/4.
  const double a = 1.0 / var - 1.0;
  const double low = a - diameter * diameter / (4.0 * var * var);
  PotentialMetadata md;
  md.M1 = std::max(0.0, a);
  md.M0 = std::max(0.0, -low);
  md.L = std::max(std::abs(a), std::abs(low));
  md.x0 = Vec::Zero(n);
  const double g0 = mixture_g(spec, md.x0).value;
  const double log_norm = 0.5 * n * std::log(2.0 * std::numbers::pi * var);
  if (radius == 0.0) {
    md.alpha2 = std::max(0.0, 1.0 - 1.0 / var);
    md.alpha1 = std::max(0.0, g0 - log_norm);
  } else {
    // dist(x, means)^2 >= |x|^2/2 - radius^2
    md.alpha2 = std::max(0.0, 1.0 - 1.0 / (2.0 * var));
    md.alpha1 = g0 - log_norm + radius * radius / (2.0 * var);
  }
  md.beta1 = md.L;
  md.beta2 = mixture_g(spec, md.x0).grad.norm();
  md.grad_sup = a == 0.0 ? radius / var : kInf;
  if (md.beta1 == 0.0 && md.beta2 > 0.0) return out;
  out.metadata = md;
  return out;
}

SmoothPotentialSpec potential_view(const TargetSpec& target) {
  switch (target.kind()) {
    case TargetKind::gaussian_mixture:
      return mixture_potential(std::get<GaussianMixtureSpec>(target.payload));
    case TargetKind::smooth_potential:
      return std::get<SmoothPotentialSpec>(target.payload);
    case TargetKind::compact_measure:
      break;
  }
  throw UnsupportedError("target '" + target.name + "' is a compact measure and has no potential");
}

std::optional<GaussianMixtureSpec> mixture_view(const TargetSpec& target) {
  switch (target.kind()) {
    case TargetKind::gaussian_mixture:
      return std::get<GaussianMixtureSpec>(target.payload);
    case TargetKind::smooth_potential:
      return std::get<SmoothPotentialSpec>(target.payload).mixture;
    case TargetKind::compact_measure:
      break;
  }
  return std::nullopt;
}

PotentialEval eval_potential(const SmoothPotentialSpec& spec, const Vec& x) {
  if (!x.allFinite()) throw DomainError("eval_potential: non-finite point");
  PotentialEval e = spec.g(x);
  if (!std::isfinite(e.value) || !e.grad.allFinite() || !e.hess.allFinite()) {
    std::ostringstream os;
    os << "eval_potential: evaluator overflow at |x| = " << x.norm();
    throw DomainError(os.str());
  }
  return e;
}

double block_potential(double M, double s) {
  const double a = std::abs(s);
  if (a <= M) return 2.0 * M * M - a * a;
  if (a <= 2.0 * M) return (a - 2.0 * M) * (a - 2.0 * M);
  return 0.0;
}

double block_potential_d1(double M, double s) {
  const double a = std::abs(s);
  const double sign = s < 0 ? -1.0 : 1.0;
  if (a <= M) return -2.0 * s;
  if (a <= 2.0 * M) return 2.0 * (a - 2.0 * M) * sign;
  return 0.0;
}

double block_potential_d2(double M, double s) {
  const double a = std::abs(s);
  if (a < M) return -2.0;
  if (a < 2.0 * M) return 2.0;
  return 0.0;
}

std::vector<BlockPlacement> chain_blocks(int K, double margin) {
  if (K < 1) throw DomainError("chain_blocks: K must be >= 1");
  if (!(margin >= 0.0)) throw DomainError("chain_blocks: margin must be >= 0");
  std::vector<BlockPlacement> blocks;
  double center = 0.0;
  for (int k = 1; k <= K; ++k) {
    if (k > 1) center += 2.0 * (k - 1) + 2.0 * k + margin;
    blocks.push_back({static_cast<double>(k), center});
  }
  return blocks;
}

SmoothPotentialSpec block_sum_potential(const std::vector<BlockPlacement>& blocks) {
  if (blocks.empty()) throw DomainError("block_sum_potential: no blocks");
  for (const auto& b : blocks) {
    if (!(b.M > 0.0)) throw DomainError("block_sum_potential: block scale must be > 0");
  }
  SmoothPotentialSpec out;
  out.g = [blocks](const Vec& x) {
    const double s = x(0);
    PotentialEval e;
    e.grad = Vec::Zero(1);
    e.hess = Mat::Zero(1, 1);
    for (const auto& b : blocks) {
      const double d = s - b.center;
      if (std::abs(d) >= 2.0 * b.M) continue;
      e.value += block_potential(b.M, d);
      e.grad(0) += block_potential_d1(b.M, d);
      e.hess(0, 0) += block_potential_d2(b.M, d);
    }
    return e;
  };
  double gmax = 0.0;
  for (const auto& b : blocks) {
    for (double k : {-2.0, -1.0, 1.0, 2.0}) out.breakpoints.push_back(b.center + k * b.M);
    gmax = std::max(gmax, 2.0 * b.M);
  }
  std::sort(out.breakpoints.begin(), out.breakpoints.end());
  PotentialMetadata md;
  md.M0 = md.M1 = md.L = 2.0;
  md.x0 = Vec::Zero(1);
  const double g0 = out.g(md.x0).value;
  // g >= 0 everywhere, so g(x) - g(0) >= -g(0).
  md.alpha1 = g0;
  md.alpha2 = 0.0;
  md.beta1 = 2.0;
  // |g'(x)| <= 2 min(|x - c|, M) on a block's support; beta2 covers the excess
  // over 2|x|, a piecewise-linear quantity maximized at the support breakpoints.
  md.beta2 = 0.0;
  for (const auto& b : blocks) {
    for (double x : {b.center - 2.0 * b.M, b.center - b.M, b.center, b.center + b.M,
                     b.center + 2.0 * b.M, 0.0}) {
      if (std::abs(x - b.center) > 2.0 * b.M) continue;
      const double excess = 2.0 * std::min(std::abs(x - b.center), b.M) - 2.0 * std::abs(x);
      md.beta2 = std::max(md.beta2, excess);
    }
  }
  md.grad_sup = gmax;
  out.metadata = md;
  return out;
}

TargetSpec catalog(const std::string& name, const ParamMap& params) {
  TargetSpec t;
  t.name = name;
  if (name == "std_normal") {
    reject_unknown(name, params, {"dim"});
    t.dim = dim_param(params);
    GaussianMixtureSpec m{{1.0}, {Vec::Zero(t.dim)}, {1.0}};
    t.payload = mixture_potential(m);
  } else if (name == "gaussian") {
    reject_unknown(name, params, {"var", "dim", "mean"});
    t.dim = dim_param(params);
    const double var = param(params, "var", 1.0);
    if (!(var > 0.0)) throw DomainError("catalog: gaussian var must be > 0");
    GaussianMixtureSpec m{{1.0}, {constant_vec(t.dim, param(params, "mean", 0.0))}, {var}};
    t.payload = mixture_potential(m);
  } else if (name == "mixture2") {
    reject_unknown(name, params, {"w", "mu1", "mu2", "var"});
    t.dim = 1;
    const double w = param(params, "w", 0.5);
    const double var = param(params, "var", 0.25);
    if (!(w > 0.0 && w < 1.0)) throw DomainError("catalog: mixture2 weight must lie in (0, 1)");
    if (!(var > 0.0)) throw DomainError("catalog: mixture2 var must be > 0");
    GaussianMixtureSpec m{{w, 1.0 - w},
                          {constant_vec(1, param(params, "mu1", -1.0)),
                           constant_vec(1, param(params, "mu2", 1.0))},
                          {var, var}};
    t.payload = m;
  } else if (name == "cosine_potential") {
    reject_unknown(name, params, {"a", "b"});
    t.dim = 1;
    const double a = param(params, "a", 1.0);
    const double b = param(params, "b", 1.0);
    if (!(b > 0.0) || !std::isfinite(a)) throw DomainError("catalog: cosine_potential needs b > 0");
    SmoothPotentialSpec s;
    s.g = [a, b](const Vec& x) {
      PotentialEval e;
      e.value = a * std::cos(b * x(0));
      e.grad = Vec::Constant(1, -a * b * std::sin(b * x(0)));
      e.hess = Mat::Constant(1, 1, -a * b * b * std::cos(b * x(0)));
      return e;
    };
    PotentialMetadata md;
    md.M0 = md.M1 = md.L = std::abs(a) * b * b;
    md.alpha1 = 2.0 * std::abs(a);
    md.alpha2 = 0.0;
    // |a b sin(bx)| <= |a| b^2 |x|
    md.beta1 = std::abs(a) * b * b;
    md.beta2 = 0.0;
    md.grad_sup = std::abs(a) * b;
    md.x0 = Vec::Zero(1);
    s.metadata = md;
    t.payload = s;
  } else if (name == "counterexample_block") {
    reject_unknown(name, params, {"M"});
    t.dim = 1;
    const double M = param(params, "M", 1.0);
    if (!(M > 0.0)) throw DomainError("catalog: counterexample_block needs M > 0");
    t.payload = block_sum_potential({{M, 0.0}});
  } else if (name == "counterexample_chain") {
    reject_unknown(name, params, {"K", "margin"});
    t.dim = 1;
    const double K = param(params, "K", 3.0);
    const double margin = param(params, "margin", 10.0);
    if (K < 1 || K != std::floor(K)) throw DomainError("catalog: chain K must be a positive integer");
    if (!(margin >= 0.0)) throw DomainError("catalog: chain margin must be >= 0");
    t.payload = block_sum_potential(chain_blocks(static_cast<int>(K), margin));
  } else if (name == "two_point") {
    reject_unknown(name, params, {});
    t.dim = 1;
    CompactMeasureSpec c;
    c.form = WeightedPoints{{constant_vec(1, -1.0), constant_vec(1, 1.0)}, {0.5, 0.5}};
    c.M = 1.0;
    t.payload = c;
  } else if (name == "point_mass") {
    reject_unknown(name, params, {"y", "dim"});
    t.dim = dim_param(params);
    const Vec y = constant_vec(t.dim, param(params, "y", 0.0));
    CompactMeasureSpec c;
    c.form = WeightedPoints{{y}, {1.0}};
    c.M = y.norm();
    t.payload = c;
  } else if (name == "notched_square") {
    reject_unknown(name, params, {});
    t.dim = 2;
    CompactMeasureSpec c;
    // [-2,2]^2 minus [0,2]x[-1,1], as three disjoint rectangles.
    c.form = UniformRectangles{{{-2.0, 0.0, -2.0, 2.0}, {0.0, 2.0, 1.0, 2.0}, {0.0, 2.0, -2.0, -1.0}}};
    c.M = 2.0 * std::numbers::sqrt2;
    t.payload = c;
  } else {
    throw DomainError("catalog: unknown target '" + name + "'");
  }
  t.validate();
  return t;
}

std::vector<std::string> catalog_names() {
  return {"std_normal",           "gaussian",  "mixture2",   "cosine_potential",
          "counterexample_block", "counterexample_chain", "two_point", "point_mass",
          "notched_square"};
}

ValidationGrid ValidationGrid::lattice(int dim, double lo, double hi, int per_axis) {
  if (dim < 1 || per_axis < 1 || !(lo <= hi)) throw DomainError("lattice: bad arguments");
  ValidationGrid grid;
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(per_axis);
  const double step = per_axis == 1 ? 0.0 : (hi - lo) / (per_axis - 1);
  for (std::size_t idx = 0; idx < total; ++idx) {
    Vec p(dim);
    std::size_t rem = idx;
    for (int d = 0; d < dim; ++d) {
      p(d) = lo + step * static_cast<double>(rem % per_axis);
      rem /= per_axis;
    }
    grid.points.push_back(p);
  }
  return grid;
}

namespace {

double near_breakpoint(const std::vector<double>& bps, double x, double h) {
  for (double b : bps) {
    if (std::abs(x - b) <= 2.0 * h) return true;
  }
  return false;
}

}  // namespace

MetadataReport validate_metadata(const TargetSpec& target, const ValidationGrid& grid) {
  MetadataReport rep;
  constexpr double tol = 1e-9;
  if (target.kind() == TargetKind::compact_measure) {
    const auto& c = std::get<CompactMeasureSpec>(target.payload);
    double max_norm = 0.0;
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, WeightedPoints>) {
            for (const auto& p : f.points) max_norm = std::max(max_norm, p.norm());
          } else if constexpr (std::is_same_v<F, UniformRectangles>) {
            for (const auto& r : f.rects) {
              for (double cx : {r.x_lo, r.x_hi}) {
                for (double cy : {r.y_lo, r.y_hi}) max_norm = std::max(max_norm, std::hypot(cx, cy));
              }
            }
          } else {
            for (const auto& iv : f.intervals) {
              max_norm = std::max({max_norm, std::abs(iv.lo), std::abs(iv.hi)});
            }
          }
        },
        c.form);
    rep.support_excess = max_norm - c.M;
    if (rep.support_excess > 1e-12) rep.violations.push_back("support point outside radius M");
    return rep;
  }

  const SmoothPotentialSpec pot = potential_view(target);
  if (grid.points.empty()) throw DomainError("validate_metadata: empty grid");
  const Vec zero = Vec::Zero(target.dim);
  const double g_origin = eval_potential(pot, zero).value;
  const auto& md = pot.metadata;

  for (const Vec& x : grid.points) {
    const PotentialEval e = eval_potential(pot, x);
    const auto er = symmetric_eigen_range(e.hess);
    rep.observed_hess_max = std::max(rep.observed_hess_max, er.max);
    rep.observed_hess_min = std::min(rep.observed_hess_min, er.min);
    rep.observed_hess_norm = std::max(rep.observed_hess_norm, std::max(std::abs(er.min), std::abs(er.max)));
    rep.observed_growth = std::max(rep.observed_growth, e.grad.norm() / (x.norm() + 1.0));
    if (md) {
      rep.max_alpha_violation = std::max(
          rep.max_alpha_violation,
          -(e.value - g_origin + 0.5 * md->alpha2 * x.squaredNorm() + md->alpha1));
      const Vec x0 = md->x0.size() == x.size() ? md->x0 : zero;
      rep.max_beta_violation = std::max(
          rep.max_beta_violation, e.grad.norm() - md->beta1 * (x - x0).norm() - md->beta2);
    }
    // Central differences, skipped next to declared kinks.
    const double h = 1e-5 * std::max(1.0, x.norm());
    if (target.dim == 1 && near_breakpoint(pot.breakpoints, x(0), h)) continue;
    for (int d = 0; d < target.dim; ++d) {
      Vec xp = x;
      Vec xm = x;
      xp(d) += h;
      xm(d) -= h;
      const PotentialEval ep = eval_potential(pot, xp);
      const PotentialEval em = eval_potential(pot, xm);
      const double fd_grad = (ep.value - em.value) / (2.0 * h);
      rep.max_fd_grad_error = std::max(
          rep.max_fd_grad_error,
          std::abs(fd_grad - e.grad(d)) / std::max({1.0, e.grad.norm(), std::abs(e.value)}));
      const Vec fd_hess = (ep.grad - em.grad) / (2.0 * h);
      rep.max_fd_hess_error = std::max(
          rep.max_fd_hess_error,
          (fd_hess - e.hess.col(d)).norm() / std::max(1.0, spectral_norm_symmetric(e.hess)));
    }
  }

  if (!md) {
    rep.violations.push_back("no metadata declared");
  } else {
    if (rep.observed_hess_min < -md->M0 - tol) rep.violations.push_back("M0: D^2 g below -M0");
    if (rep.observed_hess_max > md->M1 + tol) rep.violations.push_back("M1: D^2 g above M1");
    if (rep.observed_hess_norm > md->L + tol) rep.violations.push_back("L: ||D^2 g|| above L");
    if (rep.max_alpha_violation > tol) rep.violations.push_back("alpha: Gaussian tail condition fails");
    if (rep.max_beta_violation > tol) rep.violations.push_back("beta: gradient growth condition fails");
  }
  if (rep.max_fd_grad_error > 1e-6) rep.violations.push_back("finite differences disagree with grad g");
  if (rep.max_fd_hess_error > 1e-5) rep.violations.push_back("finite differences disagree with D^2 g");
  return rep;
}

}  // namespace scorelab
