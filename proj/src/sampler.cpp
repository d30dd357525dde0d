#include "scorelab/sampler.hpp"

#include "scorelab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#ifndef SCORELAB_VERSION
#define SCORELAB_VERSION "0.0.0"
#endif
#ifndef SCORELAB_GIT_REVISION
#define SCORELAB_GIT_REVISION "unknown"
#endif

namespace scorelab {

namespace {
constexpr std::uint32_t kStreamBackward = 1;
constexpr std::uint32_t kStreamForward = 2;
}  // namespace

void SamplerConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("sampler: T must be > 0");
  if (N < 1) throw DomainError("sampler: N must be >= 1");
  if (!(delta >= 0.0 && delta < T)) throw DomainError("sampler: need 0 <= delta < T");
  if (ensemble < 1) throw DomainError("sampler: ensemble must be >= 1");
}

std::vector<double> SamplerConfig::grid() const {
  std::vector<double> g(N + 1);
  for (std::size_t k = 0; k <= N; ++k) g[k] = delta + static_cast<double>(k) * (T - delta) / static_cast<double>(N);
  return g;
}

std::vector<double> Ensemble::column(int d) const {
  std::vector<double> c(size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = row(i)[d];
  return c;
}

Vec ScoreSource::operator()(double t, const Vec& x) const {
  if (x.size() != dim) throw ContractError("ScoreSource: dimension mismatch");
  Vec out(dim);
  eval(t, x.data(), out.data());
  return out;
}

double Perturbation::operator()(double t) const {
  if (shape == Shape::constant) return c;
  return t < 0.5 * T ? c : 0.0;
}

std::string Perturbation::describe() const {
  std::ostringstream os;
  if (shape == Shape::constant) {
    os << "constant(" << fmt17(c) << ")";
  } else {
    os << "early_half(" << fmt17(c) << ",T=" << fmt17(T) << ")";
  }
  return os.str();
}

ScoreSource perturb(ScoreSource base, const Perturbation& eta) {
  ScoreSource s;
  s.dim = base.dim;
  s.provenance = base.provenance + "+eta:" + eta.describe();
  auto inner = std::move(base.eval);
  const int dim = s.dim;
  s.eval = [inner = std::move(inner), eta, dim](double t, const double* x, double* out) {
    inner(t, x, out);
    const double c = eta(t);
    for (int d = 0; d < dim; ++d) out[d] += c;
  };
  return s;
}

ScoreSource make_score_source(SourceKind kind, const TargetSpec& target, const SourceOptions& opts) {
  target.validate();
  ScoreSource s;
  s.dim = target.dim;
  if (kind == SourceKind::exact) {
    const auto mix = mixture_view(target);
    if (!mix) throw UnsupportedError("exact score needs a closed-form mixture; '" + target.name + "' has none");
    s.provenance = "exact:" + target.name;
    // Evolved parameters are formed inline so the hot path does not allocate.
    struct Comp {
      double log_w;
      std::vector<double> mean;
      double var;
    };
    std::vector<Comp> comps;
    for (std::size_t i = 0; i < mix->weights.size(); ++i) {
      const Vec& m = mix->means[i];
      comps.push_back({std::log(mix->weights[i]), std::vector<double>(m.data(), m.data() + m.size()),
                       mix->variances[i]});
    }
    const int dim = s.dim;
    s.eval = [comps = std::move(comps), dim](double t, const double* x, double* out) {
      const double decay = std::exp(-t);
      const double shrink = std::exp(-0.5 * t);
      constexpr std::size_t kStack = 16;
      double stack[kStack];
      std::vector<double> heap;
      double* logs = stack;
      if (comps.size() > kStack) {
        heap.resize(comps.size());
        logs = heap.data();
      }
      double best = -kInf;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const double v = comps[i].var * decay + (1.0 - decay);
        double d2 = 0.0;
        for (int d = 0; d < dim; ++d) {
          const double diff = x[d] - shrink * comps[i].mean[d];
          d2 += diff * diff;
        }
        logs[i] = comps[i].log_w - 0.5 * dim * std::log(v) - d2 / (2.0 * v);
        best = std::max(best, logs[i]);
      }
      for (int d = 0; d < dim; ++d) out[d] = 0.0;
      double total = 0.0;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const double r = std::exp(logs[i] - best);
        const double v = comps[i].var * decay + (1.0 - decay);
        total += r;
        for (int d = 0; d < dim; ++d) out[d] -= r * (x[d] - shrink * comps[i].mean[d]) / v;
      }
      for (int d = 0; d < dim; ++d) out[d] /= total;
    };
  } else {
    if (target.kind() == TargetKind::compact_measure && !(opts.delta > 0.0)) {
      throw ContractError("quadrature score on a compact target needs early stopping (delta > 0)");
    }
    s.provenance = "quadrature:" + target.name;
    auto field = std::make_shared<const ScoreField>(target, opts.quadrature);
    const int dim = s.dim;
    s.eval = [field, dim](double t, const double* x, double* out) {
      const Vec xv = Eigen::Map<const Vec>(x, dim);
      const QCoords q = field->forward(t, xv);
      for (int d = 0; d < dim; ++d) out[d] = q.score(d);
    };
  }
  if (opts.eta) return perturb(std::move(s), *opts.eta);
  return s;
}

void exp_step_into(double* x, int dim, double dt, const double* s, const double* noise) {
  const double a = std::exp(0.5 * dt);
  const double b = 2.0 * std::expm1(0.5 * dt);
  const double c = std::sqrt(std::expm1(dt));
  for (int d = 0; d < dim; ++d) x[d] = a * x[d] + b * s[d] + c * noise[d];
}

Vec exp_step(const Vec& x, double dt, const Vec& s, const Vec& noise) {
  if (!(dt > 0.0)) throw DomainError("exp_step: dt must be > 0");
  if (s.size() != x.size() || noise.size() != x.size()) throw ContractError("exp_step: dimension mismatch");
  Vec out = x;
  exp_step_into(out.data(), static_cast<int>(x.size()), dt, s.data(), noise.data());
  return out;
}

namespace {

// One draw from the target at time 0.
struct InitialSampler {
  const TargetSpec& target;
  std::optional<GaussianMixtureSpec> mix;
  std::optional<SmoothPotentialSpec> pot;
  std::vector<double> cum;  // cumulative weights (mixture comps, atoms, cells)
  double env_sd = 1.0;
  double env_log_bound = 0.0;

  explicit InitialSampler(const TargetSpec& t) : target(t) {
    mix = mixture_view(t);
    if (mix) {
      accumulate(mix->weights);
      return;
    }
    if (t.kind() == TargetKind::smooth_potential) {
      pot = potential_view(t);
      if (!pot->metadata) throw UnsupportedError("forward_sample: smooth target needs alpha1/alpha2 metadata");
      const auto& md = *pot->metadata;
      env_sd = 1.0 / std::sqrt(1.0 - md.alpha2);
      env_log_bound = -pot->g(Vec::Zero(t.dim)).value + md.alpha1;
      return;
    }
    const auto& c = std::get<CompactMeasureSpec>(t.payload);
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, WeightedPoints>) {
            accumulate(f.weights);
          } else if constexpr (std::is_same_v<F, UniformRectangles>) {
            std::vector<double> w;
            for (const auto& r : f.rects) w.push_back((r.x_hi - r.x_lo) * (r.y_hi - r.y_lo));
            accumulate(w);
          } else {
            std::vector<double> w;
            for (const auto& iv : f.intervals) w.push_back(iv.hi - iv.lo);
            accumulate(w);
          }
        },
        c.form);
  }

  void accumulate(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) {
      s += v;
      cum.push_back(s);
    }
    for (double& v : cum) v /= s;
  }

  std::size_t pick(double u) const {
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
  }

  void draw(NormalStream& rng, double* out) const {
    const int n = target.dim;
    if (mix) {
      const std::size_t k = pick(rng.uniform());
      const double sd = std::sqrt(mix->variances[k]);
      for (int d = 0; d < n; ++d) out[d] = mix->means[k](d) + sd * rng.normal();
      return;
    }
    if (pot) {
      // log-domain acceptance against the dominating Gaussian envelope
      constexpr int kMaxTries = 1000000;
      Vec x(n);
      for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        for (int d = 0; d < n; ++d) x(d) = env_sd * rng.normal();
        const double log_target = -pot->g(x).value - 0.5 * x.squaredNorm();
        const double log_env = env_log_bound - 0.5 * x.squaredNorm() / (env_sd * env_sd);
        if (std::log(rng.uniform()) <= log_target - log_env) {
          for (int d = 0; d < n; ++d) out[d] = x(d);
          return;
        }
      }
      throw NumericalError("forward_sample: rejection acceptance below 1e-4 for '" + target.name + "'");
    }
    const auto& c = std::get<CompactMeasureSpec>(target.payload);
    const std::size_t k = pick(rng.uniform());
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, WeightedPoints>) {
            for (int d = 0; d < n; ++d) out[d] = f.points[k](d);
          } else if constexpr (std::is_same_v<F, UniformRectangles>) {
            const auto& r = f.rects[k];
            out[0] = r.x_lo + (r.x_hi - r.x_lo) * rng.uniform();
            out[1] = r.y_lo + (r.y_hi - r.y_lo) * rng.uniform();
          } else {
            const auto& iv = f.intervals[k];
            out[0] = iv.lo + (iv.hi - iv.lo) * rng.uniform();
          }
        },
        c.form);
  }
};

// Cheap acceptance-rate probe so hopeless envelopes fail fast.
void probe_acceptance(const InitialSampler& s, std::uint64_t seed) {
  if (!s.pot) return;
  const int n = s.target.dim;
  constexpr int kProbe = 200000;
  NormalStream rng(seed, ~0ull, 0, kStreamForward);
  Vec x(n);
  int accepted = 0;
  for (int i = 0; i < kProbe; ++i) {
    for (int d = 0; d < n; ++d) x(d) = s.env_sd * rng.normal();
    const double log_target = -s.pot->g(x).value - 0.5 * x.squaredNorm();
    const double log_env = s.env_log_bound - 0.5 * x.squaredNorm() / (s.env_sd * s.env_sd);
    if (std::log(rng.uniform()) <= log_target - log_env) ++accepted;
  }
  if (accepted < kProbe * 1e-4) {
    std::ostringstream os;
    os << "forward_sample: rejection acceptance " << static_cast<double>(accepted) / kProbe
       << " is below 1e-4 for '" << s.target.name << "'";
    throw NumericalError(os.str());
  }
}

}  // namespace

Ensemble forward_sample(const TargetSpec& target, double t, std::size_t count, std::uint64_t seed) {
  if (!(t >= 0.0)) throw DomainError("forward_sample: t must be >= 0");
  target.validate();
  const InitialSampler init(target);
  probe_acceptance(init, seed);
  const int n = target.dim;
  Ensemble e;
  e.dim = n;
  e.data.assign(count * static_cast<std::size_t>(n), 0.0);
  const double shrink = std::exp(-0.5 * t);
  const double noise_sd = std::sqrt(-std::expm1(-t));
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(count, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      double* out = e.data.data() + i * static_cast<std::size_t>(n);
      NormalStream rng0(seed, i, 0, kStreamForward);
      init.draw(rng0, out);
      NormalStream rng1(seed, i, 1, kStreamForward);
      for (int d = 0; d < n; ++d) out[d] = shrink * out[d] + noise_sd * rng1.normal();
    }
  });
  return e;
}

std::vector<double> score_eval_times(const SamplerConfig& cfg) {
  cfg.validate();
  const double h = (cfg.T - cfg.delta) / static_cast<double>(cfg.N);
  std::vector<double> times(cfg.N);
  for (std::size_t k = 0; k < cfg.N; ++k) times[k] = cfg.T - static_cast<double>(k) * h;
  return times;
}

Ensemble backward_run(const SamplerConfig& cfg, const ScoreSource& source) {
  cfg.validate();
  const int n = source.dim;
  const auto times = score_eval_times(cfg);
  const double h = (cfg.T - cfg.delta) / static_cast<double>(cfg.N);
  std::vector<double> data(cfg.ensemble * static_cast<std::size_t>(n));
  std::vector<char> ok(cfg.ensemble, 1);
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (cfg.ensemble + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::vector<double> s(n), noise(n);
    const std::size_t end = std::min(cfg.ensemble, (c + 1) * kChunk);
    for (std::size_t j = c * kChunk; j < end; ++j) {
      double* x = data.data() + j * static_cast<std::size_t>(n);
      NormalStream init(cfg.seed, j, 0, kStreamBackward);
      for (int d = 0; d < n; ++d) x[d] = init.normal();
      for (std::size_t k = 0; k < cfg.N; ++k) {
        source.eval(times[k], x, s.data());
        NormalStream rng(cfg.seed, j, static_cast<std::uint32_t>(k + 1), kStreamBackward);
        for (int d = 0; d < n; ++d) noise[d] = rng.normal();
        exp_step_into(x, n, h, s.data(), noise.data());
      }
      for (int d = 0; d < n; ++d) {
        if (!std::isfinite(x[d])) ok[j] = 0;
      }
    }
  });
  Ensemble e;
  e.dim = n;
  e.data.reserve(data.size());
  for (std::size_t j = 0; j < cfg.ensemble; ++j) {
    if (!ok[j]) {
      ++e.excluded;
      continue;
    }
    e.data.insert(e.data.end(), data.begin() + static_cast<std::ptrdiff_t>(j * n),
                  data.begin() + static_cast<std::ptrdiff_t>((j + 1) * n));
  }
  return e;
}

std::string provenance_string() { return std::string("score-lab ") + SCORELAB_VERSION + " (" + SCORELAB_GIT_REVISION + ")"; }

std::string ensemble_csv(const Ensemble& e, const std::vector<std::pair<std::string, std::string>>& header) {
  std::ostringstream os;
  os << "# provenance: " << provenance_string() << '\n';
  for (const auto& [k, v] : header) os << "# " << k << ": " << v << '\n';
  os << "# excluded: " << e.excluded << '\n';
  for (int d = 0; d < e.dim; ++d) os << (d ? ",x" : "x") << d;
  os << '\n';
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double* r = e.row(i);
    for (int d = 0; d < e.dim; ++d) os << (d ? "," : "") << fmt17(r[d]);
    os << '\n';
  }
  return os.str();
}

}  // namespace scorelab
