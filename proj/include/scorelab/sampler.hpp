#pragma once

#include "scorelab/common.hpp"
#include "scorelab/scorefield.hpp"
#include "scorelab/targets.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace scorelab {

struct SamplerConfig {
  double T = 3.0;
  std::size_t N = 20;
  double delta = 0.0;
  std::size_t ensemble = 10000;
  std::uint64_t seed = 0;

  void validate() const;
  /// Uniform grid t_k = delta + k (T - delta) / N, k = 0..N.
  std::vector<double> grid() const;
};

/// Samples stored row-major, `dim` doubles per sample.
struct Ensemble {
  int dim = 1;
  std::vector<double> data;
  std::size_t excluded = 0;  // trajectories dropped for non-finite state

  std::size_t size() const { return dim == 0 ? 0 : data.size() / static_cast<std::size_t>(dim); }
  const double* row(std::size_t i) const { return data.data() + i * static_cast<std::size_t>(dim); }
  /// One coordinate as a vector.
  std::vector<double> column(int d) const;
};

/// Score evaluator (forward time t, point x) -> out, all dim-sized buffers.
/// Must be safe for concurrent calls.
struct ScoreSource {
  int dim = 1;
  std::string provenance;
  std::function<void(double t, const double* x, double* out)> eval;

  Vec operator()(double t, const Vec& x) const;
};

enum class SourceKind { exact, quadrature };

/// Deterministic score perturbation added to every component:
/// constant c, or c for t < T/2 and 0 afterwards.
struct Perturbation {
  enum class Shape { constant, early_half };
  Shape shape = Shape::constant;
  double c = 0.0;
  double T = 0.0;  // used by early_half

  double operator()(double t) const;
  std::string describe() const;
};

struct SourceOptions {
  double delta = 0.0;
  QuadratureConfig quadrature;
  std::optional<Perturbation> eta;
};

/// exact: closed-form mixture score (mixture-backed targets only).
/// quadrature: ScoreField in the forward clock; compact targets need delta > 0.
ScoreSource make_score_source(SourceKind kind, const TargetSpec& target, const SourceOptions& opts = {});

/// Wraps a source with an additive perturbation.
ScoreSource perturb(ScoreSource base, const Perturbation& eta);

/// e^{dt/2} x + 2 (e^{dt/2} - 1) s + sqrt(e^{dt} - 1) noise.
Vec exp_step(const Vec& x, double dt, const Vec& s, const Vec& noise);
void exp_step_into(double* x, int dim, double dt, const double* s, const double* noise);

/// Exact draws of X_t for the forward OU process started at the target.
Ensemble forward_sample(const TargetSpec& target, double t, std::size_t count, std::uint64_t seed);

/// Exponential-integrator backward scheme from N(0, I) over [0, T - delta].
Ensemble backward_run(const SamplerConfig& cfg, const ScoreSource& source);

/// Forward times at which backward_run evaluates the score, in order.
std::vector<double> score_eval_times(const SamplerConfig& cfg);

/// CSV with a '#' header carrying the config and provenance, one row per sample.
std::string ensemble_csv(const Ensemble& e, const std::vector<std::pair<std::string, std::string>>& header);

/// Build provenance string (version plus git revision when known).
std::string provenance_string();

}  // namespace scorelab
