#pragma once

#include "scorelab/common.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace scorelab {

/// Isotropic Gaussian mixture: sum_i w_i N(mean_i, var_i I).
struct GaussianMixtureSpec {
  std::vector<double> weights;
  std::vector<Vec> means;
  std::vector<double> variances;

  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  /// Throws DomainError unless weights sum to 1 (1e-12), variances > 0 and
  /// all means share one dimension.
  void validate() const;
};

/// Value, gradient and Hessian of the potential g(x) = -log p0(x) - |x|^2/2.
struct PotentialEval {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

/// Regularity constants of g consumed by the bound formulas.
///   g_hess_upper (M1):  D^2 g <= M1 I
///   g_hess_lower (M0):  D^2 g >= -M0 I
///   hess_norm (L):      ||D^2 g||_2 <= L
///   alpha1, alpha2:     g(x) - g(0) >= -alpha2/2 |x|^2 - alpha1
///   beta1, beta2:       |grad g(x)| <= beta1 |x - x0| + beta2
///   grad_sup:           sup |grad g| (+inf when unbounded)
struct PotentialMetadata {
  double M0 = 0.0;
  double M1 = 0.0;
  double L = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double grad_sup = kInf;
  Vec x0;

  /// Enforces 0 <= alpha2 < 1, nonnegative constants and the beta rule:
  /// beta1 == 0 with beta2 > 0 leaves the first-order constant undefined.
  void validate() const;
};

using PotentialFn = std::function<PotentialEval(const Vec&)>;

struct SmoothPotentialSpec {
  PotentialFn g;
  std::optional<PotentialMetadata> metadata;
  /// Kink locations of a piecewise-smooth 1D potential (sorted). Non-empty
  /// breakpoints switch the heat-kernel engine to split Gauss-Legendre panels.
  std::vector<double> breakpoints;
  /// Set when the potential comes from a Gaussian mixture with a closed form.
  std::optional<GaussianMixtureSpec> mixture;
};

/// Compactly supported measure pi_0 inside the closed ball of radius M.
struct WeightedPoints {
  std::vector<Vec> points;
  std::vector<double> weights;
};
struct Rectangle {
  double x_lo, x_hi, y_lo, y_hi;
};
/// Uniform measure on a union of disjoint axis-aligned rectangles.
struct UniformRectangles {
  std::vector<Rectangle> rects;
};
struct Interval {
  double lo, hi;
};
/// Uniform measure on a union of disjoint intervals.
struct UniformSegments {
  std::vector<Interval> intervals;
};

struct CompactMeasureSpec {
  std::variant<WeightedPoints, UniformRectangles, UniformSegments> form;
  double M = 0.0;

  void validate(int dim) const;
};

enum class TargetKind { gaussian_mixture, smooth_potential, compact_measure };

struct TargetSpec {
  std::string name;
  int dim = 1;
  std::variant<GaussianMixtureSpec, SmoothPotentialSpec, CompactMeasureSpec> payload;

  TargetKind kind() const { return static_cast<TargetKind>(payload.index()); }
  void validate() const;
};

std::string to_string(TargetKind kind);

using ParamMap = std::map<std::string, double>;

/// Built-in targets. Names: std_normal, gaussian, mixture2, cosine_potential,
/// counterexample_block, counterexample_chain, two_point, point_mass,
/// notched_square. Unknown names and out-of-range parameters throw DomainError.
TargetSpec catalog(const std::string& name, const ParamMap& params = {});

/// Names accepted by catalog().
std::vector<std::string> catalog_names();

/// OU evolution of each component to forward time t.
GaussianMixtureSpec mixture_at_time(const GaussianMixtureSpec& spec, double t);

/// Exact potential of a mixture, g = -log p0 - |x|^2/2, with metadata for
/// equal-variance mixtures (none otherwise).
SmoothPotentialSpec mixture_potential(const GaussianMixtureSpec& spec);

/// Smooth-potential view of a target (mixtures are converted). Throws
/// UnsupportedError for compact measures.
SmoothPotentialSpec potential_view(const TargetSpec& target);

/// Closed-form mixture behind a target, when one exists.
std::optional<GaussianMixtureSpec> mixture_view(const TargetSpec& target);

/// Evaluates g; non-finite output raises DomainError.
PotentialEval eval_potential(const SmoothPotentialSpec& spec, const Vec& x);

/// Sampling grid for validate_metadata.
struct ValidationGrid {
  std::vector<Vec> points;
  /// Regular lattice over [lo, hi]^dim with `per_axis` points per axis.
  static ValidationGrid lattice(int dim, double lo, double hi, int per_axis);
};

struct MetadataReport {
  double observed_hess_max = -kInf;  // max eigenvalue of D^2 g
  double observed_hess_min = kInf;   // min eigenvalue of D^2 g
  double observed_hess_norm = 0.0;
  double observed_growth = 0.0;      // max |grad g| / (|x| + 1)
  double max_alpha_violation = 0.0;  // max of -(g(x) - g(0) + alpha2/2|x|^2 + alpha1)
  double max_beta_violation = 0.0;   // max of |grad g| - beta1|x-x0| - beta2
  double max_fd_grad_error = 0.0;    // relative finite-difference mismatch
  double max_fd_hess_error = 0.0;
  double support_excess = 0.0;       // compact: max(|y|) - M
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Compares declared metadata with what the evaluator shows on the grid.
/// Violations are recorded in the report, never thrown.
MetadataReport validate_metadata(const TargetSpec& target, const ValidationGrid& grid);

/// One counter-example block of scale M placed at `center`.
struct BlockPlacement {
  double M;
  double center;
};

/// Chain layout: block k has scale k, x_1 = 0 and adjacent supports are
/// separated by `margin`.
std::vector<BlockPlacement> chain_blocks(int K, double margin);

/// Sum of blocks with disjoint supports, with kink breakpoints and the
/// metadata M0 = M1 = L = 2 of the construction.
SmoothPotentialSpec block_sum_potential(const std::vector<BlockPlacement>& blocks);

/// Potential of one counter-example block g_M at offset s from its center:
/// 2M^2 - s^2 for |s| <= M, (|s| - 2M)^2 for M <= |s| <= 2M, 0 beyond.
double block_potential(double M, double s);
double block_potential_d1(double M, double s);
double block_potential_d2(double M, double s);

}  // namespace scorelab
