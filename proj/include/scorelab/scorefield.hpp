#pragma once

#include "scorelab/common.hpp"
#include "scorelab/quadrature.hpp"
#include "scorelab/targets.hpp"

#include <optional>

namespace scorelab {

enum class CompactMethod {
  analytic,  // exact per-cell kernel moments (erf family), default
  grid,      // two-scale midpoint grid: fine window of width ~sqrt(t) + coarse cover
};

struct QuadratureConfig {
  std::size_t gh_order_1d = 200;
  std::size_t gh_order_2d = 96;  // per axis; used for dim >= 2
  double compact_fine_spacing_factor = 1.0 / 8.0;
  double compact_fine_radius_factor = 8.0;
  std::size_t compact_coarse_cells = 512;
  CompactMethod compact_method = CompactMethod::analytic;
  // Split-panel rule for potentials with declared kinks.
  std::size_t panel_order = 20;
  double panel_width_factor = 0.5;  // panel width in units of sqrt(2 t)
  double window_radius = 40.0;      // half-window in units of sqrt(2 t)

  void validate() const;
};

/// Kernel moments of a compact measure at (t, x):
///   log_phat = log of the integral of exp(-|x-y|^2/2t) d pi_0(y)
///   ybar     = kernel-weighted center of mass
///   cov      = kernel-weighted covariance of y (PSD, clamped)
struct CompactMoments {
  double log_phat = 0.0;
  Vec ybar;
  Mat cov;
};

/// Heat-flow quantities at (t_bar, x) in the rescaled clock.
struct ScoreEval {
  double t_bar = 0.0;
  Vec x;
  double log_pbar = 0.0;
  Vec grad_qbar;
  Mat hess_qbar;
  /// Smooth targets: the averaged D^2 g that dominates hess_qbar from above.
  std::optional<Mat> hess_upper;
  std::optional<double> qbar_t;
  std::optional<Vec> grad_qbar_t;
  std::optional<CompactMoments> moments;
};

/// Score quantities in the forward clock.
struct QCoords {
  double t = 0.0;
  Vec x;  // forward-clock point, e^{t/2} times the rescaled point
  Vec grad_q;
  Mat hess_q;
  Vec score;           // grad log p(t, x) = -grad_q - x
  Mat score_jacobian;  // -hess_q - I
};

/// Evaluation engine for one target. Quadrature rules are built once at
/// construction; evaluate() is const and safe to call concurrently.
class ScoreField {
 public:
  explicit ScoreField(TargetSpec target, QuadratureConfig cfg = {});

  const TargetSpec& target() const { return target_; }
  const QuadratureConfig& config() const { return cfg_; }

  /// Full evaluation; with_time adds qbar_t and grad_qbar_t (smooth only).
  ScoreEval evaluate(double t_bar, const Vec& x, bool with_time = false) const;

  double log_pbar(double t_bar, const Vec& x) const;
  Vec grad_qbar(double t_bar, const Vec& x) const;
  Mat hess_qbar(double t_bar, const Vec& x) const;

  /// Forward-clock evaluation at forward time t > 0.
  QCoords forward(double t, const Vec& x) const;

 private:
  TargetSpec target_;
  QuadratureConfig cfg_;
  std::optional<SmoothPotentialSpec> potential_;
  GaussHermiteRule gh_;
  GaussLegendreRule gl_;
};

// Free-function forms; each builds a ScoreField for the call.
double log_pbar(const TargetSpec& target, double t_bar, const Vec& x, const QuadratureConfig& cfg = {});
Vec grad_qbar(const TargetSpec& target, double t_bar, const Vec& x, const QuadratureConfig& cfg = {});
Mat hess_qbar(const TargetSpec& target, double t_bar, const Vec& x, const QuadratureConfig& cfg = {});

struct TimeDerivs {
  double qbar_t;
  Vec grad_qbar_t;
};
/// Smooth targets only; compact targets raise UnsupportedError.
TimeDerivs qbar_time_derivs(const TargetSpec& target, double t_bar, const Vec& x,
                            const QuadratureConfig& cfg = {});

CompactMoments compact_moments(const CompactMeasureSpec& spec, int dim, double t_bar, const Vec& x,
                               const QuadratureConfig& cfg = {});

/// Converts a rescaled-clock evaluation to forward time t. The evaluation must
/// have been made at t_bar = 1 - e^{-t}; otherwise ContractError.
QCoords q_coords(const ScoreEval& eval, double t);

struct MixtureScore {
  Vec score;
  Mat jacobian;
};
/// Exact score of the OU-evolved mixture at forward time t.
MixtureScore closed_form_mixture(const GaussianMixtureSpec& spec, double t, const Vec& x);

/// Allocation-free 1D-friendly score of the evolved mixture, written to out.
/// `evolved` must already be mixture_at_time(spec, t).
void mixture_score_into(const GaussianMixtureSpec& evolved, const double* x, double* out, int dim);

}  // namespace scorelab
