#pragma once

#include "scorelab/common.hpp"
#include "scorelab/scorefield.hpp"
#include "scorelab/targets.hpp"

#include <string>
#include <vector>

namespace scorelab {

// ---- explicit bound formulas -------------------------------------------------

/// Two-sided Hessian bound on D^2 q in the forward clock.
struct Thm31 {
  double upper;
  double lower;    // -inf at or beyond the horizon
  double horizon;  // +inf when M0 <= 1
};
Thm31 thm31_bounds(double M0, double M1, double t);

/// Uniform short-time bound on ||D^2 log p||. Returns +inf past the pole of
/// the formula and throws HorizonError past the stated horizon.
double cor32_Ct(double L0, double L1, double t);
double cor32_horizon(double L0);

/// Max of cor32_Ct over [0, T]; used as the H_T proxy in kl_predicted.
double cor32_max(double L0, double L1, double T);

/// Largest t with e^{t/2} - e^{-t/2} <= 1/(2L).
double prior_horizon(double L);

struct Thm33Params {
  int n = 1;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double L = 0.0;
  Vec x0;
  Vec grad_g_x0;  // shift applied in the Hessian/time arguments

  static Thm33Params from_metadata(const SmoothPotentialSpec& pot, int dim);
};

struct Thm33Constants {
  double C_n;
  double C_beta;
  double C_tilde_n;
  double C_tilde_L;
};
Thm33Constants thm33_constants(const Thm33Params& p);

struct Thm33 {
  double grad;
  double hess;
  double time;
};
Thm33 thm33_bounds(const Thm33Params& p, double t_bar, const Vec& x);

struct Thm5 {
  double grad;
  double hess_lower;
  double hess_upper;
};
Thm5 thm5_bounds(double L1, double L2);

struct Thm37 {
  double grad;
  double hess;
};
Thm37 thm37_bounds(double M, double t_bar, const Vec& x);

/// Lipschitz constant of the score after early stopping at delta.
double early_stopping_lipschitz(double delta, double M);

/// (M2 + n) e^{-T} + T eps0^2 + n T^2 L^2 / N, unit constant.
double kl_predicted(double M2, int n, double T, double eps0, double N, double L);
/// Same floor and score terms with the L^6 T n (n log n)^2 / N last term.
double kl_predicted_general(double M2, int n, double T, double eps0, double N, double L);

// ---- sweeps ------------------------------------------------------------------

struct SweepGrid {
  std::vector<double> t_bars;
  std::vector<Vec> points;

  /// Default t_bar ladder and a 41-point lattice on [-4, 4]^dim.
  static SweepGrid standard(int dim);
};

struct BoundRow {
  std::string check;  // e.g. "hess_lower"
  double t_bar = 0.0;
  double t = 0.0;  // forward time
  Vec x;
  double bound = 0.0;
  double observed = 0.0;
  double margin = 0.0;  // >= 0 means satisfied
  bool violated = false;
  bool skipped = false;  // beyond a horizon, not evaluated
};

struct BoundReport {
  std::string theorem_id;
  std::string target;
  double tolerance = 1e-7;
  std::vector<BoundRow> rows;

  std::size_t violation_count() const;
  std::size_t skipped_count() const;
  double min_margin() const;  // over evaluated rows
  std::string to_csv() const;
  std::string to_json() const;
};

/// Theorem ids: thm31, cor32, thm33, thm35 (alias thm5), thm37.
std::vector<std::string> theorem_ids();

BoundReport sweep_verify(const TargetSpec& target, const std::string& theorem_id, const SweepGrid& grid,
                         const QuadratureConfig& cfg = {}, double tolerance = 1e-7);

}  // namespace scorelab
