#pragma once

#include "scorelab/common.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/targets.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace scorelab {

/// W1 between two empirical measures on the line (sorted coupling). Unequal
/// sizes: the larger set is reduced to the smaller size by quantile interpolation.
double w1_1d(std::vector<double> a, std::vector<double> b);

/// Sliced W1 over `directions` random unit directions (approximation in 2D).
double sliced_w1(const Ensemble& a, const Ensemble& b, int directions = 64, std::uint64_t seed = 0);

struct KdeKl {
  double value;
  double bandwidth;
  double lo;  // integration window
  double hi;
};
/// KL(p0 || KDE of samples), Silverman bandwidth, trapezoid on p0's window.
KdeKl kl_kde_1d(const std::vector<double>& samples, const std::function<double(double)>& density,
                std::size_t grid_points = 4001);

struct Estimate {
  double value;
  double stderr_;
};

/// Schedule-weighted RMS score error against a reference score, by Monte
/// Carlo over forward samples at each t_k. `schedule` holds t_0 < ... < t_K.
Estimate eps0(const ScoreSource& source, const ScoreSource& reference, const TargetSpec& target,
              const std::vector<double>& schedule, std::size_t mc, std::uint64_t seed);

struct RatePoint {
  double N;
  double error;
  double stderr_ = 0.0;
};

struct RateFit {
  double a = kNaN;      // floor
  double b = kNaN;      // coefficient
  double gamma = kNaN;  // exponent
  double residual = kNaN;  // RMS of log residuals at the optimum
  bool degenerate = false;
};

/// Fits error = a + b N^{-gamma}: profile least squares over the floor a.
RateFit rate_fit(const std::vector<RatePoint>& points);

/// E|X|^m for m in {2, 4, 8}.
double sample_moment(const Ensemble& e, int m);
double target_moment(const TargetSpec& target, int m);

/// One metrics CSV row: metric,value,stderr,key=value;...
std::string metric_row(const std::string& metric, double value, double stderr_,
                       const std::vector<std::pair<std::string, std::string>>& params = {});
inline constexpr const char* kMetricHeader = "metric,value,stderr,params";

}  // namespace scorelab
