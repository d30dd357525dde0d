#pragma once

namespace scorelab {

// Error-function family, accurate to a few ulp over the whole real line.
double erf(double x);
double erfc(double x);
/// Scaled complementary error function exp(x^2) * erfc(x).
double erfcx(double x);

/// Moments of the weight exp(-u^2) restricted to [a, b], a < b.
///   log_mass = log of the integral of exp(-u^2) over [a, b]
///   mean, var = first moment and variance of the normalized weight.
/// Stable in the far tails (both ends on one side, |a|, |b| large).
struct TruncatedGaussMoments {
  double log_mass;
  double mean;
  double var;
};
TruncatedGaussMoments truncated_gauss_moments(double a, double b);

}  // namespace scorelab
