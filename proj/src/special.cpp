#include "scorelab/special.hpp"

#include "scorelab/common.hpp"

#include <cmath>
#include <numbers>

namespace scorelab {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// erf(x) = 2/sqrt(pi) exp(-x^2) sum_k 2^k x^(2k+1) / (1*3*...*(2k+1)).
// All terms positive, so no cancellation; used for |x| < 2.
double erf_series(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= 2.0 * x2 / (2.0 * k + 1.0);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return kTwoOverSqrtPi * std::exp(-x2) * sum;
}

// Continued fraction for erfcx(x), x >= 2, evaluated with modified Lentz:
// sqrt(pi) erfcx(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
double erfcx_cf(double x) {
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 500; ++k) {
    const double a = 0.5 * k;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::numbers::inv_sqrtpi / f;
}

}  // namespace

double erf(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::abs(x);
  double r;
  if (ax < 2.0) {
    r = erf_series(ax);
  } else if (ax > 6.0) {
    r = 1.0;
  } else {
    r = 1.0 - std::exp(-ax * ax) * erfcx_cf(ax);
  }
  return x < 0 ? -r : r;
}

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x >= 2.0) return erfcx_cf(x);
  if (x >= 0.0) return std::exp(x * x) * (1.0 - erf_series(x));
  // erfcx(-y) = 2 exp(y^2) - erfcx(y)
  const double y = -x;
  if (y > 26.6) return kInf;
  return 2.0 * std::exp(y * y) - erfcx(y);
}

double erfc(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 - erfc(-x);
  if (x < 0.5) return 1.0 - erf(x);
  if (x > 27.3) return 0.0;
  return std::exp(-x * x) * erfcx(x);
}

TruncatedGaussMoments truncated_gauss_moments(double a, double b) {
  if (!(a < b)) throw DomainError("truncated_gauss_moments: need a < b");
  // Reflect so the interval does not lie entirely in the negative half line.
  if (b <= 0.0) {
    auto m = truncated_gauss_moments(-b, -a);
    m.mean = -m.mean;
    return m;
  }
  const double half_sqrt_pi = 0.5 * std::sqrt(std::numbers::pi);
  double log_mass;
  double e_u;   // E[u]
  double e_u2;  // E[u^2]
  if (a >= 0.0) {
    // Integral = sqrt(pi)/2 * exp(-a^2) * (erfcx(a) - r erfcx(b)), r = exp(a^2-b^2).
    const double r = std::isinf(b) ? 0.0 : std::exp((a - b) * (a + b));
    const double diff = erfcx(a) - r * (std::isinf(b) ? 0.0 : erfcx(b));
    log_mass = -a * a + std::log(half_sqrt_pi * diff);
    const double denom = std::sqrt(std::numbers::pi) * diff;
    e_u = (1.0 - r) / denom;
    const double b_term = std::isinf(b) ? 0.0 : b * r;
    e_u2 = 0.5 + (a - b_term) / denom;
  } else {
    // a < 0 < b: no cancellation in erf(b) - erf(a).
    const double mass = half_sqrt_pi * (erf(b) - erf(a));
    log_mass = std::log(mass);
    const double ea = std::isinf(a) ? 0.0 : std::exp(-a * a);
    const double eb = std::isinf(b) ? 0.0 : std::exp(-b * b);
    e_u = 0.5 * (ea - eb) / mass;
    const double b_term = std::isinf(b) ? 0.0 : b * eb;
    const double a_term = std::isinf(a) ? 0.0 : a * ea;
    e_u2 = 0.5 + 0.5 * (a_term - b_term) / mass;
  }
  const double var = std::max(0.0, e_u2 - e_u * e_u);
  return {log_mass, e_u, var};
}

}  // namespace scorelab
