#include "scorelab/quadrature.hpp"

#include "scorelab/common.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scorelab {

namespace {

// Orthonormal Hermite recurrence at x. Returns (p_n, p_{n-1}) scaled by a
// common factor exp(-log_scale) so that large |x| does not overflow.
struct HermiteValues {
  double pn;
  double pn1;
  double log_scale;
};

HermiteValues orthonormal_hermite(std::size_t n, double x) {
  double p0 = std::pow(std::numbers::pi, -0.25);
  double p1 = 0.0;
  double log_scale = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double p2 = p1;
    p1 = p0;
    p0 = x * std::sqrt(2.0 / j) * p1 - std::sqrt((j - 1.0) / j) * p2;
    if (std::abs(p0) > 1e150) {
      p0 *= 1e-150;
      p1 *= 1e-150;
      log_scale += 150.0 * std::numbers::ln10;
    }
  }
  return {p0, p1, log_scale};
}

}  // namespace

GaussHermiteRule gauss_hermite(std::size_t order) {
  if (order < 1) throw DomainError("gauss_hermite: order must be >= 1");
  const std::size_t n = order;
  const std::size_t half = (n + 1) / 2;
  std::vector<double> pos_nodes(half);
  std::vector<double> pos_logw(half);
  // Golub-Welsch eigenvalues as starting points, polished by Newton.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
  for (Eigen::Index j = 0; j < sub.size(); ++j) sub(j) = std::sqrt(0.5 * static_cast<double>(j + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& guess = es.eigenvalues();  // ascending
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < half; ++i) {
    double z = guess(static_cast<Eigen::Index>(n - 1 - i));
    HermiteValues hv{};
    for (int it = 0; it < 20; ++it) {
      hv = orthonormal_hermite(n, z);
      const double step = hv.pn / (std::sqrt(2.0 * nd) * hv.pn1);
      z -= step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    hv = orthonormal_hermite(n, z);
    const double dp = std::sqrt(2.0 * nd) * hv.pn1;
    pos_nodes[i] = z;
    // w = 2 / p'_n(z)^2 with p'_n = sqrt(2n) p_{n-1} in the orthonormal basis.
    pos_logw[i] = std::log(2.0) - 2.0 * (std::log(std::abs(dp)) + hv.log_scale);
  }
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.log_weights.resize(n);
  for (std::size_t i = 0; i < half; ++i) {
    rule.nodes[i] = -pos_nodes[i];
    rule.log_weights[i] = pos_logw[i];
    rule.nodes[n - 1 - i] = pos_nodes[i];
    rule.log_weights[n - 1 - i] = pos_logw[i];
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

GaussLegendreRule gauss_legendre(std::size_t order) {
  if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
  const std::size_t n = order;
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p1 = 1.0;
    double p2 = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    dp = n * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace scorelab
