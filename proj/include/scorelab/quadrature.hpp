#pragma once

#include <cstddef>
#include <vector>

namespace scorelab {

/// Gauss-Hermite rule for the weight exp(-u^2) on the real line. Weights are
/// stored as logarithms: for large orders the outer weights underflow double.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> log_weights;

  std::size_t order() const { return nodes.size(); }
};

/// Nodes in ascending order. Throws DomainError for order < 1.
GaussHermiteRule gauss_hermite(std::size_t order);

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(std::size_t order);

}  // namespace scorelab
