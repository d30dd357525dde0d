#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace scorelab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain (negative time, alpha2 >= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an API contract (mismatched clocks, wrong target kind).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Operation is not defined for the given target kind.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Requested time lies beyond the validity horizon of a bound.
class HorizonError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine produced non-finite output or lost all mass.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// log(sum(exp(v))) with max-shift. Returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

/// Largest and smallest eigenvalue of a symmetric matrix.
struct EigenRange {
  double min = 0.0;
  double max = 0.0;
};
EigenRange symmetric_eigen_range(const Mat& m);

/// Float formatting used by every CSV writer: scientific, 17 significant digits.
std::string fmt17(double v);

/// Spectral norm of a symmetric matrix.
double spectral_norm_symmetric(const Mat& m);

// Worker count used by the parallel loops. 0 selects the default, which is
// SCORE_LAB_THREADS when set and the hardware concurrency otherwise.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n) across the worker pool. Exceptions thrown by
/// any iteration are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace scorelab
