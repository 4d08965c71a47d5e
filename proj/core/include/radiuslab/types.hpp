// radius-lab: shared value types and error hierarchy
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace radiuslab {

using ChartPoint = std::array<double, 2>;
using ChartVector = std::array<double, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
  using Error::Error;
};

/// Requested point lies outside the chart domain (e.g. r >= r_max).
class PointOutsideDomain : public Error {
public:
  using Error::Error;
};

/// A theta-dependent quantity was requested exactly at the pole r = 0 of a
/// polar chart; radial quantities (curvature) remain available elsewhere.
class PoleSingularity : public Error {
public:
  using Error::Error;
};

/// The warp function f reached zero before the requested domain end. Signals
/// that the requested curvature produces a conjugate pole inside the domain.
class ProfileCollapse : public Error {
public:
  explicit ProfileCollapse(double radius)
      : Error("profile collapses at r = " + std::to_string(radius)),
        collapse_radius(radius) {}
  double collapse_radius;
};

/// A geodesic exited a bounded chart at arclength exit_time.
class LeftDomain : public Error {
public:
  explicit LeftDomain(double t)
      : Error("geodesic left the chart at t = " + std::to_string(t)),
        exit_time(t) {}
  double exit_time;
};

class StepTooCoarse : public Error {
public:
  using Error::Error;
};

class NotConverged : public Error {
public:
  using Error::Error;
};

class BudgetExhausted : public Error {
public:
  using Error::Error;
};

class UnsupportedFamily : public Error {
public:
  using Error::Error;
};

/// Length-valued result that may exceed a finite scan horizon. "Infinite"
/// always means "no event found within the stated horizon"; no claim of true
/// infinity is ever made.
class HorizonLength {
public:
  HorizonLength() = default;

  static HorizonLength finite(double value, double horizon) {
    HorizonLength h;
    h.finite_ = true;
    h.value_ = value;
    h.horizon_ = horizon;
    return h;
  }
  static HorizonLength beyond(double horizon) {
    HorizonLength h;
    h.finite_ = false;
    h.value_ = kInf;
    h.horizon_ = horizon;
    return h;
  }

  bool is_finite() const { return finite_; }
  /// Finite value, or +infinity when the event lies beyond the horizon.
  double as_double() const { return finite_ ? value_ : kInf; }
  double value() const { return value_; }
  double horizon() const { return horizon_; }

  friend HorizonLength min(const HorizonLength& a, const HorizonLength& b) {
    if (a.finite_ && b.finite_)
      return finite(std::min(a.value_, b.value_), std::min(a.horizon_, b.horizon_));
    if (a.finite_) return a;
    if (b.finite_) return b;
    return beyond(std::min(a.horizon_, b.horizon_));
  }

private:
  bool finite_ = false;
  double value_ = kInf;
  double horizon_ = 0.0;
};

inline double wrap_angle(double a) {
  // wrap to (-pi, pi]
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

}  // namespace radiuslab
