// radius-lab: warp profiles f(r) for rotationally symmetric metrics
//
// A profile defines the metric dr^2 + f(r)^2 dtheta^2 on [0, r_max) with
// Gaussian curvature K = -f''/f. Smooth pole condition: f(0) = 0, f'(0) = 1.
#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "radiuslab/types.hpp"

namespace radiuslab {

struct CurvatureKnot {
  double r;
  double k;
};

/// Piecewise curvature K(r) through knots, interpolated by monotone cubics
/// (Fritsch-Carlson), so values never overshoot the knot range. Constant
/// extrapolation outside the knot span.
class CurvatureSpec {
public:
  explicit CurvatureSpec(std::vector<CurvatureKnot> knots);

  double operator()(double r) const;
  const std::vector<CurvatureKnot>& knots() const { return knots_; }
  double k_min() const { return k_min_; }
  double k_max() const { return k_max_; }

  /// Radius of the leading constant-curvature run starting at r = 0
  /// (0 when the first two knots already differ).
  double constant_prefix_radius() const;

private:
  std::vector<CurvatureKnot> knots_;
  std::vector<double> slope_;
  double k_min_ = 0.0, k_max_ = 0.0;
};

/// Constant-curvature disk around the pole; geodesics crossing it admit an
/// exact model (sphere / plane / hyperboloid).
struct PoleCap {
  double curvature;
  double radius;
};

class RadialProfile {
public:
  enum class Form { Sin, Sinh, Identity, Tabulated };

  RadialProfile() = default;

  /// f = scale * sin(r / scale); requires r_max <= pi * scale. When r_max is
  /// exactly pi * scale the domain closes smoothly at a far pole (sphere).
  static RadialProfile sin_form(double scale, double r_max);
  /// f = scale * sinh(r / scale)
  static RadialProfile sinh_form(double scale, double r_max);
  /// f = r (flat)
  static RadialProfile identity_form(double r_max);
  /// Solves f'' = -K(r) f, f(0) = 0, f'(0) = 1 with fixed-step RK4 and
  /// tabulates (f, f'). Throws ProfileCollapse if f reaches zero before r_max.
  static RadialProfile from_curvature(const CurvatureSpec& spec, double step,
                                      double r_max);
  /// Same, but truncates r_max at the first zero of f instead of throwing.
  static RadialProfile from_curvature_truncated(const CurvatureSpec& spec,
                                                double step, double r_max);

  double f(double r) const;
  double fp(double r) const;
  double fpp(double r) const;
  /// Gaussian curvature -f''/f; finite at the pole.
  double curvature(double r) const;
  void eval(double r, double& f_out, double& fp_out) const;  // hot path

  double r_max() const;
  Form form() const;
  double scale() const;
  double step() const;  // tabulation step; 0 for closed forms
  std::optional<PoleCap> pole_cap() const;
  bool has_far_pole() const;
  const CurvatureSpec* curvature_spec() const;  // tabulated profiles only

  struct Data;  // implementation detail, defined in profile.cpp

private:
  std::shared_ptr<const Data> data_;
};

}  // namespace radiuslab
