// radius-lab: supported manifold families, metric data, curvature
#pragma once

#include <string>

#include "radiuslab/profile.hpp"
#include "radiuslab/types.hpp"

namespace radiuslab {

/// Metric data at one chart point.
struct MetricSample {
  ChartPoint point{};
  double metric[2][2]{};        // g_ij, symmetric positive definite
  double christoffels[2][2][2]{};  // Gamma^k_ij indexed [k][i][j]
  double gauss_curvature = 0.0;
};

/// Immutable description of a 2D manifold. Sphere, hyperbolic plane and
/// warped surfaces share a geodesic polar chart (r, theta); the flat torus
/// uses the planar chart (x, y) with periods (l1, l2).
class ManifoldDescriptor {
public:
  enum class Kind { Sphere, HyperbolicPlane, FlatTorus, WarpedSurface };

  static ManifoldDescriptor sphere(double radius);
  static ManifoldDescriptor hyperbolic_plane(double curvature,
                                             double chart_r_max = 20.0);
  static ManifoldDescriptor flat_torus(double l1, double l2);
  static ManifoldDescriptor warped(RadialProfile profile, double r_max);

  Kind kind() const { return kind_; }
  bool polar_chart() const { return kind_ != Kind::FlatTorus; }
  const RadialProfile& profile() const { return profile_; }
  double chart_r_max() const { return chart_r_max_; }

  double sphere_radius() const { return sphere_radius_; }
  double hyperbolic_curvature() const { return hyperbolic_curvature_; }
  double l1() const { return l1_; }
  double l2() const { return l2_; }

  /// Diameter when finite (sphere, torus); used for horizon defaults.
  std::optional<double> diameter() const;
  std::string describe() const;

private:
  Kind kind_ = Kind::FlatTorus;
  RadialProfile profile_;
  double chart_r_max_ = 0.0;
  double sphere_radius_ = 0.0;
  double hyperbolic_curvature_ = 0.0;
  double l1_ = 0.0, l2_ = 0.0;
};

/// Metric, Christoffel symbols and Gaussian curvature at a chart point.
/// Throws PointOutsideDomain beyond the chart and PoleSingularity exactly at
/// the pole of a polar chart (where theta-components degenerate).
MetricSample metric_at(const ManifoldDescriptor& m, const ChartPoint& point);

/// Curvature only; well-defined at the pole.
double gauss_curvature_at(const ManifoldDescriptor& m, const ChartPoint& point);

/// Solves f'' = -K(r) f and returns the tabulated profile (see
/// RadialProfile::from_curvature).
RadialProfile build_profile_from_curvature(const CurvatureSpec& spec, double step,
                                           double r_max);

}  // namespace radiuslab
