// radius-lab: internal integration engine shared by geodesic and jacobi
#pragma once

#include <array>
#include <vector>

#include "radiuslab/geodesic.hpp"

namespace radiuslab::detail {

struct JacobiInit {
  double j0 = 0.0, j0p = 1.0;    // primary solution
  double j20 = 1.0, j20p = 0.0;  // companion for the Wronskian check
};

struct CoIntegrated {
  GeodesicPath path;
  // (j, j', j2, j2') co-located with path.samples; empty when not requested
  std::vector<std::array<double, 4>> jacobi;
};

/// Core fixed-step integrator. When `jacobi` is non-null the scalar Jacobi
/// pair is advanced through the same RK4 stages (constant-curvature pole
/// transits use the exact propagator).
CoIntegrated integrate_core(const ManifoldDescriptor& m, const GeodesicState& init,
                            double length, const IntegrationOptions& opts,
                            const JacobiInit* jacobi);

struct ClosestApproach {
  double t = 0.0;
  double proxy = 0.0;  // chart-metric distance at the refined time
  double side = 0.0;   // sign of the transverse miss
};

/// Quadratic refinement (in t) of a local minimum of the distance-to-target
/// proxy around sample index i.
ClosestApproach closest_refined(const ManifoldDescriptor& m, const GeodesicPath& path,
                                std::size_t i, const ChartPoint& target);

/// Chart position at arclength t, linearly interpolated between samples.
ChartPoint position_at(const GeodesicPath& path, double t);

}  // namespace radiuslab::detail
