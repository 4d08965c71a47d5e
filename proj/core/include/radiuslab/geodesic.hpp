// radius-lab: geodesic flow, exponential map, distances and two-point problems
#pragma once

#include <vector>

#include "radiuslab/manifold.hpp"

namespace radiuslab {

/// Unit-speed initial condition in the descriptor's chart.
struct GeodesicState {
  ChartPoint position{};
  ChartVector velocity{};

  /// Normalizes the direction to unit metric speed. Throws InvalidInput for a
  /// zero direction.
  static GeodesicState unit(const ManifoldDescriptor& m, const ChartPoint& p,
                            const ChartVector& direction);
};

/// Unit-speed direction at p making chart angle `angle` with the outward
/// radial direction (polar charts) or the +x axis (torus). At the pole of a
/// polar chart the geodesic is the radial ray theta = angle.
GeodesicState direction_state(const ManifoldDescriptor& m, const ChartPoint& p,
                              double angle);

struct GeodesicSample {
  double t;
  ChartPoint position;
  ChartVector velocity;
  double curvature;  // K at the sample, cached for Jacobi/Riccati passes
};

/// Arclength-parameterized trajectory. Polar angles and torus coordinates are
/// stored unwrapped for continuity; comparisons wrap.
struct GeodesicPath {
  std::vector<GeodesicSample> samples;
  double total_length = 0.0;
  double step = 0.0;            // effective integration step
  bool left_domain = false;     // truncated at the chart boundary
  double max_speed_drift = 0.0;

  const GeodesicSample& front() const { return samples.front(); }
  const GeodesicSample& back() const { return samples.back(); }
};

struct IntegrationOptions {
  double step = 1e-3;
  double speed_tolerance = 1e-6;
  int max_halvings = 5;
};

/// Fixed-step classical RK4 on the first-order geodesic system. The step is
/// halved until the speed drift tolerance is met (throws StepTooCoarse if it
/// never is). Paths that reach the chart boundary are truncated and flagged.
/// Polar-chart pole crossings are advanced through the constant-curvature cap
/// model; exactly radial geodesics use the radial closed form.
GeodesicPath integrate_geodesic(const ManifoldDescriptor& m,
                                const GeodesicState& init, double length,
                                const IntegrationOptions& opts = {});

/// Endpoint of the geodesic from p with initial tangent v, run for |v|.
/// Throws LeftDomain if the geodesic exits the chart first.
ChartPoint exp_map(const ManifoldDescriptor& m, const ChartPoint& p,
                   const ChartVector& v, double step = 1e-3);

/// Metric speed of a chart state.
double metric_speed(const ManifoldDescriptor& m, const ChartPoint& p,
                    const ChartVector& v);

/// Local-metric norm of the wrapped chart difference; accurate for nearby
/// points, used as a residual/closest-approach proxy.
double chart_distance_proxy(const ManifoldDescriptor& m, const ChartPoint& a,
                            const ChartPoint& b);

struct ShootingOptions {
  int n_starts = 256;
  double residual_tolerance = 1e-6;
  double step = 1e-3;
  double angle_tolerance = 1e-3;  // radians; distinctness of refined angles
  double tie_tolerance = 1e-4;    // length ties counted into multiplicity
  int refine_iterations = 60;
  int budget = 4096;              // max integrations per query
};

struct DistanceResult {
  double length = 0.0;
  bool certified = false;  // shooting residual below tolerance (closed forms: exact)
  double residual = 0.0;
};

/// Distance between chart points. Sphere, flat torus and hyperbolic plane use
/// closed forms; warped surfaces use multistart shooting over the initial
/// angle refined by bisection on the transverse miss. Throws NotConverged if
/// no shot lands within the residual tolerance.
DistanceResult distance(const ManifoldDescriptor& m, const ChartPoint& x,
                        const ChartPoint& y, const ShootingOptions& opts = {});

struct ConnectResult {
  std::vector<GeodesicPath> geodesics;  // sorted by length
  std::vector<double> lengths;
  std::vector<double> initial_angles;
  double minimal_length = kInf;
  int multiplicity = 0;
  bool incomplete = false;  // budget exhausted; partial results
};

/// All distinct geodesics from x to y with length <= max_len found by the
/// family-appropriate method (lattice translates, great-circle arcs, the
/// unique hyperbolic geodesic, or angle multistart + refinement).
ConnectResult connect(const ManifoldDescriptor& m, const ChartPoint& x,
                      const ChartPoint& y, double max_len,
                      const ShootingOptions& opts = {});

struct LoopOptions {
  int n_dirs = 64;
  double step = 1e-3;
  double spatial_tolerance = 1e-4;
  int refine_iterations = 48;
};

/// Length of the shortest nontrivial geodesic loop based at p found by a
/// direction sweep with angle refinement; beyond(horizon) if none returns.
HorizonLength loop_length_at(const ManifoldDescriptor& m, const ChartPoint& p,
                             double horizon, const LoopOptions& opts = {});

struct ClosedGeodesicResult {
  HorizonLength length;
  std::string provenance;
};

/// Shortest nontrivial closed geodesic for the supported families: great
/// circles (sphere), shortest lattice vector (torus), Clairaut equators at
/// interior critical points of f (warped). The hyperbolic plane has none and
/// reports beyond(horizon) with a provenance tag.
ClosedGeodesicResult shortest_closed_geodesic(const ManifoldDescriptor& m,
                                              double horizon = 20.0);

}  // namespace radiuslab
