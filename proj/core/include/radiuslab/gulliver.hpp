// radius-lab: warped caps with focal points but no conjugate points
//
// Builds profiles whose curvature is +1 on a spherical cap, interpolates
// monotonically down to -1 across an annulus ending at the ball radius R, and
// stays -1 beyond. Certification sweeps geodesics, runs the Riccati
// no-blow-down detector to the horizon and searches for focal points whose
// base and focal point lie inside the closed R-ball.
#pragma once

#include <cstdint>
#include <string>

#include "radiuslab/radii.hpp"

namespace radiuslab {

struct GulliverConfig {
  double cap_radius = 0.55;      // curvature +1 on [0, cap_radius]
  double transition_end = 1.7;   // R: curvature reaches -1 here; also the ball radius
  double r_max = 8.0;            // chart domain end (hyperbolic continuation)
  std::string transition_shape = "fastdrop6";
  std::vector<CurvatureKnot> transition_knots;  // generated from the shape when empty
  double profile_step = 1e-4;
  int n_geodesics = 1024;
  double horizon = 20.0;
  double step = 1e-3;

  double ball_radius() const { return transition_end; }

  /// Default accepted by the built-in parameter search (see
  /// find_default_config); regenerating the search reproduces it.
  static GulliverConfig pinned_default();

  /// Monotone knots from +1 at cap to -1 at end. Shapes: "cosine", "linear",
  /// "fastdrop2" / "fastdrop4" / "fastdrop6" / "fastdrop8"
  /// (K = 2 (1-x)^p - 1, dropping quickly and lingering near -1).
  static std::vector<CurvatureKnot> shape_knots(const std::string& shape, double cap,
                                                double end, int n_knots = 17);

  void validate() const;
};

/// Profile from the config's curvature spec: exactly sin on the cap, monotone
/// K across the transition, K = -1 beyond. Throws ProfileCollapse when the
/// cap is too large for the domain.
RadialProfile build_gulliver(const GulliverConfig& config);

struct FocalHit {
  double time = kInf;
  double start_radius = 0.0;
  double start_angle = 0.0;  // from the inward radial direction
  double focal_radius = 0.0;
};

struct CertificationReport {
  GulliverConfig config;

  bool no_conjugate = false;
  int geodesic_count = 0;
  int truncated_count = 0;       // reached r_max before the horizon
  int riccati_disagreements = 0; // Riccati vs Jacobi zero-detector mismatches
  double min_u = kInf;           // most negative Jacobi slope across the sweep
  double riccati_margin = kInf;  // min_u minus the blow-down threshold (-2)
  std::optional<double> first_blowdown_time;

  bool focal_found = false;
  std::optional<FocalHit> best_focal;
  std::optional<double> r_f_ball;  // min focal time with base+focal in the ball

  std::optional<double> diameter;  // of (B_R, h|_B_R), boundary-pair shooting
  double diameter_bound = 0.0;     // 2R comparison bound

  // step-halving / sweep-doubling stability (relative changes)
  std::optional<double> r_f_ball_step_change;
  std::optional<double> diameter_step_change;
  std::optional<double> r_f_ball_density_change;
};

struct CertifyOptions {
  bool with_stability = true;
  bool with_diameter = true;
};

/// Certification sweep for "focal points but no conjugate points" on the
/// warped surface built from `config`. Geodesics are parameterized by start
/// radius in [0, r_max - eps] and start angle in [0, pi/2] from the inward
/// radial direction (rotational + reflection symmetry covers the rest).
/// Geodesics that exit into the constant-curvature -1 tail are certified to
/// infinity analytically from the exit slope.
CertificationReport certify(const ManifoldDescriptor& m, const GulliverConfig& config,
                            const CertifyOptions& opts = {});

struct RatioBound {
  double R = 0.0;
  double D = 0.0;
  double inj_g = 0.0;
  double systole_g = 0.0;        // 2 inj(M, g), symbolic stand-in
  double epsilon = 0.0;
  double required_inj_g = 0.0;   // max{ 2R, D/eps + R }
  double inj_h_lower = 0.0;      // inj_g - R
  double ratio_upper = 0.0;      // D / (inj_g - R)
  bool meets_requirement = false;
};

/// Arithmetic of the ratio mechanism: required_inj_g = max{2R, D/eps + R},
/// inj_h_lower = inj_g - R, ratio_upper = D / inj_h_lower (< eps whenever
/// inj_g clears the requirement). Throws InvalidInput when inj_g <= R.
RatioBound ratio_bound(double R, double D, double inj_g, double epsilon);

struct SearchOptions {
  std::vector<double> cap_grid;          // empty: spec grid then extension
  std::vector<std::string> shapes;       // empty: built-in order
  int search_geodesics = 192;
  double search_step = 2e-3;
  double min_u_accept = -0.70;           // search-budget margin gate
  double min_u_full = -0.95;             // full-budget gate
  std::string cache_file;                // optional verdict cache
  GulliverConfig base;                   // budget for the full validation
};

struct SearchCandidate {
  GulliverConfig config;
  bool ok = false;
  std::string reason;
  double min_u = kInf;
  double best_focal = kInf;
};

struct SearchResult {
  GulliverConfig config;          // accepted, at full budget
  CertificationReport report;
  std::vector<SearchCandidate> tried;
};

/// Grid search: transition shapes x descending cap radii, guarded by analytic
/// prechecks (positive-curvature crossing length and worst-entry blow-down
/// budget), accepting the first config certified with margin and re-validated
/// at full budget.
std::optional<SearchResult> find_default_config(const SearchOptions& opts = {});

}  // namespace radiuslab
