// radius-lab: geodesic radii, min-formulas and brute-force convexity oracles
#pragma once

#include <cstdint>

#include "radiuslab/jacobi.hpp"
#include "radiuslab/rng.hpp"

namespace radiuslab {

struct CutOptions {
  bool enabled = true;
  double coarse_stride = 0.05;   // arclength between distance probes
  double tolerance = 1e-4;       // d(p, gamma(t)) = t within this
  double horizon = 0.0;          // 0: scan horizon
  int refine_iterations = 30;    // continuous bisection after the index bracket
  ShootingOptions shooting;      // used by the warped distance oracle
};

struct ScanOptions {
  int n_dirs = 64;
  double horizon = 0.0;  // 0: family default (4x diameter, else 20)
  double step = 1e-3;
  CutOptions cut;
};

struct DirectionEntry {
  double angle;
  HorizonLength conjugate_time;
  HorizonLength focal_time;
  HorizonLength cut_time;
  HorizonLength loop_time;
  double wronskian_drift = 0.0;
};

struct DirectionScan {
  ChartPoint base_point{};
  double horizon = 0.0;
  std::vector<DirectionEntry> directions;
  bool pole_symmetric = false;  // base at a polar-chart pole: one direction scanned
};

/// Per-direction conjugate/focal/cut/loop times around p. The cut detector
/// marches t -> d(p, gamma(t)) with the family distance oracle and brackets
/// sup{t : d = t within tolerance}.
DirectionScan scan_point(const ManifoldDescriptor& m, const ChartPoint& p,
                         const ScanOptions& opts = {});

/// Min over scanned directions, refined near the minimizer by golden-section
/// on the angle.
HorizonLength conjugate_radius_at(const ManifoldDescriptor& m, const ChartPoint& p,
                                  const ScanOptions& opts = {});
HorizonLength focal_radius_at(const ManifoldDescriptor& m, const ChartPoint& p,
                              const ScanOptions& opts = {});

struct InjectivityRadius {
  HorizonLength formula;  // min{ r_c(p), loop(p)/2 }
  HorizonLength oracle;   // min over directions of the cut time
};
InjectivityRadius injectivity_radius_at(const ManifoldDescriptor& m,
                                        const ChartPoint& p,
                                        const ScanOptions& opts = {});

struct ConvexityWitness {
  ChartPoint center{};
  double radius = 0.0;
  ChartPoint x{}, y{};
  enum class Mode { NonUnique, LeavesBall, NoGeodesicFound } mode = Mode::NonUnique;
  double minimal_length = 0.0;
  double max_center_distance = 0.0;  // for LeavesBall
  std::vector<GeodesicPath> offending;
};

struct ConvexityCheckOptions {
  std::uint64_t seed = 42;
  double margin = 0.1;               // connect search max_len = 2s + margin
  double containment_tolerance = 1e-4;
  int budget = 1 << 22;              // integration budget across all pairs
  ShootingOptions shooting;
  int escalation_rounds = 1;         // extra rounds with 4x pairs when no witness
};

struct ConvexityCheck {
  enum class Status { Convex, Witness, Incomplete } status = Status::Convex;
  std::optional<ConvexityWitness> witness;
  int pairs_checked = 0;
  std::uint64_t seed = 0;
};

/// Samples n_pairs point pairs from B(p, s) (uniform in geodesic polar
/// coordinates, stratified toward the boundary shell [0.9 s, s]), connects
/// each pair with max_len = 2s + margin and reports the first witness where
/// the minimal geodesic is non-unique or leaves the ball. Seeded and
/// reproducible.
ConvexityCheck is_strongly_convex(const ManifoldDescriptor& m, const ChartPoint& p,
                                  double s, int n_pairs,
                                  const ConvexityCheckOptions& opts = {});

struct ConvexityRadiusResult {
  HorizonLength formula;  // min{ r_f(M), l_c(M)/4 }
  double oracle_low = 0.0;
  double oracle_high = 0.0;
  double oracle() const { return 0.5 * (oracle_low + oracle_high); }
  ChartPoint worst_point{};
  bool witness_at_top = false;  // bisection bracket is genuine
};

/// Minimum second difference of t -> d^2(p, sigma(t)) over n_geodesics random
/// unit-speed geodesics through random points of B(p, R), spacing 1e-3.
/// Strict convexity holds when the returned minimum is positive.
double hessian_check(const ManifoldDescriptor& m, const ChartPoint& p, double R,
                     int n_geodesics, std::uint64_t seed = 42,
                     double spacing = 1e-3);

struct RadiiConfig {
  int n_dirs = 64;
  double horizon = 0.0;       // 0: family default
  double step = 1e-3;
  std::uint64_t seed = 42;
  int stations = 16;          // radial scan stations on warped surfaces
  int n_pairs = 1000;
  int bisection_depth = 12;
  bool with_convexity_oracle = true;
  bool with_cut_oracle = true;
  bool with_hessian = true;
  int hessian_geodesics = 200;
  double oracle_step = 0.0;     // 0: step (warped oracles may use a coarser one)
  double bracket_margin = 0.5;  // oracle bracket top: min{inj, horizon, r_f + margin}
  CutOptions cut;
};

struct PointRadii {
  ChartPoint point{};
  HorizonLength conjugate;   // r_c(p)
  HorizonLength focal;       // r_f(p)
  HorizonLength loop;        // l(p)
  HorizonLength inj_formula; // min{ r_c(p), l(p)/2 }
  HorizonLength inj_oracle;  // cut-time oracle
};

struct CheckRecord {
  std::string name;
  bool passed = false;
  double margin = 0.0;
  std::string detail;
};

struct RadiusReport {
  std::string manifold;
  RadiiConfig config;
  double horizon = 0.0;

  std::vector<PointRadii> points;

  HorizonLength conjugate_radius;      // r_c(M)
  HorizonLength focal_radius;          // r_f(M)
  HorizonLength loop_length;           // l(M) over scanned points
  HorizonLength closed_geodesic;       // l_c(M)
  std::string closed_geodesic_provenance;
  HorizonLength inj_formula;           // min{ r_c(M), l_c(M)/2 } (compact families)
  HorizonLength inj_oracle;
  HorizonLength convexity_formula;     // min{ r_f(M), l_c(M)/4 }
  std::optional<ConvexityRadiusResult> convexity_oracle;
  std::optional<double> hessian_minimum;

  std::vector<CheckRecord> checks;
  std::vector<std::string> errors;  // embedded sub-errors, field-tagged
};

ConvexityRadiusResult convexity_radius(const ManifoldDescriptor& m,
                                       const RadiiConfig& cfg);

/// Full report: per-point and manifold-level radii, formula values, oracle
/// values and the recorded margins of every cross-check.
RadiusReport assemble_report(const ManifoldDescriptor& m, const RadiiConfig& cfg);

/// Family default horizon: 4x diameter when finite, else 20.
double default_horizon(const ManifoldDescriptor& m);

/// Scan points realizing manifold-level infima: one point for homogeneous
/// families, pole plus radial stations for warped surfaces.
std::vector<ChartPoint> scan_points(const ManifoldDescriptor& m, int stations);

}  // namespace radiuslab
