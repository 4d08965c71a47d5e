// radius-lab: scalar Jacobi equation along geodesics; conjugate/focal times
//
// In dimension two a normal Jacobi field is J = j E for a parallel unit
// normal E, so ||J|| = |j| and, while j > 0, ||J||' = j'. The scalar equation
// is j'' + K(gamma(t)) j = 0.
#pragma once

#include "radiuslab/geodesic.hpp"

namespace radiuslab {

struct JacobiSample {
  double t;
  double j, jp;    // primary solution
  double j2, j2p;  // companion solution for the Wronskian check
};

struct JacobiTrace {
  std::vector<JacobiSample> samples;
  HorizonLength first_conjugate;
  HorizonLength first_focal;
  std::vector<double> conjugate_times;  // refined zeros of j in (0, horizon]
  std::vector<double> focal_times;      // refined zeros of j' before t_conj
  double horizon = 0.0;
  double wronskian_drift = 0.0;
  bool tangency_flagged = false;  // |j| and |j'| simultaneously ~ 0 at a zero
};

/// Co-integrates gamma and (j, j') as one system (curvature evaluated at the
/// current geodesic point) with the primary initial condition (j0, j0p) and
/// the companion (1, 0) for the Wronskian. Zeros are refined to 1e-8 in t.
/// Throws StepTooCoarse if the Wronskian drifts by more than 1e-6.
JacobiTrace integrate_jacobi(const ManifoldDescriptor& m, const GeodesicPath& path,
                             double j0, double j0p);

/// First zero of j in (0, horizon] for the normalized solution j(0)=0,
/// j'(0)=1; beyond(path length) if none.
HorizonLength first_conjugate_time(const ManifoldDescriptor& m,
                                   const GeodesicPath& path);

/// First zero of j' before the first conjugate time, normalized solution.
HorizonLength first_focal_time(const ManifoldDescriptor& m,
                               const GeodesicPath& path);

struct RiccatiCertificate {
  bool no_blowdown = false;
  double min_u = kInf;          // most negative slope u = j'/j seen
  double margin = kInf;         // min_u minus the detector threshold
  double threshold = -2.0;
  std::optional<double> blowdown_time;
  double final_u = kInf;        // u at the end of the path (tail analysis)
};

/// Independent no-conjugate-point detector: solves the Riccati equation
/// u' = -K - u^2 in the regularized phase form (u = cot(phi),
/// phi' = cos^2 + K sin^2), which passes through u = +/-inf without
/// stiffness. u0 = +infinity encodes j(0) = 0. Blow-down of u to -infinity
/// (phi reaching pi) marks a conjugate point; reported with its location.
RiccatiCertificate riccati_certify(const ManifoldDescriptor& m,
                                   const GeodesicPath& path, double u0);

}  // namespace radiuslab
