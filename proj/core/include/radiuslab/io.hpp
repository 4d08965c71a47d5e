// radius-lab: JSON reports, descriptor files and CSV trace export
//
// Reports serialize deterministically: floating-point values with 12
// significant digits, keys in insertion order, no timestamps in the payload.
#pragma once

#include <iosfwd>
#include <string>

#include "radiuslab/gulliver.hpp"

namespace radiuslab {

/// Parse a manifold descriptor. Accepted kinds: "sphere" {radius},
/// "hyperbolic" {curvature, r_max?}, "torus" {l1, l2}, "warped" {r_max,
/// form+scale or curvature_knots+step}. See docs/manifold_schema.md. Throws
/// InvalidInput naming the failing field.
ManifoldDescriptor parse_manifold_json(const std::string& text);
ManifoldDescriptor load_manifold_file(const std::string& path);

GulliverConfig parse_gulliver_json(const std::string& text);
GulliverConfig load_gulliver_file(const std::string& path);

std::string to_json_string(const RadiusReport& rep);
std::string to_json_string(const CertificationReport& rep);
std::string to_json_string(const RatioBound& rb);
std::string to_json_string(const DirectionScan& scan);
std::string to_json_string(const ConvexityCheck& check, const ChartPoint& center,
                           double radius);
std::string manifold_json(const ManifoldDescriptor& m);

/// CSV with mandatory header: t,r,theta,vr,vtheta (polar) or t,x,y,vx,vy.
void write_path_csv(std::ostream& os, const ManifoldDescriptor& m,
                    const GeodesicPath& path);
/// CSV: t,j,jprime
void write_jacobi_csv(std::ostream& os, const JacobiTrace& trace);
/// CSV: r,f,fprime,K
void write_profile_csv(std::ostream& os, const RadialProfile& profile, double dr);

}  // namespace radiuslab
