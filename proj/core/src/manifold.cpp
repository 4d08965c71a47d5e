#include "radiuslab/manifold.hpp"

#include <cmath>
#include <sstream>

namespace radiuslab {

ManifoldDescriptor ManifoldDescriptor::sphere(double radius) {
  if (!(radius > 0.0)) throw InvalidInput("sphere radius must be positive");
  ManifoldDescriptor m;
  m.kind_ = Kind::Sphere;
  m.sphere_radius_ = radius;
  m.profile_ = RadialProfile::sin_form(radius, kPi * radius);
  m.chart_r_max_ = kPi * radius;
  return m;
}

ManifoldDescriptor ManifoldDescriptor::hyperbolic_plane(double curvature,
                                                        double chart_r_max) {
  if (!(curvature < 0.0)) throw InvalidInput("hyperbolic curvature must be negative");
  if (!(chart_r_max > 0.0)) throw InvalidInput("chart r_max must be positive");
  ManifoldDescriptor m;
  m.kind_ = Kind::HyperbolicPlane;
  m.hyperbolic_curvature_ = curvature;
  const double s = 1.0 / std::sqrt(-curvature);
  m.profile_ = RadialProfile::sinh_form(s, chart_r_max);
  m.chart_r_max_ = chart_r_max;
  return m;
}

ManifoldDescriptor ManifoldDescriptor::flat_torus(double l1, double l2) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw InvalidInput("torus side lengths must be positive");
  ManifoldDescriptor m;
  m.kind_ = Kind::FlatTorus;
  m.l1_ = l1;
  m.l2_ = l2;
  return m;
}

ManifoldDescriptor ManifoldDescriptor::warped(RadialProfile profile, double r_max) {
  if (!(r_max > 0.0)) throw InvalidInput("warped r_max must be positive");
  if (r_max > profile.r_max() + 1e-12)
    throw InvalidInput("warped r_max exceeds the profile domain");
  ManifoldDescriptor m;
  m.kind_ = Kind::WarpedSurface;
  m.chart_r_max_ = std::min(r_max, profile.r_max());
  m.profile_ = std::move(profile);
  return m;
}

std::optional<double> ManifoldDescriptor::diameter() const {
  switch (kind_) {
    case Kind::Sphere:
      return kPi * sphere_radius_;
    case Kind::FlatTorus:
      return 0.5 * std::hypot(l1_, l2_);
    default:
      return std::nullopt;
  }
}

std::string ManifoldDescriptor::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Sphere:
      os << "Sphere(radius=" << sphere_radius_ << ")";
      break;
    case Kind::HyperbolicPlane:
      os << "HyperbolicPlane(curvature=" << hyperbolic_curvature_
         << ", chart_r_max=" << chart_r_max_ << ")";
      break;
    case Kind::FlatTorus:
      os << "FlatTorus(" << l1_ << ", " << l2_ << ")";
      break;
    case Kind::WarpedSurface:
      os << "WarpedSurface(r_max=" << chart_r_max_ << ")";
      break;
  }
  return os.str();
}

MetricSample metric_at(const ManifoldDescriptor& m, const ChartPoint& point) {
  MetricSample s;
  s.point = point;
  if (!m.polar_chart()) {
    // flat chart, any point (wrapped into the fundamental domain)
    ChartPoint p = point;
    p[0] = p[0] - m.l1() * std::floor(p[0] / m.l1());
    p[1] = p[1] - m.l2() * std::floor(p[1] / m.l2());
    s.point = p;
    s.metric[0][0] = s.metric[1][1] = 1.0;
    return s;
  }
  const double r = point[0];
  if (r < 0.0 || r >= m.chart_r_max())
    throw PointOutsideDomain("metric_at: r outside [0, r_max)");
  if (r == 0.0)
    throw PoleSingularity("metric_at: theta components degenerate at the pole");
  double f, fp;
  m.profile().eval(r, f, fp);
  s.metric[0][0] = 1.0;
  s.metric[1][1] = f * f;
  s.christoffels[0][1][1] = -f * fp;            // Gamma^r_tt
  s.christoffels[1][0][1] = fp / f;             // Gamma^t_rt
  s.christoffels[1][1][0] = fp / f;
  s.gauss_curvature = m.profile().curvature(r);
  return s;
}

double gauss_curvature_at(const ManifoldDescriptor& m, const ChartPoint& point) {
  if (!m.polar_chart()) return 0.0;
  const double r = point[0];
  if (r < 0.0 || r >= m.chart_r_max() + 1e-12)
    throw PointOutsideDomain("gauss_curvature_at: r outside [0, r_max)");
  return m.profile().curvature(r);
}

RadialProfile build_profile_from_curvature(const CurvatureSpec& spec, double step,
                                           double r_max) {
  return RadialProfile::from_curvature(spec, step, r_max);
}

}  // namespace radiuslab
