#include "radiuslab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json_io.hpp"

namespace radiuslab {
namespace detail {

namespace {

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  std::string s(buf);
  // keep valid JSON and make the value recognizably floating point
  if (s.find_first_of(".eE") == std::string::npos &&
      s.find_first_of("in") == std::string::npos)
    s += ".0";
  return s;
}

void write_value(const ordered_json& j, std::string& out, int indent) {
  const std::string pad(2 * indent, ' ');
  const std::string pad_in(2 * (indent + 1), ' ');
  switch (j.type()) {
    case nlohmann::detail::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        out += ordered_json(it.key()).dump();
        out += ": ";
        write_value(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::detail::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        write_value(el, out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::detail::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

double require_number(const ordered_json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number())
    throw InvalidInput("manifold descriptor: missing or non-numeric field '" + field +
                       "'");
  return j[field].get<double>();
}

}  // namespace

std::string write_json(const ordered_json& j) {
  std::string out;
  write_value(j, out, 0);
  out += "\n";
  return out;
}

ordered_json horizon_json(const HorizonLength& h) {
  ordered_json j;
  if (h.is_finite()) {
    j["kind"] = "finite";
    j["value"] = h.value();
  } else {
    j["kind"] = "beyond_horizon";
  }
  j["horizon"] = h.horizon();
  return j;
}

ordered_json manifold_to_json(const ManifoldDescriptor& m) {
  ordered_json j;
  switch (m.kind()) {
    case ManifoldDescriptor::Kind::Sphere:
      j["kind"] = "sphere";
      j["radius"] = m.sphere_radius();
      break;
    case ManifoldDescriptor::Kind::HyperbolicPlane:
      j["kind"] = "hyperbolic";
      j["curvature"] = m.hyperbolic_curvature();
      j["r_max"] = m.chart_r_max();
      break;
    case ManifoldDescriptor::Kind::FlatTorus:
      j["kind"] = "torus";
      j["l1"] = m.l1();
      j["l2"] = m.l2();
      break;
    case ManifoldDescriptor::Kind::WarpedSurface: {
      j["kind"] = "warped";
      j["r_max"] = m.chart_r_max();
      const RadialProfile& p = m.profile();
      switch (p.form()) {
        case RadialProfile::Form::Sin:
          j["form"] = "sin";
          j["scale"] = p.scale();
          break;
        case RadialProfile::Form::Sinh:
          j["form"] = "sinh";
          j["scale"] = p.scale();
          break;
        case RadialProfile::Form::Identity:
          j["form"] = "identity";
          break;
        case RadialProfile::Form::Tabulated: {
          ordered_json knots = ordered_json::array();
          for (const auto& k : p.curvature_spec()->knots())
            knots.push_back(ordered_json::array({k.r, k.k}));
          j["curvature_knots"] = knots;
          j["step"] = p.step();
          break;
        }
      }
      break;
    }
  }
  return j;
}

ManifoldDescriptor manifold_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw InvalidInput("manifold descriptor: missing string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "sphere") return ManifoldDescriptor::sphere(require_number(j, "radius"));
  if (kind == "hyperbolic" || kind == "hyperbolic_plane") {
    const double k = require_number(j, "curvature");
    const double rmax = j.contains("r_max") ? require_number(j, "r_max") : 20.0;
    return ManifoldDescriptor::hyperbolic_plane(k, rmax);
  }
  if (kind == "torus" || kind == "flat_torus")
    return ManifoldDescriptor::flat_torus(require_number(j, "l1"),
                                          require_number(j, "l2"));
  if (kind == "warped") {
    const double rmax = require_number(j, "r_max");
    if (j.contains("curvature_knots")) {
      if (!j["curvature_knots"].is_array())
        throw InvalidInput("manifold descriptor: 'curvature_knots' must be [[r,K],...]");
      std::vector<CurvatureKnot> knots;
      for (const auto& el : j["curvature_knots"]) {
        if (!el.is_array() || el.size() != 2 || !el[0].is_number() ||
            !el[1].is_number())
          throw InvalidInput("manifold descriptor: 'curvature_knots' entries must be [r, K]");
        knots.push_back({el[0].get<double>(), el[1].get<double>()});
      }
      const double step = j.contains("step") ? require_number(j, "step") : 1e-4;
      return ManifoldDescriptor::warped(
          RadialProfile::from_curvature(CurvatureSpec(std::move(knots)), step, rmax),
          rmax);
    }
    if (!j.contains("form") || !j["form"].is_string())
      throw InvalidInput("manifold descriptor: warped needs 'form' or 'curvature_knots'");
    const std::string form = j["form"].get<std::string>();
    const double scale = j.contains("scale") ? require_number(j, "scale") : 1.0;
    if (form == "sin")
      return ManifoldDescriptor::warped(
          RadialProfile::sin_form(scale, std::min(rmax, kPi * scale)), rmax);
    if (form == "sinh")
      return ManifoldDescriptor::warped(RadialProfile::sinh_form(scale, rmax), rmax);
    if (form == "identity")
      return ManifoldDescriptor::warped(RadialProfile::identity_form(rmax), rmax);
    throw InvalidInput("manifold descriptor: unknown warped form '" + form + "'");
  }
  throw InvalidInput("manifold descriptor: unknown kind '" + kind + "'");
}

ordered_json gulliver_config_json(const GulliverConfig& cfg) {
  ordered_json j;
  j["cap_radius"] = cfg.cap_radius;
  j["transition_end"] = cfg.transition_end;
  j["r_ball"] = cfg.ball_radius();
  j["r_max"] = cfg.r_max;
  j["transition_shape"] = cfg.transition_shape;
  ordered_json knots = ordered_json::array();
  const auto kn = cfg.transition_knots.empty()
                      ? GulliverConfig::shape_knots(cfg.transition_shape,
                                                    cfg.cap_radius, cfg.transition_end)
                      : cfg.transition_knots;
  for (const auto& k : kn) knots.push_back(ordered_json::array({k.r, k.k}));
  j["transition_knots"] = knots;
  j["profile_step"] = cfg.profile_step;
  j["n_geodesics"] = cfg.n_geodesics;
  j["horizon"] = cfg.horizon;
  j["step"] = cfg.step;
  return j;
}

GulliverConfig gulliver_from_json(const ordered_json& j) {
  GulliverConfig cfg;
  if (!j.is_object()) throw InvalidInput("gulliver config: expected an object");
  if (j.contains("cap_radius")) cfg.cap_radius = require_number(j, "cap_radius");
  if (j.contains("transition_end"))
    cfg.transition_end = require_number(j, "transition_end");
  if (j.contains("r_max")) cfg.r_max = require_number(j, "r_max");
  if (j.contains("transition_shape"))
    cfg.transition_shape = j["transition_shape"].get<std::string>();
  if (j.contains("transition_knots")) {
    for (const auto& el : j["transition_knots"]) {
      if (!el.is_array() || el.size() != 2)
        throw InvalidInput("gulliver config: 'transition_knots' entries must be [r, K]");
      cfg.transition_knots.push_back({el[0].get<double>(), el[1].get<double>()});
    }
  }
  if (j.contains("profile_step")) cfg.profile_step = require_number(j, "profile_step");
  if (j.contains("n_geodesics"))
    cfg.n_geodesics = static_cast<int>(require_number(j, "n_geodesics"));
  if (j.contains("horizon")) cfg.horizon = require_number(j, "horizon");
  if (j.contains("step")) cfg.step = require_number(j, "step");
  cfg.validate();
  return cfg;
}

namespace {

ordered_json point_json(const ChartPoint& p) {
  return ordered_json::array({p[0], p[1]});
}

ordered_json polyline_json(const GeodesicPath& path, std::size_t max_points = 256) {
  ordered_json arr = ordered_json::array();
  const std::size_t n = path.samples.size();
  const std::size_t stride = std::max<std::size_t>(1, n / max_points);
  for (std::size_t i = 0; i < n; i += stride)
    arr.push_back(ordered_json::array(
        {path.samples[i].t, path.samples[i].position[0], path.samples[i].position[1]}));
  if ((n - 1) % stride != 0)
    arr.push_back(ordered_json::array(
        {path.samples[n - 1].t, path.samples[n - 1].position[0],
         path.samples[n - 1].position[1]}));
  return arr;
}

ordered_json witness_json(const ConvexityWitness& w) {
  ordered_json j;
  j["center"] = point_json(w.center);
  j["radius"] = w.radius;
  j["x"] = point_json(w.x);
  j["y"] = point_json(w.y);
  switch (w.mode) {
    case ConvexityWitness::Mode::NonUnique:
      j["mode"] = "non_unique";
      break;
    case ConvexityWitness::Mode::LeavesBall:
      j["mode"] = "leaves_ball";
      break;
    case ConvexityWitness::Mode::NoGeodesicFound:
      j["mode"] = "no_geodesic_found";
      break;
  }
  j["minimal_length"] = w.minimal_length;
  if (w.mode == ConvexityWitness::Mode::LeavesBall)
    j["max_center_distance"] = w.max_center_distance;
  ordered_json arr = ordered_json::array();
  for (const auto& g : w.offending) arr.push_back(polyline_json(g));
  j["offending_geodesics"] = arr;
  return j;
}

ordered_json radii_config_json(const RadiiConfig& cfg, double horizon) {
  ordered_json j;
  j["n_dirs"] = cfg.n_dirs;
  j["horizon"] = horizon;
  j["step"] = cfg.step;
  j["seed"] = cfg.seed;
  j["stations"] = cfg.stations;
  j["n_pairs"] = cfg.n_pairs;
  j["bisection_depth"] = cfg.bisection_depth;
  j["with_convexity_oracle"] = cfg.with_convexity_oracle;
  j["with_cut_oracle"] = cfg.with_cut_oracle;
  j["with_hessian"] = cfg.with_hessian;
  j["hessian_geodesics"] = cfg.hessian_geodesics;
  j["oracle_step"] = cfg.oracle_step > 0 ? cfg.oracle_step : cfg.step;
  return j;
}

}  // namespace

ordered_json scan_json(const DirectionScan& scan) {
  ordered_json j;
  j["base_point"] = point_json(scan.base_point);
  j["horizon"] = scan.horizon;
  j["pole_symmetric"] = scan.pole_symmetric;
  ordered_json dirs = ordered_json::array();
  for (const auto& d : scan.directions) {
    ordered_json e;
    e["angle"] = d.angle;
    e["conjugate_time"] = horizon_json(d.conjugate_time);
    e["focal_time"] = horizon_json(d.focal_time);
    e["cut_time"] = horizon_json(d.cut_time);
    e["loop_time"] = horizon_json(d.loop_time);
    dirs.push_back(e);
  }
  j["directions"] = dirs;
  return j;
}

ordered_json convexity_json(const ConvexityCheck& check, const ChartPoint& center,
                            double radius) {
  ordered_json j;
  j["center"] = point_json(center);
  j["radius"] = radius;
  switch (check.status) {
    case ConvexityCheck::Status::Convex:
      j["status"] = "convex";
      break;
    case ConvexityCheck::Status::Witness:
      j["status"] = "witness";
      break;
    case ConvexityCheck::Status::Incomplete:
      j["status"] = "incomplete (no witness found)";
      break;
  }
  j["pairs_checked"] = check.pairs_checked;
  j["seed"] = check.seed;
  if (check.witness) j["witness"] = witness_json(*check.witness);
  return j;
}

ordered_json report_json(const RadiusReport& rep) {
  ordered_json j;
  j["manifold"] = rep.manifold;
  j["units"] = "manifold length units";
  j["horizon"] = rep.horizon;
  j["config"] = radii_config_json(rep.config, rep.horizon);

  ordered_json pts = ordered_json::array();
  for (const auto& p : rep.points) {
    ordered_json e;
    e["point"] = point_json(p.point);
    e["conjugate_radius"] = horizon_json(p.conjugate);
    e["focal_radius"] = horizon_json(p.focal);
    e["loop_length"] = horizon_json(p.loop);
    e["inj_formula"] = horizon_json(p.inj_formula);
    e["inj_oracle"] = horizon_json(p.inj_oracle);
    pts.push_back(e);
  }
  j["points"] = pts;

  ordered_json g;
  g["conjugate_radius"] = horizon_json(rep.conjugate_radius);
  g["focal_radius"] = horizon_json(rep.focal_radius);
  g["loop_length"] = horizon_json(rep.loop_length);
  g["closed_geodesic_length"] = horizon_json(rep.closed_geodesic);
  g["closed_geodesic_provenance"] = rep.closed_geodesic_provenance;
  g["inj_formula"] = horizon_json(rep.inj_formula);
  g["inj_oracle"] = horizon_json(rep.inj_oracle);
  g["convexity_formula"] = horizon_json(rep.convexity_formula);
  if (rep.convexity_oracle) {
    ordered_json o;
    o["low"] = rep.convexity_oracle->oracle_low;
    o["high"] = rep.convexity_oracle->oracle_high;
    o["mid"] = rep.convexity_oracle->oracle();
    o["worst_point"] = point_json(rep.convexity_oracle->worst_point);
    o["witness_at_top"] = rep.convexity_oracle->witness_at_top;
    g["convexity_oracle"] = o;
  }
  if (rep.hessian_minimum) g["hessian_minimum"] = *rep.hessian_minimum;
  j["manifold_level"] = g;

  ordered_json checks = ordered_json::array();
  for (const auto& c : rep.checks) {
    ordered_json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    if (std::isfinite(c.margin)) e["margin"] = c.margin;
    if (!c.detail.empty()) e["detail"] = c.detail;
    checks.push_back(e);
  }
  j["checks"] = checks;

  ordered_json errs = ordered_json::array();
  for (const auto& e : rep.errors) errs.push_back(e);
  j["errors"] = errs;
  return j;
}

ordered_json certification_json(const CertificationReport& rep) {
  ordered_json j;
  j["config"] = gulliver_config_json(rep.config);
  j["no_conjugate"] = rep.no_conjugate;
  j["geodesic_count"] = rep.geodesic_count;
  j["truncated_count"] = rep.truncated_count;
  j["riccati_disagreements"] = rep.riccati_disagreements;
  j["min_u"] = rep.min_u;
  j["riccati_margin"] = rep.riccati_margin;
  if (rep.first_blowdown_time) j["first_blowdown_time"] = *rep.first_blowdown_time;
  j["focal_found"] = rep.focal_found;
  if (rep.best_focal) {
    ordered_json f;
    f["time"] = rep.best_focal->time;
    f["start_radius"] = rep.best_focal->start_radius;
    f["start_angle"] = rep.best_focal->start_angle;
    f["focal_radius"] = rep.best_focal->focal_radius;
    j["best_focal"] = f;
  }
  if (rep.r_f_ball) j["r_f_ball"] = *rep.r_f_ball;
  if (rep.diameter) j["diameter"] = *rep.diameter;
  j["diameter_bound"] = rep.diameter_bound;
  if (rep.r_f_ball_step_change) j["r_f_ball_step_change"] = *rep.r_f_ball_step_change;
  if (rep.diameter_step_change) j["diameter_step_change"] = *rep.diameter_step_change;
  if (rep.r_f_ball_density_change)
    j["r_f_ball_density_change"] = *rep.r_f_ball_density_change;
  return j;
}

ordered_json ratio_json(const RatioBound& rb) {
  ordered_json j;
  j["R"] = rb.R;
  j["D"] = rb.D;
  j["inj_g"] = rb.inj_g;
  j["systole_g"] = rb.systole_g;
  j["epsilon"] = rb.epsilon;
  j["required_inj_g"] = rb.required_inj_g;
  j["inj_h_lower"] = rb.inj_h_lower;
  j["ratio_upper"] = rb.ratio_upper;
  j["meets_requirement"] = rb.meets_requirement;
  return j;
}

}  // namespace detail

//--------------------------------------------------------------------------
// public string/file API

ManifoldDescriptor parse_manifold_json(const std::string& text) {
  detail::ordered_json j;
  try {
    j = detail::ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("manifold descriptor: invalid JSON: ") + e.what());
  }
  return detail::manifold_from_json(j);
}

ManifoldDescriptor load_manifold_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("manifold descriptor: cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifold_json(ss.str());
}

GulliverConfig parse_gulliver_json(const std::string& text) {
  detail::ordered_json j;
  try {
    j = detail::ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("gulliver config: invalid JSON: ") + e.what());
  }
  return detail::gulliver_from_json(j);
}

GulliverConfig load_gulliver_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("gulliver config: cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_gulliver_json(ss.str());
}

std::string to_json_string(const RadiusReport& rep) {
  return detail::write_json(detail::report_json(rep));
}
std::string to_json_string(const CertificationReport& rep) {
  return detail::write_json(detail::certification_json(rep));
}
std::string to_json_string(const RatioBound& rb) {
  return detail::write_json(detail::ratio_json(rb));
}
std::string to_json_string(const DirectionScan& scan) {
  return detail::write_json(detail::scan_json(scan));
}
std::string to_json_string(const ConvexityCheck& check, const ChartPoint& center,
                           double radius) {
  return detail::write_json(detail::convexity_json(check, center, radius));
}
std::string manifold_json(const ManifoldDescriptor& m) {
  return detail::write_json(detail::manifold_to_json(m));
}

namespace {

void csv_value(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v == 0.0 ? 0.0 : v);
  os << buf;
}

}  // namespace

void write_path_csv(std::ostream& os, const ManifoldDescriptor& m,
                    const GeodesicPath& path) {
  os << (m.polar_chart() ? "t,r,theta,vr,vtheta\n" : "t,x,y,vx,vy\n");
  for (const auto& s : path.samples) {
    csv_value(os, s.t);
    os << ',';
    csv_value(os, s.position[0]);
    os << ',';
    csv_value(os, s.position[1]);
    os << ',';
    csv_value(os, s.velocity[0]);
    os << ',';
    csv_value(os, s.velocity[1]);
    os << '\n';
  }
}

void write_jacobi_csv(std::ostream& os, const JacobiTrace& trace) {
  os << "t,j,jprime\n";
  for (const auto& s : trace.samples) {
    csv_value(os, s.t);
    os << ',';
    csv_value(os, s.j);
    os << ',';
    csv_value(os, s.jp);
    os << '\n';
  }
}

void write_profile_csv(std::ostream& os, const RadialProfile& profile, double dr) {
  if (!(dr > 0.0)) throw InvalidInput("write_profile_csv: dr must be positive");
  os << "r,f,fprime,K\n";
  for (double r = 0.0; r <= profile.r_max() + 1e-12; r += dr) {
    const double rr = std::min(r, profile.r_max());
    csv_value(os, rr);
    os << ',';
    csv_value(os, profile.f(rr));
    os << ',';
    csv_value(os, profile.fp(rr));
    os << ',';
    csv_value(os, profile.curvature(rr));
    os << '\n';
    if (rr >= profile.r_max()) break;
  }
}

}  // namespace radiuslab
