#include "radiuslab/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "json_io.hpp"
#include "radiuslab/io.hpp"

namespace radiuslab::cli {

namespace {

using detail::ordered_json;

struct ManifoldArgs {
  std::string kind;
  std::string config_file;
  double radius = 1.0;
  double curvature = -1.0;
  double l1 = 1.0, l2 = 1.0;
  double r_max = 0.0;
  std::string form = "sinh";
  double scale = 1.0;
};

void add_manifold_options(CLI::App* cmd, ManifoldArgs& args) {
  cmd->add_option("--manifold", args.kind,
                  "manifold kind: sphere | hyperbolic | torus | warped");
  cmd->add_option("--config", args.config_file, "manifold descriptor JSON file");
  cmd->add_option("--radius", args.radius, "sphere radius");
  cmd->add_option("--curvature", args.curvature, "hyperbolic curvature (< 0)");
  cmd->add_option("--l1", args.l1, "torus first period");
  cmd->add_option("--l2", args.l2, "torus second period");
  cmd->add_option("--r-max", args.r_max, "polar chart domain end");
  cmd->add_option("--form", args.form, "warped closed form: sin | sinh | identity");
  cmd->add_option("--scale", args.scale, "warped closed-form scale");
}

ManifoldDescriptor build_manifold(const ManifoldArgs& args) {
  if (!args.config_file.empty()) return load_manifold_file(args.config_file);
  if (args.kind.empty())
    throw InvalidInput("missing manifold: pass --manifold or --config");
  ordered_json j;
  j["kind"] = args.kind;
  if (args.kind == "sphere") j["radius"] = args.radius;
  if (args.kind == "hyperbolic" || args.kind == "hyperbolic_plane") {
    j["curvature"] = args.curvature;
    if (args.r_max > 0) j["r_max"] = args.r_max;
  }
  if (args.kind == "torus" || args.kind == "flat_torus") {
    j["l1"] = args.l1;
    j["l2"] = args.l2;
  }
  if (args.kind == "warped") {
    j["r_max"] = args.r_max > 0 ? args.r_max : 8.0;
    j["form"] = args.form;
    j["scale"] = args.scale;
  }
  return detail::manifold_from_json(j);
}

ChartPoint parse_point(const std::string& text) {
  std::istringstream ss(text);
  double a, b;
  char comma;
  if (!(ss >> a >> comma >> b) || comma != ',')
    throw InvalidInput("point must be 'a,b' (got '" + text + "')");
  return {a, b};
}

struct Sink {
  std::string out_path;
  std::ostream* fallback;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void write(const std::string& payload) const {
    if (out_path.empty()) {
      (*fallback) << payload;
      return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open output file '" + out_path + "'");
    f << payload;
    // timestamps live in a sidecar log, never in the payload
    std::ofstream log(out_path + ".log", std::ios::app);
    if (log) {
      const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
      const auto now = std::chrono::system_clock::to_time_t(
          std::chrono::system_clock::now());
      log << "written=" << out_path << " elapsed_ms=" << wall
          << " unix_time=" << now << "\n";
    }
  }
};

ordered_json wrap(const std::string& command, ordered_json config,
                  ordered_json result) {
  ordered_json j;
  j["schema"] = "radius-lab/1";
  j["command"] = command;
  j["config"] = std::move(config);
  j["result"] = std::move(result);
  return j;
}

ordered_json error_payload(const std::string& command, ordered_json config,
                           const Error& e) {
  ordered_json j;
  j["schema"] = "radius-lab/1";
  j["command"] = command;
  j["config"] = std::move(config);
  ordered_json err;
  err["type"] = typeid(e).name();
  err["message"] = e.what();
  j["error"] = err;
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"radius-lab: geodesic radii and convexity laboratory"};
  app.require_subcommand(1);

  // shared numeric options
  struct Common {
    std::string out_path;
    std::uint64_t seed = 42;
    double horizon = 0.0;
    double step = 1e-3;
    int n_dirs = 64;
    int n_pairs = 1000;
  };

  ManifoldArgs margs;
  Common common;

  auto add_common = [&](CLI::App* cmd, bool with_manifold = true) {
    if (with_manifold) add_manifold_options(cmd, margs);
    cmd->add_option("--out", common.out_path, "output JSON path (default stdout)");
    cmd->add_option("--seed", common.seed, "RNG seed (default 42)");
    cmd->add_option("--horizon", common.horizon, "scan horizon (0 = family default)");
    cmd->add_option("--step", common.step, "integration step");
    cmd->add_option("--n-dirs", common.n_dirs, "directions per scan");
    cmd->add_option("--n-pairs", common.n_pairs, "pairs per convexity check");
  };

  auto* radii_cmd = app.add_subcommand("radii", "full radius report");
  bool no_oracle = false, no_cut = false, no_hessian = false;
  int stations = 16;
  add_common(radii_cmd);
  radii_cmd->add_flag("--no-convexity-oracle", no_oracle, "skip the bisection oracle");
  radii_cmd->add_flag("--no-cut-oracle", no_cut, "skip the cut-time oracle");
  radii_cmd->add_flag("--no-hessian", no_hessian, "skip the Hessian check");
  radii_cmd->add_option("--stations", stations, "radial stations on warped surfaces");

  auto* scan_cmd = app.add_subcommand("scan", "per-direction times around a point");
  std::string scan_point_arg = "0,0";
  add_common(scan_cmd);
  scan_cmd->add_option("--point", scan_point_arg, "base point 'a,b'");

  auto* conv_cmd = app.add_subcommand("convexity", "strong-convexity check of a ball");
  double conv_s = 0.25;
  std::string conv_point;
  add_common(conv_cmd);
  conv_cmd->add_option("--s", conv_s, "ball radius")->required();
  conv_cmd->add_option("--point", conv_point, "ball center 'a,b' (default scan point)");

  auto* gb_cmd = app.add_subcommand("gulliver-build", "build a warped cap profile");
  std::string gulliver_file, csv_path;
  double csv_dr = 1e-2;
  gb_cmd->add_option("--config", gulliver_file, "gulliver config JSON file");
  gb_cmd->add_option("--out", common.out_path, "output JSON path");
  gb_cmd->add_option("--csv", csv_path, "profile CSV export path");
  gb_cmd->add_option("--csv-dr", csv_dr, "CSV sampling step");

  auto* gc_cmd = app.add_subcommand("gulliver-certify",
                                    "certify focal-but-no-conjugate");
  int gc_n = 0;
  bool gc_no_stability = false;
  gc_cmd->add_option("--config", gulliver_file, "gulliver config JSON file");
  gc_cmd->add_option("--out", common.out_path, "output JSON path");
  gc_cmd->add_option("--n-geodesics", gc_n, "sweep size override");
  gc_cmd->add_option("--horizon", common.horizon, "sweep horizon override");
  gc_cmd->add_option("--step", common.step, "integration step override");
  gc_cmd->add_flag("--no-stability", gc_no_stability, "skip step-halving reruns");

  auto* ratio_cmd = app.add_subcommand("ratio", "ratio-mechanism arithmetic");
  double rb_R = 1.7, rb_D = 0.0, rb_inj = 0.0, rb_eps = 0.1;
  ratio_cmd->add_option("--R", rb_R, "ball radius R")->required();
  ratio_cmd->add_option("--D", rb_D, "ball diameter D")->required();
  ratio_cmd->add_option("--inj-g", rb_inj, "ambient injectivity radius")->required();
  ratio_cmd->add_option("--epsilon", rb_eps, "target ratio")->required();
  ratio_cmd->add_option("--out", common.out_path, "output JSON path");

  auto* trace_cmd = app.add_subcommand("trace", "integrate and export one geodesic");
  std::string trace_start = "0,0";
  double trace_angle = 0.0, trace_length = 1.0;
  bool trace_jacobi = false;
  add_common(trace_cmd);
  trace_cmd->add_option("--start", trace_start, "start point 'a,b'");
  trace_cmd->add_option("--angle", trace_angle, "initial chart angle");
  trace_cmd->add_option("--length", trace_length, "arclength to integrate");
  trace_cmd->add_option("--csv", csv_path, "trace CSV path");
  trace_cmd->add_flag("--jacobi", trace_jacobi, "also export the Jacobi trace");

  std::vector<const char*> argv;
  argv.push_back("radius-lab");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "invalid arguments: " << e.what() << "\n";
    return 2;
  }

  Sink sink{common.out_path, &out};

  ordered_json config;
  config["seed"] = common.seed;
  config["step"] = common.step;
  config["n_dirs"] = common.n_dirs;
  config["n_pairs"] = common.n_pairs;

  auto finish = [&](const std::string& command, ordered_json cfg,
                    ordered_json result) {
    sink.write(detail::write_json(wrap(command, std::move(cfg), std::move(result))));
    return 0;
  };

  try {
    if (*radii_cmd) {
      ManifoldDescriptor m = build_manifold(margs);
      RadiiConfig cfg;
      cfg.n_dirs = common.n_dirs;
      cfg.horizon = common.horizon;
      cfg.step = common.step;
      cfg.seed = common.seed;
      cfg.n_pairs = common.n_pairs;
      cfg.stations = stations;
      cfg.with_convexity_oracle = !no_oracle;
      cfg.with_cut_oracle = !no_cut;
      cfg.with_hessian = !no_hessian;
      config["manifold"] = detail::manifold_to_json(m);
      config["horizon"] = cfg.horizon > 0 ? cfg.horizon : default_horizon(m);
      config["stations"] = stations;
      try {
        RadiusReport rep = assemble_report(m, cfg);
        return finish("radii", config, detail::report_json(rep));
      } catch (const Error& e) {
        sink.write(detail::write_json(error_payload("radii", config, e)));
        return 1;
      }
    }

    if (*scan_cmd) {
      ManifoldDescriptor m = build_manifold(margs);
      ScanOptions so;
      so.n_dirs = common.n_dirs;
      so.horizon = common.horizon;
      so.step = common.step;
      const ChartPoint p = parse_point(scan_point_arg);
      config["manifold"] = detail::manifold_to_json(m);
      config["point"] = ordered_json::array({p[0], p[1]});
      config["horizon"] = so.horizon > 0 ? so.horizon : default_horizon(m);
      try {
        DirectionScan scan = scan_point(m, p, so);
        return finish("scan", config, detail::scan_json(scan));
      } catch (const Error& e) {
        sink.write(detail::write_json(error_payload("scan", config, e)));
        return 1;
      }
    }

    if (*conv_cmd) {
      ManifoldDescriptor m = build_manifold(margs);
      const ChartPoint p = conv_point.empty() ? scan_points(m, 1).front()
                                              : parse_point(conv_point);
      ConvexityCheckOptions copts;
      copts.seed = common.seed;
      copts.shooting.step = common.step;
      config["manifold"] = detail::manifold_to_json(m);
      config["point"] = ordered_json::array({p[0], p[1]});
      config["s"] = conv_s;
      try {
        ConvexityCheck check = is_strongly_convex(m, p, conv_s, common.n_pairs, copts);
        return finish("convexity", config, detail::convexity_json(check, p, conv_s));
      } catch (const Error& e) {
        sink.write(detail::write_json(error_payload("convexity", config, e)));
        return 1;
      }
    }

    if (*gb_cmd || *gc_cmd) {
      GulliverConfig gcfg = gulliver_file.empty() ? GulliverConfig::pinned_default()
                                                  : load_gulliver_file(gulliver_file);
      const std::string command = *gb_cmd ? "gulliver-build" : "gulliver-certify";
      if (*gc_cmd) {
        if (gc_n > 0) gcfg.n_geodesics = gc_n;
        if (common.horizon > 0) gcfg.horizon = common.horizon;
        if (gc_cmd->count("--step") > 0) gcfg.step = common.step;
      }
      config = detail::gulliver_config_json(gcfg);
      try {
        RadialProfile prof = build_gulliver(gcfg);
        if (*gb_cmd) {
          if (!csv_path.empty()) {
            std::ofstream f(csv_path);
            if (!f) throw InvalidInput("cannot open CSV path '" + csv_path + "'");
            write_profile_csv(f, prof, csv_dr);
          }
          ordered_json result;
          result["r_max"] = prof.r_max();
          result["f_at_cap"] = prof.f(gcfg.cap_radius);
          result["f_at_ball"] = prof.f(gcfg.ball_radius());
          result["curvature_min"] = prof.curvature_spec()->k_min();
          result["curvature_max"] = prof.curvature_spec()->k_max();
          if (!csv_path.empty()) result["csv"] = csv_path;
          return finish(command, config, result);
        }
        ManifoldDescriptor m = ManifoldDescriptor::warped(prof, prof.r_max());
        CertifyOptions copts;
        copts.with_stability = !gc_no_stability;
        CertificationReport rep = certify(m, gcfg, copts);
        return finish(command, config, detail::certification_json(rep));
      } catch (const Error& e) {
        sink.write(detail::write_json(error_payload(command, config, e)));
        return 1;
      }
    }

    if (*ratio_cmd) {
      ordered_json cfg;
      cfg["R"] = rb_R;
      cfg["D"] = rb_D;
      cfg["inj_g"] = rb_inj;
      cfg["epsilon"] = rb_eps;
      try {
        RatioBound rb = ratio_bound(rb_R, rb_D, rb_inj, rb_eps);
        return finish("ratio", cfg, detail::ratio_json(rb));
      } catch (const Error& e) {
        sink.write(detail::write_json(error_payload("ratio", cfg, e)));
        return 1;
      }
    }

    if (*trace_cmd) {
      ManifoldDescriptor m = build_manifold(margs);
      const ChartPoint p = parse_point(trace_start);
      config["manifold"] = detail::manifold_to_json(m);
      config["start"] = ordered_json::array({p[0], p[1]});
      config["angle"] = trace_angle;
      config["length"] = trace_length;
      try {
        IntegrationOptions iopts;
        iopts.step = common.step;
        GeodesicPath path =
            integrate_geodesic(m, direction_state(m, p, trace_angle), trace_length,
                               iopts);
        ordered_json result;
        result["total_length"] = path.total_length;
        result["left_domain"] = path.left_domain;
        result["max_speed_drift"] = path.max_speed_drift;
        result["endpoint"] = ordered_json::array(
            {path.back().position[0], path.back().position[1]});
        if (!csv_path.empty()) {
          std::ofstream f(csv_path);
          if (!f) throw InvalidInput("cannot open CSV path '" + csv_path + "'");
          write_path_csv(f, m, path);
          result["csv"] = csv_path;
        }
        if (trace_jacobi) {
          JacobiTrace trace = integrate_jacobi(m, path, 0.0, 1.0);
          ordered_json js;
          js["first_conjugate"] = detail::horizon_json(trace.first_conjugate);
          js["first_focal"] = detail::horizon_json(trace.first_focal);
          js["horizon"] = trace.horizon;
          result["jacobi"] = js;
          if (!csv_path.empty()) {
            std::ofstream f(csv_path + ".jacobi.csv");
            if (f) write_jacobi_csv(f, trace);
            result["jacobi_csv"] = csv_path + ".jacobi.csv";
          }
        }
        return finish("trace", config, result);
      } catch (const Error& e) {
        sink.write(detail::write_json(error_payload("trace", config, e)));
        return 1;
      }
    }
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  err << "no command given\n";
  return 2;
}

}  // namespace radiuslab::cli
