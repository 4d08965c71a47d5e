#include "radiuslab/radii.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "engine.hpp"
#include "radiuslab/parallel.hpp"

namespace radiuslab {

double default_horizon(const ManifoldDescriptor& m) {
  if (auto d = m.diameter()) return 4.0 * *d;
  return 20.0;
}

std::vector<ChartPoint> scan_points(const ManifoldDescriptor& m, int stations) {
  // homogeneous families need a single point; warped surfaces scan the pole
  // plus radial stations (rotational symmetry removes the angular dependence)
  switch (m.kind()) {
    case ManifoldDescriptor::Kind::Sphere:
      return {{0.5 * kPi * m.sphere_radius(), 0.0}};
    case ManifoldDescriptor::Kind::HyperbolicPlane:
      return {{0.0, 0.0}};
    case ManifoldDescriptor::Kind::FlatTorus:
      return {{0.37 * m.l1(), 0.21 * m.l2()}};
    case ManifoldDescriptor::Kind::WarpedSurface: {
      std::vector<ChartPoint> pts{{0.0, 0.0}};
      const double r_hi = 0.9 * m.chart_r_max();
      for (int i = 1; i <= stations; ++i)
        pts.push_back({r_hi * i / stations, 0.0});
      return pts;
    }
  }
  return {{0.0, 0.0}};
}

namespace {

ChartPoint ball_sample(const ManifoldDescriptor& m, const ChartPoint& p, double rho,
                       double beta, double step) {
  if (rho <= 0.0) return p;
  if (m.polar_chart() && p[0] <= 0.0) return {rho, beta};  // exp from the pole
  GeodesicState dir = direction_state(m, p, beta);
  return exp_map(m, p, {rho * dir.velocity[0], rho * dir.velocity[1]}, step);
}

// first return of an integrated path to its base point (raw, per direction)
HorizonLength first_return_time(const ManifoldDescriptor& m, const GeodesicPath& path,
                                const ChartPoint& p, double tol) {
  const double t_gate = 20.0 * path.step;
  double prev2 = kInf, prev = kInf;
  for (std::size_t i = 0; i < path.samples.size(); ++i) {
    const double pr = chart_distance_proxy(m, path.samples[i].position, p);
    if (i >= 2 && prev < prev2 && prev <= pr && path.samples[i - 1].t > t_gate &&
        prev < 0.2) {
      const detail::ClosestApproach ca = detail::closest_refined(m, path, i - 1, p);
      if (ca.proxy < tol)
        return HorizonLength::finite(ca.t, path.total_length);
    }
    prev2 = prev;
    prev = pr;
  }
  return HorizonLength::beyond(path.total_length);
}

// cut time along one direction: sup{t : d(p, gamma(t)) = t within tolerance},
// bracketed on the sample grid with coarse distance probes first
HorizonLength cut_time_along(const ManifoldDescriptor& m, const ChartPoint& p,
                             const GeodesicPath& path, const CutOptions& cut) {
  const auto& smp = path.samples;
  if (smp.size() < 2) return HorizonLength::beyond(path.total_length);
  const double t_hi =
      cut.horizon > 0 ? std::min(cut.horizon, path.total_length) : path.total_length;

  auto gap = [&](std::size_t i) {
    const DistanceResult d = distance(m, p, smp[i].position, cut.shooting);
    return smp[i].t - d.length;  // 0 until the cut, then grows
  };

  const std::size_t stride =
      std::max<std::size_t>(1, static_cast<std::size_t>(cut.coarse_stride / path.step));
  std::size_t lo = 0, hi = 0;
  bool found = false;
  for (std::size_t i = stride; i < smp.size(); i += stride) {
    if (smp[i].t > t_hi) break;
    if (gap(i) > cut.tolerance) {
      hi = i;
      found = true;
      break;
    }
    lo = i;
  }
  if (!found) return HorizonLength::beyond(t_hi);

  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (gap(mid) > cut.tolerance)
      hi = mid;
    else
      lo = mid;
  }
  // continuous bisection with interpolated path positions
  double t_lo = smp[lo].t, t_hi_b = smp[hi].t;
  auto gap_at = [&](double t) {
    const ChartPoint q = detail::position_at(path, t);
    return t - distance(m, p, q, cut.shooting).length;
  };
  for (int it = 0; it < cut.refine_iterations && t_hi_b - t_lo > 1e-6; ++it) {
    const double mid = 0.5 * (t_lo + t_hi_b);
    if (gap_at(mid) > cut.tolerance)
      t_hi_b = mid;
    else
      t_lo = mid;
  }
  return HorizonLength::finite(0.5 * (t_lo + t_hi_b), t_hi);
}

struct DirProbe {
  HorizonLength conjugate, focal;
  double wronskian;
  GeodesicPath path;
};

DirProbe probe_direction(const ManifoldDescriptor& m, const ChartPoint& p,
                         double angle, double horizon, double step) {
  IntegrationOptions iopts;
  iopts.step = step;
  GeodesicPath path =
      detail::integrate_core(m, direction_state(m, p, angle), horizon, iopts, nullptr)
          .path;
  JacobiTrace trace = integrate_jacobi(m, path, 0.0, 1.0);
  return {trace.first_conjugate, trace.first_focal, trace.wronskian_drift,
          std::move(path)};
}

}  // namespace

DirectionScan scan_point(const ManifoldDescriptor& m, const ChartPoint& p,
                         const ScanOptions& opts) {
  if (opts.n_dirs < 8) throw InvalidInput("scan_point: n_dirs must be >= 8");
  const double horizon = opts.horizon > 0 ? opts.horizon : default_horizon(m);

  DirectionScan scan;
  scan.base_point = p;
  scan.horizon = horizon;
  scan.pole_symmetric = m.polar_chart() && p[0] <= 0.0;

  const int n_unique = scan.pole_symmetric ? 1 : opts.n_dirs;
  std::vector<DirectionEntry> entries(n_unique);

  std::atomic<bool> failed{false};
  std::string fail_msg;
  parallel_for(static_cast<std::size_t>(n_unique), [&](std::size_t i) {
    try {
      const double angle = 2.0 * kPi * static_cast<double>(i) / opts.n_dirs;
      DirProbe probe = probe_direction(m, p, angle, horizon, opts.step);
      DirectionEntry e;
      e.angle = angle;
      e.conjugate_time = probe.conjugate;
      e.focal_time = probe.focal;
      e.wronskian_drift = probe.wronskian;
      e.loop_time = first_return_time(m, probe.path, p, 1e-4);
      if (opts.cut.enabled)
        e.cut_time = cut_time_along(m, p, probe.path, opts.cut);
      else
        e.cut_time = HorizonLength::beyond(probe.path.total_length);
      entries[i] = e;
    } catch (const Error& err) {
      if (!failed.exchange(true))
        fail_msg = "direction " + std::to_string(i) + ": " + err.what();
    }
  });
  if (failed) throw NotConverged("scan_point: " + fail_msg);

  if (scan.pole_symmetric) {
    scan.directions.assign(opts.n_dirs, entries[0]);
    for (int i = 0; i < opts.n_dirs; ++i)
      scan.directions[i].angle = 2.0 * kPi * i / opts.n_dirs;
  } else {
    scan.directions = std::move(entries);
  }
  return scan;
}

namespace {

// golden-section refinement of the per-direction first conjugate/focal time
// around the scanned minimizer
HorizonLength refine_direction_min(const ManifoldDescriptor& m, const ChartPoint& p,
                                   const DirectionScan& scan, bool focal,
                                   double step) {
  double best = kInf;
  int best_i = -1;
  for (std::size_t i = 0; i < scan.directions.size(); ++i) {
    const HorizonLength& h =
        focal ? scan.directions[i].focal_time : scan.directions[i].conjugate_time;
    if (h.is_finite() && h.value() < best) {
      best = h.value();
      best_i = static_cast<int>(i);
    }
  }
  if (best_i < 0) return HorizonLength::beyond(scan.horizon);
  if (scan.pole_symmetric) return HorizonLength::finite(best, scan.horizon);

  auto objective = [&](double angle) {
    DirProbe pr = probe_direction(m, p, angle, scan.horizon, step);
    const HorizonLength& h = focal ? pr.focal : pr.conjugate;
    return h.is_finite() ? h.value() : kInf;
  };

  const double w = 2.0 * kPi / scan.directions.size();
  double lo = scan.directions[best_i].angle - w;
  double hi = scan.directions[best_i].angle + w;
  const double gr = 0.6180339887498949;
  double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
  double f1 = objective(m1), f2 = objective(m2);
  for (int it = 0; it < 24; ++it) {
    if (f1 < f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = hi - gr * (hi - lo);
      f1 = objective(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = lo + gr * (hi - lo);
      f2 = objective(m2);
    }
  }
  best = std::min({best, f1, f2});
  return HorizonLength::finite(best, scan.horizon);
}

}  // namespace

HorizonLength conjugate_radius_at(const ManifoldDescriptor& m, const ChartPoint& p,
                                  const ScanOptions& opts) {
  ScanOptions so = opts;
  so.cut.enabled = false;
  DirectionScan scan = scan_point(m, p, so);
  return refine_direction_min(m, p, scan, /*focal=*/false, so.step);
}

HorizonLength focal_radius_at(const ManifoldDescriptor& m, const ChartPoint& p,
                              const ScanOptions& opts) {
  ScanOptions so = opts;
  so.cut.enabled = false;
  DirectionScan scan = scan_point(m, p, so);
  return refine_direction_min(m, p, scan, /*focal=*/true, so.step);
}

InjectivityRadius injectivity_radius_at(const ManifoldDescriptor& m,
                                        const ChartPoint& p,
                                        const ScanOptions& opts) {
  ScanOptions so = opts;
  so.cut.enabled = true;
  DirectionScan scan = scan_point(m, p, so);
  const double horizon = scan.horizon;

  HorizonLength conj = refine_direction_min(m, p, scan, false, so.step);
  LoopOptions lopts;
  lopts.n_dirs = so.n_dirs;
  lopts.step = so.step;
  HorizonLength loop = loop_length_at(m, p, horizon, lopts);

  HorizonLength half_loop = loop.is_finite()
                                ? HorizonLength::finite(0.5 * loop.value(), horizon)
                                : HorizonLength::beyond(horizon);
  InjectivityRadius out;
  out.formula = min(conj, half_loop);
  HorizonLength cut = HorizonLength::beyond(horizon);
  for (const auto& d : scan.directions) cut = min(cut, d.cut_time);
  out.oracle = cut;
  return out;
}

//--------------------------------------------------------------------------
// strong convexity oracle

namespace {

// exact distance from the scan center where it is cheap; conservative radial
// lower bound plus targeted shooting probes on generic warped centers
struct CenterDistance {
  const ManifoldDescriptor& m;
  ChartPoint p;
  bool exact;

  CenterDistance(const ManifoldDescriptor& mm, const ChartPoint& pp)
      : m(mm), p(pp) {
    exact = m.kind() != ManifoldDescriptor::Kind::WarpedSurface ||
            p[0] <= 0.0;  // pole-centred warped balls: d = r
  }

  double lower_bound(const ChartPoint& q) const {
    if (exact) return value(q);
    return std::abs(q[0] - p[0]);
  }
  double value(const ChartPoint& q) const {
    if (m.kind() == ManifoldDescriptor::Kind::WarpedSurface && p[0] <= 0.0)
      return q[0];
    return distance(m, p, q).length;
  }
};

}  // namespace

ConvexityCheck is_strongly_convex(const ManifoldDescriptor& m, const ChartPoint& p,
                                  double s, int n_pairs,
                                  const ConvexityCheckOptions& opts) {
  if (!(s > 0.0)) throw InvalidInput("is_strongly_convex: s must be positive");
  if (n_pairs < 100) throw InvalidInput("is_strongly_convex: n_pairs must be >= 100");

  ConvexityCheck out;
  out.seed = opts.seed;
  const double max_len = 2.0 * s + opts.margin;
  CenterDistance center(m, p);

  const int total_rounds = 1 + std::max(0, opts.escalation_rounds);
  std::atomic<long long> budget_used{0};
  int pair_base = 0;

  for (int round = 0; round < total_rounds; ++round) {
    const int round_pairs = n_pairs * (round == 0 ? 1 : 4 << (2 * (round - 1)));
    constexpr int kBlock = 128;
    for (int block = 0; block < round_pairs; block += kBlock) {
      const int count = std::min(kBlock, round_pairs - block);
      std::vector<std::optional<ConvexityWitness>> found(count);
      std::atomic<bool> incomplete{false};

      parallel_for(static_cast<std::size_t>(count), [&](std::size_t bi) {
        const int idx = pair_base + block + static_cast<int>(bi);
        Rng rng = Rng::substream(opts.seed, static_cast<std::uint64_t>(idx));
        // stratified toward the boundary shell [0.9 s, s]
        const bool shell = (idx % 2) == 0;
        const double rho1 = shell ? rng.uniform(0.9 * s, s) : rng.uniform(0.0, s);
        const double beta1 = rng.angle();
        const double rho2 = shell ? rng.uniform(0.9 * s, s) : rng.uniform(0.0, s);
        const double beta2 = rng.angle();

        if (budget_used.load(std::memory_order_relaxed) > opts.budget) {
          incomplete = true;
          return;
        }

        ChartPoint x, y;
        try {
          x = ball_sample(m, p, rho1, beta1, opts.shooting.step);
          y = ball_sample(m, p, rho2, beta2, opts.shooting.step);
        } catch (const Error&) {
          incomplete = true;  // ball reaches beyond the chart
          return;
        }

        ConnectResult con;
        try {
          con = connect(m, x, y, max_len, opts.shooting);
        } catch (const Error&) {
          con = ConnectResult{};
        }
        budget_used.fetch_add(opts.shooting.n_starts, std::memory_order_relaxed);

        ConvexityWitness w;
        w.center = p;
        w.radius = s;
        w.x = x;
        w.y = y;

        if (con.lengths.empty()) {
          if (chart_distance_proxy(m, x, y) < 1e-9) return;  // degenerate pair
          // retry harder before claiming a witness: a missed shot must not
          // masquerade as a convexity failure
          ShootingOptions heavy = opts.shooting;
          heavy.n_starts *= 4;
          heavy.step *= 0.5;
          heavy.budget *= 4;
          try {
            con = connect(m, x, y, max_len, heavy);
          } catch (const Error&) {
            con = ConnectResult{};
          }
          budget_used.fetch_add(heavy.n_starts, std::memory_order_relaxed);
          if (con.lengths.empty()) {
            w.mode = ConvexityWitness::Mode::NoGeodesicFound;
            found[bi] = std::move(w);
            return;
          }
        }
        if (con.multiplicity > 1) {
          w.mode = ConvexityWitness::Mode::NonUnique;
          w.minimal_length = con.minimal_length;
          for (int g = 0; g < con.multiplicity && g < (int)con.geodesics.size(); ++g)
            w.offending.push_back(con.geodesics[g]);
          found[bi] = std::move(w);
          return;
        }
        // containment of the unique minimal geodesic
        const GeodesicPath& path = con.geodesics.front();
        double worst = 0.0;
        std::size_t worst_i = 0;
        for (std::size_t k = 0; k < path.samples.size(); ++k) {
          const double lb = center.lower_bound(path.samples[k].position);
          if (lb > worst) {
            worst = lb;
            worst_i = k;
          }
        }
        double max_d = worst;
        if (!center.exact && worst > s - 0.25) {
          // confirm with the exact oracle at the peak before claiming a witness
          try {
            max_d = center.value(path.samples[worst_i].position);
            budget_used.fetch_add(opts.shooting.n_starts, std::memory_order_relaxed);
          } catch (const Error&) {
            max_d = worst;
          }
        }
        if (max_d > s + opts.containment_tolerance) {
          w.mode = ConvexityWitness::Mode::LeavesBall;
          w.minimal_length = con.minimal_length;
          w.max_center_distance = max_d;
          w.offending.push_back(path);
          found[bi] = std::move(w);
        }
      });

      out.pairs_checked = pair_base + block + count;
      for (int bi = 0; bi < count; ++bi) {
        if (found[bi]) {
          out.status = ConvexityCheck::Status::Witness;
          out.witness = std::move(found[bi]);
          return out;
        }
      }
      if (incomplete || budget_used.load() > opts.budget) {
        out.status = ConvexityCheck::Status::Incomplete;
        return out;
      }
    }
    pair_base += round_pairs;
  }
  out.status = ConvexityCheck::Status::Convex;
  return out;
}

double hessian_check(const ManifoldDescriptor& m, const ChartPoint& p, double R,
                     int n_geodesics, std::uint64_t seed, double spacing) {
  if (!(R > 4.0 * spacing)) throw InvalidInput("hessian_check: R too small");
  if (m.kind() == ManifoldDescriptor::Kind::WarpedSurface && p[0] > 0.0)
    throw InvalidInput(
        "hessian_check: warped centers must be the pole (exact distance oracle)");

  std::vector<double> mins(n_geodesics, kInf);
  std::atomic<bool> failed{false};
  parallel_for(static_cast<std::size_t>(n_geodesics), [&](std::size_t i) {
    try {
      Rng rng = Rng::substream(seed, i);
      const double rho = rng.uniform(0.0, R - 2.0 * spacing);
      const double beta = rng.angle();
      const ChartPoint q = ball_sample(m, p, rho, beta, 1e-3);
      const double psi = rng.angle();
      GeodesicState dir = direction_state(m, q, psi);
      const ChartVector fwd{spacing * dir.velocity[0], spacing * dir.velocity[1]};
      const ChartVector bwd{-fwd[0], -fwd[1]};
      const double small_step = spacing / 4.0;
      const ChartPoint qp = exp_map(m, q, fwd, small_step);
      const ChartPoint qm = exp_map(m, q, bwd, small_step);

      auto d2 = [&](const ChartPoint& z) {
        if (m.kind() == ManifoldDescriptor::Kind::WarpedSurface) return z[0] * z[0];
        const double d = distance(m, p, z).length;
        return d * d;
      };
      mins[i] = (d2(qp) - 2.0 * d2(q) + d2(qm)) / (spacing * spacing);
    } catch (const Error&) {
      failed = true;
    }
  });
  if (failed) throw NotConverged("hessian_check: sample integration failed");
  double mn = kInf;
  for (double v : mins) mn = std::min(mn, v);
  return mn;
}

//--------------------------------------------------------------------------
// manifold-level assembly

namespace {

struct PointScanResult {
  PointRadii radii;
  double wronskian = 0.0;
  bool focal_le_conj = true;
};

PointScanResult scan_one_point(const ManifoldDescriptor& m, const ChartPoint& p,
                               const RadiiConfig& cfg, double horizon) {
  ScanOptions so;
  so.n_dirs = cfg.n_dirs;
  so.horizon = horizon;
  so.step = cfg.step;
  so.cut = cfg.cut;
  so.cut.enabled = cfg.with_cut_oracle && cfg.cut.enabled;
  if (m.kind() == ManifoldDescriptor::Kind::WarpedSurface) {
    // warped cut probes price a shooting distance each; keep them bounded
    so.cut.horizon = so.cut.horizon > 0 ? so.cut.horizon : std::min(horizon, 6.0);
    so.cut.coarse_stride = std::max(so.cut.coarse_stride, 0.25);
    so.cut.refine_iterations = std::min(so.cut.refine_iterations, 8);
    if (cfg.oracle_step > 0) so.cut.shooting.step = cfg.oracle_step;
    so.cut.shooting.n_starts = 64;
  }

  DirectionScan scan = scan_point(m, p, so);

  PointScanResult out;
  out.radii.point = p;
  out.radii.conjugate = refine_direction_min(m, p, scan, false, cfg.step);
  out.radii.focal = refine_direction_min(m, p, scan, true, cfg.step);

  LoopOptions lo;
  lo.n_dirs = cfg.n_dirs;
  lo.step = cfg.step;
  out.radii.loop = loop_length_at(m, p, horizon, lo);

  HorizonLength half_loop =
      out.radii.loop.is_finite()
          ? HorizonLength::finite(0.5 * out.radii.loop.value(), horizon)
          : HorizonLength::beyond(horizon);
  out.radii.inj_formula = min(out.radii.conjugate, half_loop);

  HorizonLength cut = HorizonLength::beyond(horizon);
  for (const auto& d : scan.directions) {
    cut = min(cut, d.cut_time);
    out.wronskian = std::max(out.wronskian, d.wronskian_drift);
    if (d.focal_time.is_finite() && d.conjugate_time.is_finite() &&
        d.focal_time.value() > d.conjugate_time.value() + 1e-9)
      out.focal_le_conj = false;
  }
  out.radii.inj_oracle = cut;
  return out;
}

}  // namespace

ConvexityRadiusResult convexity_radius(const ManifoldDescriptor& m,
                                       const RadiiConfig& cfg) {
  const double horizon = cfg.horizon > 0 ? cfg.horizon : default_horizon(m);
  const auto pts = scan_points(m, cfg.stations);

  // worst point: smallest per-point min{ r_f(p), loop(p)/4 }
  ChartPoint worst = pts.front();
  double worst_val = kInf;
  HorizonLength r_f_M = HorizonLength::beyond(horizon);
  HorizonLength inj_M = HorizonLength::beyond(horizon);
  for (const auto& p : pts) {
    PointScanResult ps = scan_one_point(m, p, cfg, horizon);
    r_f_M = min(r_f_M, ps.radii.focal);
    inj_M = min(inj_M, ps.radii.inj_formula);
    double v = std::min(ps.radii.focal.as_double(),
                        ps.radii.loop.as_double() / 4.0);
    if (v < worst_val) {
      worst_val = v;
      worst = p;
    }
  }

  ClosedGeodesicResult lc = shortest_closed_geodesic(m, horizon);
  HorizonLength formula = min(
      r_f_M, lc.length.is_finite()
                 ? HorizonLength::finite(0.25 * lc.length.value(), horizon)
                 : HorizonLength::beyond(horizon));

  // oracle bracket top
  double top = std::min(inj_M.as_double(), horizon);
  if (r_f_M.is_finite()) top = std::min(top, r_f_M.value() + cfg.bracket_margin);
  if (lc.length.is_finite()) top = std::min(top, 0.25 * lc.length.value() + cfg.bracket_margin);
  if (m.polar_chart() && !m.profile().has_far_pole())
    top = std::min(top, 0.95 * (m.chart_r_max() - worst[0]));

  ConvexityCheckOptions copts = ConvexityCheckOptions{};
  copts.seed = cfg.seed;
  copts.escalation_rounds = 1;
  if (cfg.oracle_step > 0) copts.shooting.step = cfg.oracle_step;
  if (m.kind() == ManifoldDescriptor::Kind::WarpedSurface)
    copts.shooting.n_starts = 64;

  ConvexityRadiusResult out;
  out.formula = formula;
  out.worst_point = worst;

  ConvexityCheck top_check = is_strongly_convex(m, worst, top, cfg.n_pairs, copts);
  out.witness_at_top = top_check.status == ConvexityCheck::Status::Witness;
  if (!out.witness_at_top) {
    out.oracle_low = top;
    out.oracle_high = top;
    return out;
  }

  double lo = 0.0, hi = top;
  for (int it = 0; it < cfg.bisection_depth; ++it) {
    const double mid = 0.5 * (lo + hi);
    ConvexityCheck c = is_strongly_convex(m, worst, mid, cfg.n_pairs, copts);
    if (c.status == ConvexityCheck::Status::Witness)
      hi = mid;
    else
      lo = mid;
  }
  out.oracle_low = lo;
  out.oracle_high = hi;
  return out;
}

RadiusReport assemble_report(const ManifoldDescriptor& m, const RadiiConfig& cfg) {
  RadiusReport rep;
  rep.manifold = m.describe();
  rep.config = cfg;
  const double horizon = cfg.horizon > 0 ? cfg.horizon : default_horizon(m);
  rep.horizon = horizon;

  const bool compact = m.kind() == ManifoldDescriptor::Kind::Sphere ||
                       m.kind() == ManifoldDescriptor::Kind::FlatTorus;

  rep.conjugate_radius = HorizonLength::beyond(horizon);
  rep.focal_radius = HorizonLength::beyond(horizon);
  rep.loop_length = HorizonLength::beyond(horizon);
  rep.inj_oracle = HorizonLength::beyond(horizon);

  double max_wronskian = 0.0;
  bool focal_le_conj = true;

  try {
    for (const auto& p : scan_points(m, cfg.stations)) {
      PointScanResult ps = scan_one_point(m, p, cfg, horizon);
      rep.points.push_back(ps.radii);
      rep.conjugate_radius = min(rep.conjugate_radius, ps.radii.conjugate);
      rep.focal_radius = min(rep.focal_radius, ps.radii.focal);
      rep.loop_length = min(rep.loop_length, ps.radii.loop);
      rep.inj_oracle = min(rep.inj_oracle, ps.radii.inj_oracle);
      max_wronskian = std::max(max_wronskian, ps.wronskian);
      focal_le_conj = focal_le_conj && ps.focal_le_conj;
    }
  } catch (const Error& e) {
    rep.errors.push_back(std::string("scan: ") + e.what());
  }

  try {
    ClosedGeodesicResult lc = shortest_closed_geodesic(m, horizon);
    rep.closed_geodesic = lc.length;
    rep.closed_geodesic_provenance = lc.provenance;
  } catch (const Error& e) {
    rep.closed_geodesic = HorizonLength::beyond(horizon);
    rep.errors.push_back(std::string("closed_geodesic: ") + e.what());
  }

  const HorizonLength& loop_like = compact ? rep.closed_geodesic : rep.loop_length;
  HorizonLength half =
      loop_like.is_finite()
          ? HorizonLength::finite(0.5 * loop_like.value(), horizon)
          : HorizonLength::beyond(horizon);
  HorizonLength quarter =
      loop_like.is_finite()
          ? HorizonLength::finite(0.25 * loop_like.value(), horizon)
          : HorizonLength::beyond(horizon);
  rep.inj_formula = min(rep.conjugate_radius, half);
  rep.convexity_formula = min(rep.focal_radius, quarter);

  if (cfg.with_convexity_oracle) {
    try {
      rep.convexity_oracle = convexity_radius(m, cfg);
    } catch (const Error& e) {
      rep.errors.push_back(std::string("convexity_oracle: ") + e.what());
    }
  }

  if (cfg.with_hessian) {
    try {
      ChartPoint p = scan_points(m, cfg.stations).front();
      double cap = std::min(rep.focal_radius.as_double(), rep.inj_formula.as_double());
      if (m.polar_chart()) cap = std::min(cap, 0.45 * m.chart_r_max());
      else cap = std::min(cap, 0.45 * std::min(m.l1(), m.l2()));
      cap = std::min(cap, 0.5 * horizon);
      rep.hessian_minimum = hessian_check(m, p, 0.95 * cap, cfg.hessian_geodesics,
                                          cfg.seed);
    } catch (const Error& e) {
      rep.errors.push_back(std::string("hessian: ") + e.what());
    }
  }

  // recorded invariants
  auto add_check = [&](const std::string& name, bool ok, double margin,
                       std::string detail = "") {
    rep.checks.push_back({name, ok, margin, std::move(detail)});
  };

  if (rep.conjugate_radius.is_finite()) {
    const double lhs = rep.focal_radius.as_double();
    const double rhs = 0.5 * rep.conjugate_radius.value() + 1e-3;
    add_check("focal_le_half_conjugate", lhs <= rhs, rhs - lhs);
  } else {
    add_check("focal_le_half_conjugate", true, kInf, "conjugate radius beyond horizon");
  }

  if (rep.convexity_oracle) {
    const double r_or = rep.convexity_oracle->oracle();
    const double rhs = rep.focal_radius.as_double() + 0.02;
    const bool vac = !rep.focal_radius.is_finite() ||
                     !rep.convexity_oracle->witness_at_top;
    add_check("oracle_le_focal", vac || r_or <= rhs,
              std::min(rhs - r_or, kInf));

    if (rep.convexity_formula.is_finite() && rep.convexity_oracle->witness_at_top) {
      const double rel = std::abs(rep.convexity_formula.value() - r_or) /
                         rep.convexity_formula.value();
      add_check("r_formula_vs_oracle", rel <= 0.04, 0.04 - rel,
                "relative difference " + std::to_string(rel));
    }
  }

  {
    const bool both_inf =
        !rep.inj_formula.is_finite() && !rep.inj_oracle.is_finite();
    if (both_inf) {
      add_check("inj_formula_vs_oracle", true, kInf, "both beyond horizon");
    } else if (rep.inj_formula.is_finite() && rep.inj_oracle.is_finite()) {
      const double rel = std::abs(rep.inj_formula.value() - rep.inj_oracle.value()) /
                         rep.inj_formula.value();
      add_check("inj_formula_vs_oracle", rel <= 0.02, 0.02 - rel,
                "relative difference " + std::to_string(rel));
    } else if (cfg.with_cut_oracle) {
      add_check("inj_formula_vs_oracle", false, -kInf, "one side beyond horizon");
    }
  }

  add_check("focal_le_conjugate_per_direction", focal_le_conj, 0.0);
  add_check("wronskian_drift", max_wronskian <= 1e-6, 1e-6 - max_wronskian);
  if (rep.hessian_minimum)
    add_check("hessian_positive", *rep.hessian_minimum > 0.0, *rep.hessian_minimum);

  return rep;
}

}  // namespace radiuslab
