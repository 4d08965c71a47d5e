#include "radiuslab/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "engine.hpp"

namespace radiuslab {

//--------------------------------------------------------------------------
// chart helpers

double metric_speed(const ManifoldDescriptor& m, const ChartPoint& p,
                    const ChartVector& v) {
  if (!m.polar_chart()) return std::hypot(v[0], v[1]);
  const double f = m.profile().f(std::max(p[0], 0.0));
  return std::hypot(v[0], f * v[1]);
}

GeodesicState GeodesicState::unit(const ManifoldDescriptor& m, const ChartPoint& p,
                                  const ChartVector& direction) {
  const double s = metric_speed(m, p, direction);
  if (!(s > 0.0)) throw InvalidInput("GeodesicState: zero direction");
  GeodesicState st;
  st.position = p;
  st.velocity = {direction[0] / s, direction[1] / s};
  return st;
}

GeodesicState direction_state(const ManifoldDescriptor& m, const ChartPoint& p,
                              double angle) {
  GeodesicState st;
  st.position = p;
  if (!m.polar_chart()) {
    st.velocity = {std::cos(angle), std::sin(angle)};
    return st;
  }
  if (p[0] <= 0.0) {
    // pole: radial ray along theta = angle
    st.position = {0.0, angle};
    st.velocity = {1.0, 0.0};
    return st;
  }
  const double f = m.profile().f(p[0]);
  st.velocity = {std::cos(angle), std::sin(angle) / f};
  return st;
}

double chart_distance_proxy(const ManifoldDescriptor& m, const ChartPoint& a,
                            const ChartPoint& b) {
  if (!m.polar_chart()) {
    double dx = std::remainder(a[0] - b[0], m.l1());
    double dy = std::remainder(a[1] - b[1], m.l2());
    return std::hypot(dx, dy);
  }
  const double dr = a[0] - b[0];
  const double dth = wrap_angle(a[1] - b[1]);
  const double fmid = m.profile().f(std::max(0.5 * (a[0] + b[0]), 0.0));
  return std::hypot(dr, fmid * dth);
}

//--------------------------------------------------------------------------
// integration engine

namespace {

constexpr double kPoleWindow = 0.05;

struct EngineState {
  // r, theta, vr, vtheta, j, jp, j2, j2p
  std::array<double, 8> x{};
};

// polar geodesic system; torus uses the same layout with zero Christoffels
inline void derivs(const ManifoldDescriptor& m, bool with_jacobi,
                   const std::array<double, 8>& s, std::array<double, 8>& d) {
  if (m.polar_chart()) {
    double f, fp;
    const double r = std::max(s[0], 1e-12);
    m.profile().eval(r, f, fp);
    d[0] = s[2];
    d[1] = s[3];
    d[2] = f * fp * s[3] * s[3];
    d[3] = -2.0 * (fp / f) * s[2] * s[3];
    if (with_jacobi) {
      const double K = m.profile().curvature(r);
      d[4] = s[5];
      d[5] = -K * s[4];
      d[6] = s[7];
      d[7] = -K * s[6];
    }
  } else {
    d[0] = s[2];
    d[1] = s[3];
    d[2] = d[3] = 0.0;
    if (with_jacobi) {
      d[4] = s[5];
      d[5] = 0.0;
      d[6] = s[7];
      d[7] = 0.0;
    }
  }
  if (!with_jacobi) d[4] = d[5] = d[6] = d[7] = 0.0;
}

inline void rk4_step(const ManifoldDescriptor& m, bool with_jacobi,
                     std::array<double, 8>& s, double h) {
  std::array<double, 8> k1, k2, k3, k4, tmp;
  derivs(m, with_jacobi, s, k1);
  for (int i = 0; i < 8; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
  derivs(m, with_jacobi, tmp, k2);
  for (int i = 0; i < 8; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
  derivs(m, with_jacobi, tmp, k3);
  for (int i = 0; i < 8; ++i) tmp[i] = s[i] + h * k3[i];
  derivs(m, with_jacobi, tmp, k4);
  for (int i = 0; i < 8; ++i)
    s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// exact propagator of (j, j') over dt with constant curvature K
inline void jacobi_propagate_const(double K, double dt, double& j, double& jp) {
  if (K > 0.0) {
    const double w = std::sqrt(K);
    const double c = std::cos(w * dt), s = std::sin(w * dt);
    const double nj = c * j + (s / w) * jp;
    jp = -w * s * j + c * jp;
    j = nj;
  } else if (K < 0.0) {
    const double w = std::sqrt(-K);
    const double c = std::cosh(w * dt), s = std::sinh(w * dt);
    const double nj = c * j + (s / w) * jp;
    jp = w * s * j + c * jp;
    j = nj;
  } else {
    j += dt * jp;
  }
}

//--------------------------------------------------------------------------
// constant-curvature pole-cap transit
//
// Inside the cap the surface is a round sphere / plane / hyperboloid, so the
// crossing is advanced with the exact model instead of integrating the
// coordinate-singular polar system. `far_side` selects the antipodal cap of a
// closed (sin) profile.

struct Vec3 {
  double x, y, z;
};

struct TransitResult {
  std::array<double, 4> state;  // chart state at the end
  double duration;
  bool ended_inside;  // reached the requested arclength inside the cap
};

// samples are emitted by the caller via this callback
using EmitFn = void (*)(void*, double tau, const std::array<double, 4>&);

struct SphereModel {
  double s;  // 1/sqrt(K)
  Vec3 embed(double r, double th) const {
    const double a = r / s;
    return {s * std::sin(a) * std::cos(th), s * std::sin(a) * std::sin(th),
            s * std::cos(a)};
  }
  void frame(double r, double th, Vec3& er, Vec3& et) const {
    const double a = r / s;
    er = {std::cos(a) * std::cos(th), std::cos(a) * std::sin(th), -std::sin(a)};
    et = {-std::sin(th), std::cos(th), 0.0};
  }
  double f(double r) const { return s * std::sin(r / s); }
};

struct HyperModel {
  double s;  // 1/sqrt(-K)
  Vec3 embed(double r, double th) const {
    const double a = r / s;
    return {s * std::sinh(a) * std::cos(th), s * std::sinh(a) * std::sin(th),
            s * std::cosh(a)};
  }
  void frame(double r, double th, Vec3& er, Vec3& et) const {
    const double a = r / s;
    er = {std::cosh(a) * std::cos(th), std::cosh(a) * std::sin(th), std::sinh(a)};
    et = {-std::sin(th), std::cos(th), 0.0};
  }
  double f(double r) const { return s * std::sinh(r / s); }
};

double unwrap_theta(double raw, double prev) { return prev + wrap_angle(raw - prev); }

// Advance through the spherical cap (K>0). Window boundary radii given by
// r_exit_near (>0) and, on closed profiles, r_exit_far.
TransitResult transit_sphere(double K, const std::array<double, 4>& in,
                             double t_budget, double r_exit_near, double r_exit_far,
                             double emit_dt, void* ctx, EmitFn emit) {
  SphereModel mod{1.0 / std::sqrt(K)};
  const double s = mod.s;
  Vec3 P = mod.embed(in[0], in[1]);
  Vec3 er, et;
  mod.frame(in[0], in[1], er, et);
  const double f0 = mod.f(in[0]);
  Vec3 V{in[2] * er.x + f0 * in[3] * et.x, in[2] * er.y + f0 * in[3] * et.y,
         in[2] * er.z + f0 * in[3] * et.z};
  // renormalize (entry state carries integration rounding)
  const double vn = std::sqrt(V.x * V.x + V.y * V.y + V.z * V.z);
  V = {V.x / vn, V.y / vn, V.z / vn};

  const double A = P.z, B = s * V.z;
  const double C = std::hypot(A, B), phi = std::atan2(B, A);
  // first psi > 0 with z(psi) = z_t and the requested slope sign
  auto first_crossing = [&](double z_t, double slope_sign) {
    if (C < std::abs(z_t)) return kInf;
    const double alpha = std::acos(std::clamp(z_t / C, -1.0, 1.0));
    double best = kInf;
    for (int k = 0; k < 3; ++k) {
      for (double cand : {phi - alpha + 2.0 * kPi * k, phi + alpha + 2.0 * kPi * k}) {
        if (cand < 1e-12) continue;
        const double slope = -C * std::sin(cand - phi);
        if (slope * slope_sign > 1e-15 * C) best = std::min(best, cand);
      }
    }
    return best;
  };
  double psi_exit = first_crossing(s * std::cos(r_exit_near / s), -1.0);
  if (r_exit_far > 0.0)
    psi_exit = std::min(psi_exit, first_crossing(s * std::cos(r_exit_far / s), +1.0));

  double t_exit = psi_exit * s;
  TransitResult out;
  out.ended_inside = t_budget < t_exit;
  out.duration = std::min(t_budget, t_exit);

  auto eval = [&](double t) {
    const double c = std::cos(t / s), sn = std::sin(t / s);
    Vec3 Pt{c * P.x + s * sn * V.x, c * P.y + s * sn * V.y, c * P.z + s * sn * V.z};
    Vec3 Vt{-sn / s * P.x + c * V.x, -sn / s * P.y + c * V.y, -sn / s * P.z + c * V.z};
    const double rho = std::hypot(Pt.x, Pt.y);
    const double r = s * std::atan2(rho, Pt.z);
    const double th = (rho > 1e-300) ? std::atan2(Pt.y, Pt.x) : 0.0;
    Vec3 er2, et2;
    mod.frame(r, th, er2, et2);
    const double vr = Vt.x * er2.x + Vt.y * er2.y + Vt.z * er2.z;
    const double f = std::max(mod.f(r), 1e-300);
    const double vth = (Vt.x * et2.x + Vt.y * et2.y) / f;
    return std::array<double, 4>{r, th, vr, vth};
  };

  double prev_th = in[1];
  for (double tau = emit_dt; tau < out.duration - 1e-12; tau += emit_dt) {
    auto st = eval(tau);
    st[1] = unwrap_theta(st[1], prev_th);
    prev_th = st[1];
    emit(ctx, tau, st);
  }
  out.state = eval(out.duration);
  out.state[1] = unwrap_theta(out.state[1], prev_th);
  return out;
}

TransitResult transit_plane(const std::array<double, 4>& in, double t_budget,
                            double r_exit, double emit_dt, void* ctx, EmitFn emit) {
  const double c = std::cos(in[1]), sn = std::sin(in[1]);
  const double px = in[0] * c, py = in[0] * sn;
  // unit chart velocity -> Euclidean
  const double vx = in[2] * c - in[0] * in[3] * sn;
  const double vy = in[2] * sn + in[0] * in[3] * c;
  const double nv = std::hypot(vx, vy);
  const double ux = vx / nv, uy = vy / nv;
  const double pv = px * ux + py * uy;
  const double disc = pv * pv + (r_exit * r_exit - (px * px + py * py));
  const double t_exit = -pv + std::sqrt(std::max(disc, 0.0));

  TransitResult out;
  out.ended_inside = t_budget < t_exit;
  out.duration = std::min(t_budget, t_exit);

  auto eval = [&](double t) {
    const double x = px + t * ux, y = py + t * uy;
    const double r = std::hypot(x, y);
    const double th = (r > 1e-300) ? std::atan2(y, x) : 0.0;
    const double cc = std::cos(th), ss = std::sin(th);
    const double vr = ux * cc + uy * ss;
    const double vth = (-ux * ss + uy * cc) / std::max(r, 1e-300);
    return std::array<double, 4>{r, th, vr, vth};
  };
  double prev_th = in[1];
  for (double tau = emit_dt; tau < out.duration - 1e-12; tau += emit_dt) {
    auto st = eval(tau);
    st[1] = unwrap_theta(st[1], prev_th);
    prev_th = st[1];
    emit(ctx, tau, st);
  }
  out.state = eval(out.duration);
  out.state[1] = unwrap_theta(out.state[1], prev_th);
  return out;
}

TransitResult transit_hyper(double K, const std::array<double, 4>& in,
                            double t_budget, double r_exit, double emit_dt,
                            void* ctx, EmitFn emit) {
  HyperModel mod{1.0 / std::sqrt(-K)};
  const double s = mod.s;
  Vec3 P = mod.embed(in[0], in[1]);
  Vec3 er, et;
  mod.frame(in[0], in[1], er, et);
  const double f0 = mod.f(in[0]);
  Vec3 V{in[2] * er.x + f0 * in[3] * et.x, in[2] * er.y + f0 * in[3] * et.y,
         in[2] * er.z + f0 * in[3] * et.z};
  const double vn = std::sqrt(std::max(V.x * V.x + V.y * V.y - V.z * V.z, 1e-300));
  V = {V.x / vn, V.y / vn, V.z / vn};

  const double A = P.z, B = s * V.z;
  const double z_t = s * std::cosh(r_exit / s);
  double t_exit;
  if (B >= 0.0) {
    // moving outward already: z = sqrt(A^2-B^2) * cosh(psi - psi0) with psi0 < 0
    const double base = std::sqrt(std::max(A * A - B * B, 1e-300));
    const double psi0 = std::atanh(std::clamp(B / A, -1.0 + 1e-16, 1.0 - 1e-16));
    t_exit = s * (psi0 + std::acosh(std::max(z_t / base, 1.0)));
  } else {
    const double base = std::sqrt(std::max(A * A - B * B, 1e-300));
    const double psi0 = std::atanh(std::clamp(-B / A, -1.0 + 1e-16, 1.0 - 1e-16));
    t_exit = s * (psi0 + std::acosh(std::max(z_t / base, 1.0)));
  }

  TransitResult out;
  out.ended_inside = t_budget < t_exit;
  out.duration = std::min(t_budget, t_exit);

  auto eval = [&](double t) {
    const double c = std::cosh(t / s), sn = std::sinh(t / s);
    Vec3 Pt{c * P.x + s * sn * V.x, c * P.y + s * sn * V.y, c * P.z + s * sn * V.z};
    Vec3 Vt{sn / s * P.x + c * V.x, sn / s * P.y + c * V.y, sn / s * P.z + c * V.z};
    const double rho = std::hypot(Pt.x, Pt.y);
    const double r = s * std::asinh(rho / s);
    const double th = (rho > 1e-300) ? std::atan2(Pt.y, Pt.x) : 0.0;
    Vec3 er2, et2;
    mod.frame(r, th, er2, et2);
    const double vr = Vt.x * er2.x + Vt.y * er2.y - Vt.z * er2.z;
    const double f = std::max(mod.f(r), 1e-300);
    const double vth = (Vt.x * et2.x + Vt.y * et2.y) / f;
    return std::array<double, 4>{r, th, vr, vth};
  };
  double prev_th = in[1];
  for (double tau = emit_dt; tau < out.duration - 1e-12; tau += emit_dt) {
    auto st = eval(tau);
    st[1] = unwrap_theta(st[1], prev_th);
    prev_th = st[1];
    emit(ctx, tau, st);
  }
  out.state = eval(out.duration);
  out.state[1] = unwrap_theta(out.state[1], prev_th);
  return out;
}

struct EmitCtx {
  const ManifoldDescriptor* m;
  GeodesicPath* path;
  std::vector<std::array<double, 4>>* jac;
  bool with_jacobi;
  double t_base;
  std::array<double, 4> jac_state;
  double cap_curvature;
  double last_t;
  double max_drift;
};

void transit_emit(void* vctx, double tau, const std::array<double, 4>& st) {
  auto* ctx = static_cast<EmitCtx*>(vctx);
  const double t = ctx->t_base + tau;
  if (ctx->with_jacobi) {
    const double dt = t - ctx->last_t;
    jacobi_propagate_const(ctx->cap_curvature, dt, ctx->jac_state[0], ctx->jac_state[1]);
    jacobi_propagate_const(ctx->cap_curvature, dt, ctx->jac_state[2], ctx->jac_state[3]);
    ctx->jac->push_back(ctx->jac_state);
  }
  GeodesicSample smp;
  smp.t = t;
  smp.position = {st[0], st[1]};
  smp.velocity = {st[2], st[3]};
  smp.curvature = ctx->cap_curvature;
  ctx->path->samples.push_back(smp);
  const double sp = metric_speed(*ctx->m, smp.position, smp.velocity);
  ctx->max_drift = std::max(ctx->max_drift, std::abs(sp - 1.0));
  ctx->last_t = t;
}

}  // namespace

namespace detail {

CoIntegrated integrate_core(const ManifoldDescriptor& m, const GeodesicState& init,
                            double length, const IntegrationOptions& opts,
                            const JacobiInit* jacobi) {
  if (!(length > 0.0)) throw InvalidInput("integrate_geodesic: length must be positive");
  if (!(opts.step > 0.0)) throw InvalidInput("integrate_geodesic: step must be positive");
  {
    const double sp = metric_speed(m, init.position, init.velocity);
    if (std::abs(sp - 1.0) > 1e-9)
      throw InvalidInput("integrate_geodesic: initial state is not unit-speed");
  }

  const bool with_jacobi = jacobi != nullptr;
  const bool polar = m.polar_chart();
  const double r_max = polar ? m.chart_r_max() : 0.0;
  const bool far_pole = polar && m.profile().has_far_pole();

  // pole window: inside it the constant-curvature cap model advances the
  // crossing exactly; profiles without a constant cap fall back to a thin
  // window plus substepped RK4
  double window = 0.0;
  double cap_k = 0.0;
  if (polar) {
    if (auto cap = m.profile().pole_cap(); cap && cap->radius > 1e-3) {
      window = std::min(kPoleWindow, 0.5 * cap->radius);
      cap_k = cap->curvature;
    } else {
      window = 1e-3;
      cap_k = m.profile().curvature(0.0);
    }
  }

  double h = opts.step;
  for (int attempt = 0;; ++attempt) {
    CoIntegrated out;
    GeodesicPath& path = out.path;
    path.step = h;

    EngineState es;
    es.x = {init.position[0], init.position[1], init.velocity[0], init.velocity[1],
            0.0, 0.0, 0.0, 0.0};
    if (with_jacobi) {
      es.x[4] = jacobi->j0;
      es.x[5] = jacobi->j0p;
      es.x[6] = jacobi->j20;
      es.x[7] = jacobi->j20p;
    }

    EmitCtx ctx{&m, &path, &out.jacobi, with_jacobi, 0.0,
                {es.x[4], es.x[5], es.x[6], es.x[7]}, cap_k, 0.0, 0.0};

    auto emit_state = [&](double t, const std::array<double, 8>& s) {
      GeodesicSample smp;
      smp.t = t;
      smp.position = {s[0], s[1]};
      smp.velocity = {s[2], s[3]};
      smp.curvature = polar ? m.profile().curvature(std::max(s[0], 0.0)) : 0.0;
      path.samples.push_back(smp);
      if (with_jacobi) out.jacobi.push_back({s[4], s[5], s[6], s[7]});
      const double sp = metric_speed(m, smp.position, smp.velocity);
      ctx.max_drift = std::max(ctx.max_drift, std::abs(sp - 1.0));
      ctx.last_t = t;
    };

    emit_state(0.0, es.x);

    double t = 0.0;
    bool failed_speed = false;
    while (t < length - 1e-12) {
      // transit through the pole cap
      if (polar) {
        const double r = es.x[0];
        const bool near_pole = r < window && (es.x[2] < 0.0 || r < 1e-9);
        const bool near_far = far_pole && r > r_max - window && es.x[2] > 0.0;
        if (near_pole || near_far) {
          ctx.t_base = t;
          ctx.jac_state = {es.x[4], es.x[5], es.x[6], es.x[7]};
          std::array<double, 4> chart_in{es.x[0], es.x[1], es.x[2], es.x[3]};
          TransitResult tr;
          if (cap_k > 0.0) {
            tr = transit_sphere(cap_k, chart_in, length - t, window,
                                far_pole ? r_max - window : -1.0, h, &ctx,
                                &transit_emit);
          } else if (cap_k < 0.0) {
            tr = transit_hyper(cap_k, chart_in, length - t, window, h, &ctx,
                               &transit_emit);
          } else {
            tr = transit_plane(chart_in, length - t, window, h, &ctx, &transit_emit);
          }
          // final state of the transit
          const double t_end = t + tr.duration;
          const double dt_last = t_end - ctx.last_t;
          if (with_jacobi) {
            jacobi_propagate_const(cap_k, dt_last, ctx.jac_state[0], ctx.jac_state[1]);
            jacobi_propagate_const(cap_k, dt_last, ctx.jac_state[2], ctx.jac_state[3]);
          }
          es.x = {tr.state[0], tr.state[1], tr.state[2], tr.state[3],
                  ctx.jac_state[0], ctx.jac_state[1], ctx.jac_state[2],
                  ctx.jac_state[3]};
          t = t_end;
          emit_state(t, es.x);
          continue;
        }
      }

      double dt = std::min(h, length - t);
      if (polar && es.x[0] < 0.04)  // keep h * (f'/f) small near the pole
        dt = std::min(dt, std::max(es.x[0] / 8.0, h / 64.0));

      std::array<double, 8> trial = es.x;
      rk4_step(m, with_jacobi, trial, dt);

      if (polar && !far_pole && trial[0] >= r_max) {
        // bisect the step size to land on the boundary
        double lo = 0.0, hi = dt;
        std::array<double, 8> at_hi = trial;
        for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
          const double mid = 0.5 * (lo + hi);
          std::array<double, 8> probe = es.x;
          rk4_step(m, with_jacobi, probe, mid);
          if (probe[0] >= r_max) {
            hi = mid;
            at_hi = probe;
          } else {
            lo = mid;
          }
        }
        at_hi[0] = std::min(at_hi[0], r_max);
        t += hi;
        es.x = at_hi;
        emit_state(t, es.x);
        path.left_domain = true;
        break;
      }

      es.x = trial;
      t += dt;
      emit_state(t, es.x);

      if (ctx.max_drift > opts.speed_tolerance) {
        failed_speed = true;
        break;
      }
    }

    path.total_length = t;
    path.max_speed_drift = ctx.max_drift;

    if (!failed_speed && ctx.max_drift <= opts.speed_tolerance) return out;
    if (attempt >= opts.max_halvings)
      throw StepTooCoarse("integrate_geodesic: speed drift exceeds tolerance at the smallest step");
    h *= 0.5;
  }
}

ClosestApproach closest_refined(const ManifoldDescriptor& m, const GeodesicPath& path,
                                std::size_t i, const ChartPoint& target) {
  ClosestApproach out;
  const auto& smp = path.samples;
  out.t = smp[i].t;
  out.proxy = chart_distance_proxy(m, smp[i].position, target);

  if (i > 0 && i + 1 < smp.size()) {
    // the squared proxy is locally quadratic in t; fit through three samples
    const double pm = chart_distance_proxy(m, smp[i - 1].position, target);
    const double p0 = out.proxy;
    const double pp = chart_distance_proxy(m, smp[i + 1].position, target);
    const double tm = smp[i - 1].t, t0 = smp[i].t, tp = smp[i + 1].t;
    const double qm = pm * pm, q0 = p0 * p0, qp = pp * pp;
    const double denom = qm - 2 * q0 + qp;
    if (denom > 1e-300) {
      double dt = 0.5 * (qm - qp) / denom * (0.5 * (tp - tm));
      dt = std::clamp(dt, tm - t0, tp - t0);
      out.t = t0 + dt;
      const double qmin = q0 - 0.125 * (qm - qp) * (qm - qp) / denom;
      out.proxy = std::sqrt(std::max(qmin, 0.0));
    }
  }

  const auto& s = smp[i];
  double dr, dt, v_r, v_t;
  if (m.polar_chart()) {
    const double fmid = m.profile().f(std::max(0.5 * (s.position[0] + target[0]), 1e-12));
    dr = target[0] - s.position[0];
    dt = fmid * wrap_angle(target[1] - s.position[1]);
    v_r = s.velocity[0];
    v_t = m.profile().f(std::max(s.position[0], 1e-12)) * s.velocity[1];
  } else {
    dr = std::remainder(target[0] - s.position[0], m.l1());
    dt = std::remainder(target[1] - s.position[1], m.l2());
    v_r = s.velocity[0];
    v_t = s.velocity[1];
  }
  out.side = v_r * dt - v_t * dr;
  return out;
}

ChartPoint position_at(const GeodesicPath& path, double t) {
  const auto& smp = path.samples;
  if (t <= smp.front().t) return smp.front().position;
  if (t >= smp.back().t) return smp.back().position;
  std::size_t lo = 0, hi = smp.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (smp[mid].t <= t)
      lo = mid;
    else
      hi = mid;
  }
  const double a = (t - smp[lo].t) / (smp[hi].t - smp[lo].t);
  return {(1 - a) * smp[lo].position[0] + a * smp[hi].position[0],
          (1 - a) * smp[lo].position[1] + a * smp[hi].position[1]};
}

}  // namespace detail

GeodesicPath integrate_geodesic(const ManifoldDescriptor& m, const GeodesicState& init,
                                double length, const IntegrationOptions& opts) {
  return detail::integrate_core(m, init, length, opts, nullptr).path;
}

ChartPoint exp_map(const ManifoldDescriptor& m, const ChartPoint& p,
                   const ChartVector& v, double step) {
  const double norm = metric_speed(m, p, v);
  if (norm == 0.0) return p;
  GeodesicState st = GeodesicState::unit(m, p, v);
  IntegrationOptions opts;
  opts.step = step;
  GeodesicPath path = detail::integrate_core(m, st, norm, opts, nullptr).path;
  if (path.left_domain && path.total_length < norm - 1e-9)
    throw LeftDomain(path.total_length);
  return path.back().position;
}

//--------------------------------------------------------------------------
// closed-form families: embeddings, distances, connections

namespace {

struct V3 {
  double x, y, z;
};
inline V3 cross(const V3& a, const V3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double dot(const V3& a, const V3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const V3& a) { return std::sqrt(dot(a, a)); }
inline V3 scaled(const V3& a, double c) { return {a.x * c, a.y * c, a.z * c}; }
inline V3 add(const V3& a, const V3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }

V3 sphere_unit(const ChartPoint& p, double R) {
  const double a = p[0] / R;
  return {std::sin(a) * std::cos(p[1]), std::sin(a) * std::sin(p[1]), std::cos(a)};
}

double sphere_distance(const ManifoldDescriptor& m, const ChartPoint& x,
                       const ChartPoint& y) {
  const double R = m.sphere_radius();
  const V3 a = sphere_unit(x, R), b = sphere_unit(y, R);
  return R * std::atan2(norm(cross(a, b)), dot(a, b));
}

// sampled great-circle arc from unit vectors a toward direction w (unit,
// orthogonal to a), of the given length
GeodesicPath sphere_arc(const ManifoldDescriptor& m, const V3& a, const V3& w,
                        double arc_len, double step) {
  const double R = m.sphere_radius();
  GeodesicPath path;
  path.step = step;
  path.total_length = arc_len;
  const int n = std::max(1, static_cast<int>(std::ceil(arc_len / step)));
  path.samples.reserve(n + 1);
  double prev_th = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? arc_len : i * step * arc_len / (n * step);
    const double c = std::cos(t / R), s = std::sin(t / R);
    V3 P = add(scaled(a, c), scaled(w, s));
    V3 V = add(scaled(a, -s / R), scaled(w, c / R));  // d/dt of unit vector
    const double rho = std::hypot(P.x, P.y);
    double r = R * std::atan2(rho, P.z);
    double th = (rho > 1e-300) ? std::atan2(P.y, P.x) : prev_th;
    if (i > 0) th = unwrap_theta(th, prev_th);
    prev_th = th;
    // chart velocity (V is the derivative of the unit embed; scale R)
    const double aa = r / R;
    const V3 er{std::cos(aa) * std::cos(th), std::cos(aa) * std::sin(th), -std::sin(aa)};
    const V3 et{-std::sin(th), std::cos(th), 0.0};
    const double f = std::max(R * std::sin(aa), 1e-300);
    GeodesicSample smp;
    smp.t = t;
    smp.position = {r, th};
    smp.velocity = {R * dot(V, er), R * dot(V, et) / f};
    smp.curvature = 1.0 / (R * R);
    path.samples.push_back(smp);
  }
  return path;
}

ConnectResult sphere_connect(const ManifoldDescriptor& m, const ChartPoint& x,
                             const ChartPoint& y, double max_len,
                             const ShootingOptions& opts) {
  const double R = m.sphere_radius();
  const V3 a = sphere_unit(x, R), b = sphere_unit(y, R);
  const double d = sphere_distance(m, x, y);
  ConnectResult res;

  V3 w;  // initial great-circle direction toward y
  const double sigma = d / R;
  if (sigma < 1e-12) {
    w = {0.0, 0.0, 0.0};  // degenerate; only wrap arcs make sense
  } else if (sigma > kPi - 1e-9) {
    // antipodal: continuum of minimal arcs; report two representatives
    V3 any{1.0, 0.0, 0.0};
    if (std::abs(dot(any, a)) > 0.9) any = {0.0, 1.0, 0.0};
    w = add(any, scaled(a, -dot(any, a)));
    w = scaled(w, 1.0 / norm(w));
  } else {
    w = add(b, scaled(a, -std::cos(sigma)));
    w = scaled(w, 1.0 / (norm(w) > 0 ? norm(w) : 1.0));
  }

  auto push = [&](const V3& dir, double len) {
    if (len > max_len + 1e-12 || len < 1e-12) return;
    GeodesicPath p = sphere_arc(m, a, dir, len, opts.step);
    res.geodesics.push_back(std::move(p));
    res.lengths.push_back(len);
    const double aa = x[0] / R;
    const V3 er{std::cos(aa) * std::cos(x[1]), std::cos(aa) * std::sin(x[1]),
                -std::sin(aa)};
    const V3 et{-std::sin(x[1]), std::cos(x[1]), 0.0};
    res.initial_angles.push_back(std::atan2(dot(dir, et), dot(dir, er)));
  };

  const double circ = 2.0 * kPi * R;
  for (int k = 0; k * circ <= max_len + d; ++k) {
    if (sigma >= 1e-12) {
      push(w, d + k * circ);
      push(scaled(w, -1.0), (circ - d) + k * circ);
    } else if (k > 0) {
      push({1, 0, 0}, k * circ);  // closed great circles through x=y
    }
  }
  std::vector<std::size_t> order(res.lengths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto i, auto j) { return res.lengths[i] < res.lengths[j]; });
  ConnectResult sorted;
  for (auto i : order) {
    sorted.geodesics.push_back(std::move(res.geodesics[i]));
    sorted.lengths.push_back(res.lengths[i]);
    sorted.initial_angles.push_back(res.initial_angles[i]);
  }
  if (sigma < 1e-12) {
    // trivial connection of a point to itself
    sorted.minimal_length = 0.0;
    sorted.multiplicity = 1;
    if (!sorted.lengths.empty()) sorted.minimal_length = 0.0;
  }
  if (!sorted.lengths.empty()) {
    sorted.minimal_length = sorted.lengths.front();
    sorted.multiplicity = 0;
    for (double L : sorted.lengths)
      if (L <= sorted.minimal_length + opts.tie_tolerance) ++sorted.multiplicity;
    if (sigma > kPi - 1e-9) sorted.multiplicity = std::max(sorted.multiplicity, 2);
  } else if (sigma < 1e-12) {
    sorted.minimal_length = 0.0;
    sorted.multiplicity = 1;
  }
  return sorted;
}

double torus_distance(const ManifoldDescriptor& m, const ChartPoint& x,
                      const ChartPoint& y) {
  const double dx = std::remainder(y[0] - x[0], m.l1());
  const double dy = std::remainder(y[1] - x[1], m.l2());
  return std::hypot(dx, dy);
}

GeodesicPath torus_segment(const ChartPoint& x, double dx, double dy, double step) {
  GeodesicPath path;
  const double len = std::hypot(dx, dy);
  path.step = step;
  path.total_length = len;
  const double ux = (len > 0) ? dx / len : 1.0, uy = (len > 0) ? dy / len : 0.0;
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  path.samples.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? len : std::min(i * step, len);
    GeodesicSample smp;
    smp.t = t;
    smp.position = {x[0] + t * ux, x[1] + t * uy};
    smp.velocity = {ux, uy};
    smp.curvature = 0.0;
    path.samples.push_back(smp);
  }
  return path;
}

ConnectResult torus_connect(const ManifoldDescriptor& m, const ChartPoint& x,
                            const ChartPoint& y, double max_len,
                            const ShootingOptions& opts) {
  ConnectResult res;
  const double bx = y[0] - x[0], by = y[1] - x[1];
  const int k1 = static_cast<int>(std::ceil((max_len + std::abs(bx)) / m.l1())) + 1;
  const int k2 = static_cast<int>(std::ceil((max_len + std::abs(by)) / m.l2())) + 1;
  std::vector<std::pair<double, std::pair<double, double>>> cands;
  for (int i = -k1; i <= k1; ++i) {
    for (int j = -k2; j <= k2; ++j) {
      const double dx = bx + i * m.l1(), dy = by + j * m.l2();
      const double L = std::hypot(dx, dy);
      if (L <= max_len + 1e-12 && L > 1e-12) cands.push_back({L, {dx, dy}});
    }
  }
  const bool same_point = torus_distance(m, x, y) < 1e-12;
  std::sort(cands.begin(), cands.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [L, d] : cands) {
    res.geodesics.push_back(torus_segment(x, d.first, d.second, opts.step));
    res.lengths.push_back(L);
    res.initial_angles.push_back(std::atan2(d.second, d.first));
  }
  if (!res.lengths.empty()) {
    res.minimal_length = res.lengths.front();
    res.multiplicity = 0;
    for (double L : res.lengths)
      if (L <= res.minimal_length + opts.tie_tolerance) ++res.multiplicity;
  } else if (same_point) {
    res.minimal_length = 0.0;
    res.multiplicity = 1;
  }
  return res;
}

V3 hyper_embed(const ChartPoint& p, double s) {
  const double a = p[0] / s;
  return {s * std::sinh(a) * std::cos(p[1]), s * std::sinh(a) * std::sin(p[1]),
          s * std::cosh(a)};
}

double hyper_distance(const ManifoldDescriptor& m, const ChartPoint& x,
                      const ChartPoint& y) {
  const double s = 1.0 / std::sqrt(-m.hyperbolic_curvature());
  const double dr = (x[0] - y[0]) / s;
  const double sh = std::sinh(0.5 * dr);
  const double st = std::sin(0.5 * (x[1] - y[1]));
  const double q = sh * sh + std::sinh(x[0] / s) * std::sinh(y[0] / s) * st * st;
  return 2.0 * s * std::asinh(std::sqrt(std::max(q, 0.0)));
}

GeodesicPath hyper_segment(const ManifoldDescriptor& m, const ChartPoint& x,
                           const ChartPoint& y, double d, double step) {
  const double s = 1.0 / std::sqrt(-m.hyperbolic_curvature());
  GeodesicPath path;
  path.step = step;
  path.total_length = d;
  const V3 P1 = hyper_embed(x, s), P2 = hyper_embed(y, s);
  const double chd = std::cosh(d / s), shd = std::sinh(d / s);
  V3 V{(P2.x - chd * P1.x) / (s * shd), (P2.y - chd * P1.y) / (s * shd),
       (P2.z - chd * P1.z) / (s * shd)};
  const int n = std::max(1, static_cast<int>(std::ceil(d / step)));
  path.samples.reserve(n + 1);
  double prev_th = x[1];
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? d : std::min(i * step, d);
    const double c = std::cosh(t / s), sn = std::sinh(t / s);
    V3 P{c * P1.x + s * sn * V.x, c * P1.y + s * sn * V.y, c * P1.z + s * sn * V.z};
    V3 Vt{sn / s * P1.x + c * V.x, sn / s * P1.y + c * V.y, sn / s * P1.z + c * V.z};
    const double rho = std::hypot(P.x, P.y);
    const double r = s * std::asinh(rho / s);
    double th = (rho > 1e-300) ? std::atan2(P.y, P.x) : prev_th;
    if (i > 0) th = unwrap_theta(th, prev_th);
    prev_th = th;
    const double a = r / s;
    const V3 er{std::cosh(a) * std::cos(th), std::cosh(a) * std::sin(th), std::sinh(a)};
    const V3 et{-std::sin(th), std::cos(th), 0.0};
    const double f = std::max(s * std::sinh(a), 1e-300);
    GeodesicSample smp;
    smp.t = t;
    smp.position = {r, th};
    smp.velocity = {Vt.x * er.x + Vt.y * er.y - Vt.z * er.z,
                    (Vt.x * et.x + Vt.y * et.y) / f};
    smp.curvature = m.hyperbolic_curvature();
    path.samples.push_back(smp);
  }
  return path;
}

ConnectResult hyper_connect(const ManifoldDescriptor& m, const ChartPoint& x,
                            const ChartPoint& y, double max_len,
                            const ShootingOptions& opts) {
  ConnectResult res;
  const double d = hyper_distance(m, x, y);
  if (d < 1e-12) {
    res.minimal_length = 0.0;
    res.multiplicity = 1;
    return res;
  }
  if (d <= max_len + 1e-12) {
    GeodesicPath p = hyper_segment(m, x, y, d, opts.step);
    res.initial_angles.push_back(
        std::atan2(p.front().velocity[1] * m.profile().f(std::max(x[0], 1e-300)),
                   p.front().velocity[0]));
    res.geodesics.push_back(std::move(p));
    res.lengths.push_back(d);
    res.minimal_length = d;
    res.multiplicity = 1;
  }
  return res;
}

//--------------------------------------------------------------------------
// warped surfaces: multistart shooting

struct Crossing {
  double proxy;  // closest-approach chart-metric distance
  double t;      // arclength at the closest approach
  double side;   // sign of the transverse miss
};

// closest approach of the geodesic from `state` to the target y
Crossing shoot_once(const ManifoldDescriptor& m, const GeodesicState& state,
                    const ChartPoint& y, double t_max, double step) {
  IntegrationOptions opts;
  opts.step = step;
  GeodesicPath path = detail::integrate_core(m, state, t_max, opts, nullptr).path;
  double best_p = kInf;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < path.samples.size(); ++i) {
    const double p = chart_distance_proxy(m, path.samples[i].position, y);
    if (p < best_p) {
      best_p = p;
      best_i = i;
    }
  }
  const detail::ClosestApproach ca = detail::closest_refined(m, path, best_i, y);
  return Crossing{ca.proxy, ca.t, ca.side};
}

ConnectResult warped_connect(const ManifoldDescriptor& m, const ChartPoint& x,
                             const ChartPoint& y, double max_len,
                             const ShootingOptions& opts) {
  ConnectResult res;
  if (chart_distance_proxy(m, x, y) < 1e-12) {
    res.minimal_length = 0.0;
    res.multiplicity = 1;
    return res;
  }

  int used = 0;
  const double gate = 0.25;
  struct Cand {
    double angle, proxy, t, side;
  };
  std::vector<Cand> grid(opts.n_starts);
  for (int i = 0; i < opts.n_starts; ++i) {
    const double a = 2.0 * kPi * i / opts.n_starts;
    Crossing c = shoot_once(m, direction_state(m, x, a), y, max_len, opts.step);
    ++used;
    grid[i] = {a, c.proxy, c.t, c.side};
  }

  struct Sol {
    double angle, length, residual;
  };
  std::vector<Sol> sols;

  auto refine_bisect = [&](double a_lo, double s_lo, double a_hi, double s_hi) {
    (void)s_lo;
    (void)s_hi;
    double lo = a_lo, hi = a_hi;
    double side_lo = s_lo;
    Crossing best{kInf, 0, 0};
    double best_angle = 0.5 * (lo + hi);
    for (int it = 0; it < opts.refine_iterations && used < opts.budget; ++it) {
      const double mid = 0.5 * (lo + hi);
      Crossing c = shoot_once(m, direction_state(m, x, mid), y, max_len, opts.step);
      ++used;
      if (c.proxy < best.proxy) {
        best = c;
        best_angle = mid;
      }
      if (c.proxy < opts.residual_tolerance && it > 4) break;
      if (c.side * side_lo <= 0.0) {
        hi = mid;
      } else {
        lo = mid;
        side_lo = c.side;
      }
    }
    if (best.proxy < opts.residual_tolerance)
      sols.push_back({best_angle, best.t, best.proxy});
  };

  auto refine_golden = [&](double a_lo, double a_hi) {
    const double gr = 0.6180339887498949;
    double lo = a_lo, hi = a_hi;
    double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
    Crossing c1 = shoot_once(m, direction_state(m, x, m1), y, max_len, opts.step);
    Crossing c2 = shoot_once(m, direction_state(m, x, m2), y, max_len, opts.step);
    used += 2;
    Crossing best = c1.proxy < c2.proxy ? c1 : c2;
    double best_angle = c1.proxy < c2.proxy ? m1 : m2;
    for (int it = 0; it < opts.refine_iterations && used < opts.budget; ++it) {
      if (c1.proxy < c2.proxy) {
        hi = m2;
        m2 = m1;
        c2 = c1;
        m1 = hi - gr * (hi - lo);
        c1 = shoot_once(m, direction_state(m, x, m1), y, max_len, opts.step);
        ++used;
      } else {
        lo = m1;
        m1 = m2;
        c1 = c2;
        m2 = lo + gr * (hi - lo);
        c2 = shoot_once(m, direction_state(m, x, m2), y, max_len, opts.step);
        ++used;
      }
      const Crossing& c = c1.proxy < c2.proxy ? c1 : c2;
      if (c.proxy < best.proxy) {
        best = c;
        best_angle = c1.proxy < c2.proxy ? m1 : m2;
      }
      if (best.proxy < opts.residual_tolerance) break;
    }
    if (best.proxy < opts.residual_tolerance)
      sols.push_back({best_angle, best.t, best.proxy});
  };

  for (int i = 0; i < opts.n_starts; ++i) {
    const Cand& a = grid[i];
    const Cand& b = grid[(i + 1) % opts.n_starts];
    const double b_angle = (i + 1 < opts.n_starts) ? b.angle : b.angle + 2.0 * kPi;
    if (used >= opts.budget) {
      res.incomplete = true;
      break;
    }
    // sign-change brackets are refined unconditionally: far targets inflate
    // the miss by the Jacobi spread, so no proxy gate is sound for them
    if (a.side * b.side < 0.0 &&
        std::abs(a.t - b.t) < std::max(0.5, 4.0 * (a.proxy + b.proxy))) {
      refine_bisect(a.angle, a.side, b_angle, b.side);
    } else if (a.proxy <= gate && a.proxy <= b.proxy &&
               a.proxy <= grid[(i + opts.n_starts - 1) % opts.n_starts].proxy) {
      refine_golden(a.angle - 2.0 * kPi / opts.n_starts,
                    a.angle + 2.0 * kPi / opts.n_starts);
    }
  }

  // dedupe by refined angle
  std::sort(sols.begin(), sols.end(),
            [](const Sol& a, const Sol& b) { return a.length < b.length; });
  std::vector<Sol> kept;
  for (const Sol& s : sols) {
    bool dup = false;
    for (const Sol& k : kept) {
      if (std::abs(wrap_angle(s.angle - k.angle)) < opts.angle_tolerance) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(s);
  }

  for (const Sol& s : kept) {
    if (s.length > max_len + 1e-9 || s.length <= 1e-12) continue;
    IntegrationOptions iopts;
    iopts.step = opts.step;
    GeodesicPath p =
        detail::integrate_core(m, direction_state(m, x, s.angle), s.length, iopts,
                               nullptr)
            .path;
    res.geodesics.push_back(std::move(p));
    res.lengths.push_back(s.length);
    res.initial_angles.push_back(s.angle);
  }
  if (!res.lengths.empty()) {
    res.minimal_length = res.lengths.front();
    res.multiplicity = 0;
    for (double L : res.lengths)
      if (L <= res.minimal_length + opts.tie_tolerance) ++res.multiplicity;
  }
  return res;
}

}  // namespace

DistanceResult distance(const ManifoldDescriptor& m, const ChartPoint& x,
                        const ChartPoint& y, const ShootingOptions& opts) {
  DistanceResult res;
  switch (m.kind()) {
    case ManifoldDescriptor::Kind::Sphere:
      res.length = sphere_distance(m, x, y);
      res.certified = true;
      return res;
    case ManifoldDescriptor::Kind::FlatTorus:
      res.length = torus_distance(m, x, y);
      res.certified = true;
      return res;
    case ManifoldDescriptor::Kind::HyperbolicPlane:
      res.length = hyper_distance(m, x, y);
      res.certified = true;
      return res;
    case ManifoldDescriptor::Kind::WarpedSurface: {
      // search up to the through-pole upper bound
      const double ub = x[0] + y[0] + 4.0 * opts.step;
      ConnectResult c = warped_connect(m, x, y, ub, opts);
      if (c.lengths.empty()) {
        if (chart_distance_proxy(m, x, y) < 1e-12) {
          res.length = 0.0;
          res.certified = true;
          return res;
        }
        throw NotConverged("distance: no certified shot within the budget");
      }
      res.length = c.minimal_length;
      res.residual = chart_distance_proxy(m, c.geodesics.front().back().position, y);
      res.certified = res.residual < opts.residual_tolerance;
      return res;
    }
  }
  throw InvalidInput("distance: unknown manifold kind");
}

ConnectResult connect(const ManifoldDescriptor& m, const ChartPoint& x,
                      const ChartPoint& y, double max_len,
                      const ShootingOptions& opts) {
  switch (m.kind()) {
    case ManifoldDescriptor::Kind::Sphere:
      return sphere_connect(m, x, y, max_len, opts);
    case ManifoldDescriptor::Kind::FlatTorus:
      return torus_connect(m, x, y, max_len, opts);
    case ManifoldDescriptor::Kind::HyperbolicPlane:
      return hyper_connect(m, x, y, max_len, opts);
    case ManifoldDescriptor::Kind::WarpedSurface:
      return warped_connect(m, x, y, max_len, opts);
  }
  throw InvalidInput("connect: unknown manifold kind");
}

namespace {

struct ReturnMin {
  double t, proxy, side;
};

// local minima of the distance-to-base proxy along one swept direction
std::vector<ReturnMin> loop_scan_dir(const ManifoldDescriptor& m, const ChartPoint& p,
                                     double angle, double horizon,
                                     const LoopOptions& opts) {
  IntegrationOptions iopts;
  iopts.step = opts.step;
  GeodesicPath path =
      detail::integrate_core(m, direction_state(m, p, angle), horizon, iopts, nullptr)
          .path;
  const double t_gate = 20.0 * opts.step;
  std::vector<ReturnMin> mins;
  double prev2 = kInf, prev = kInf;
  for (std::size_t i = 0; i < path.samples.size(); ++i) {
    const double pr = chart_distance_proxy(m, path.samples[i].position, p);
    if (i >= 2 && prev < prev2 && prev <= pr && path.samples[i - 1].t > t_gate &&
        prev < 0.2) {
      const detail::ClosestApproach ca = detail::closest_refined(m, path, i - 1, p);
      mins.push_back({ca.t, ca.proxy, ca.side});
    }
    prev2 = prev;
    prev = pr;
  }
  return mins;
}

}  // namespace

HorizonLength loop_length_at(const ManifoldDescriptor& m, const ChartPoint& p,
                             double horizon, const LoopOptions& opts) {
  double best = kInf;

  struct DirScan {
    double angle;
    std::vector<ReturnMin> mins;
  };
  std::vector<DirScan> scans(opts.n_dirs);
  for (int i = 0; i < opts.n_dirs; ++i) {
    scans[i].angle = 2.0 * kPi * i / opts.n_dirs;
    scans[i].mins = loop_scan_dir(m, p, scans[i].angle, horizon, opts);
  }

  // direct hits within the spatial tolerance
  for (const auto& sc : scans)
    for (const auto& mn : sc.mins)
      if (mn.proxy < opts.spatial_tolerance) best = std::min(best, mn.t);

  // refine adjacent-direction sign changes by bisection on the angle
  for (int i = 0; i < opts.n_dirs; ++i) {
    const DirScan& a = scans[i];
    const DirScan& b = scans[(i + 1) % opts.n_dirs];
    const double b_angle = (i + 1 < opts.n_dirs) ? b.angle : b.angle + 2.0 * kPi;
    for (const auto& ma : a.mins) {
      if (ma.t > best + opts.spatial_tolerance) continue;  // cannot improve
      // match the crossing in the neighbour scan by return time
      const ReturnMin* mb = nullptr;
      for (const auto& cand : b.mins)
        if (std::abs(cand.t - ma.t) < std::max(0.5, 4.0 * (ma.proxy + cand.proxy)))
          if (!mb || std::abs(cand.t - ma.t) < std::abs(mb->t - ma.t)) mb = &cand;
      if (!mb || ma.side * mb->side >= 0.0) continue;
      double lo = a.angle, hi = b_angle, side_lo = ma.side;
      double best_t = kInf, best_proxy = kInf;
      for (int it = 0; it < opts.refine_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto mins = loop_scan_dir(m, p, mid, horizon, opts);
        double c_side = 0.0, c_proxy = kInf, c_t = kInf;
        for (const auto& mn : mins) {
          if (std::abs(mn.t - ma.t) < std::max(0.5, 4.0 * (mn.proxy + ma.proxy))) {
            c_side = mn.side;
            c_proxy = mn.proxy;
            c_t = mn.t;
            break;
          }
        }
        if (c_proxy < best_proxy) {
          best_proxy = c_proxy;
          best_t = c_t;
        }
        if (c_proxy < 1e-7) break;
        if (c_proxy == kInf) break;
        if (c_side * side_lo <= 0.0)
          hi = mid;
        else {
          lo = mid;
          side_lo = c_side;
        }
      }
      if (best_proxy < opts.spatial_tolerance) best = std::min(best, best_t);
    }
  }

  if (best < kInf) return HorizonLength::finite(best, horizon);
  return HorizonLength::beyond(horizon);
}

ClosedGeodesicResult shortest_closed_geodesic(const ManifoldDescriptor& m,
                                              double horizon) {
  ClosedGeodesicResult res;
  switch (m.kind()) {
    case ManifoldDescriptor::Kind::Sphere:
      res.length = HorizonLength::finite(2.0 * kPi * m.sphere_radius(), horizon);
      res.provenance = "great circle";
      return res;
    case ManifoldDescriptor::Kind::FlatTorus:
      res.length = HorizonLength::finite(std::min(m.l1(), m.l2()), horizon);
      res.provenance = "shortest lattice vector";
      return res;
    case ManifoldDescriptor::Kind::HyperbolicPlane:
      res.length = HorizonLength::beyond(horizon);
      res.provenance = "hyperbolic plane: no closed geodesics";
      return res;
    case ManifoldDescriptor::Kind::WarpedSurface: {
      // Clairaut equators at interior critical points of f
      const RadialProfile& prof = m.profile();
      const double r_hi = m.chart_r_max();
      const double dr = std::max(prof.step(), 1e-3);
      double best = kInf, best_r = 0.0;
      double prev_r = dr, prev_fp = prof.fp(dr);
      for (double r = 2 * dr; r < r_hi - 1e-9; r += dr) {
        const double fp = prof.fp(r);
        if (prev_fp == 0.0 || prev_fp * fp < 0.0) {
          double lo = prev_r, hi = r;
          for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (prof.fp(lo) * prof.fp(mid) <= 0.0)
              hi = mid;
            else
              lo = mid;
          }
          const double rc = 0.5 * (lo + hi);
          const double L = 2.0 * kPi * prof.f(rc);
          if (L < best) {
            best = L;
            best_r = rc;
          }
        }
        prev_r = r;
        prev_fp = fp;
      }
      if (best < kInf) {
        res.length = HorizonLength::finite(best, horizon);
        res.provenance = "warped equator at r = " + std::to_string(best_r) +
                         " (equator/meridian candidates only)";
      } else {
        res.length = HorizonLength::beyond(horizon);
        res.provenance = "warped surface: no interior equator (candidates only)";
      }
      return res;
    }
  }
  throw InvalidInput("shortest_closed_geodesic: unknown manifold kind");
}

}  // namespace radiuslab
