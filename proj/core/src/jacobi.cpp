#include "radiuslab/jacobi.hpp"

#include <algorithm>
#include <cmath>

#include "engine.hpp"

namespace radiuslab {

namespace {

// root of the cubic Hermite interpolant on [t0, t1] given endpoint values and
// derivatives; Newton from the secant estimate with bisection safeguard
double hermite_root(double t0, double t1, double y0, double d0, double y1, double d1) {
  const double h = t1 - t0;
  auto eval = [&](double s, double& y, double& dy) {
    const double s2 = s * s, s3 = s2 * s;
    y = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 +
        (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
    dy = (6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * h * d0 +
         (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * h * d1;
  };
  double lo = 0.0, hi = 1.0;
  double ylo = y0;
  double s = y0 / (y0 - y1);  // secant start
  for (int it = 0; it < 100; ++it) {
    double y, dy;
    eval(s, y, dy);
    if (std::abs(y) < 1e-15 || hi - lo < 1e-12) break;
    if (y * ylo < 0.0)
      hi = s;
    else {
      lo = s;
      ylo = y;
    }
    double sn = (std::abs(dy) > 1e-300) ? s - y / dy : 0.5 * (lo + hi);
    if (!(sn > lo && sn < hi)) sn = 0.5 * (lo + hi);
    s = sn;
  }
  return t0 + s * h;
}

}  // namespace

JacobiTrace integrate_jacobi(const ManifoldDescriptor& m, const GeodesicPath& path,
                             double j0, double j0p) {
  if (path.samples.empty()) throw InvalidInput("integrate_jacobi: empty path");
  if (j0 == 0.0 && j0p == 0.0)
    throw InvalidInput("integrate_jacobi: trivial initial condition");

  GeodesicState init;
  init.position = path.front().position;
  init.velocity = path.front().velocity;

  IntegrationOptions opts;
  opts.step = path.step;

  detail::JacobiInit jinit{j0, j0p, 1.0, 0.0};
  // companion must be independent; swap when (j0, j0p) is parallel to (1, 0)
  if (std::abs(j0p) < 1e-14) jinit = {j0, j0p, 0.0, 1.0};

  const double w0 = jinit.j0 * jinit.j20p - jinit.j20 * jinit.j0p;

  detail::CoIntegrated co;
  double drift = kInf;
  double step = path.step;
  for (int attempt = 0;; ++attempt) {
    opts.step = step;
    co = detail::integrate_core(m, init, path.total_length, opts, &jinit);
    drift = 0.0;
    for (const auto& a : co.jacobi) {
      const double w = a[0] * a[3] - a[2] * a[1];
      // relative to the product scale: on exponentially growing solutions the
      // constant Wronskian is a cancellation of huge products, and doubles
      // cannot resolve it below scale * 1e-16
      const double scale =
          std::max(1.0, 0.5 * (std::abs(a[0] * a[3]) + std::abs(a[2] * a[1])));
      drift = std::max(drift, std::abs(w - w0) / scale);
    }
    if (drift <= 1e-6) break;
    if (attempt >= 3)
      throw StepTooCoarse("integrate_jacobi: Wronskian drift exceeds 1e-6");
    step *= 0.5;
  }

  JacobiTrace trace;
  trace.horizon = co.path.total_length;
  trace.wronskian_drift = drift;
  trace.samples.reserve(co.jacobi.size());
  for (std::size_t i = 0; i < co.jacobi.size(); ++i) {
    const auto& a = co.jacobi[i];
    trace.samples.push_back({co.path.samples[i].t, a[0], a[1], a[2], a[3]});
  }

  // refined zeros of j (skip the seeded zero at t = 0)
  const double t_skip = 1e-6;
  for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
    const auto& a = trace.samples[i];
    const auto& b = trace.samples[i + 1];
    if (a.t < t_skip && std::abs(a.j) < 1e-300) continue;
    if (a.j == 0.0 && a.t > t_skip) {
      trace.conjugate_times.push_back(a.t);
    } else if (a.j * b.j < 0.0) {
      const double tz = hermite_root(a.t, b.t, a.j, a.jp, b.j, b.jp);
      if (tz > t_skip) {
        trace.conjugate_times.push_back(tz);
        // tangency: double zero
        const double s = (tz - a.t) / (b.t - a.t);
        const double jp_at = a.jp + s * (b.jp - a.jp);
        if (std::abs(jp_at) < 1e-8) trace.tangency_flagged = true;
      }
    }
  }

  const double t_conj_first =
      trace.conjugate_times.empty() ? kInf : trace.conjugate_times.front();

  // refined zeros of j' before the first conjugate time (j > 0 there)
  for (std::size_t i = 0; i + 1 < trace.samples.size(); ++i) {
    const auto& a = trace.samples[i];
    const auto& b = trace.samples[i + 1];
    if (b.t > t_conj_first + 1e-12) break;
    if (a.jp * b.jp < 0.0) {
      // j'' = -K j with K cached on the geodesic samples
      const double ka = co.path.samples[i].curvature;
      const double kb = co.path.samples[i + 1].curvature;
      const double tz =
          hermite_root(a.t, b.t, a.jp, -ka * a.j, b.jp, -kb * b.j);
      if (tz > t_skip) {
        trace.focal_times.push_back(tz);
        const double s = (tz - a.t) / (b.t - a.t);
        const double j_at = a.j + s * (b.j - a.j);
        if (std::abs(j_at) < 1e-10) trace.tangency_flagged = true;
      }
    } else if (a.jp == 0.0 && a.t > t_skip) {
      trace.focal_times.push_back(a.t);
    }
  }

  trace.first_conjugate = trace.conjugate_times.empty()
                              ? HorizonLength::beyond(trace.horizon)
                              : HorizonLength::finite(t_conj_first, trace.horizon);
  trace.first_focal = trace.focal_times.empty()
                          ? HorizonLength::beyond(
                                std::min(trace.horizon, t_conj_first))
                          : HorizonLength::finite(trace.focal_times.front(),
                                                  trace.horizon);
  return trace;
}

HorizonLength first_conjugate_time(const ManifoldDescriptor& m,
                                   const GeodesicPath& path) {
  return integrate_jacobi(m, path, 0.0, 1.0).first_conjugate;
}

HorizonLength first_focal_time(const ManifoldDescriptor& m,
                               const GeodesicPath& path) {
  return integrate_jacobi(m, path, 0.0, 1.0).first_focal;
}

RiccatiCertificate riccati_certify(const ManifoldDescriptor& m,
                                   const GeodesicPath& path, double u0) {
  (void)m;
  if (path.samples.size() < 2)
    throw InvalidInput("riccati_certify: path too short");

  RiccatiCertificate cert;
  double phi = std::isinf(u0) ? 0.0 : std::atan2(1.0, u0);
  if (phi < 0.0) phi += kPi;

  double min_u = kInf;
  std::optional<double> blowdown;

  auto track = [&](double p, double t, double t_prev, double phi_prev) {
    if (p > 1e-9 && p < kPi - 1e-12) {
      const double u = 1.0 / std::tan(p);
      min_u = std::min(min_u, u);
    }
    if (!blowdown && p >= kPi) {
      // locate phi = pi inside the step; phi' ~ 1 near the crossing
      const double frac = (kPi - phi_prev) / (p - phi_prev);
      blowdown = t_prev + frac * (t - t_prev);
    }
  };

  for (std::size_t i = 0; i + 1 < path.samples.size(); ++i) {
    const double t0 = path.samples[i].t, t1 = path.samples[i + 1].t;
    const double k0 = path.samples[i].curvature, k1 = path.samples[i + 1].curvature;
    const double h = t1 - t0;
    if (h <= 0.0) continue;
    auto kat = [&](double s) { return k0 + s * (k1 - k0); };
    auto f = [&](double s, double p) {
      const double c = std::cos(p), sn = std::sin(p);
      return c * c + kat(s) * sn * sn;
    };
    const double phi_prev = phi;
    const double a1 = f(0.0, phi);
    const double a2 = f(0.5, phi + 0.5 * h * a1);
    const double a3 = f(0.5, phi + 0.5 * h * a2);
    const double a4 = f(1.0, phi + h * a3);
    phi += h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4);
    track(phi, t1, t0, phi_prev);
    if (blowdown) break;
  }

  cert.min_u = min_u;
  cert.margin = min_u - cert.threshold;
  cert.blowdown_time = blowdown;
  cert.no_blowdown = !blowdown.has_value();
  cert.final_u = (phi > 1e-9 && phi < kPi - 1e-9) ? 1.0 / std::tan(phi)
                                                  : (phi <= 1e-9 ? kInf : -kInf);
  return cert;
}

}  // namespace radiuslab
