#include "radiuslab/profile.hpp"

#include <algorithm>
#include <cmath>

namespace radiuslab {

// ---------------------------------------------------------------------------
// CurvatureSpec

CurvatureSpec::CurvatureSpec(std::vector<CurvatureKnot> knots)
    : knots_(std::move(knots)) {
  if (knots_.empty()) throw InvalidInput("curvature spec needs at least one knot");
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    if (!(knots_[i + 1].r > knots_[i].r))
      throw InvalidInput("curvature knots must have strictly increasing r");
  }
  if (knots_.front().r < 0.0) throw InvalidInput("curvature knots start at r >= 0");
  for (const auto& kn : knots_) {
    if (!std::isfinite(kn.r) || !std::isfinite(kn.k))
      throw InvalidInput("curvature knots must be finite");
  }

  k_min_ = k_max_ = knots_.front().k;
  for (const auto& kn : knots_) {
    k_min_ = std::min(k_min_, kn.k);
    k_max_ = std::max(k_max_, kn.k);
  }

  // Fritsch-Carlson monotone slopes
  const std::size_t n = knots_.size();
  slope_.assign(n, 0.0);
  if (n == 1) return;
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = knots_[i + 1].r - knots_[i].r;
    d[i] = (knots_[i + 1].k - knots_[i].k) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      slope_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  auto endpoint = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return m;
  };
  if (n == 2) {
    slope_[0] = slope_[1] = d[0];
  } else {
    slope_[0] = endpoint(h[0], h[1], d[0], d[1]);
    slope_[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }
}

double CurvatureSpec::operator()(double r) const {
  if (knots_.size() == 1 || r <= knots_.front().r) return knots_.front().k;
  if (r >= knots_.back().r) return knots_.back().k;
  // locate interval
  std::size_t lo = 0, hi = knots_.size() - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (knots_[mid].r <= r)
      lo = mid;
    else
      hi = mid;
  }
  const double h = knots_[hi].r - knots_[lo].r;
  const double s = (r - knots_[lo].r) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * knots_[lo].k + h10 * h * slope_[lo] + h01 * knots_[hi].k +
         h11 * h * slope_[hi];
}

double CurvatureSpec::constant_prefix_radius() const {
  const double k0 = knots_.front().k;
  double r = knots_.front().r;
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (knots_[i].k != k0) break;
    r = knots_[i].r;
  }
  return r;
}

// ---------------------------------------------------------------------------
// RadialProfile

struct RadialProfile::Data {
  Form form = Form::Identity;
  double scale = 1.0;
  double r_max = 0.0;
  bool far_pole = false;

  // tabulated representation
  double step = 0.0;
  std::vector<double> f, fp, k;  // at nodes i*step
  std::optional<CurvatureSpec> spec;
  std::optional<PoleCap> cap;
};

namespace {

std::shared_ptr<RadialProfile::Data> closed_form_data(RadialProfile::Form form,
                                                      double scale, double r_max) {
  if (!(scale > 0.0)) throw InvalidInput("profile scale must be positive");
  if (!(r_max > 0.0)) throw InvalidInput("profile r_max must be positive");
  auto d = std::make_shared<RadialProfile::Data>();
  d->form = form;
  d->scale = scale;
  d->r_max = r_max;
  double k0 = 0.0;
  if (form == RadialProfile::Form::Sin) {
    const double closure = kPi * scale;
    if (r_max > closure + 1e-12) throw ProfileCollapse(closure);
    if (r_max > closure - 1e-12) {
      d->r_max = closure;
      d->far_pole = true;
    }
    k0 = 1.0 / (scale * scale);
  } else if (form == RadialProfile::Form::Sinh) {
    k0 = -1.0 / (scale * scale);
  }
  d->cap = PoleCap{k0, d->r_max};
  return d;
}

}  // namespace

RadialProfile RadialProfile::sin_form(double scale, double r_max) {
  RadialProfile p;
  p.data_ = closed_form_data(Form::Sin, scale, r_max);
  return p;
}

RadialProfile RadialProfile::sinh_form(double scale, double r_max) {
  RadialProfile p;
  p.data_ = closed_form_data(Form::Sinh, scale, r_max);
  return p;
}

RadialProfile RadialProfile::identity_form(double r_max) {
  RadialProfile p;
  p.data_ = closed_form_data(Form::Identity, 1.0, r_max);
  return p;
}

namespace {

std::shared_ptr<RadialProfile::Data> build_tabulated(const CurvatureSpec& spec,
                                                     double step, double r_max,
                                                     bool truncate) {
  if (!(step > 0.0)) throw InvalidInput("profile step must be positive");
  if (!(r_max > step)) throw InvalidInput("profile r_max must exceed the step");

  auto d = std::make_shared<RadialProfile::Data>();
  d->form = RadialProfile::Form::Tabulated;
  d->step = step;
  d->spec = spec;

  const std::size_t n = static_cast<std::size_t>(std::ceil(r_max / step)) + 1;
  d->f.reserve(n);
  d->fp.reserve(n);
  d->k.reserve(n);
  d->f.push_back(0.0);
  d->fp.push_back(1.0);
  d->k.push_back(spec(0.0));

  double y0 = 0.0, y1 = 1.0;
  double collapse_r = -1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double r = static_cast<double>(i) * step;
    const double h = step;
    // RK4 on (f, f') with f'' = -K f
    const double k1a = y1, k1b = -spec(r) * y0;
    const double k2a = y1 + 0.5 * h * k1b, k2b = -spec(r + 0.5 * h) * (y0 + 0.5 * h * k1a);
    const double k3a = y1 + 0.5 * h * k2b, k3b = -spec(r + 0.5 * h) * (y0 + 0.5 * h * k2a);
    const double k4a = y1 + h * k3b, k4b = -spec(r + h) * (y0 + h * k3a);
    const double y0n = y0 + h / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
    const double y1n = y1 + h / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
    if (i > 0 && y0n <= 0.0) {
      // refine the zero with one secant step on the node pair
      collapse_r = r + h * y0 / (y0 - y0n);
      break;
    }
    y0 = y0n;
    y1 = y1n;
    d->f.push_back(y0);
    d->fp.push_back(y1);
    d->k.push_back(spec(r + h));
  }

  if (collapse_r >= 0.0 && !truncate) throw ProfileCollapse(collapse_r);
  d->r_max = static_cast<double>(d->f.size() - 1) * step;
  if (collapse_r < 0.0) d->r_max = std::min(d->r_max, r_max);

  const double cap_r = spec.constant_prefix_radius();
  if (cap_r > 0.0) d->cap = PoleCap{spec.knots().front().k, std::min(cap_r, d->r_max)};
  return d;
}

}  // namespace

RadialProfile RadialProfile::from_curvature(const CurvatureSpec& spec, double step,
                                            double r_max) {
  RadialProfile p;
  p.data_ = build_tabulated(spec, step, r_max, /*truncate=*/false);
  return p;
}

RadialProfile RadialProfile::from_curvature_truncated(const CurvatureSpec& spec,
                                                      double step, double r_max) {
  RadialProfile p;
  p.data_ = build_tabulated(spec, step, r_max, /*truncate=*/true);
  return p;
}

void RadialProfile::eval(double r, double& f_out, double& fp_out) const {
  const Data& d = *data_;
  switch (d.form) {
    case Form::Sin: {
      const double x = r / d.scale;
      f_out = d.scale * std::sin(x);
      fp_out = std::cos(x);
      return;
    }
    case Form::Sinh: {
      const double x = r / d.scale;
      f_out = d.scale * std::sinh(x);
      fp_out = std::cosh(x);
      return;
    }
    case Form::Identity:
      f_out = r;
      fp_out = 1.0;
      return;
    case Form::Tabulated: {
      // cubic Hermite between tabulated nodes; derivative data are exact
      // ODE values, so the interpolant is O(step^4) accurate
      const double step = d.step;
      double u = r / step;
      if (u < 0.0) u = 0.0;
      std::size_t i = static_cast<std::size_t>(u);
      if (i + 1 >= d.f.size()) i = d.f.size() - 2;
      const double s = u - static_cast<double>(i);
      const double s2 = s * s, s3 = s2 * s;
      const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
      const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
      const double fpp_i = -d.k[i] * d.f[i];
      const double fpp_j = -d.k[i + 1] * d.f[i + 1];
      f_out = h00 * d.f[i] + h10 * step * d.fp[i] + h01 * d.f[i + 1] +
              h11 * step * d.fp[i + 1];
      fp_out = h00 * d.fp[i] + h10 * step * fpp_i + h01 * d.fp[i + 1] +
               h11 * step * fpp_j;
      return;
    }
  }
  f_out = fp_out = 0.0;
}

double RadialProfile::f(double r) const {
  double a, b;
  eval(r, a, b);
  return a;
}

double RadialProfile::fp(double r) const {
  double a, b;
  eval(r, a, b);
  return b;
}

double RadialProfile::fpp(double r) const { return -curvature(r) * f(r); }

double RadialProfile::curvature(double r) const {
  const Data& d = *data_;
  switch (d.form) {
    case Form::Sin:
      return 1.0 / (d.scale * d.scale);
    case Form::Sinh:
      return -1.0 / (d.scale * d.scale);
    case Form::Identity:
      return 0.0;
    case Form::Tabulated:
      return (*d.spec)(r);
  }
  return 0.0;
}

double RadialProfile::r_max() const { return data_->r_max; }
RadialProfile::Form RadialProfile::form() const { return data_->form; }
double RadialProfile::scale() const { return data_->scale; }
double RadialProfile::step() const { return data_->step; }
std::optional<PoleCap> RadialProfile::pole_cap() const { return data_->cap; }
bool RadialProfile::has_far_pole() const { return data_->far_pole; }

const CurvatureSpec* RadialProfile::curvature_spec() const {
  return data_->spec ? &*data_->spec : nullptr;
}

}  // namespace radiuslab
