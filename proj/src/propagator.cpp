#include "fracwave/propagator.hpp"

#include <cmath>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

constexpr double kSeriesThreshold = 1e-4;

double omega(const Propagator& p, double r) { return r == 0 ? 0.0 : std::pow(r, p.k); }

// (x - sin x) / x^3
double x_minus_sin_over_cube(double x) {
  if (std::abs(x) < 0.1) {
    const double x2 = x * x;
    return 1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0 - x2 * x2 * x2 / 362880.0 +
           x2 * x2 * x2 * x2 / 39916800.0;
  }
  return (x - std::sin(x)) / (x * x * x);
}

}  // namespace

void Propagator::validate() const {
  if (!(k > 0)) throw DomainError("propagator", "k must be positive");
  if (!(T > 0)) throw DomainError("propagator", "T must be positive");
}

double sinc(double x) {
  if (std::abs(x) < kSeriesThreshold) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double fourier_G(const Propagator& p, double t, double r) {
  const double w = omega(p, r);
  const double x = t * w;
  if (x < kSeriesThreshold) return t * sinc(x);
  return std::sin(x) / w;
}

double fourier_dG(const Propagator& p, double t, double r) { return std::cos(t * omega(p, r)); }

double fourier_G_diff(const Propagator& p, double t1, double t2, double r) {
  if (t1 == t2) return 0.0;
  const double w = omega(p, r);
  const double h = t2 - t1;
  // 2 cos(a) sin(h w / 2) / w == cos(a) h sinc(h w / 2)
  return std::cos(0.5 * (t1 + t2) * w) * h * sinc(0.5 * h * w);
}

double kernel_bound(const Propagator& p, double r) {
  return std::pow(2.0, p.k) * (1.0 + p.T * p.T) / std::pow(1.0 + r * r, p.k);
}

double G_sq_time_integral(const Propagator& p, double t, double r) {
  if (t <= 0) return 0.0;
  const double w = omega(p, r);
  // (2wt - sin 2wt) / (4 w^3) == 2 t^3 (x - sin x)/x^3 with x = 2 w t
  return 2.0 * t * t * t * x_minus_sin_over_cube(2.0 * w * t);
}

double G_diff_sq_time_integral(const Propagator& p, double t1, double t2, double r) {
  if (t1 <= 0 || t2 == t1) return 0.0;
  const double w = omega(p, r);
  const double h = t2 - t1;
  const double amp = h * sinc(0.5 * h * w);  // 2 sin(hw/2)/w
  // int_0^{t1} cos^2(w(t1+t2)/2 - w s) ds = (t1/2)(1 + cos(w t2) sinc(w t1))
  const double mean = 0.5 * t1 * (1.0 + std::cos(w * t2) * sinc(w * t1));
  return amp * amp * mean;
}

double G_cross_time_integral(const Propagator& p, double t1, double t2, double r) {
  if (t1 <= 0) return 0.0;
  const double w = omega(p, r);
  const double h = t2 - t1;
  if (w * t2 < 1e-4) {
    // int_0^{t1} (t2 - s)(t1 - s) ds with the leading w^2 correction omitted
    return 0.5 * t1 * t1 * t2 - t1 * t1 * t1 / 6.0;
  }
  const long double wl = w;
  const long double a = static_cast<long double>(t1) * std::cos(wl * h);
  const long double b = (std::sin(wl * (t1 + t2)) - std::sin(wl * h)) / (2.0L * wl);
  return static_cast<double>((a - b) / (2.0L * wl * wl));
}

}  // namespace fracwave
