#include "fracwave/quadrature.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "fracwave/error.hpp"
#include "fracwave/propagator.hpp"
#include "integrate.hpp"

namespace fracwave {

namespace {

using detail::Budget;
using detail::Fn;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxZeroPanels = 5e4;
constexpr double kCoreRadius = 16.0;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;


// Radial weight w(rho) of a functional together with the data needed to cut
// its oscillations into panels.
struct RadialKernel {
  std::function<double(double)> value;
  std::function<double(double)> mean;  // oscillation average, used beyond the panelled range
  double freq = 0.0;                   // zeros near rho = (n pi / freq)^{1/k}
  double k = 1.0;
  double average_from = 0.0;           // radius beyond which `mean` replaces `value`
};

// int_0^inf w(rho) g(rho, rho - c) drho where g may carry |rho - c|^{e_c}.
// g takes the signed distance to c separately to keep it exact near c.
double radial_integral(const RadialKernel& w, const std::function<double(double, double)>& g, double c,
                       double e_c, Budget& budget) {
  const QuadratureSettings& s = budget.settings();
  const double tol = 0.1 * s.rel_tol;
  double r_osc = kCoreRadius + 2.0 * c;
  if (w.freq > 0) {
    r_osc = std::max({r_osc, s.truncation_radius, w.average_from});
    const double cap = std::pow(kMaxZeroPanels * std::numbers::pi / w.freq, 1.0 / w.k);
    r_osc = std::max(std::min(r_osc, cap), kCoreRadius + 2.0 * c);
  }

  std::vector<double> breaks{0.0, r_osc};
  if (c > 0) breaks.push_back(c);
  for (int i = 1; i < kCoreRadius; ++i) breaks.push_back(i);
  if (w.freq > 0) {
    for (double n = 1;; ++n) {
      const double z = std::pow(n * std::numbers::pi / w.freq, 1.0 / w.k);
      if (z >= r_osc) break;
      breaks.push_back(z);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto plain = [&](double rho) { return w.value(rho) * g(rho, rho - c); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    if (b == c) {
      auto left = [&](double t) { return w.value(c - t) * g(c - t, -t); };
      total += detail::gk_power_origin(left, e_c, c - a, budget, tol);
    } else if (a == c) {
      auto right = [&](double t) { return w.value(c + t) * g(c + t, t); };
      total += detail::gk_power_origin(right, e_c, b - c, budget, tol);
    } else {
      total += detail::gk(plain, a, b, budget, tol);
    }
  }
  auto averaged = [&](double rho) { return w.mean(rho) * g(rho, rho - c); };
  const detail::TailResult tail = detail::dyadic_tail(averaged, r_osc, budget);
  if (tail.status == detail::TailStatus::Divergent) return kInf;
  return total + tail.value;
}

double i0e(double x) {
  if (x < 500.0) return boost::math::cyl_bessel_i(0, x) * std::exp(-x);
  const double y = 1.0 / (8.0 * x);
  const double series = 1.0 + y * (1.0 + y * (4.5 + y * (37.5 + y * 459.375)));
  return series / std::sqrt(kTwoPi * x);
}

// Angular integral over S^{d-1} of (2 pi)^d exp(-|rho theta + r e|^2);
// t = r - rho is passed separately so the Gaussian stays exact at large rho.
double bump_angular(int d, double rho, double r, double t) {
  const double g = std::exp(-t * t);
  switch (d) {
    case 1: return kTwoPi * (g + std::exp(-(rho + r) * (rho + r)));
    case 2: return std::pow(kTwoPi, 3) * g * i0e(2.0 * rho * r);
    default: {
      const double x = 4.0 * rho * r;
      const double shape = x < 1e-12 ? 2.0 : -std::expm1(-x) / (0.5 * x);
      return std::pow(kTwoPi, 4) * g * shape;
    }
  }
}

// Angular average Q(rho) = int_{S^{d-1}} dtheta int mu(deta) |FZ(rho theta + eta)|^2
// for the Gaussian bump. The isometry functional is then
// int_0^inf rho^{d-1} w(rho) Q(rho) drho.
class BumpSpectrum {
 public:
  BumpSpectrum(const SpectralMeasure& mu, const GaussianBump& z, Budget& budget) : d_(z.d) {
    const double amp2 = z.amplitude * z.amplitude;
    if (is_zero_measure(mu) || amp2 == 0.0) {
      kind_ = Kind::Zero;
      return;
    }
    if (const auto* atoms = std::get_if<FiniteAtoms>(&mu)) {
      kind_ = Kind::Atoms;
      for (const Atom& a : atoms->atoms) {
        double r2 = 0.0;
        for (double x : a.location) r2 += x * x;
        atoms_.push_back({std::sqrt(r2), a.mass * amp2});
      }
      return;
    }
    if (const auto* flat = std::get_if<FlatDensity>(&mu)) {
      kind_ = Kind::Constant;
      constant_ = sphere_area(d_) * flat->level * amp2 * std::pow(kTwoPi, d_) * std::pow(std::numbers::pi, 0.5 * d_);
      return;
    }
    kind_ = Kind::Table;
    const RadialDensity rd = *as_radial_density(mu);
    const double pref = sphere_area(d_) * amp2;
    auto q = [&](double rho) { return pref * density_convolution(rd, rho, budget); };
    std::vector<double> x, y;
    for (int i = 0; i <= 256; ++i) {
      x.push_back(i * kLinearEnd / 256.0);
      y.push_back(q(x.back()));
    }
    linear_ = detail::CubicSpline(x, y);
    x.clear();
    y.clear();
    bool positive = true;
    for (double u = std::log(kLinearEnd); u <= std::log(kLogEnd) + 1e-12; u += 1.0 / 64.0) {
      x.push_back(u);
      const double v = q(std::exp(u));
      positive = positive && v > 0;
      y.push_back(v);
    }
    log_ = positive;
    if (log_) {
      for (double& v : y) v = std::log(v);
      const std::size_t n = y.size();
      slope_ = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
      end_value_ = y[n - 1];
    } else {
      end_value_ = y.back();
    }
    outer_ = detail::CubicSpline(x, y);
  }

  double operator()(double rho) const {
    switch (kind_) {
      case Kind::Zero: return 0.0;
      case Kind::Constant: return constant_;
      case Kind::Atoms: {
        double s = 0.0;
        for (const auto& [r, m] : atoms_) s += m * bump_angular(d_, rho, r, r - rho);
        return s;
      }
      case Kind::Table: break;
    }
    if (rho <= kLinearEnd) return std::max(0.0, linear_(rho));
    if (rho >= kLogEnd) {
      if (!log_) return std::max(0.0, end_value_);
      return std::exp(end_value_ + slope_ * (std::log(rho) - std::log(kLogEnd)));
    }
    const double v = outer_(std::log(rho));
    return log_ ? std::exp(v) : std::max(0.0, v);
  }

  bool zero() const { return kind_ == Kind::Zero; }
  int d() const { return d_; }

 private:
  static constexpr double kLinearEnd = 4.0;
  static constexpr double kLogEnd = 1e7;
  enum class Kind { Zero, Constant, Atoms, Table };

  // int_0^inf dr r^{d-1} m(r) A_d(rho, r), in the variable t = r - rho away from the origin.
  double density_convolution(const RadialDensity& rd, double rho, Budget& budget) const {
    const int d = d_;
    const double tol = 0.1 * budget.settings().rel_tol;
    auto f = [&](double r) {
      if (r <= 0) return 0.0;
      return std::pow(r, d - 1) * rd.density(r) * bump_angular(d, rho, r, r - rho);
    };
    auto ft = [&](double t) {
      const double r = rho + t;
      if (r <= 0) return 0.0;
      return std::pow(r, d - 1) * rd.density(r) * bump_angular(d, rho, r, t);
    };
    const double width = 9.0;
    double total = 0.0;
    double a = std::max(0.0, rho - width);
    if (a < 0.5) {
      total += detail::gk_power_origin(f, d - 1 + rd.origin_exponent, 0.5, budget, tol);
      a = 0.5;
    }
    const double lo = a - rho, hi = width;
    const int panels = static_cast<int>(std::ceil(hi - lo));
    for (int i = 0; i < panels; ++i) {
      total += detail::gk(ft, lo + (hi - lo) * i / panels, lo + (hi - lo) * (i + 1) / panels, budget, tol);
    }
    return total;
  }

  int d_;
  Kind kind_ = Kind::Zero;
  double constant_ = 0.0;
  std::vector<std::pair<double, double>> atoms_;
  detail::CubicSpline linear_, outer_;
  bool log_ = true;
  double slope_ = 0.0;
  double end_value_ = 0.0;
};

// Integral of m over the sphere of radius rho centred at a point at distance c
// from the origin. `delta` = rho - c, passed separately for accuracy.
double shell_integral(const RadialDensity& rd, double c, double rho, double delta, Budget& budget) {
  const int d = rd.d;
  if (c == 0.0) return sphere_area(d) * rd.density(rho);
  const double lo = std::abs(delta), hi = rho + c;
  const double tol = 0.1 * budget.settings().rel_tol;
  const double p = rd.origin_exponent;
  auto m = [&](double s) { return s > 0 ? rd.density(s) : 0.0; };
  if (d == 1) return (lo > 0 ? rd.density(lo) : 0.0) + rd.density(hi);
  if (rho == 0.0) return sphere_area(d) * rd.density(c);
  if (d == 3) {
    // (2 pi / (rho c)) int_lo^hi m(s) s ds
    double inner;
    if (lo == 0.0) {
      inner = detail::gk_power_origin([&](double s) { return m(s) * s; }, p + 1.0, hi, budget, tol);
    } else if (lo < 0.1 * hi) {
      auto f = [&](double u) {
        const double s = std::exp(u);
        return m(s) * s * s;
      };
      inner = detail::gk(f, std::log(lo), std::log(hi), budget, tol);
    } else {
      inner = detail::gk([&](double s) { return m(s) * s; }, lo, hi, budget, tol);
    }
    return kTwoPi / (rho * c) * inner;
  }
  // d == 2: 4 int_0^{pi/2} m(s(theta)) dtheta with s^2 = lo^2 cos^2 + hi^2 sin^2
  auto s_of = [&](double th) {
    const double a = lo * std::cos(th), b = hi * std::sin(th);
    return std::sqrt(a * a + b * b);
  };
  const double half_pi = 0.5 * std::numbers::pi;
  double inner;
  if (lo == 0.0) {
    inner = detail::gk_power_origin([&](double th) { return m(s_of(th)); }, std::min(p, 0.0), half_pi, budget, tol);
  } else {
    const double th0 = std::min(half_pi, 20.0 * lo / hi);
    inner = detail::gk([&](double th) { return m(s_of(th)); }, 0.0, th0, budget, tol);
    if (th0 < half_pi) {
      auto f = [&](double u) {
        const double th = std::exp(u);
        return m(s_of(th)) * th;
      };
      inner += detail::gk(f, std::log(th0), std::log(half_pi), budget, tol);
    }
  }
  return 4.0 * inner;
}

double norm_of(std::span<const double> xi) {
  double s = 0.0;
  for (double x : xi) s += x * x;
  return std::sqrt(s);
}

// int mu(deta) w(|xi - eta|) for a radial weight w.
double shifted_integral(const SpectralMeasure& mu, const RadialKernel& w, std::span<const double> xi,
                        Budget& budget) {
  const int d = dimension_of(mu);
  if (static_cast<int>(xi.size()) != d) throw DomainError("quadrature", "xi has the wrong dimension");
  if (is_zero_measure(mu)) return 0.0;
  if (const auto* atoms = std::get_if<FiniteAtoms>(&mu)) {
    double s = 0.0;
    for (const Atom& a : atoms->atoms) {
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) r2 += (xi[i] - a.location[i]) * (xi[i] - a.location[i]);
      s += a.mass * w.value(std::sqrt(r2));
    }
    return s;
  }
  const RadialDensity rd = *as_radial_density(mu);
  if (std::holds_alternative<FlatDensity>(mu)) {
    const double level = std::get<FlatDensity>(mu).level, area = sphere_area(d);
    auto g = [&](double rho, double) { return area * level * std::pow(rho, d - 1); };
    return radial_integral(w, g, 0.0, d - 1.0, budget);
  }
  const double c = norm_of(xi);
  auto g = [&](double rho, double delta) {
    return std::pow(rho, d - 1) * shell_integral(rd, c, rho, delta, budget);
  };
  const double e_c = c == 0.0 ? d - 1 + rd.origin_exponent : std::min(0.0, rd.origin_exponent + d - 1);
  return radial_integral(w, g, c, e_c, budget);
}

RadialKernel weighted_G_kernel(double k, double alpha, double s) {
  RadialKernel w;
  w.k = k;
  w.value = [k, alpha, s](double rho) {
    const double g = fourier_G(Propagator{k, 1.0}, s, rho);
    return std::pow(1.0 + rho * rho, alpha) * g * g;
  };
  w.mean = [k, alpha](double rho) { return std::pow(1.0 + rho * rho, alpha) * 0.5 / std::pow(rho, 2.0 * k); };
  w.freq = 2.0 * s;
  w.average_from = s > 0 ? std::pow(64.0 / s, 1.0 / k) : 0.0;
  return w;
}

// Kernel of int_0^T ds |G(s)|^2 weighted by (1 + rho^2)^alpha.
RadialKernel isometry_kernel(double k, double alpha, double T) {
  RadialKernel w;
  w.k = k;
  const Propagator p{k, std::max(T, 1e-300)};
  w.value = [p, alpha, T](double rho) { return std::pow(1.0 + rho * rho, alpha) * G_sq_time_integral(p, T, rho); };
  w.mean = [k, alpha, T](double rho) { return std::pow(1.0 + rho * rho, alpha) * 0.5 * T / std::pow(rho, 2.0 * k); };
  w.freq = 2.0 * T;
  w.average_from = std::pow(64.0 / T, 1.0 / k);
  return w;
}

RadialKernel increment_kernel(double k, double alpha, double t1, double t2) {
  RadialKernel w;
  w.k = k;
  const Propagator p{k, t2};
  const double h = t2 - t1;
  w.value = [p, alpha, t1, t2, h](double rho) {
    return std::pow(1.0 + rho * rho, alpha) *
           (G_diff_sq_time_integral(p, t1, t2, rho) + G_sq_time_integral(p, h, rho));
  };
  w.mean = [k, alpha, t1, h](double rho) {
    return std::pow(1.0 + rho * rho, alpha) * (t1 + 0.5 * h) / std::pow(rho, 2.0 * k);
  };
  w.freq = t1 + t2;
  w.average_from = std::pow(64.0 / h, 1.0 / k);
  return w;
}

RadialKernel cross_kernel(double k, double alpha, double t1, double t2) {
  RadialKernel w;
  w.k = k;
  const Propagator p{k, t2};
  w.value = [p, alpha, t1, t2](double rho) {
    return std::pow(1.0 + rho * rho, alpha) * G_cross_time_integral(p, t1, t2, rho);
  };
  w.mean = [](double) { return 0.0; };
  w.freq = t1 + t2;
  w.average_from = std::pow(64.0 / std::max(t2 - t1, 1e-3), 1.0 / k);
  return w;
}

void check_inputs(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z,
                  const QuadratureSettings& settings) {
  validate_measure(mu);
  settings.validate();
  if (!(k > 0)) throw DomainError("quadrature", "k must be positive");
  if (!std::isfinite(alpha)) throw DomainError("quadrature", "alpha must be finite");
  if (Z.dimension() != dimension_of(mu)) throw DomainError("quadrature", "Z and mu live in different dimensions");
}

// int dxi |FZ(xi)|^2 int mu(deta) w(|xi - eta|), Z fixed in time.
double spatial_functional(const SpectralMeasure& mu, const DeterministicZ& Z, const RadialKernel& w,
                          const BumpSpectrum* bump, Budget& budget) {
  if (bump) {
    if (bump->zero()) return 0.0;
    const int d = bump->d();
    auto g = [&](double rho, double) { return std::pow(rho, d - 1) * (*bump)(rho); };
    Budget local(budget.settings(), "radial integral");
    return radial_integral(w, g, 0.0, d - 1.0, local);
  }
  const SpectralField& f = std::get<GridFunction>(Z.shape).transform;
  const ModeTable t = mode_table(f.grid);
  const int d = f.grid.d;
  double peak = 0.0;
  for (const auto& c : f.coefficients) peak = std::max(peak, std::norm(c));
  double s = 0.0;
  std::vector<double> xi(d);
  for (std::size_t i = 0; i < t.xi_norm.size(); ++i) {
    const double p = std::norm(f.coefficients[i]);
    if (p <= 1e-30 * peak || p == 0.0) continue;
    for (int ax = 0; ax < d; ++ax) xi[ax] = f.grid.dxi * t.index[i * d + ax];
    Budget mode_budget(budget.settings(), "grid mode");
    s += t.weight[i] * p * shifted_integral(mu, w, xi, mode_budget);
  }
  return s * std::pow(f.grid.dxi, d);
}

std::unique_ptr<BumpSpectrum> make_bump(const SpectralMeasure& mu, const DeterministicZ& Z, Budget& budget) {
  if (const auto* b = std::get_if<GaussianBump>(&Z.shape)) return std::make_unique<BumpSpectrum>(mu, *b, budget);
  return nullptr;
}

// int_0^T a(s)^2 F(s) ds (or F(T - s) when reversed) by Gauss-Legendre with
// 64 nodes per unit time, doubled until the value settles.
double profiled_functional(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z, double T,
                           bool reversed, const BumpSpectrum* bump, Budget& budget) {
  const double tol = std::max(10.0 * budget.settings().rel_tol, 1e-9);
  auto F = [&](double s) {
    const double a = Z.time_profile(reversed ? T - s : s);
    if (a == 0.0) return 0.0;
    Budget node_budget(budget.settings(), "time node");
    return a * a * spatial_functional(mu, Z, weighted_G_kernel(k, alpha, s), bump, node_budget);
  };
  int n = 64 * static_cast<int>(std::ceil(T));
  double prev = kInf;
  for (int round = 0; round < 5; ++round, n *= 2) {
    std::vector<double> x, wts;
    detail::gauss_legendre(n, x, wts);
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      // reversed: G(T - s) a(s)^2 == G(s') a(T - s')^2
      const double s = 0.5 * T * (x[i] + 1.0);
      v += wts[i] * F(s);
    }
    v *= 0.5 * T;
    if (std::abs(v - prev) <= tol * std::abs(v)) return v;
    prev = v;
  }
  throw NumericalError("quadrature", "time integral did not settle after 5 doublings");
}

}  // namespace

int DeterministicZ::dimension() const {
  return std::visit(Overloaded{[](const GaussianBump& b) { return b.d; },
                               [](const GridFunction& g) { return g.transform.grid.d; }},
                    shape);
}

double weighted_kernel_integral(const SpectralMeasure& mu, double k, double alpha, double s,
                                std::span<const double> xi, const QuadratureSettings& settings) {
  validate_measure(mu);
  settings.validate();
  if (!(k > 0) || !(s >= 0)) throw DomainError("quadrature", "k must be positive and s non-negative");
  Budget budget(settings, "weighted_kernel_integral");
  return shifted_integral(mu, weighted_G_kernel(k, alpha, s), xi, budget);
}

double shifted_condition_integral(const SpectralMeasure& mu, double gamma, std::span<const double> xi,
                                  const QuadratureSettings& settings) {
  validate_measure(mu);
  settings.validate();
  Budget budget(settings, "shifted_condition_integral");
  RadialKernel w;
  w.value = [gamma](double rho) { return std::pow(1.0 + rho * rho, -gamma); };
  w.mean = w.value;
  return shifted_integral(mu, w, xi, budget);
}

double isometry_functional(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z, double T,
                           bool reversed, const QuadratureSettings& settings) {
  check_inputs(mu, k, alpha, Z, settings);
  if (!(T >= 0)) throw DomainError("quadrature", "T must be non-negative");
  if (T == 0.0) return 0.0;
  Budget budget(settings, "isometry_functional");
  const auto bump = make_bump(mu, Z, budget);
  if (Z.constant_in_time()) {
    // int_0^T |G(T-s)|^2 ds == int_0^T |G(s)|^2 ds, so one kernel serves both readings.
    return spatial_functional(mu, Z, isometry_kernel(k, alpha, T), bump.get(), budget);
  }
  return profiled_functional(mu, k, alpha, Z, T, reversed, bump.get(), budget);
}

double increasing_process(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z, double t,
                          const QuadratureSettings& settings) {
  return isometry_functional(mu, k, alpha, Z, t, false, settings);
}

double increment_second_moment(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z,
                               double t1, double t2, const QuadratureSettings& settings) {
  check_inputs(mu, k, alpha, Z, settings);
  if (!(t1 >= 0 && t2 >= t1)) throw DomainError("quadrature", "need 0 <= t1 <= t2");
  if (!Z.constant_in_time()) throw DomainError("quadrature", "increment_second_moment needs a time-constant Z");
  if (t1 == t2) return 0.0;
  Budget budget(settings, "increment_second_moment");
  const auto bump = make_bump(mu, Z, budget);
  return spatial_functional(mu, Z, increment_kernel(k, alpha, t1, t2), bump.get(), budget);
}

double increment_second_moment_via_covariance(const SpectralMeasure& mu, double k, double alpha,
                                              const DeterministicZ& Z, double t1, double t2,
                                              const QuadratureSettings& settings) {
  check_inputs(mu, k, alpha, Z, settings);
  if (!(t1 >= 0 && t2 >= t1)) throw DomainError("quadrature", "need 0 <= t1 <= t2");
  if (!Z.constant_in_time()) throw DomainError("quadrature", "needs a time-constant Z");
  Budget budget(settings, "increment_second_moment_via_covariance");
  const auto bump = make_bump(mu, Z, budget);
  const double e2 = spatial_functional(mu, Z, isometry_kernel(k, alpha, t2), bump.get(), budget);
  const double e1 = t1 > 0 ? spatial_functional(mu, Z, isometry_kernel(k, alpha, t1), bump.get(), budget) : 0.0;
  const double cross = t1 > 0 ? spatial_functional(mu, Z, cross_kernel(k, alpha, t1, t2), bump.get(), budget) : 0.0;
  return e2 + e1 - 2.0 * cross;
}

double burkholder_bound(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z, double t,
                        std::span<const double> xi_grid, const QuadratureSettings& settings) {
  check_inputs(mu, k, alpha, Z, settings);
  const auto* bump = std::get_if<GaussianBump>(&Z.shape);
  if (!bump) throw DomainError("quadrature", "burkholder_bound is implemented for the Gaussian bump");
  if (t <= 0) return 0.0;
  const int d = bump->d;
  // ||Z||^2 = int |FZ|^2 dxi = a^2 (2 pi)^d pi^{d/2}
  const double z2 = bump->amplitude * bump->amplitude * std::pow(kTwoPi, d) * std::pow(std::numbers::pi, 0.5 * d);
  Budget budget(settings, "burkholder_bound");
  std::vector<double> x, wts;
  detail::gauss_legendre(16, x, wts);
  std::vector<double> point(d, 0.0);
  double total = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double s = 0.5 * t * (x[i] + 1.0);
    const RadialKernel w = weighted_G_kernel(k, alpha, s);
    double sup = 0.0;
    for (double xi : xi_grid) {
      point[0] = xi;
      sup = std::max(sup, shifted_integral(mu, w, point, budget));
    }
    const double a = Z.constant_in_time() ? 1.0 : Z.time_profile(s);
    total += wts[i] * a * a * sup;
  }
  return 0.5 * t * z2 * total;
}

PowerLawFit fit_power_law(std::span<const double> lags, std::span<const double> moments) {
  if (lags.size() != moments.size() || lags.size() < 2)
    throw DomainError("quadrature", "power-law fit needs matching lags and moments");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    if (!(lags[i] > 0)) throw DomainError("quadrature", "lags must be positive");
    if (!(moments[i] > 0) || !std::isfinite(moments[i]))
      throw NumericalError("quadrature", "degenerate fit: moment underflow or non-finite value");
    x.push_back(std::log(lags[i]));
    y.push_back(std::log(moments[i]));
  }
  const detail::LineFit f = detail::fit_line(x, y);
  return {f.slope, f.intercept, f.rms_residual};
}

PowerLawFit scaling_slope(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z, double t1,
                          std::span<const double> lags, const QuadratureSettings& settings) {
  check_inputs(mu, k, alpha, Z, settings);
  if (lags.size() < 4) throw DomainError("quadrature", "scaling_slope needs at least 4 lags");
  if (!Z.constant_in_time()) throw DomainError("quadrature", "scaling_slope needs a time-constant Z");
  Budget budget(settings, "scaling_slope");
  const auto bump = make_bump(mu, Z, budget);
  std::vector<double> moments;
  for (double h : lags) {
    if (!(h > 0)) throw DomainError("quadrature", "lags must be positive");
    moments.push_back(spatial_functional(mu, Z, increment_kernel(k, alpha, t1, t1 + h), bump.get(), budget));
  }
  return fit_power_law(lags, moments);
}

}  // namespace fracwave
