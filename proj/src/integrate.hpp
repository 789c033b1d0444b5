#pragma once

// Internal adaptive-integration toolkit shared by model, quadrature and noise.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fracwave/quadrature_settings.hpp"

namespace fracwave::detail {

using Fn = std::function<double(double)>;

/// Counts integrand evaluations against QuadratureSettings::max_subdivisions
/// (one subdivision == one 15-point Kronrod panel).
class Budget {
 public:
  explicit Budget(const QuadratureSettings& s, std::string where)
      : settings_(s), where_(std::move(where)) {}

  void charge(std::int64_t evaluations);
  const QuadratureSettings& settings() const { return settings_; }

 private:
  const QuadratureSettings& settings_;
  std::string where_;
  std::int64_t evaluations_ = 0;
};

/// Adaptive Gauss-Kronrod (7/15) on a finite interval.
double gk(const Fn& f, double a, double b, Budget& budget, double rel_tol = -1.0);

/// Integral over [0, a] of f where f(r) ~ r^e near 0 (e > -1). The power law
/// is absorbed exactly by the substitution r = a v^{1/(1+e)}.
double gk_power_origin(const Fn& f, double e, double a, Budget& budget, double rel_tol = -1.0);

/// Same as gk_power_origin but with the singular point at the right end b of [a, b].
double gk_power_right(const Fn& f, double e, double a, double b, Budget& budget,
                      double rel_tol = -1.0);

enum class TailStatus { Converged, Divergent, Inconclusive };

struct TailResult {
  double value = 0.0;
  TailStatus status = TailStatus::Converged;
  double exponent = 0.0;  // fitted log2 growth of successive dyadic shells
  double fit_residual = 0.0;
};

/// Integral of f over [r0, infinity) by dyadic shells [r0 2^n, r0 2^{n+1}].
/// The shell masses of a power-law tail r^p form a geometric sequence with
/// ratio 2^{p+1}; the growth exponent is fitted over shells covering
/// [2^6 r0, 2^12 r0]. A non-negative exponent (within `divergence_margin`)
/// is declared divergent, a negative one is summed geometrically.
TailResult dyadic_tail(const Fn& f, double r0, Budget& budget, double divergence_margin = 2e-3,
                       int max_shells = 80);

/// Natural cubic spline on strictly increasing abscissae.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_, y_, m_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Least-squares line y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  std::vector<double> residuals;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace fracwave::detail
