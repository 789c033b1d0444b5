#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "fracwave/lattice.hpp"
#include "fracwave/model.hpp"
#include "fracwave/quadrature_settings.hpp"

namespace fracwave {

/// Z(x) = amplitude * exp(-|x|^2 / 2), so |FZ(xi)|^2 = amplitude^2 (2 pi)^d exp(-|xi|^2).
struct GaussianBump {
  int d = 1;
  double amplitude = 1.0;
};

/// Z given by its lattice transform; |FZ|^2 is read off the coefficients.
struct GridFunction {
  SpectralField transform;
};

/// Deterministic integrand Z(s, x) = profile(s) * shape(x). An empty profile
/// means Z does not depend on time.
struct DeterministicZ {
  std::variant<GaussianBump, GridFunction> shape = GaussianBump{};
  std::function<double(double)> time_profile;

  bool constant_in_time() const { return !static_cast<bool>(time_profile); }
  int dimension() const;
};

/// J(xi, s) = int mu(deta) (1 + |xi - eta|^2)^alpha |FG(s)(xi - eta)|^2.
/// Returns +infinity when the tail diverges.
double weighted_kernel_integral(const SpectralMeasure& mu, double k, double alpha, double s,
                                std::span<const double> xi, const QuadratureSettings& settings = {});

/// int mu(deta) (1 + |xi - eta|^2)^{-gamma}; at xi = 0 this is the condition integral.
double shifted_condition_integral(const SpectralMeasure& mu, double gamma, std::span<const double> xi,
                                  const QuadratureSettings& settings = {});

/// I^alpha_{G,Z} over [0, T]. With reversed = true the kernel is G(T - s).
double isometry_functional(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z,
                           double T, bool reversed, const QuadratureSettings& settings = {});

/// <v_{G,Z}>_t, the Meyer process of the H^alpha-valued martingale.
double increasing_process(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z,
                          double t, const QuadratureSettings& settings = {});

/// E || u_{G,Z}(t2) - u_{G,Z}(t1) ||^2_{H^alpha} for a time-constant Z.
double increment_second_moment(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z,
                               double t1, double t2, const QuadratureSettings& settings = {});

/// The same quantity through E||u(t2)||^2 + E||u(t1)||^2 - 2 E<u(t2), u(t1)>.
double increment_second_moment_via_covariance(const SpectralMeasure& mu, double k, double alpha,
                                              const DeterministicZ& Z, double t1, double t2,
                                              const QuadratureSettings& settings = {});

/// Right side of the moment bound for the stochastic integral with q = 1:
/// int_0^t ds ||Z(s)||^2 sup_xi J(xi, s), the sup taken over `xi_grid` (d = 1 points).
double burkholder_bound(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z, double t,
                        std::span<const double> xi_grid, const QuadratureSettings& settings = {});

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of log-moment residuals
};

/// Least squares of log(moment) against log(lag).
PowerLawFit fit_power_law(std::span<const double> lags, std::span<const double> moments);

PowerLawFit scaling_slope(const SpectralMeasure& mu, double k, double alpha, const DeterministicZ& Z, double t1,
                          std::span<const double> lags, const QuadratureSettings& settings = {});

}  // namespace fracwave
