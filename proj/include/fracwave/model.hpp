#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fracwave/quadrature_settings.hpp"

namespace fracwave {

inline constexpr int kMaxDimension = 3;

/// Order k of the fractional Laplacian, spatial dimension and time horizon.
struct ModelParams {
  double k = 1.0;
  int d = 1;
  double T = 1.0;

  void validate() const;
};

/// Riesz covariance |x|^{-beta}; spectral density constant * |xi|^{beta - d}.
struct RieszKernel {
  double beta = 0.5;
  int d = 1;
  double constant = 1.0;
};

/// Radially symmetric density m(|xi|) with respect to Lebesgue measure.
/// `origin_exponent` p declares m(r) ~ r^p as r -> 0 (p > -d); quadrature
/// uses it to integrate the innermost panel exactly.
struct RadialDensity {
  std::function<double(double)> density;
  int d = 1;
  double origin_exponent = 0.0;
};

struct Atom {
  std::vector<double> location;
  double mass = 0.0;
};

/// Finite sum of point masses. An empty list is the zero measure.
struct FiniteAtoms {
  int d = 1;
  std::vector<Atom> atoms;
};

/// Constant density `level` (level 0 is the zero measure).
struct FlatDensity {
  double level = 1.0;
  int d = 1;
};

using SpectralMeasure = std::variant<RieszKernel, RadialDensity, FiniteAtoms, FlatDensity>;

int dimension_of(const SpectralMeasure& mu);
void validate_measure(const SpectralMeasure& mu);
bool is_zero_measure(const SpectralMeasure& mu);
std::string measure_name(const SpectralMeasure& mu);

/// Surface area of the unit sphere S^{d-1} (2 for d = 1).
double sphere_area(int d);

/// c(d, beta) = 2^{d-beta} pi^{d/2} Gamma((d-beta)/2) / Gamma(beta/2).
double riesz_constant(int d, double beta);

SpectralMeasure riesz_measure(double beta, int d, std::optional<double> constant = std::nullopt);

/// Radial density view of a measure with a density. Riesz and flat measures
/// are converted; atoms have no density and return nullopt.
std::optional<RadialDensity> as_radial_density(const SpectralMeasure& mu);

struct SmoothnessQuery {
  double alpha = 0.0;
  double eta = 0.5;
  double delta = 1.0;
  double gamma_ic = 0.0;
  double q = 2.0;  // +infinity is accepted and means the q -> infinity limit

  void validate() const;
};

enum class ConditionId { Dalang_1_5, Eta_2_5_0 };
enum class ConditionMethod { Analytic, Quadrature };
enum class ConditionStatus { Finite, Divergent, Inconclusive };

/// Which route check_*_condition should take. Auto picks the analytic rule
/// when one exists for the measure.
enum class MethodChoice { Auto, ForceQuadrature };

struct ConditionReport {
  ConditionId condition_id = ConditionId::Dalang_1_5;
  double value = 0.0;  // +infinity when divergent
  bool holds = false;
  ConditionStatus status = ConditionStatus::Finite;
  ConditionMethod method = ConditionMethod::Analytic;
  double tolerance_used = 0.0;
  double tail_exponent = 0.0;  // fitted growth exponent of dyadic increments (quadrature only)
};

std::string to_string(ConditionId id);
std::string to_string(ConditionMethod m);
std::string to_string(ConditionStatus s);

/// Value of  int mu(dxi) (1+|xi|^2)^{-gamma}  with finiteness verdict.
ConditionReport condition_integral(const SpectralMeasure& mu, double gamma,
                                   const QuadratureSettings& settings,
                                   MethodChoice choice = MethodChoice::Auto);

ConditionReport check_dalang_condition(const SpectralMeasure& mu, double k, double alpha,
                                       const QuadratureSettings& settings = {},
                                       MethodChoice choice = MethodChoice::Auto);

ConditionReport check_eta_condition(const SpectralMeasure& mu, double k, double alpha, double eta,
                                    const QuadratureSettings& settings = {},
                                    MethodChoice choice = MethodChoice::Auto);

/// Supremum of alpha for which the Dalang integral is finite. Returns 0 when
/// even alpha = 0 fails (an empty admissible interval).
double max_alpha(const SpectralMeasure& mu, double k, const QuadratureSettings& settings = {},
                 double bisection_tol = 1e-3);

struct ExponentReport {
  double alpha_max = 0.0;
  double theta0 = 0.0;
  std::optional<double> theta1;
  std::optional<double> moment_slope;
  double time_holder_sup = 0.0;
  std::optional<double> spatial_holder_sup;
};

ExponentReport holder_exponents(const ModelParams& params, const SpectralMeasure& mu,
                                const SmoothnessQuery& query);

}  // namespace fracwave
