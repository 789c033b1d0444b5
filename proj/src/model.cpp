#include "fracwave/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracwave/error.hpp"
#include "integrate.hpp"

namespace fracwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dimension(int d) {
  if (d < 1 || d > kMaxDimension) {
    throw DomainError("model", "dimension d=" + std::to_string(d) + " outside supported {1,2,3}");
  }
}

// int_0^inf r^{a-1} (1+r^2)^{-g} dr = B(a/2, g - a/2) / 2, finite iff 0 < a < 2g.
double radial_beta_integral(double a, double g) { return 0.5 * std::beta(0.5 * a, g - 0.5 * a); }

ConditionReport quadrature_condition(const RadialDensity& rd, double gamma,
                                     const QuadratureSettings& settings) {
  detail::Budget budget(settings, "condition integral");
  const double area = sphere_area(rd.d);
  auto f = [&](double r) {
    if (r <= 0) return 0.0;
    return area * std::pow(r, rd.d - 1) * rd.density(r) * std::pow(1.0 + r * r, -gamma);
  };
  const double inner = detail::gk_power_origin(f, rd.d - 1 + rd.origin_exponent, 1.0, budget);
  const detail::TailResult tail = detail::dyadic_tail(f, 1.0, budget);

  ConditionReport rep;
  rep.method = ConditionMethod::Quadrature;
  rep.tolerance_used = settings.rel_tol;
  rep.tail_exponent = tail.exponent;
  switch (tail.status) {
    case detail::TailStatus::Converged:
      rep.status = ConditionStatus::Finite;
      rep.value = inner + tail.value;
      rep.holds = true;
      break;
    case detail::TailStatus::Divergent:
      rep.status = ConditionStatus::Divergent;
      rep.value = kInf;
      rep.holds = false;
      break;
    case detail::TailStatus::Inconclusive:
      rep.status = ConditionStatus::Inconclusive;
      rep.value = inner + tail.value;
      rep.holds = false;
      break;
  }
  return rep;
}

ConditionReport analytic_report(double value) {
  ConditionReport rep;
  rep.method = ConditionMethod::Analytic;
  rep.value = value;
  rep.holds = std::isfinite(value);
  rep.status = rep.holds ? ConditionStatus::Finite : ConditionStatus::Divergent;
  return rep;
}

}  // namespace

void ModelParams::validate() const {
  if (!(k > 0)) throw DomainError("model", "k must be positive");
  require_dimension(d);
  if (!(T > 0)) throw DomainError("model", "T must be positive");
}

void SmoothnessQuery::validate() const {
  if (!(alpha >= 0)) throw DomainError("model", "alpha must be >= 0");
  if (!(eta > 0 && eta < 1)) throw DomainError("model", "eta must lie in ]0,1[");
  if (!(delta > 0 && delta <= 1)) throw DomainError("model", "delta must lie in ]0,1]");
  if (!(gamma_ic >= 0 && gamma_ic < 1)) throw DomainError("model", "gamma_ic must lie in [0,1[");
  if (!(q >= 2)) throw DomainError("model", "q must be >= 2");
}

int dimension_of(const SpectralMeasure& mu) {
  return std::visit([](const auto& m) { return m.d; }, mu);
}

void validate_measure(const SpectralMeasure& mu) {
  std::visit(Overloaded{
                 [](const RieszKernel& m) {
                   require_dimension(m.d);
                   // beta == d is the flat density (white noise), the limit of the family.
                   if (!(m.beta > 0 && m.beta <= m.d)) {
                     throw DomainError("model", "Riesz kernel requires 0 < beta <= d (beta=" +
                                                    std::to_string(m.beta) + ", d=" + std::to_string(m.d) + ")");
                   }
                   if (!(m.constant > 0)) throw DomainError("model", "Riesz constant must be positive");
                 },
                 [](const RadialDensity& m) {
                   require_dimension(m.d);
                   if (!m.density) throw DomainError("model", "radial density function is empty");
                   if (!(m.origin_exponent > -m.d)) {
                     throw DomainError("model", "radial density origin exponent must exceed -d");
                   }
                 },
                 [](const FiniteAtoms& m) {
                   require_dimension(m.d);
                   for (const Atom& a : m.atoms) {
                     if (static_cast<int>(a.location.size()) != m.d) {
                       throw DomainError("model", "atom location dimension mismatch");
                     }
                     if (!(a.mass >= 0)) throw DomainError("model", "atom masses must be non-negative");
                   }
                 },
                 [](const FlatDensity& m) {
                   require_dimension(m.d);
                   if (!(m.level >= 0)) throw DomainError("model", "flat density level must be >= 0");
                 },
             },
             mu);
}

bool is_zero_measure(const SpectralMeasure& mu) {
  return std::visit(Overloaded{
                        [](const RieszKernel&) { return false; },
                        [](const RadialDensity&) { return false; },
                        [](const FiniteAtoms& m) {
                          return std::all_of(m.atoms.begin(), m.atoms.end(),
                                             [](const Atom& a) { return a.mass == 0; });
                        },
                        [](const FlatDensity& m) { return m.level == 0; },
                    },
                    mu);
}

std::string measure_name(const SpectralMeasure& mu) {
  return std::visit(Overloaded{
                        [](const RieszKernel&) { return std::string("riesz"); },
                        [](const RadialDensity&) { return std::string("radial"); },
                        [](const FiniteAtoms&) { return std::string("atoms"); },
                        [](const FlatDensity&) { return std::string("flat"); },
                    },
                    mu);
}

double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double riesz_constant(int d, double beta) {
  return std::pow(2.0, d - beta) * std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(0.5 * (d - beta)) /
         std::tgamma(0.5 * beta);
}

SpectralMeasure riesz_measure(double beta, int d, std::optional<double> constant) {
  require_dimension(d);
  if (!(beta > 0 && beta <= d)) {
    throw DomainError("model", "riesz_measure: beta must lie in ]0,d] (beta=" + std::to_string(beta) +
                                   ", d=" + std::to_string(d) + ")");
  }
  // The classical constant has a pole at beta = d; the flat limit defaults to 1.
  const double fallback = beta < d ? riesz_constant(d, beta) : 1.0;
  RieszKernel r{beta, d, constant.value_or(fallback)};
  validate_measure(r);
  return r;
}

std::optional<RadialDensity> as_radial_density(const SpectralMeasure& mu) {
  return std::visit(Overloaded{
                        [](const RieszKernel& m) -> std::optional<RadialDensity> {
                          const double c = m.constant, p = m.beta - m.d;
                          return RadialDensity{[c, p](double r) { return c * std::pow(r, p); }, m.d, p};
                        },
                        [](const RadialDensity& m) -> std::optional<RadialDensity> { return m; },
                        [](const FiniteAtoms&) -> std::optional<RadialDensity> { return std::nullopt; },
                        [](const FlatDensity& m) -> std::optional<RadialDensity> {
                          const double level = m.level;
                          return RadialDensity{[level](double) { return level; }, m.d, 0.0};
                        },
                    },
                    mu);
}

std::string to_string(ConditionId id) {
  return id == ConditionId::Dalang_1_5 ? "Dalang_1_5" : "Eta_2_5_0";
}
std::string to_string(ConditionMethod m) { return m == ConditionMethod::Analytic ? "analytic" : "quadrature"; }
std::string to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::Finite: return "finite";
    case ConditionStatus::Divergent: return "divergent";
    case ConditionStatus::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

ConditionReport condition_integral(const SpectralMeasure& mu, double gamma, const QuadratureSettings& settings,
                                   MethodChoice choice) {
  validate_measure(mu);
  settings.validate();
  if (const auto* atoms = std::get_if<FiniteAtoms>(&mu)) {
    double v = 0.0;
    for (const Atom& a : atoms->atoms) {
      double r2 = 0.0;
      for (double x : a.location) r2 += x * x;
      v += a.mass * std::pow(1.0 + r2, -gamma);
    }
    return analytic_report(v);
  }
  if (choice == MethodChoice::Auto) {
    if (const auto* r = std::get_if<RieszKernel>(&mu)) {
      // Boundary beta == 2 gamma diverges logarithmically.
      if (!(r->beta < 2.0 * gamma)) return analytic_report(kInf);
      return analytic_report(r->constant * sphere_area(r->d) * radial_beta_integral(r->beta, gamma));
    }
    if (const auto* f = std::get_if<FlatDensity>(&mu)) {
      if (f->level == 0) return analytic_report(0.0);
      if (!(f->d < 2.0 * gamma)) return analytic_report(kInf);
      return analytic_report(f->level * sphere_area(f->d) * radial_beta_integral(f->d, gamma));
    }
  }
  return quadrature_condition(*as_radial_density(mu), gamma, settings);
}

ConditionReport check_dalang_condition(const SpectralMeasure& mu, double k, double alpha,
                                       const QuadratureSettings& settings, MethodChoice choice) {
  if (!(k > alpha && alpha >= 0)) {
    throw DomainError("model", "check_dalang_condition requires k > alpha >= 0");
  }
  ConditionReport rep = condition_integral(mu, k - alpha, settings, choice);
  rep.condition_id = ConditionId::Dalang_1_5;
  return rep;
}

ConditionReport check_eta_condition(const SpectralMeasure& mu, double k, double alpha, double eta,
                                    const QuadratureSettings& settings, MethodChoice choice) {
  if (!(k > 0 && alpha >= 0)) throw DomainError("model", "check_eta_condition requires k > 0, alpha >= 0");
  if (!(eta > alpha / k && eta < 1)) {
    throw DomainError("model", "check_eta_condition requires eta in ]alpha/k, 1[ (eta=" + std::to_string(eta) +
                                   ", alpha/k=" + std::to_string(alpha / k) + ")");
  }
  ConditionReport rep = condition_integral(mu, k * eta - alpha, settings, choice);
  rep.condition_id = ConditionId::Eta_2_5_0;
  return rep;
}

double max_alpha(const SpectralMeasure& mu, double k, const QuadratureSettings& settings, double bisection_tol) {
  validate_measure(mu);
  if (!(k > 0)) throw DomainError("model", "max_alpha requires k > 0");
  if (const auto* r = std::get_if<RieszKernel>(&mu)) return std::max(0.0, k - 0.5 * r->beta);
  if (const auto* f = std::get_if<FlatDensity>(&mu)) return f->level == 0 ? k : std::max(0.0, k - 0.5 * f->d);
  if (std::holds_alternative<FiniteAtoms>(mu)) return k;

  auto holds = [&](double alpha) {
    return check_dalang_condition(mu, k, alpha, settings, MethodChoice::ForceQuadrature).holds;
  };
  if (!holds(0.0)) return 0.0;
  double lo = 0.0;
  double hi = k;
  if (holds(k * (1.0 - 1e-9))) return k;
  while (hi - lo > bisection_tol) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ExponentReport holder_exponents(const ModelParams& params, const SpectralMeasure& mu,
                                const SmoothnessQuery& query) {
  params.validate();
  query.validate();
  validate_measure(mu);
  if (dimension_of(mu) != params.d) throw DomainError("model", "measure dimension differs from params.d");
  const double k = params.k;
  const double alpha = query.alpha;
  if (!(alpha < k)) throw DomainError("model", "holder_exponents requires alpha < k");
  if (!(query.eta > alpha / k)) throw DomainError("model", "holder_exponents requires eta > alpha/k");

  ExponentReport rep;
  rep.alpha_max = max_alpha(mu, k);
  rep.theta0 = std::min({0.5, 1.0 - query.eta, query.delta, 1.0 - query.gamma_ic});

  double rate = std::min(0.5, 1.0 - query.eta);
  if (const auto* r = std::get_if<RieszKernel>(&mu); r && r->beta < 2.0 * (k - alpha)) {
    const double sharp = 1.0 - (r->beta + 2.0 * alpha) / (2.0 * k);
    rep.theta1 = std::min({sharp, query.delta, 1.0 - query.gamma_ic});
    rep.moment_slope = 2.0 - (r->beta + 2.0 * alpha) / k;
    rate = sharp;
  }
  rep.time_holder_sup = rate - (std::isfinite(query.q) ? 1.0 / query.q : 0.0);
  if (alpha - 0.5 * params.d > 0) rep.spatial_holder_sup = alpha - 0.5 * params.d;
  return rep;
}

}  // namespace fracwave
