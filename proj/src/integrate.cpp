#include "integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracwave/error.hpp"

namespace fracwave {

void QuadratureSettings::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0) || !(truncation_radius > 0) || max_subdivisions <= 0) {
    throw DomainError("quadrature", "QuadratureSettings: all tolerances and budgets must be positive");
  }
}

namespace detail {

void Budget::charge(std::int64_t evaluations) {
  evaluations_ += evaluations;
  if (evaluations_ > settings_.max_subdivisions * 15) {
    throw NumericalError("quadrature", where_ + ": subdivision budget exhausted (" +
                                           std::to_string(settings_.max_subdivisions) + " panels)");
  }
}

namespace {

struct Panel {
  double a, b, value, error, l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel kronrod(const Fn& f, double a, double b) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  auto g = [&](double x) { return f(mid + half * x); };
  double err = 0.0, l1 = 0.0;
  const double v = Rule::integrate(g, -1.0, 1.0, 0, 0.0, &err, &l1);
  const double scale = std::abs(half);
  return {a, b, v * half, err * scale, l1 * scale};
}

}  // namespace

// Globally adaptive: always bisect the panel with the largest error estimate.
// Panels whose error is at the rounding floor of their own values stop there.
double gk(const Fn& f, double a, double b, Budget& budget, double rel_tol) {
  if (a == b) return 0.0;
  constexpr int kMaxPanels = 4000;
  const double tol = rel_tol > 0 ? rel_tol : budget.settings().rel_tol;
  const double abs_tol = budget.settings().abs_tol * 1e-3;
  std::priority_queue<Panel> heap;
  Panel first = kronrod(f, a, b);
  budget.charge(15);
  double value = first.value, error = first.error, l1 = first.l1;
  double settled_error = 0.0;
  heap.push(first);
  int panels = 1;
  while (error > std::max(tol * l1, abs_tol) && !heap.empty() && panels < kMaxPanels) {
    const Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      settled_error += p.error;
      continue;
    }
    const Panel left = kronrod(f, p.a, m), right = kronrod(f, m, p.b);
    budget.charge(30);
    ++panels;
    value += left.value + right.value - p.value;
    l1 += left.l1 + right.l1 - p.l1;
    error += left.error + right.error - p.error;
    for (const Panel& q : {left, right}) {
      if (q.error <= 64.0 * std::numeric_limits<double>::epsilon() * q.l1) {
        settled_error += q.error;
      } else {
        heap.push(q);
      }
    }
    if (error - settled_error <= std::max(tol * l1, abs_tol)) break;
  }
  if (!std::isfinite(value)) {
    throw NumericalError("quadrature", "non-finite integrand on [" + std::to_string(a) + ", " +
                                           std::to_string(b) + "]");
  }
  if (error > 1e3 * tol * l1 + budget.settings().abs_tol && error > 1e-6 * l1) {
    throw NumericalError("quadrature", "adaptive rule failed to converge on [" + std::to_string(a) +
                                           ", " + std::to_string(b) + "]");
  }
  return value;
}

double gk_power_origin(const Fn& f, double e, double a, Budget& budget, double rel_tol) {
  if (a <= 0) return 0.0;
  if (e >= 0) return gk(f, 0.0, a, budget, rel_tol);
  const double lambda = 1.0 / (1.0 + e);
  auto g = [&](double v) {
    if (v <= 0) v = 1e-300;
    const double r = a * std::pow(v, lambda);
    return f(r) * a * lambda * std::pow(v, lambda - 1.0);
  };
  return gk(g, 0.0, 1.0, budget, rel_tol);
}

double gk_power_right(const Fn& f, double e, double a, double b, Budget& budget, double rel_tol) {
  auto reflected = [&](double s) { return f(b - s); };
  return gk_power_origin(reflected, e, b - a, budget, rel_tol);
}

TailResult dyadic_tail(const Fn& f, double r0, Budget& budget, double divergence_margin,
                       int max_shells) {
  constexpr int kFitFirst = 6;
  constexpr int kFitLast = 11;  // shells [2^6, 2^12] r0
  const double tol = budget.settings().rel_tol;

  std::vector<double> shells;
  double partial = 0.0;
  auto shell = [&](int n) {
    const double lo = std::ldexp(r0, n);
    const double hi = 2.0 * lo;
    // Quarter-shells keep each Kronrod panel well inside one octave.
    double s = 0.0;
    for (int q = 0; q < 4; ++q) s += gk(f, lo + q * (hi - lo) / 4, lo + (q + 1) * (hi - lo) / 4, budget, tol * 0.1);
    return s;
  };
  for (int n = 0; n <= kFitLast; ++n) {
    shells.push_back(shell(n));
    partial += shells.back();
  }

  TailResult out;
  auto fit_window = [&](int first, int last, LineFit& fit) {
    std::vector<double> xs, ys;
    for (int n = first; n <= last; ++n) {
      if (!(shells[n] > 0)) return false;
      xs.push_back(n);
      ys.push_back(std::log2(shells[n]));
    }
    fit = fit_line(xs, ys);
    return true;
  };

  LineFit fit;
  if (!fit_window(kFitFirst, kFitLast, fit)) {
    // A shell vanished: compact support or a zero measure.
    out.value = partial;
    out.status = TailStatus::Converged;
    out.exponent = -std::numeric_limits<double>::infinity();
    return out;
  }
  out.exponent = fit.slope;
  out.fit_residual = fit.rms_residual;

  if (fit.slope > -divergence_margin) {
    out.value = std::numeric_limits<double>::infinity();
    out.status = TailStatus::Divergent;
    return out;
  }

  // Extend until the shells settle into a clean geometric sequence.
  int n = kFitLast;
  while (n + 1 < max_shells) {
    const double last = shells[n];
    if (last <= tol * 1e-3 * std::abs(partial)) break;
    if (n >= kFitLast + 2) {
      const double r1 = shells[n] / shells[n - 1];
      const double r2 = shells[n - 1] / shells[n - 2];
      if (std::abs(r1 - r2) < 1e-7 * std::abs(r1)) break;
    }
    ++n;
    shells.push_back(shell(n));
    partial += shells.back();
  }

  const double ratio = shells[n] / shells[n - 1];
  if (!(ratio < 1.0)) {
    out.value = std::numeric_limits<double>::infinity();
    out.status = TailStatus::Divergent;
    return out;
  }
  const double tail = shells[n] * ratio / (1.0 - ratio);
  out.value = partial + tail;
  const double prev_ratio = shells[n - 1] / shells[n - 2];
  const bool geometric = std::abs(ratio - prev_ratio) < 1e-3 * ratio;
  out.status = (geometric || tail < tol * std::abs(out.value)) ? TailStatus::Converged
                                                                 : TailStatus::Inconclusive;
  return out;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
  const std::size_t n = x_.size();
  if (n < 3 || y_.size() != n) throw DomainError("quadrature", "spline needs >= 3 matching nodes");
  // Tridiagonal solve for second derivatives, natural end conditions.
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    const double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
    const double rhs = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    const double denom = b - a * c[i - 1];
    c[i] = cc / denom;
    d[i] = (rhs - a * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = d[i] - c[i] * m_[i + 1];
    if (i == 1) break;
  }
}

double CubicSpline::operator()(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i + 1 >= x_.size()) i = x_.size() - 2;
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("estimators", "line fit needs >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw NumericalError("estimators", "degenerate abscissae in line fit");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.residuals.push_back(r);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace detail
}  // namespace fracwave
