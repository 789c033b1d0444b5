#include "fracwave/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

constexpr double kZ95 = 1.959963984540054;
constexpr double kCandidateSpacing = 0.2;

unsigned worker_count(const McOptions& o, int n) {
  unsigned w = o.workers ? o.workers : std::max(1u, std::thread::hardware_concurrency());
  return std::max(1u, std::min<unsigned>(w, static_cast<unsigned>(std::max(n, 1))));
}

// Runs fn(p) for p in [0, n) and returns the results in path order.
template <class Fn>
auto run_paths(int n, const McOptions& o, Fn fn) -> std::vector<decltype(fn(0))> {
  using T = decltype(fn(0));
  std::vector<T> out(n);
  std::atomic<int> next{0};
  std::mutex m;
  int failed_path = -1;
  std::exception_ptr failure;
  auto work = [&] {
    for (int p; (p = next.fetch_add(1)) < n;) {
      try {
        out[p] = fn(p);
      } catch (...) {
        std::lock_guard lock(m);
        if (failed_path < 0 || p < failed_path) failed_path = p, failure = std::current_exception();
        next.store(n);
      }
    }
  };
  const unsigned w = worker_count(o, n);
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Domain) throw;
      throw NumericalError("estimators", "path " + std::to_string(failed_path) + ": " + e.what());
    }
  }
  return out;
}

MomentEstimate summarize(const std::vector<double>& v, double t, double alpha, double q) {
  MomentEstimate e{t, alpha, q, 0.0, 0.0, static_cast<int>(v.size())};
  // Shifted by the first value so identical samples give an exact mean.
  const double shift = v.empty() ? 0.0 : v.front();
  for (double x : v) e.mean += x - shift;
  e.mean = shift + e.mean / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - e.mean) * (x - e.mean);
  e.std_error = v.size() > 1 ? std::sqrt(ss / (v.size() - 1) / v.size()) : 0.0;
  return e;
}

std::size_t snapshot_index(const Trajectory& tr, double t) {
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (std::abs(tr.times[i] - t) <= 1e-9 * std::max(1.0, t)) return i;
  }
  throw DomainError("estimators", "time " + std::to_string(t) + " is not a snapshot");
}

void check_paths(int n_paths) {
  if (n_paths < 2) throw DomainError("estimators", "n_paths must be at least 2");
}

SpectralField difference(const SpectralField& a, const SpectralField& b) {
  SpectralField d = a;
  for (std::size_t i = 0; i < d.coefficients.size(); ++i) d.coefficients[i] -= b.coefficients[i];
  return d;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, slope_var = 0.0;
  std::vector<double> residuals;
};

// Ordinary least squares of y on x with var(slope) = w' C w for a given
// covariance C of the y values.
LineFit ols(const std::vector<double>& x, const std::vector<double>& y, const std::vector<std::vector<double>>& cov) {
  const std::size_t m = x.size();
  const double xb = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double yb = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) sxx += (x[i] - xb) * (x[i] - xb), sxy += (x[i] - xb) * (y[i] - yb);
  if (!(sxx > 0)) throw NumericalError("estimators", "degenerate fit: all lags equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = yb - f.slope * xb;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) f.slope_var += (x[i] - xb) * (x[k] - xb) * cov[i][k];
    f.residuals.push_back(y[i] - f.intercept - f.slope * x[i]);
  }
  f.slope_var /= sxx * sxx;
  return f;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Inconsistent: return "inconsistent";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::string to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::Finite: return "finite";
    case GrowthVerdict::Divergent: return "divergent";
    case GrowthVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

MomentEstimate mc_moment(const SolverConfig& config, double t, double alpha, double q, int n_paths,
                         const McOptions& options) {
  check_paths(n_paths);
  if (!(q >= 2)) throw DomainError("estimators", "q must be >= 2");
  if (!(t >= 0 && t <= config.params.T)) throw DomainError("estimators", "t must lie in [0, T]");
  SolverConfig c = config;
  c.alpha = alpha;
  c.snapshot_times = {t};
  c.store_states = false;
  c.validate();
  const auto values = run_paths(n_paths, options, [&](int p) {
    const Trajectory tr = solve_path(c, static_cast<std::uint32_t>(p));
    return std::pow(tr.sobolev_sq[snapshot_index(tr, t)], q / 2);
  });
  return summarize(values, t, alpha, q);
}

double theory_increment_slope(const SpectralMeasure& mu, double k, double alpha, double q) {
  if (const auto* r = std::get_if<RieszKernel>(&mu)) return q * (1.0 - (r->beta + 2 * alpha) / (2 * k));
  return std::numeric_limits<double>::quiet_NaN();
}

ScalingFit fit_increment_samples(std::span<const double> lags, const std::vector<std::vector<double>>& samples,
                                 double theory_slope, double q, double tolerance) {
  const std::size_t m = lags.size();
  if (m < 2) throw DomainError("estimators", "need at least two lags");
  if (samples.size() < 2) throw DomainError("estimators", "need at least two paths");
  for (const auto& row : samples) {
    if (row.size() != m) throw DomainError("estimators", "every path needs one sample per lag");
  }
  for (double h : lags) {
    if (!(h > 0)) throw DomainError("estimators", "lags must be positive");
  }
  const double n = static_cast<double>(samples.size());
  ScalingFit fit;
  fit.lags.assign(lags.begin(), lags.end());
  fit.theory_slope = theory_slope;
  fit.tolerance = tolerance;
  std::vector<double> mean(m, 0.0);
  for (const auto& row : samples)
    for (std::size_t i = 0; i < m; ++i) mean[i] += row[i] / n;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(mean[i] > 0)) throw NumericalError("estimators", "non-positive moment at lag " + std::to_string(lags[i]));
  }
  // Covariance of log(mean_i), delta method.
  std::vector<std::vector<double>> cov(m, std::vector<double>(m, 0.0));
  for (const auto& row : samples)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k) cov[i][k] += (row[i] - mean[i]) * (row[k] - mean[k]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k) cov[i][k] /= (n - 1) * n * mean[i] * mean[k];
  for (std::size_t i = 0; i < m; ++i) {
    fit.moments.push_back({lags[i], 0.0, q, mean[i], std::sqrt(cov[i][i]) * mean[i], static_cast<int>(n)});
  }

  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = std::log(lags[i]), y[i] = std::log(mean[i]);
  LineFit f = ols(x, y, cov);

  const std::size_t largest = std::max_element(x.begin(), x.end()) - x.begin();
  if (m >= 4) {
    std::vector<double> ar(m);
    for (std::size_t i = 0; i < m; ++i) ar[i] = std::abs(f.residuals[i]);
    std::vector<double> sorted = ar;
    std::nth_element(sorted.begin(), sorted.begin() + m / 2, sorted.end());
    double med = sorted[m / 2];
    if (m % 2 == 0) med = 0.5 * (med + *std::max_element(sorted.begin(), sorted.begin() + m / 2));
    if (ar[largest] > 3 * med) {
      std::vector<double> x2, y2;
      std::vector<std::vector<double>> c2;
      for (std::size_t i = 0; i < m; ++i) {
        if (i == largest) continue;
        x2.push_back(x[i]);
        y2.push_back(y[i]);
        std::vector<double> r;
        for (std::size_t k = 0; k < m; ++k)
          if (k != largest) r.push_back(cov[i][k]);
        c2.push_back(std::move(r));
      }
      f = ols(x2, y2, c2);
      fit.dropped_largest_lag = true;
    }
  }
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  fit.slope_se = std::sqrt(std::max(f.slope_var, 0.0));
  fit.slope_ci_lo = f.slope - kZ95 * fit.slope_se;
  fit.slope_ci_hi = f.slope + kZ95 * fit.slope_se;

  if (std::isnan(theory_slope)) {
    fit.verdict = Verdict::Inconclusive;
  } else {
    auto covers = [&](double s) { return s >= fit.slope_ci_lo - tolerance && s <= fit.slope_ci_hi + tolerance; };
    if (!covers(theory_slope)) {
      fit.verdict = Verdict::Inconsistent;
    } else if (covers(theory_slope - kCandidateSpacing) || covers(theory_slope + kCandidateSpacing)) {
      fit.verdict = Verdict::Inconclusive;
    } else {
      fit.verdict = Verdict::Consistent;
    }
  }
  return fit;
}

ScalingFit mc_increment_scaling(const SolverConfig& config, double t1, std::span<const double> lags, double alpha,
                                double q, int n_paths, const McOptions& options, double tolerance) {
  check_paths(n_paths);
  if (lags.size() < 4) throw DomainError("estimators", "mc_increment_scaling needs at least 4 lags");
  if (!(q >= 2)) throw DomainError("estimators", "q must be >= 2");
  for (double h : lags) {
    const double e = std::log2(h);
    if (!(h > 0) || std::abs(e - std::round(e)) > 1e-12) throw DomainError("estimators", "lags must be dyadic");
  }
  const double hmax = *std::max_element(lags.begin(), lags.end());
  if (!(t1 >= 0) || t1 + hmax > config.params.T * (1 + 1e-12))
    throw DomainError("estimators", "t1 + max(lags) must not exceed T");
  SolverConfig c = config;
  c.alpha = alpha;
  c.store_states = true;
  c.snapshot_times = {t1};
  for (double h : lags) c.snapshot_times.push_back(t1 + h);
  c.validate();
  const auto samples = run_paths(n_paths, options, [&](int p) {
    const Trajectory tr = solve_path(c, static_cast<std::uint32_t>(p));
    const StateVector& s1 = tr.states[snapshot_index(tr, t1)];
    std::vector<double> row;
    for (double h : lags) {
      const double a = sobolev_norm(difference(tr.states[snapshot_index(tr, t1 + h)].position, s1.position), alpha);
      row.push_back(std::pow(a, q));
    }
    return row;
  });
  ScalingFit fit = fit_increment_samples(lags, samples, theory_increment_slope(c.measure, c.params.k, alpha, q), q,
                                         tolerance);
  for (auto& m : fit.moments) m.t = t1 + m.t, m.alpha = alpha;
  return fit;
}

FrontierReport regularity_frontier(const SolverConfig& config, double t, std::span<const double> alpha_grid,
                                   int n_paths, std::span<const int> grid_sizes, const McOptions& options,
                                   double stable_change) {
  check_paths(n_paths);
  static const int kDefaultSizes[] = {256, 512, 1024};
  if (grid_sizes.empty()) grid_sizes = kDefaultSizes;
  if (grid_sizes.size() < 2) throw DomainError("estimators", "the frontier needs at least two grid sizes");
  for (double a : alpha_grid) {
    if (!(a >= 0 && a < config.params.k)) throw DomainError("estimators", "alpha_grid must lie in [0, k)");
  }
  FrontierReport rep;
  for (double a : alpha_grid) rep.rows.push_back({a, {grid_sizes.begin(), grid_sizes.end()}, {}, {}});

  for (int N : grid_sizes) {
    SolverConfig c = config;
    c.grid = make_grid(config.grid.d, config.grid.L, N);
    c.snapshot_times = {t};
    c.store_states = true;
    if (c.forced_Z) {
      if (auto* g = std::get_if<GridFunction>(&c.forced_Z->shape); g && !(g->transform.grid == c.grid))
        throw DomainError("estimators", "a grid-valued forced Z cannot follow grid refinement");
    }
    auto resample = [&](const RealField& f) {
      if (f.values.empty()) return f;
      throw DomainError("estimators", "grid refinement needs initial data given through v0_bump_amplitude");
    };
    c.v0 = resample(c.v0);
    c.v0_tilde = resample(c.v0_tilde);
    c.validate();
    const auto values = run_paths(n_paths, options, [&](int p) {
      const Trajectory tr = solve_path(c, static_cast<std::uint32_t>(p));
      const SpectralField& u = tr.states[snapshot_index(tr, t)].position;
      std::vector<double> row;
      for (double a : alpha_grid) {
        const double s = sobolev_norm(u, a);
        row.push_back(s * s);
      }
      return row;
    });
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
      std::vector<double> col(n_paths);
      for (int p = 0; p < n_paths; ++p) col[p] = values[p][i];
      rep.rows[i].estimates.push_back(summarize(col, t, alpha_grid[i], 2.0));
    }
  }

  double largest_finite = -1, smallest_divergent = std::numeric_limits<double>::infinity();
  for (auto& row : rep.rows) {
    std::vector<double> change;
    for (std::size_t i = 1; i < row.estimates.size(); ++i)
      change.push_back(row.estimates[i].mean / row.estimates[i - 1].mean - 1.0);
    const bool stable = std::all_of(change.begin(), change.end(), [&](double r) { return std::abs(r) < stable_change; });
    const bool growing = std::all_of(change.begin(), change.end(), [&](double r) { return r > stable_change; }) &&
                         change.back() >= 0.5 * change.front();
    row.verdict = stable ? GrowthVerdict::Finite : growing ? GrowthVerdict::Divergent : GrowthVerdict::Inconclusive;
    if (row.verdict == GrowthVerdict::Finite) largest_finite = std::max(largest_finite, row.alpha);
    if (row.verdict == GrowthVerdict::Divergent) smallest_divergent = std::min(smallest_divergent, row.alpha);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (largest_finite >= 0 && std::isfinite(smallest_divergent)) {
    rep.crossover = 0.5 * (largest_finite + smallest_divergent);
    rep.inconclusive_width = std::max(0.0, smallest_divergent - largest_finite);
  } else {
    rep.crossover = nan;
    rep.inconclusive_width = nan;
  }
  return rep;
}

RefinementStudy moment_refinement(const SolverConfig& config, double t, double alpha, int n_paths, int levels,
                                  const McOptions& options) {
  if (levels < 2) throw DomainError("estimators", "moment_refinement needs at least two levels");
  if (!config.v0.values.empty() || !config.v0_tilde.values.empty())
    throw DomainError("estimators", "grid refinement needs initial data given through v0_bump_amplitude");
  RefinementStudy st;
  for (int l = 0; l < levels; ++l) {
    SolverConfig c = config;
    c.grid = make_grid(config.grid.d, config.grid.L, config.grid.N << l);
    c.dt = std::ldexp(config.dt, -l);
    c.seed = config.seed + static_cast<std::uint64_t>(l);
    st.levels.push_back({c.grid.N, c.dt, mc_moment(c, t, alpha, 2.0, n_paths, options)});
  }
  double sw = 0, swx = 0, swy = 0;
  std::vector<double> w(levels);
  for (int l = 0; l < levels; ++l) {
    const double se = st.levels[l].estimate.std_error;
    w[l] = se > 0 ? 1.0 / (se * se) : 1.0;
  }
  for (int l = 0; l < levels; ++l) sw += w[l], swx += w[l] * l, swy += w[l] * st.levels[l].estimate.mean;
  const double xb = swx / sw, yb = swy / sw;
  double sxx = 0, sxy = 0;
  for (int l = 0; l < levels; ++l) sxx += w[l] * (l - xb) * (l - xb), sxy += w[l] * (l - xb) * (st.levels[l].estimate.mean - yb);
  st.slope = sxy / sxx;
  const bool deterministic = std::all_of(st.levels.begin(), st.levels.end(),
                                         [](const RefinementLevel& r) { return r.estimate.std_error == 0; });
  st.slope_se = deterministic ? 0.0 : std::sqrt(1.0 / sxx);
  st.bounded = std::abs(st.slope) <= 2 * st.slope_se + 1e-12 * std::abs(yb);
  return st;
}

}  // namespace fracwave
