#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fracwave/solver.hpp"

namespace fracwave {

struct MomentEstimate {
  double t = 0.0;
  double alpha = 0.0;
  double q = 2.0;
  double mean = 0.0;
  double std_error = 0.0;
  int n_paths = 0;
};

enum class Verdict { Consistent, Inconsistent, Inconclusive };
std::string to_string(Verdict v);

struct ScalingFit {
  std::vector<double> lags;
  std::vector<MomentEstimate> moments;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_ci_lo = 0.0;  // 95%
  double slope_ci_hi = 0.0;
  double theory_slope = 0.0;  // NaN when the measure has no closed-form rate
  double tolerance = 0.0;
  bool dropped_largest_lag = false;
  Verdict verdict = Verdict::Inconclusive;
};

/// Path-level parallelism. workers = 0 uses the hardware concurrency.
/// Results do not depend on the worker count: every path is stored by
/// index and reduced in index order.
struct McOptions {
  unsigned workers = 0;
};

/// Mean and standard error of ||u(t)||^q_{H^alpha} over paths 0..n_paths-1
/// of the master seed in `config`.
MomentEstimate mc_moment(const SolverConfig& config, double t, double alpha, double q, int n_paths,
                         const McOptions& options = {});

/// Closed-form q-th moment slope q (1 - (beta + 2 alpha) / (2k)) for Riesz
/// measures, NaN otherwise.
double theory_increment_slope(const SpectralMeasure& mu, double k, double alpha, double q);

/// Log-log least squares of the mean of samples[path][lag] against lags,
/// with a delta-method CI that uses the across-lag covariance of the means
/// (the lags share paths). The largest lag is dropped once if its residual
/// exceeds 3x the median absolute residual.
ScalingFit fit_increment_samples(std::span<const double> lags, const std::vector<std::vector<double>>& samples,
                                 double theory_slope, double q, double tolerance = 0.05);

/// E||u(t1+h) - u(t1)||^q_{H^alpha} for each lag h, all lags on the same
/// paths, and the fitted slope.
ScalingFit mc_increment_scaling(const SolverConfig& config, double t1, std::span<const double> lags, double alpha,
                                double q, int n_paths, const McOptions& options = {}, double tolerance = 0.05);

enum class GrowthVerdict { Finite, Divergent, Inconclusive };
std::string to_string(GrowthVerdict v);

struct FrontierRow {
  double alpha = 0.0;
  std::vector<int> grid_sizes;
  std::vector<MomentEstimate> estimates;  // one per grid size
  GrowthVerdict verdict = GrowthVerdict::Inconclusive;
};

struct FrontierReport {
  std::vector<FrontierRow> rows;
  /// Midpoint between the largest finite and the smallest divergent alpha
  /// (NaN if either is missing).
  double crossover = 0.0;
  /// Width of the alpha interval with no decided verdict between them.
  double inconclusive_width = 0.0;
};

/// E||u(t)||^2_{H^alpha} on grids of the same L and N in `grid_sizes`,
/// with common noise across grids. Finite: every successive relative change
/// is below `stable_change`. Divergent: every change exceeds it and the last
/// is at least half the first.
FrontierReport regularity_frontier(const SolverConfig& config, double t, std::span<const double> alpha_grid,
                                   int n_paths, std::span<const int> grid_sizes = {}, const McOptions& options = {},
                                   double stable_change = 0.1);

struct RefinementLevel {
  int N = 0;
  double dt = 0.0;
  MomentEstimate estimate;
};

struct RefinementStudy {
  std::vector<RefinementLevel> levels;
  double slope = 0.0;     // weighted least squares of the estimate against level index
  double slope_se = 0.0;
  bool bounded = false;   // |slope| <= 2 slope_se
};

/// Repeats mc_moment with N doubled and dt halved at each level. Each level
/// uses its own master seed (seed + level) so the estimates are independent.
RefinementStudy moment_refinement(const SolverConfig& config, double t, double alpha, int n_paths, int levels,
                                  const McOptions& options = {});

}  // namespace fracwave
