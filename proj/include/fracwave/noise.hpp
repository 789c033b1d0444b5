#pragma once

#include <cstdint>
#include <vector>

#include "fracwave/lattice.hpp"
#include "fracwave/model.hpp"
#include "fracwave/rng.hpp"

namespace fracwave {

/// Per-mode sqrt of the mu-mass of the dxi-cell around each stored mode of
/// the half-spectrum layout. Atoms are split evenly between a and -a.
std::vector<double> mode_amplitudes(const SpectralMeasure& mu, const GridSpec& grid);

/// Factor from normalized draws to lattice-transform coefficients:
/// (2L)^d (2 pi)^{d/2}. The (2 pi)^{d/2} makes the simulated lattice
/// H^alpha norm, which carries (2 pi)^{-d}, reproduce the isometry
/// functional as written with the bare int dxi.
double noise_coefficient_scale(const GridSpec& grid);

struct NoiseSpec {
  SpectralMeasure measure;
  GridSpec grid;
  std::vector<double> amplitudes;
  std::vector<std::uint64_t> mode_keys;  // grid-independent key of each stored mode
  std::vector<std::int64_t> mirror;      // stored index of -j, or -1 when -j is not stored
  double scale = 1.0;
};

NoiseSpec make_noise_spec(const SpectralMeasure& mu, const GridSpec& grid);

/// Normalized draws: E|c_j|^2 = amplitude_j^2 dt, Hermitian on the
/// self-conjugate planes, real on self-conjugate modes. `substeps` > 1
/// sums that many independent sub-increments of length dt / substeps
/// drawn at steps step*substeps ... (step+1)*substeps - 1.
SpectralField sample_normalized(const NoiseSpec& spec, double dt, std::uint64_t seed, std::uint32_t step,
                                std::uint32_t path, std::uint32_t substeps = 1);

struct NoiseIncrement {
  RealField field;
  SpectralField coefficients;  // lattice transform of `field`
  double dt = 0.0;
};

NoiseIncrement sample_increment(const NoiseSpec& spec, double dt, std::uint64_t seed, std::uint32_t step,
                                std::uint32_t path, std::uint32_t substeps = 1);

struct CovarianceReport {
  double max_rel_deviation = 0.0;  // max over tested modes of |ratio - 1|
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  std::size_t modes_tested = 0;
  std::size_t modes_outside_band = 0;
  double max_imaginary_residue = 0.0;
  bool pass = true;
  std::vector<double> ratios;  // per stored mode, NaN where untested
  std::vector<double> band_lo, band_hi;
};

/// Draws n_samples increments through the full field pipeline, transforms
/// them back and compares per-mode empirical variances with amplitude^2 dt.
/// Each ratio must fall inside its chi-square band at family-wise level
/// `confidence` (Bonferroni over the tested modes).
CovarianceReport validate_covariance(const NoiseSpec& spec, int n_samples, std::uint64_t seed,
                                     double confidence = 0.99);

}  // namespace fracwave
