#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracwave {

/// Periodic lattice on [-L, L)^d with N points per axis.
/// Points x_m = -L + m dx, modes xi_j = (pi / L) j with j in [-N/2, N/2).
struct GridSpec {
  int d = 1;
  double L = 1.0;
  int N = 8;
  double dx = 0.25;
  double dxi = 3.14159265358979323846;

  std::size_t points() const;
  /// Number of stored modes in the half-spectrum layout N x ... x (N/2 + 1).
  std::size_t modes() const;
  int half_extent() const { return N / 2 + 1; }

  bool operator==(const GridSpec& o) const { return d == o.d && L == o.L && N == o.N; }
};

GridSpec make_grid(int d, double L, int N);

/// Real samples, row-major with the last axis fastest.
struct RealField {
  GridSpec grid;
  std::vector<double> values;
};

/// Fourier coefficients of a real field, half-spectrum layout: every axis but
/// the last stores index a in [0, N) for j = a (a < N/2) or a - N; the last
/// axis stores j = 0..N/2 only. The remaining modes follow from
/// coeff(-j) = conj(coeff(j)).
struct SpectralField {
  GridSpec grid;
  std::vector<std::complex<double>> coefficients;
};

struct StateVector {
  SpectralField position;
  SpectralField velocity;
};

RealField zero_real(const GridSpec& g);
SpectralField zero_spectral(const GridSpec& g);

/// Per-mode tables aligned with the half-spectrum layout.
struct ModeTable {
  std::vector<double> xi_norm;  // |xi_j|
  std::vector<double> weight;   // multiplicity in the full spectrum (1 or 2)
  std::vector<int> index;       // signed mode indices, d per mode
};
ModeTable mode_table(const GridSpec& g);

/// coeff_j ~ F f(xi_j) = dx^d sum_m f(x_m) e^{i xi_j . x_m}.
SpectralField forward(const RealField& f);
/// Inverse of forward; the imaginary part is discarded.
RealField inverse(const SpectralField& f);

/// (2 pi)^{-d} dxi^d sum_j (1 + |xi_j|^2)^alpha |coeff_j|^2, square-rooted.
double sobolev_norm(const SpectralField& f, double alpha);
/// (dx^d sum |f|^2)^{1/2}.
double l2_norm(const RealField& f);

/// e^{-|x|^2/2} sampled on the lattice.
RealField gaussian_bump(const GridSpec& g);
/// True if the lattice is too short for the bump (L < 8).
bool gaussian_bump_periodization_warning(const GridSpec& g);

/// Max |c(j) - conj(c(-j))| over self-conjugate planes, relative to max |c|.
double hermitian_asymmetry(const SpectralField& f);
/// Max |Im| of the full complex inverse transform, relative to max |Re|.
double imaginary_residue(const SpectralField& f);

/// Binary layout: int32 d, float64 L, int32 N, then N^d float64 samples,
/// all little-endian.
void write_field(std::ostream& out, const RealField& f);
RealField read_field(std::istream& in);
void write_field_file(const std::string& path, const RealField& f);

}  // namespace fracwave
