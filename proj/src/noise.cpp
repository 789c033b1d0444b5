#include "fracwave/noise.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "fracwave/error.hpp"
#include "integrate.hpp"

namespace fracwave {

namespace {

constexpr int kKeyBits = 21;

std::uint64_t pack_key(const int* j, int d) {
  std::uint64_t key = 0;
  for (int ax = 0; ax < d; ++ax) {
    key |= static_cast<std::uint64_t>(j[ax] + (1 << (kKeyBits - 1))) << (kKeyBits * ax);
  }
  return key;
}

// Wrap a signed index into [-N/2, N/2).
int wrap_index(int j, int N) {
  j = ((j % N) + N) % N;
  return j < N / 2 ? j : j - N;
}

// mu-mass of the cube [-h, h]^d for a radial density, by the pyramid
// decomposition: 2d int_{[-1,1]^{d-1}} dy int_0^h t^{d-1} m(t sqrt(1+|y|^2)) dt.
double origin_cell_mass(const RadialDensity& rd, double h, const QuadratureSettings& settings) {
  detail::Budget budget(settings, "origin cell");
  const int d = rd.d;
  auto radial = [&](double y2) {
    const double s = std::sqrt(1.0 + y2);
    auto f = [&](double t) { return t > 0 ? std::pow(t, d - 1) * rd.density(t * s) : 0.0; };
    return detail::gk_power_origin(f, d - 1 + rd.origin_exponent, h, budget);
  };
  if (d == 1) return 2.0 * radial(0.0);
  if (d == 2) {
    return 2.0 * d * 2.0 * detail::gk([&](double y) { return radial(y * y); }, 0.0, 1.0, budget);
  }
  auto outer = [&](double y1) {
    return detail::gk([&](double y2) { return radial(y1 * y1 + y2 * y2); }, 0.0, 1.0, budget);
  };
  return 2.0 * d * 4.0 * detail::gk(outer, 0.0, 1.0, budget);
}

double riesz_origin_cell_mass(const RieszKernel& r, double h, const QuadratureSettings& settings) {
  detail::Budget budget(settings, "origin cell");
  const int d = r.d;
  const double e = 0.5 * (r.beta - d);
  double face;
  if (d == 1) {
    face = 1.0;
  } else if (d == 2) {
    face = 2.0 * detail::gk([&](double y) { return std::pow(1.0 + y * y, e); }, 0.0, 1.0, budget);
  } else {
    auto outer = [&](double y1) {
      return detail::gk([&](double y2) { return std::pow(1.0 + y1 * y1 + y2 * y2, e); }, 0.0, 1.0, budget);
    };
    face = 4.0 * detail::gk(outer, 0.0, 1.0, budget);
  }
  return r.constant * std::pow(h, r.beta) * 2.0 * d / r.beta * face;
}

// Tensor Gauss-Legendre over the cell centred at xi with half-width h.
double cell_mass(const RadialDensity& rd, const double* xi, double h, int n, const std::vector<double>& x,
                 const std::vector<double>& w) {
  const int d = rd.d;
  double total = 0.0;
  int idx[3] = {0, 0, 0};
  const int count = static_cast<int>(std::pow(n, d));
  for (int c = 0; c < count; ++c) {
    int rest = c;
    double r2 = 0.0, wt = 1.0;
    for (int ax = 0; ax < d; ++ax) {
      idx[ax] = rest % n;
      rest /= n;
      const double p = xi[ax] + h * x[idx[ax]];
      r2 += p * p;
      wt *= w[idx[ax]];
    }
    total += wt * rd.density(std::sqrt(r2));
  }
  return total * std::pow(h, d);
}

}  // namespace

double noise_coefficient_scale(const GridSpec& g) {
  return std::pow(2.0 * g.L, g.d) * std::pow(2.0 * std::numbers::pi, 0.5 * g.d);
}

std::vector<double> mode_amplitudes(const SpectralMeasure& mu, const GridSpec& grid) {
  validate_measure(mu);
  if (dimension_of(mu) != grid.d) throw DomainError("noise", "measure and grid dimensions differ");
  const ModeTable t = mode_table(grid);
  const std::size_t M = t.xi_norm.size();
  const int d = grid.d;
  std::vector<double> mass(M, 0.0);
  if (is_zero_measure(mu)) return mass;

  if (const auto* flat = std::get_if<FlatDensity>(&mu)) {
    std::fill(mass.begin(), mass.end(), flat->level * std::pow(grid.dxi, d));
  } else if (const auto* atoms = std::get_if<FiniteAtoms>(&mu)) {
    std::map<std::uint64_t, double> cells;
    for (const Atom& a : atoms->atoms) {
      for (double sign : {1.0, -1.0}) {
        int j[3] = {0, 0, 0};
        bool inside = true;
        for (int ax = 0; ax < d; ++ax) {
          const long r = std::lround(sign * a.location[ax] / grid.dxi);
          if (std::abs(r) > grid.N / 2) inside = false;
          j[ax] = wrap_index(static_cast<int>(r), grid.N);
        }
        if (inside) cells[pack_key(j, d)] += 0.5 * a.mass;
      }
    }
    for (std::size_t i = 0; i < M; ++i) {
      auto it = cells.find(pack_key(&t.index[i * d], d));
      if (it != cells.end()) mass[i] = it->second;
    }
  } else {
    const RadialDensity rd = *as_radial_density(mu);
    const QuadratureSettings settings;
    const double h = 0.5 * grid.dxi;
    std::vector<double> x4, w4, x8, w8;
    detail::gauss_legendre(4, x4, w4);
    detail::gauss_legendre(8, x8, w8);
    double xi[3];
    for (std::size_t i = 0; i < M; ++i) {
      int jmax = 0;
      for (int ax = 0; ax < d; ++ax) {
        const int j = t.index[i * d + ax];
        jmax = std::max(jmax, std::abs(j));
        xi[ax] = grid.dxi * j;
      }
      if (jmax == 0) {
        const auto* r = std::get_if<RieszKernel>(&mu);
        mass[i] = r ? riesz_origin_cell_mass(*r, h, settings) : origin_cell_mass(rd, h, settings);
      } else if (jmax <= 2) {
        mass[i] = cell_mass(rd, xi, h, 8, x8, w8);
      } else {
        mass[i] = cell_mass(rd, xi, h, 4, x4, w4);
      }
    }
  }
  std::vector<double> amp(M);
  for (std::size_t i = 0; i < M; ++i) {
    if (!(mass[i] >= 0) || !std::isfinite(mass[i])) throw NumericalError("noise", "non-finite cell mass");
    amp[i] = std::sqrt(mass[i]);
  }
  return amp;
}

NoiseSpec make_noise_spec(const SpectralMeasure& mu, const GridSpec& grid) {
  NoiseSpec s{mu, grid, mode_amplitudes(mu, grid), {}, {}, noise_coefficient_scale(grid)};
  const ModeTable t = mode_table(grid);
  const int d = grid.d;
  const std::size_t M = t.xi_norm.size();
  s.mode_keys.resize(M);
  s.mirror.assign(M, -1);
  std::map<std::uint64_t, std::int64_t> by_key;
  for (std::size_t i = 0; i < M; ++i) {
    s.mode_keys[i] = pack_key(&t.index[i * d], d);
    by_key[s.mode_keys[i]] = static_cast<std::int64_t>(i);
  }
  const int h = grid.half_extent();
  for (std::size_t i = 0; i < M; ++i) {
    const int last = static_cast<int>(i % h);
    if (last != 0 && last != grid.N / 2) continue;
    int neg[3];
    for (int ax = 0; ax < d; ++ax) neg[ax] = wrap_index(-t.index[i * d + ax], grid.N);
    auto it = by_key.find(pack_key(neg, d));
    if (it == by_key.end()) throw NumericalError("noise", "mirror mode missing from half spectrum");
    s.mirror[i] = it->second;
  }
  return s;
}

SpectralField sample_normalized(const NoiseSpec& spec, double dt, std::uint64_t seed, std::uint32_t step,
                                std::uint32_t path, std::uint32_t substeps) {
  if (!(dt > 0)) throw DomainError("noise", "dt must be positive");
  if (substeps == 0) throw DomainError("noise", "substeps must be positive");
  SpectralField out = zero_spectral(spec.grid);
  const std::size_t M = spec.amplitudes.size();
  const double root = std::sqrt(dt / substeps);
  std::vector<NormalStream> streams;
  for (std::uint32_t s = 0; s < substeps; ++s) streams.emplace_back(seed, step * substeps + s, path);
  auto draw = [&](std::size_t i, bool real) {
    std::complex<double> z{0.0, 0.0};
    for (const NormalStream& st : streams) {
      const auto n = st.normals(spec.mode_keys[i]);
      z += real ? std::complex<double>(n[0], 0.0) : std::complex<double>(n[0], n[1]) * std::numbers::sqrt2 * 0.5;
    }
    return spec.amplitudes[i] * root * z;
  };
  for (std::size_t i = 0; i < M; ++i) {
    if (spec.amplitudes[i] == 0.0) continue;
    const std::int64_t m = spec.mirror[i];
    if (m < 0) {
      out.coefficients[i] = draw(i, false);
    } else if (static_cast<std::size_t>(m) == i) {
      out.coefficients[i] = draw(i, true);
    } else if (spec.mode_keys[i] > spec.mode_keys[m]) {
      out.coefficients[i] = draw(i, false);
    } else {
      out.coefficients[i] = std::conj(draw(static_cast<std::size_t>(m), false));
    }
  }
  return out;
}

NoiseIncrement sample_increment(const NoiseSpec& spec, double dt, std::uint64_t seed, std::uint32_t step,
                                std::uint32_t path, std::uint32_t substeps) {
  NoiseIncrement inc;
  inc.dt = dt;
  inc.coefficients = sample_normalized(spec, dt, seed, step, path, substeps);
  for (auto& c : inc.coefficients.coefficients) c *= spec.scale;
  inc.field = inverse(inc.coefficients);
  return inc;
}

CovarianceReport validate_covariance(const NoiseSpec& spec, int n_samples, std::uint64_t seed, double confidence) {
  if (n_samples < 100) throw DomainError("noise", "validate_covariance needs at least 100 samples");
  const std::size_t M = spec.amplitudes.size();
  std::vector<double> acc(M, 0.0);
  CovarianceReport rep;
  for (int s = 0; s < n_samples; ++s) {
    const NoiseIncrement inc = sample_increment(spec, 1.0, seed, static_cast<std::uint32_t>(s), 0);
    if (s < 8) rep.max_imaginary_residue = std::max(rep.max_imaginary_residue, imaginary_residue(inc.coefficients));
    const SpectralField back = forward(inc.field);
    for (std::size_t i = 0; i < M; ++i) acc[i] += std::norm(back.coefficients[i] / spec.scale);
  }
  rep.ratios.assign(M, std::numeric_limits<double>::quiet_NaN());
  rep.band_lo.assign(M, std::numeric_limits<double>::quiet_NaN());
  rep.band_hi.assign(M, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < M; ++i) {
    if (spec.amplitudes[i] > 1e-10) ++rep.modes_tested;
  }
  if (rep.modes_tested == 0) return rep;
  const double per_mode = (1.0 - confidence) / static_cast<double>(rep.modes_tested);
  const boost::math::chi_squared real_dist(n_samples), complex_dist(2.0 * n_samples);
  const double rlo = boost::math::quantile(real_dist, 0.5 * per_mode) / n_samples;
  const double rhi = boost::math::quantile(boost::math::complement(real_dist, 0.5 * per_mode)) / n_samples;
  const double clo = boost::math::quantile(complex_dist, 0.5 * per_mode) / (2.0 * n_samples);
  const double chi = boost::math::quantile(boost::math::complement(complex_dist, 0.5 * per_mode)) / (2.0 * n_samples);
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double a = spec.amplitudes[i];
    if (!(a > 1e-10)) continue;
    const double ratio = acc[i] / (n_samples * a * a);
    const bool real = spec.mirror[i] == static_cast<std::int64_t>(i);
    rep.ratios[i] = ratio;
    rep.band_lo[i] = real ? rlo : clo;
    rep.band_hi[i] = real ? rhi : chi;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    rep.max_rel_deviation = std::max(rep.max_rel_deviation, std::abs(ratio - 1.0));
    if (ratio < rep.band_lo[i] || ratio > rep.band_hi[i]) ++rep.modes_outside_band;
  }
  rep.pass = rep.modes_outside_band == 0 && rep.max_imaginary_residue < 1e-12;
  return rep;
}

}  // namespace fracwave
