#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fracwave/error.hpp"
#include "fracwave/noise.hpp"
#include "fracwave/rng.hpp"

using namespace fracwave;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream") {
  const NormalStream a(42, 3, 7), b(42, 3, 7), c(42, 4, 7);
  CHECK(a.normals(11) == b.normals(11));
  CHECK(a.normals(11) != c.normals(11));
  CHECK(a.normals(11) != a.normals(12));
  for (double u : a.uniforms(5)) {
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    for (double z : a.normals(i)) {
      s += z;
      s2 += z * z;
    }
  }
  CHECK(std::abs(s / (2 * n)) < 5 / std::sqrt(2.0 * n));
  CHECK(std::abs(s2 / (2 * n) - 1) < 5 * std::sqrt(2.0 / (2 * n)));
}

TEST_CASE("mode amplitudes") {
  SUBCASE("flat level 1") {
    for (int d = 1; d <= 2; ++d) {
      const GridSpec g = make_grid(d, 3.0, 16);
      for (double a : mode_amplitudes(FlatDensity{1.0, d}, g)) CHECK(a * a == doctest::Approx(std::pow(g.dxi, d)));
    }
  }
  SUBCASE("riesz origin cell") {
    const GridSpec g = make_grid(1, 8.0, 64);
    const double c = 1.3;
    const auto amp = mode_amplitudes(RieszKernel{0.5, 1, c}, g);
    CHECK(amp[0] * amp[0] == doctest::Approx(4 * c * std::sqrt(g.dxi / 2)).epsilon(1e-8));
    for (double a : amp) CHECK(std::isfinite(a));
    // away from the origin the cell mass is close to the midpoint value
    CHECK(amp[10] * amp[10] == doctest::Approx(c * std::pow(10 * g.dxi, -0.5) * g.dxi).epsilon(1e-3));
  }
  SUBCASE("zero measure") {
    for (double a : mode_amplitudes(FiniteAtoms{1, {}}, make_grid(1, 1.0, 8))) CHECK(a == 0.0);
  }
  SUBCASE("atoms are split between a and -a") {
    const GridSpec g = make_grid(1, kPi, 16);  // dxi = 1
    const auto amp = mode_amplitudes(FiniteAtoms{1, {{{2.0}, 0.6}}}, g);
    CHECK(amp[2] * amp[2] == doctest::Approx(0.3));
  }
  CHECK_THROWS_AS(mode_amplitudes(FlatDensity{1.0, 2}, make_grid(1, 1.0, 8)), DomainError);
}

TEST_CASE("increments") {
  const GridSpec g = make_grid(1, 4.0, 16);
  const NoiseSpec spec = make_noise_spec(RieszKernel{0.5, 1, 1.0}, g);
  CHECK(spec.scale == doctest::Approx(8.0 * std::sqrt(2 * kPi)));

  SUBCASE("zero measure gives a zero field") {
    const NoiseIncrement z = sample_increment(make_noise_spec(FlatDensity{0.0, 1}, g), 0.1, 1, 0, 0);
    for (double v : z.field.values) CHECK(v == 0.0);
  }
  SUBCASE("determinism and reality") {
    const NoiseIncrement a = sample_increment(spec, 0.01, 5, 2, 3), b = sample_increment(spec, 0.01, 5, 2, 3);
    CHECK(a.field.values == b.field.values);
    CHECK(imaginary_residue(a.coefficients) < 1e-12);
    CHECK(hermitian_asymmetry(a.coefficients) < 1e-13);
  }
  SUBCASE("substeps sum sub-increments") {
    const SpectralField whole = sample_normalized(spec, 0.02, 9, 0, 1, 2);
    const SpectralField h0 = sample_normalized(spec, 0.01, 9, 0, 1), h1 = sample_normalized(spec, 0.01, 9, 1, 1);
    for (std::size_t i = 0; i < whole.coefficients.size(); ++i)
      CHECK(std::abs(whole.coefficients[i] - h0.coefficients[i] - h1.coefficients[i]) < 1e-15);
  }
  SUBCASE("common draws across grid sizes") {
    const NoiseSpec fine = make_noise_spec(RieszKernel{0.5, 1, 1.0}, make_grid(1, 4.0, 32));
    const SpectralField a = sample_normalized(spec, 0.01, 4, 0, 0), b = sample_normalized(fine, 0.01, 4, 0, 0);
    for (int j = 0; j < 8; ++j) CHECK(std::abs(a.coefficients[j] - b.coefficients[j]) < 1e-15);
  }
  CHECK_THROWS_AS(sample_normalized(spec, 0.0, 1, 0, 0), DomainError);
}

TEST_CASE("second-order structure over 10^4 draws") {
  const GridSpec g = make_grid(1, 4.0, 16);
  const NoiseSpec spec = make_noise_spec(RieszKernel{0.5, 1, 1.0}, g);
  const std::size_t M = spec.amplitudes.size();
  const int n = 10000;
  const double dt = 0.01;
  std::vector<std::vector<std::complex<double>>> draws(n), next(n), coarse(n);
  for (int i = 0; i < n; ++i) {
    draws[i] = sample_normalized(spec, dt, 17, 0, i).coefficients;
    next[i] = sample_normalized(spec, dt, 17, 1, i).coefficients;
    coarse[i] = sample_normalized(spec, 4 * dt, 18, 0, i).coefficients;
  }
  for (std::size_t j = 0; j < M; ++j) {
    const bool real_mode = j == 0 || j == M - 1;
    double v = 0, v4 = 0;
    for (int i = 0; i < n; ++i) {
      v += std::norm(draws[i][j]);
      v4 += std::norm(coarse[i][j]);
    }
    v /= n;
    v4 /= n;
    const double target = spec.amplitudes[j] * spec.amplitudes[j] * dt;
    const double rel_se = real_mode ? std::sqrt(2.0 / n) : 1 / std::sqrt(double(n));
    CAPTURE(j);
    CHECK(std::abs(v / target - 1) < 5 * rel_se);
    // std ratio for dt and 4 dt is 2; the SE of a std ratio is about rel_se / sqrt(2)
    CHECK(std::abs(std::sqrt(v4 / v) - 2) < 3 * 2 * rel_se / std::sqrt(2.0));
    for (std::size_t k = j + 1; k < M; ++k) {
      std::complex<double> c = 0;
      double vk = 0;
      for (int i = 0; i < n; ++i) {
        c += draws[i][j] * std::conj(draws[i][k]);
        vk += std::norm(draws[i][k]);
      }
      const double corr = std::abs(c) / std::sqrt(v * n * vk);
      CHECK(corr < 5 / std::sqrt(double(n)));
    }
    std::complex<double> c = 0;
    double vn = 0;
    for (int i = 0; i < n; ++i) {
      c += draws[i][j] * std::conj(next[i][j]);
      vn += std::norm(next[i][j]);
    }
    CHECK(std::abs(c) / std::sqrt(v * n * vn) < 5 / std::sqrt(double(n)));
  }
}

TEST_CASE("covariance validation") {
  SUBCASE("flat density") {
    const CovarianceReport r = validate_covariance(make_noise_spec(FlatDensity{1.0, 1}, make_grid(1, 8.0, 64)), 10000, 1);
    CHECK(r.pass);
    CHECK(r.max_rel_deviation < 0.05);
    CHECK(r.max_imaginary_residue < 1e-12);
  }
  SUBCASE("riesz beta=0.5") {
    const CovarianceReport r =
        validate_covariance(make_noise_spec(RieszKernel{0.5, 1, 1.0}, make_grid(1, 8.0, 64)), 10000, 2);
    CHECK(r.pass);
    CHECK(r.min_ratio >= 0.93);
    CHECK(r.max_ratio <= 1.07);
  }
  SUBCASE("zero measure passes vacuously") {
    const CovarianceReport r = validate_covariance(make_noise_spec(FlatDensity{0.0, 1}, make_grid(1, 8.0, 16)), 200, 1);
    CHECK(r.pass);
    CHECK(r.modes_tested == 0);
  }
  SUBCASE("two dimensions") {
    const CovarianceReport r =
        validate_covariance(make_noise_spec(riesz_measure(1.0, 2, 1.0), make_grid(2, 8.0, 16)), 4000, 3);
    CHECK(r.pass);
  }
  CHECK_THROWS_AS(validate_covariance(make_noise_spec(FlatDensity{1.0, 1}, make_grid(1, 8.0, 16)), 10, 1),
                  DomainError);
}
