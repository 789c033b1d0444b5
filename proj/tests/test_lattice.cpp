#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fracwave/error.hpp"
#include "fracwave/lattice.hpp"

using namespace fracwave;

namespace {

constexpr double kPi = std::numbers::pi;

RealField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  RealField f = zero_real(g);
  for (double& v : f.values) v = n(rng);
  return f;
}

double max_abs_diff(const RealField& a, const RealField& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_CASE("make_grid") {
  const GridSpec g = make_grid(1, kPi, 8);
  CHECK(g.dx == doctest::Approx(kPi / 4));
  CHECK(g.dxi == doctest::Approx(1.0));
  const ModeTable t = mode_table(g);
  REQUIRE(t.index.size() == 5);
  // stored modes j = 0..3 and the Nyquist mode, which is j = -4 in [-N/2, N/2)
  for (int j = 0; j <= 4; ++j) {
    CHECK(t.index[j] == (j == 4 ? -4 : j));
    CHECK(t.xi_norm[j] == doctest::Approx(j));
  }
  CHECK(t.weight[0] == 1.0);
  CHECK(t.weight[1] == 2.0);
  CHECK(t.weight[4] == 1.0);  // Nyquist is its own mirror
  CHECK(make_grid(2, 10.0, 256).dxi == doctest::Approx(kPi / 10));
  CHECK_THROWS_AS(make_grid(1, 1.0, 7), DomainError);
  CHECK_THROWS_AS(make_grid(1, 1.0, 4), DomainError);
  CHECK_THROWS_AS(make_grid(4, 1.0, 8), DomainError);
  CHECK_THROWS_AS(make_grid(1, 0.0, 8), DomainError);
}

TEST_CASE("transform of simple fields") {
  SUBCASE("constant") {
    for (int d = 1; d <= 3; ++d) {
      const GridSpec g = make_grid(d, 2.0, 8);
      RealField f = zero_real(g);
      for (double& v : f.values) v = 1.5;
      const SpectralField c = forward(f);
      CHECK(std::abs(c.coefficients[0] - std::pow(4.0, d) * 1.5) < 1e-12);
      for (std::size_t i = 1; i < c.coefficients.size(); ++i) CHECK(std::abs(c.coefficients[i]) < 1e-12);
    }
  }
  SUBCASE("single cosine") {
    const GridSpec g = make_grid(1, 3.0, 16);
    RealField f = zero_real(g);
    for (int m = 0; m < g.N; ++m) f.values[m] = std::cos(g.dxi * (-g.L + m * g.dx));
    const SpectralField c = forward(f);
    CHECK(std::abs(c.coefficients[1] - 3.0) < 1e-12);
    for (std::size_t i = 0; i < c.coefficients.size(); ++i)
      if (i != 1) CHECK(std::abs(c.coefficients[i]) < 1e-12);
  }
}

TEST_CASE("round trip and Parseval") {
  for (int d = 1; d <= 3; ++d) {
    const GridSpec g = make_grid(d, 5.0, d == 3 ? 16 : 64);
    const RealField f = random_field(g, 10 + d);
    const SpectralField c = forward(f);
    CHECK(max_abs_diff(inverse(c), f) < 1e-12);
    CHECK(hermitian_asymmetry(c) < 1e-13);
    CHECK(imaginary_residue(c) < 1e-12);
    CHECK(sobolev_norm(c, 0.0) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
  }
}

TEST_CASE("sobolev norm") {
  const GridSpec g = make_grid(1, 4.0, 32);
  CHECK(sobolev_norm(zero_spectral(g), 1.0) == 0.0);
  SUBCASE("single mode") {
    SpectralField f = zero_spectral(g);
    f.coefficients[0] = 2.5;
    const double base = 2.5 / std::sqrt(2 * kPi) * std::sqrt(g.dxi);
    CHECK(sobolev_norm(f, 0.7) == doctest::Approx(base).epsilon(1e-14));
    f.coefficients[0] = 0;
    f.coefficients[3] = {1.5, -2.0};
    const double xi = 3 * g.dxi;
    // a stored mode j != 0 also stands for its mirror -j
    const double expect = 2.5 / std::sqrt(2 * kPi) * std::sqrt(g.dxi) * std::pow(1 + xi * xi, 0.35) * std::sqrt(2.0);
    CHECK(sobolev_norm(f, 0.7) == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("monotone in alpha, negative orders allowed") {
    const SpectralField c = forward(random_field(g, 5));
    double prev = 0;
    for (double a : {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
      const double n = sobolev_norm(c, a);
      CHECK(n >= prev);
      prev = n;
    }
  }
}

TEST_CASE("gaussian bump") {
  const GridSpec g = make_grid(1, 8.0, 256);
  const RealField b = gaussian_bump(g);
  CHECK(b.values[g.N / 2] == 1.0);
  CHECK_FALSE(gaussian_bump_periodization_warning(g));
  CHECK(gaussian_bump_periodization_warning(make_grid(1, 4.0, 64)));
  const SpectralField c = forward(b);
  CHECK(std::abs(c.coefficients[0] - std::sqrt(2 * kPi)) < 1e-8);
  // xi_j = j pi / 8, so xi = 1 is not a lattice mode for L = 8; use L = pi * 3 (xi_3 = 1).
  const GridSpec h = make_grid(1, 3 * kPi, 256);
  const SpectralField ch = forward(gaussian_bump(h));
  CHECK(std::abs(ch.coefficients[3] - std::sqrt(2 * kPi) * std::exp(-0.5)) < 1e-8);
  const GridSpec g2 = make_grid(2, 8.0, 64);
  CHECK(std::abs(forward(gaussian_bump(g2)).coefficients[0] - 2 * kPi) < 1e-8);
}

TEST_CASE("sobolev norm of the bump converges under refinement") {
  for (double alpha : {0.0, 1.0, 2.0}) {
    double prev = sobolev_norm(forward(gaussian_bump(make_grid(1, 8.0, 8))), alpha), diff = -1;
    for (int N = 16; N <= 128; N *= 2) {
      const double n = sobolev_norm(forward(gaussian_bump(make_grid(1, 8.0, N))), alpha);
      const double d = std::abs(n - prev);
      if (diff > 1e-13) CHECK(d <= diff / 4);
      diff = d;
      prev = n;
    }
  }
}

TEST_CASE("field serialization") {
  const GridSpec g = make_grid(2, 3.0, 8);
  const RealField f = random_field(g, 99);
  std::stringstream s;
  write_field(s, f);
  CHECK(s.str().size() == 4 + 8 + 4 + 8 * g.points());
  const RealField r = read_field(s);
  CHECK(r.grid == g);
  CHECK(r.values == f.values);
  std::stringstream truncated(s.str().substr(0, 20));
  CHECK_THROWS_AS(read_field(truncated), Error);
}

TEST_CASE("size mismatches are rejected") {
  const GridSpec g = make_grid(1, 1.0, 8);
  RealField f{g, std::vector<double>(7, 0.0)};
  CHECK_THROWS_AS(forward(f), DomainError);
}
