#include "fracwave/lattice.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

struct Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Plans are created once per (d, N) and executed on caller-owned arrays.
const Plans& plans_for(int d, int N) {
  static std::map<std::pair<int, int>, Plans> cache;
  std::lock_guard lock(plan_mutex());
  auto it = cache.find({d, N});
  if (it != cache.end()) return it->second;
  int n[3] = {N, N, N};
  std::size_t pts = 1, half = 1;
  for (int i = 0; i < d; ++i) {
    pts *= N;
    half *= (i == d - 1) ? N / 2 + 1 : N;
  }
  std::vector<double> rbuf(pts);
  std::vector<std::complex<double>> cbuf(half);
  auto* cptr = reinterpret_cast<fftw_complex*>(cbuf.data());
  Plans p;
  p.r2c = fftw_plan_dft_r2c(d, n, rbuf.data(), cptr, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.c2r = fftw_plan_dft_c2r(d, n, cptr, rbuf.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.r2c || !p.c2r) throw NumericalError("lattice", "FFTW planning failed");
  return cache.emplace(std::make_pair(d, N), p).first->second;
}

// (-1)^{a_1 + ... + a_d} for the stored index a; equals (-1)^{sum j} since N is even.
void for_each_mode(const GridSpec& g, auto&& fn) {
  const int h = g.half_extent();
  const std::size_t M = g.modes();
  int a[3] = {0, 0, 0};
  for (std::size_t idx = 0; idx < M; ++idx) {
    std::size_t rest = idx;
    for (int ax = g.d - 1; ax >= 0; --ax) {
      const int ext = (ax == g.d - 1) ? h : g.N;
      a[ax] = static_cast<int>(rest % ext);
      rest /= ext;
    }
    fn(idx, a);
  }
}

int signed_index(int a, int N) { return a < N / 2 ? a : a - N; }

void check_field(const GridSpec& g, std::size_t n, std::size_t expected, const char* what) {
  if (n != expected)
    throw DomainError("lattice", std::string(what) + " size " + std::to_string(n) + " does not match grid (" +
                                     std::to_string(expected) + ")");
  (void)g;
}

}  // namespace

std::size_t GridSpec::points() const {
  std::size_t p = 1;
  for (int i = 0; i < d; ++i) p *= static_cast<std::size_t>(N);
  return p;
}

std::size_t GridSpec::modes() const {
  std::size_t p = static_cast<std::size_t>(half_extent());
  for (int i = 0; i + 1 < d; ++i) p *= static_cast<std::size_t>(N);
  return p;
}

GridSpec make_grid(int d, double L, int N) {
  if (d < 1 || d > 3) throw DomainError("lattice", "dimension must be 1, 2 or 3");
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("lattice", "half-width L must be positive");
  if (N < 8 || !std::has_single_bit(static_cast<unsigned>(N)))
    throw DomainError("lattice", "N must be a power of two >= 8, got " + std::to_string(N));
  GridSpec g;
  g.d = d;
  g.L = L;
  g.N = N;
  g.dx = 2.0 * L / N;
  g.dxi = std::numbers::pi / L;
  return g;
}

RealField zero_real(const GridSpec& g) { return {g, std::vector<double>(g.points(), 0.0)}; }

SpectralField zero_spectral(const GridSpec& g) {
  return {g, std::vector<std::complex<double>>(g.modes(), {0.0, 0.0})};
}

ModeTable mode_table(const GridSpec& g) {
  ModeTable t;
  const std::size_t M = g.modes();
  t.xi_norm.resize(M);
  t.weight.resize(M);
  t.index.resize(M * g.d);
  for_each_mode(g, [&](std::size_t idx, const int* a) {
    double s = 0.0;
    for (int ax = 0; ax < g.d; ++ax) {
      const int j = signed_index(a[ax], g.N);
      // the Nyquist index on the last axis is stored as +N/2
      const int js = (ax == g.d - 1 && a[ax] == g.N / 2) ? -g.N / 2 : j;
      t.index[idx * g.d + ax] = js;
      const double x = g.dxi * js;
      s += x * x;
    }
    t.xi_norm[idx] = std::sqrt(s);
    const int last = a[g.d - 1];
    t.weight[idx] = (last == 0 || last == g.N / 2) ? 1.0 : 2.0;
  });
  return t;
}

SpectralField forward(const RealField& f) {
  const GridSpec& g = f.grid;
  check_field(g, f.values.size(), g.points(), "real field");
  const Plans& p = plans_for(g.d, g.N);
  std::vector<double> in(f.values);
  SpectralField out = zero_spectral(g);
  fftw_execute_dft_r2c(p.r2c, in.data(), reinterpret_cast<fftw_complex*>(out.coefficients.data()));
  const double scale = std::pow(g.dx, g.d);
  for_each_mode(g, [&](std::size_t idx, const int* a) {
    int par = 0;
    for (int ax = 0; ax < g.d; ++ax) par += a[ax];
    const double s = (par & 1) ? -scale : scale;
    out.coefficients[idx] = s * std::conj(out.coefficients[idx]);
  });
  return out;
}

RealField inverse(const SpectralField& f) {
  const GridSpec& g = f.grid;
  check_field(g, f.coefficients.size(), g.modes(), "spectral field");
  const Plans& p = plans_for(g.d, g.N);
  std::vector<std::complex<double>> in(f.coefficients.size());
  for_each_mode(g, [&](std::size_t idx, const int* a) {
    int par = 0;
    for (int ax = 0; ax < g.d; ++ax) par += a[ax];
    const std::complex<double> c = std::conj(f.coefficients[idx]);
    in[idx] = (par & 1) ? -c : c;
  });
  RealField out = zero_real(g);
  fftw_execute_dft_c2r(p.c2r, reinterpret_cast<fftw_complex*>(in.data()), out.values.data());
  const double scale = std::pow(2.0 * g.L, -g.d);
  for (double& v : out.values) v *= scale;
  return out;
}

double sobolev_norm(const SpectralField& f, double alpha) {
  const GridSpec& g = f.grid;
  check_field(g, f.coefficients.size(), g.modes(), "spectral field");
  const ModeTable t = mode_table(g);
  double s = 0.0;
  for (std::size_t i = 0; i < t.xi_norm.size(); ++i) {
    const double r2 = t.xi_norm[i] * t.xi_norm[i];
    s += t.weight[i] * std::pow(1.0 + r2, alpha) * std::norm(f.coefficients[i]);
  }
  const double c = std::pow(g.dxi / (2.0 * std::numbers::pi), g.d);
  return std::sqrt(c * s);
}

double l2_norm(const RealField& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(std::pow(f.grid.dx, f.grid.d) * s);
}

RealField gaussian_bump(const GridSpec& g) {
  RealField f = zero_real(g);
  const std::size_t P = g.points();
  for (std::size_t i = 0; i < P; ++i) {
    std::size_t rest = i;
    double r2 = 0.0;
    for (int ax = 0; ax < g.d; ++ax) {
      const double x = -g.L + g.dx * static_cast<double>(rest % g.N);
      rest /= g.N;
      r2 += x * x;
    }
    f.values[i] = std::exp(-0.5 * r2);
  }
  return f;
}

bool gaussian_bump_periodization_warning(const GridSpec& g) { return g.L < 8.0; }

double hermitian_asymmetry(const SpectralField& f) {
  const GridSpec& g = f.grid;
  const int h = g.half_extent();
  double cmax = 0.0;
  for (const auto& c : f.coefficients) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) return 0.0;
  // Only the planes a_last = 0 and a_last = N/2 contain both j and -j.
  const std::size_t rows = g.modes() / h;
  double worst = 0.0;
  for (int last : {0, g.N / 2}) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::size_t rest = r, mirror = 0, stride = 1;
      // mirror the leading indices a -> (N - a) mod N
      std::vector<int> a(g.d > 1 ? g.d - 1 : 0);
      for (int ax = g.d - 2; ax >= 0; --ax) {
        a[ax] = static_cast<int>(rest % g.N);
        rest /= g.N;
      }
      for (int ax = g.d - 2; ax >= 0; --ax) {
        mirror += stride * static_cast<std::size_t>((g.N - a[ax]) % g.N);
        stride *= g.N;
      }
      const auto c1 = f.coefficients[r * h + last];
      const auto c2 = f.coefficients[mirror * h + last];
      worst = std::max(worst, std::abs(c1 - std::conj(c2)));
    }
  }
  return worst / cmax;
}

double imaginary_residue(const SpectralField& f) {
  const GridSpec& g = f.grid;
  const std::size_t P = g.points();
  const int h = g.half_extent();
  // Expand to the full spectrum, taking the mirror of the stored mode where needed.
  std::vector<std::complex<double>> full(P);
  for (std::size_t i = 0; i < P; ++i) {
    std::size_t rest = i;
    int a[3] = {0, 0, 0};
    for (int ax = g.d - 1; ax >= 0; --ax) {
      a[ax] = static_cast<int>(rest % g.N);
      rest /= g.N;
    }
    bool mirrored = a[g.d - 1] >= h;
    std::size_t idx = 0;
    int par = 0;
    for (int ax = 0; ax < g.d; ++ax) {
      const int b = mirrored ? (g.N - a[ax]) % g.N : a[ax];
      idx = idx * ((ax == g.d - 1) ? h : g.N) + b;
      par += a[ax];
    }
    std::complex<double> c = f.coefficients[idx];
    if (mirrored) c = std::conj(c);
    c = std::conj(c);
    full[i] = (par & 1) ? -c : c;
  }
  std::vector<std::complex<double>> out(P);
  int n[3] = {g.N, g.N, g.N};
  fftw_plan plan;
  {
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft(g.d, n, reinterpret_cast<fftw_complex*>(full.data()),
                         reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  double re = 0.0, im = 0.0;
  for (const auto& z : out) {
    re = std::max(re, std::abs(z.real()));
    im = std::max(im, std::abs(z.imag()));
  }
  return re > 0.0 ? im / re : im;
}

namespace {

template <class T>
void put_le(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  if (!in) throw Error(ErrorKind::Io, "lattice", "truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_field(std::ostream& out, const RealField& f) {
  put_le<std::int32_t>(out, f.grid.d);
  put_le<double>(out, f.grid.L);
  put_le<std::int32_t>(out, f.grid.N);
  for (double v : f.values) put_le<double>(out, v);
}

RealField read_field(std::istream& in) {
  const int d = get_le<std::int32_t>(in);
  const double L = get_le<double>(in);
  const int N = get_le<std::int32_t>(in);
  RealField f = zero_real(make_grid(d, L, N));
  for (double& v : f.values) v = get_le<double>(in);
  return f;
}

void write_field_file(const std::string& path, const RealField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "lattice", "cannot open " + path);
  write_field(out, f);
}

}  // namespace fracwave
