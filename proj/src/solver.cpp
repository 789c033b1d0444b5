#include "fracwave/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "fracwave/error.hpp"
#include "fracwave/propagator.hpp"

namespace fracwave {

namespace {

constexpr double kBlowUp = 1e12;

std::atomic<bool> g_fault{false};

// Per-mode factors of one step of length dt.
struct StepKernels {
  std::vector<double> cosine;    // cos(dt w)
  std::vector<double> green;     // G(dt) = sin(dt w) / w
  std::vector<double> restore;   // -w sin(dt w)
};

StepKernels make_kernels(const GridSpec& g, double dt, double k) {
  const ModeTable t = mode_table(g);
  const Propagator p{k, std::max(dt, 1e-300)};
  StepKernels s;
  const std::size_t M = t.xi_norm.size();
  s.cosine.resize(M);
  s.green.resize(M);
  s.restore.resize(M);
  const double flip = g_fault.load() ? -1.0 : 1.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double r = t.xi_norm[i];
    const double w = r == 0 ? 0.0 : std::pow(r, k);
    s.cosine[i] = std::cos(dt * w);
    s.green[i] = flip * fourier_G(p, dt, r);
    s.restore[i] = -w * std::sin(dt * w);
  }
  return s;
}

void propagate_in_place(StateVector& s, const StepKernels& kern) {
  auto& u = s.position.coefficients;
  auto& v = s.velocity.coefficients;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const std::complex<double> u0 = u[i], v0 = v[i];
    u[i] = kern.cosine[i] * u0 + kern.green[i] * v0;
    v[i] = kern.restore[i] * u0 + kern.cosine[i] * v0;
  }
}

void add_forcing(StateVector& s, const SpectralField& f, const StepKernels& kern) {
  auto& u = s.position.coefficients;
  auto& v = s.velocity.coefficients;
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] += std::abs(kern.green[i]) * f.coefficients[i];
    v[i] += kern.cosine[i] * f.coefficients[i];
  }
}

void guard(const RealField& f, const char* what, int n) {
  for (double x : f.values) {
    if (!std::isfinite(x) || std::abs(x) > kBlowUp) {
      throw NumericalError("solver", std::string("blow-up guard: |") + what + "| exceeds 1e12 at step " +
                                         std::to_string(n));
    }
  }
}

void guard(const SpectralField& f, int n) {
  for (const auto& c : f.coefficients) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw NumericalError("solver", "blow-up guard: non-finite coefficient at step " + std::to_string(n));
    }
  }
}

// F = sigma(u) dW + b(u) dt, or Z dW + b(u) dt when z is given.
SpectralField forcing(const RealField* u, const RealField& dW, const CoefficientFn& sigma, const CoefficientFn& b,
                      double dt, const RealField* z, double z_scale) {
  RealField f = zero_real(dW.grid);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double ui = u ? u->values[i] : 0.0;
    const double s = z ? z_scale * z->values[i] : sigma(ui);
    f.values[i] = s * dW.values[i] + b(ui) * dt;
  }
  return forward(f);
}

RealField field_or_zero(const RealField& f, const GridSpec& g, const char* name) {
  if (f.values.empty()) return zero_real(g);
  if (!(f.grid == g) || f.values.size() != g.points())
    throw DomainError("solver", std::string(name) + " does not match the grid");
  for (double x : f.values) {
    if (!std::isfinite(x)) throw DomainError("solver", std::string(name) + " has non-finite values");
  }
  return f;
}

RealField forced_field(const SolverConfig& c) {
  const DeterministicZ& z = *c.forced_Z;
  if (const auto* bump = std::get_if<GaussianBump>(&z.shape)) {
    RealField f = gaussian_bump(c.grid);
    for (double& x : f.values) x *= bump->amplitude;
    return f;
  }
  const SpectralField& s = std::get<GridFunction>(z.shape).transform;
  if (!(s.grid == c.grid)) throw DomainError("solver", "forced Z lives on a different grid");
  return inverse(s);
}

std::vector<int> snapshot_steps(const SolverConfig& c) {
  const int n = c.steps();
  const double dt = c.effective_dt();
  std::vector<int> out{0, n};
  for (double t : c.snapshot_times) {
    const double x = t / dt;
    const long r = std::lround(x);
    if (t < 0 || r > n || std::abs(x - r) > 1e-7)
      throw DomainError("solver", "snapshot time " + std::to_string(t) + " is not on the time grid");
    out.push_back(static_cast<int>(r));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void record(Trajectory& tr, const StateVector& s, double t, double alpha, bool store) {
  tr.times.push_back(t);
  const double a = sobolev_norm(s.position, alpha), l = sobolev_norm(s.position, 0.0);
  tr.sobolev_sq.push_back(a * a);
  tr.l2_sq.push_back(l * l);
  if (store) tr.states.push_back(s);
}

}  // namespace

double CoefficientFn::operator()(double z) const {
  switch (kind) {
    case CoefficientKind::Zero: return 0.0;
    case CoefficientKind::Linear: return lambda * z;
    case CoefficientKind::SineBounded: return lambda * std::sin(z);
    case CoefficientKind::Affine: return lambda * z + offset;
  }
  return 0.0;
}

double CoefficientFn::growth_constant() const {
  switch (kind) {
    case CoefficientKind::Zero: return 0.0;
    case CoefficientKind::Linear:
    case CoefficientKind::SineBounded: return std::abs(lambda);
    case CoefficientKind::Affine: return offset == 0.0 ? std::abs(lambda) : std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

std::string to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::Zero: return "zero";
    case CoefficientKind::Linear: return "linear";
    case CoefficientKind::SineBounded: return "sine_bounded";
    case CoefficientKind::Affine: return "affine";
  }
  return "unknown";
}

CoefficientFn make_coefficient(const std::string& name, double lambda, double offset) {
  if (!std::isfinite(lambda) || !std::isfinite(offset)) throw DomainError("solver", "coefficient parameters must be finite");
  if (name == "zero") return {CoefficientKind::Zero, 0.0, 0.0};
  if (name == "linear") return {CoefficientKind::Linear, lambda, 0.0};
  if (name == "sine_bounded") return {CoefficientKind::SineBounded, lambda, 0.0};
  if (name == "affine") return {CoefficientKind::Affine, lambda, offset};
  throw DomainError("solver", "unknown coefficient '" + name + "'");
}

void SolverConfig::validate() const {
  params.validate();
  validate_measure(measure);
  if (dimension_of(measure) != grid.d || params.d != grid.d)
    throw DomainError("solver", "model, measure and grid dimensions must agree");
  make_grid(grid.d, grid.L, grid.N);
  if (!(dt > 0) || dt > params.T) throw DomainError("solver", "dt must satisfy 0 < dt <= T");
  if (noise_substeps == 0) throw DomainError("solver", "noise_substeps must be positive");
  if (!std::isfinite(v0_bump_amplitude)) throw DomainError("solver", "v0_bump_amplitude must be finite");
  if (!std::isfinite(alpha)) throw DomainError("solver", "alpha must be finite");
  if (forced_Z && forced_Z->dimension() != grid.d) throw DomainError("solver", "forced Z dimension mismatch");
  field_or_zero(v0, grid, "v0");
  field_or_zero(v0_tilde, grid, "v0_tilde");
}

int SolverConfig::steps() const { return std::max(1, static_cast<int>(std::ceil(params.T / dt - 1e-9))); }

double SolverConfig::effective_dt() const { return params.T / steps(); }

StateVector make_initial_state(const SolverConfig& c) {
  RealField u0 = field_or_zero(c.v0, c.grid, "v0");
  if (c.v0_bump_amplitude != 0.0) {
    const RealField bump = gaussian_bump(c.grid);
    for (std::size_t i = 0; i < u0.values.size(); ++i) u0.values[i] += c.v0_bump_amplitude * bump.values[i];
  }
  return {forward(u0), forward(field_or_zero(c.v0_tilde, c.grid, "v0_tilde"))};
}

StateVector linear_propagate(const StateVector& state, double dt, double k) {
  if (!(dt >= 0)) throw DomainError("solver", "dt must be non-negative");
  StateVector s = state;
  if (dt == 0) return s;
  propagate_in_place(s, make_kernels(state.position.grid, dt, k));
  return s;
}

StateVector step(const StateVector& state, const NoiseIncrement& increment, const CoefficientFn& sigma,
                 const CoefficientFn& b, double dt, double k) {
  if (std::abs(increment.dt - dt) > 1e-14 * dt) throw DomainError("solver", "increment.dt differs from dt");
  const StepKernels kern = make_kernels(state.position.grid, dt, k);
  StateVector s = state;
  propagate_in_place(s, kern);
  if (sigma.is_zero() && b.is_zero()) return s;
  const RealField u = inverse(state.position);
  add_forcing(s, forcing(&u, increment.field, sigma, b, dt, nullptr, 0.0), kern);
  return s;
}

Trajectory solve_path(const SolverConfig& c, std::uint32_t path) {
  c.validate();
  const int n = c.steps();
  const double dt = c.effective_dt();
  const StepKernels kern = make_kernels(c.grid, dt, c.params.k);
  const NoiseSpec noise = make_noise_spec(c.measure, c.grid);
  const std::vector<int> snaps = snapshot_steps(c);
  const bool forced = c.forced_Z.has_value();
  const RealField z = forced ? forced_field(c) : RealField{};
  const bool needs_u = !c.b.is_zero() || (!forced && !c.sigma.is_zero());
  const bool noisy = forced || !c.sigma.is_zero();

  Trajectory tr;
  tr.seed = c.seed;
  tr.path = path;
  StateVector s = make_initial_state(c);
  std::size_t next = 0;
  if (snaps[next] == 0) record(tr, s, 0.0, c.alpha, c.store_states), ++next;
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    RealField u;
    if (needs_u) {
      u = inverse(s.position);
      guard(u, "u", i);
    }
    propagate_in_place(s, kern);
    if (needs_u || noisy) {
      RealField dW = noisy ? sample_increment(noise, dt, c.seed, static_cast<std::uint32_t>(i), path, c.noise_substeps).field
                           : zero_real(c.grid);
      const double zs = forced && !c.forced_Z->constant_in_time() ? c.forced_Z->time_profile(t) : 1.0;
      add_forcing(s, forcing(needs_u ? &u : nullptr, dW, c.sigma, c.b, dt, forced ? &z : nullptr, zs), kern);
    }
    guard(s.position, i + 1);
    while (next < snaps.size() && snaps[next] == i + 1) {
      record(tr, s, (i + 1) * dt, c.alpha, c.store_states);
      ++next;
    }
  }
  return tr;
}

PicardResult picard_iterate(const SolverConfig& c, int n_iters, std::uint32_t path) {
  c.validate();
  if (n_iters < 2) throw DomainError("solver", "picard_iterate needs n_iters >= 2");
  if (c.forced_Z) throw DomainError("solver", "picard_iterate is defined for sigma(u), not forced Z");
  const int n = c.steps();
  const double dt = c.effective_dt();
  const StepKernels kern = make_kernels(c.grid, dt, c.params.k);
  const NoiseSpec noise = make_noise_spec(c.measure, c.grid);
  std::vector<RealField> dW;
  dW.reserve(n);
  for (int i = 0; i < n; ++i) {
    dW.push_back(c.sigma.is_zero() ? zero_real(c.grid)
                                   : sample_increment(noise, dt, c.seed, static_cast<std::uint32_t>(i), path,
                                                      c.noise_substeps).field);
  }
  const StateVector init = make_initial_state(c);

  // Iterate 0: the free evolution of the initial data.
  std::vector<RealField> prev(n + 1);
  {
    StateVector s = init;
    prev[0] = inverse(s.position);
    for (int i = 0; i < n; ++i) {
      propagate_in_place(s, kern);
      prev[i + 1] = inverse(s.position);
    }
  }
  PicardResult out;
  int growth = 0;
  for (int m = 0; m < n_iters; ++m) {
    std::vector<RealField> next(n + 1);
    StateVector s = init;
    next[0] = prev[0];
    for (int i = 0; i < n; ++i) {
      propagate_in_place(s, kern);
      if (!c.sigma.is_zero() || !c.b.is_zero())
        add_forcing(s, forcing(&prev[i], dW[i], c.sigma, c.b, dt, nullptr, 0.0), kern);
      guard(s.position, i + 1);
      next[i + 1] = inverse(s.position);
    }
    double dist = 0.0;
    for (int i = 0; i <= n; ++i) {
      double acc = 0.0;
      for (std::size_t p = 0; p < next[i].values.size(); ++p) {
        const double diff = next[i].values[p] - prev[i].values[p];
        acc += diff * diff;
      }
      dist = std::max(dist, std::sqrt(acc * std::pow(c.grid.dx, c.grid.d)));
    }
    // Growth at round-off level is not divergence.
    const bool resolved = !out.distances.empty() && dist > 1e-12 * out.distances.front();
    if (resolved && dist > out.distances.back()) {
      if (++growth >= 3) throw NumericalError("solver", "Picard iteration diverges: distance grew 3 times in a row");
    } else {
      growth = 0;
    }
    out.distances.push_back(dist);
    Trajectory tr;
    tr.seed = c.seed;
    tr.path = path;
    record(tr, s, n * dt, c.alpha, true);
    out.iterates.push_back(std::move(tr));
    out.final_positions.push_back(next[n]);
    prev = std::move(next);
  }
  return out;
}

void set_fault_injection(bool enabled) { g_fault.store(enabled); }
bool fault_injection_enabled() { return g_fault.load(); }

}  // namespace fracwave
