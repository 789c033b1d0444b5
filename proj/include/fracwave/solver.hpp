#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracwave/lattice.hpp"
#include "fracwave/model.hpp"
#include "fracwave/noise.hpp"
#include "fracwave/quadrature.hpp"

namespace fracwave {

enum class CoefficientKind { Zero, Linear, SineBounded, Affine };

/// Pointwise coefficient z -> f(z) with growth bound |f(z)| <= C |z|.
/// Affine{lambda, offset} = lambda z + offset violates that bound and is
/// only available for exploratory runs.
struct CoefficientFn {
  CoefficientKind kind = CoefficientKind::Zero;
  double lambda = 0.0;
  double offset = 0.0;

  double operator()(double z) const;
  /// The constant C of |f(z)| <= C |z| (infinite for Affine with offset != 0).
  double growth_constant() const;
  bool is_zero() const { return kind == CoefficientKind::Zero || (kind != CoefficientKind::Affine && lambda == 0.0); }
};

std::string to_string(CoefficientKind kind);
/// Registry lookup: "zero", "linear", "sine_bounded", "affine".
CoefficientFn make_coefficient(const std::string& name, double lambda, double offset = 0.0);

struct SolverConfig {
  ModelParams params;
  SpectralMeasure measure = FlatDensity{0.0, 1};
  GridSpec grid;
  double dt = 1.0 / 1024;
  CoefficientFn sigma;
  CoefficientFn b;
  RealField v0;        // empty values mean zero
  RealField v0_tilde;  // empty values mean zero
  /// Adds amplitude * e^{-|x|^2/2} to v0 on whatever grid is in use, so
  /// grid-refinement studies can carry initial data along.
  double v0_bump_amplitude = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  /// Replaces sigma(u) by this field: F = Z * dW + b(u) dt.
  std::optional<DeterministicZ> forced_Z;
  /// Times at which states and norms are recorded; 0 and T are always added.
  std::vector<double> snapshot_times;
  bool store_states = false;
  /// Each step's increment is the sum of this many sub-increments, so runs
  /// with dt and dt / 2 (twice the substeps) share one noise path.
  std::uint32_t noise_substeps = 1;

  void validate() const;
  int steps() const;
  double effective_dt() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;     // filled when store_states
  std::vector<double> sobolev_sq;      // ||u(t)||^2_{H^alpha}
  std::vector<double> l2_sq;           // lattice L^2 norm squared
  std::uint64_t seed = 0;
  std::uint32_t path = 0;
};

StateVector make_initial_state(const SolverConfig& config);

/// Exact per-mode propagation of the free equation over dt.
StateVector linear_propagate(const StateVector& state, double dt, double k);

/// One stochastic-trigonometric step with F = sigma(u) dW + b(u) dt.
StateVector step(const StateVector& state, const NoiseIncrement& increment, const CoefficientFn& sigma,
                 const CoefficientFn& b, double dt, double k);

Trajectory solve_path(const SolverConfig& config, std::uint32_t path = 0);

struct PicardResult {
  std::vector<Trajectory> iterates;  // final states only
  std::vector<double> distances;     // max over steps of lattice L^2 distance between iterates m and m+1
  std::vector<RealField> final_positions;
};

/// Fixed-point iteration of the discrete mild equation with a frozen noise path.
PicardResult picard_iterate(const SolverConfig& config, int n_iters, std::uint32_t path = 0);

/// Sign flip of the position-from-velocity factor, for the self-test mutation check.
void set_fault_injection(bool enabled);
bool fault_injection_enabled();

}  // namespace fracwave
