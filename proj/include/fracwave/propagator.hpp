#pragma once

namespace fracwave {

/// Fourier multipliers of the fundamental solution of d_tt + (-Delta)^k.
/// Every multiplier is radial, so arguments are r = |xi|.
struct Propagator {
  double k = 1.0;
  double T = 1.0;

  void validate() const;
};

/// sin(t r^k) / r^k, with a Taylor branch when t r^k < 1e-4.
double fourier_G(const Propagator& p, double t, double r);

/// cos(t r^k), the multiplier of d/dt G(t).
double fourier_dG(const Propagator& p, double t, double r);

/// G(t2) - G(t1) in product form 2 cos((t1+t2) w/2) sin((t2-t1) w/2) / w.
double fourier_G_diff(const Propagator& p, double t1, double t2, double r);

/// 2^k (1 + T^2) / (1 + r^2)^k, a uniform bound on |G(t)(r)|^2 for t <= T.
double kernel_bound(const Propagator& p, double r);

// Exact time integrals of the squared multipliers; these are the kernels of
// the isometry functional and of the increment second moment.

/// int_0^t |G(s)(r)|^2 ds.
double G_sq_time_integral(const Propagator& p, double t, double r);

/// int_0^{t1} |G(t2-s)(r) - G(t1-s)(r)|^2 ds  for t1 <= t2.
double G_diff_sq_time_integral(const Propagator& p, double t1, double t2, double r);

/// int_0^{t1} G(t2-s)(r) G(t1-s)(r) ds  for t1 <= t2.
double G_cross_time_integral(const Propagator& p, double t1, double t2, double r);

/// sin(x)/x with a series branch near 0.
double sinc(double x);

}  // namespace fracwave
