#pragma once

#include <cstdint>

namespace fracwave {

/// Tolerances and budgets shared by every adaptive integral in the library.
struct QuadratureSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double truncation_radius = 4096.0;  // 2^12
  std::int64_t max_subdivisions = 1'000'000;

  void validate() const;
};

}  // namespace fracwave
