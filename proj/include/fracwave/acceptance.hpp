#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fracwave {

enum class AcceptanceScale { Quick, Full };

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Master seed of every stochastic criterion.
inline constexpr unsigned long long kAcceptanceSeed = 1;

/// Runs the acceptance criteria (all of them when `only` is empty) and
/// reports each result through `sink` as soon as it is known. Quick scale
/// shrinks path counts and grids and loosens the stochastic tolerances.
std::vector<CriterionResult> run_acceptance(AcceptanceScale scale, unsigned workers = 0,
                                            const std::function<void(const CriterionResult&)>& sink = {},
                                            const std::vector<int>& only = {});

/// "PASS  3 mc-scaling  ...  (12.3 s)"
std::string format_result(const CriterionResult& r);

}  // namespace fracwave
