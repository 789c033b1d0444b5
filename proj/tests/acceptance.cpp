// Runs every acceptance criterion and prints one line per criterion.
#include <cstdio>
#include <cstring>
#include <exception>
#include <string>

#include "fracwave/acceptance.hpp"

int main(int argc, char** argv) {
  fracwave::AcceptanceScale scale = fracwave::AcceptanceScale::Full;
  unsigned workers = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--scale") && i + 1 < argc) {
      const std::string s = argv[++i];
      if (s == "quick") scale = fracwave::AcceptanceScale::Quick;
      else if (s != "full") {
        std::fprintf(stderr, "unknown scale '%s'\n", s.c_str());
        return 2;
      }
    } else if (!std::strcmp(argv[i], "--workers") && i + 1 < argc) {
      workers = static_cast<unsigned>(std::stoul(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--scale quick|full] [--workers N]\n");
      return 2;
    }
  }

  int failed = 0;
  std::size_t evaluated = 0;
  try {
    const auto results = fracwave::run_acceptance(scale, workers, [](const fracwave::CriterionResult& r) {
      std::printf("%s\n", fracwave::format_result(r).c_str());
      std::fflush(stdout);
    });
    evaluated = results.size();
    for (const auto& r : results) failed += r.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 3;
  }
  std::printf("acceptance: %zu of 10 criteria evaluated, %zu passed, %d failed\n", evaluated,
              evaluated - static_cast<std::size_t>(failed), failed);
  return failed == 0 ? 0 : 1;
}
