#pragma once

#include "p2gm/bench.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace p2gm::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Shared state between criteria: the full-size benchmark runs are needed
/// by both the descent audit and the trend comparison and are computed once.
struct Context {
  std::optional<std::vector<bench::ExperimentResult>> benchmark;
  double benchmark_seconds = 0.0;
};

inline constexpr int kCriterionCount = 11;

CriterionResult run_criterion(int id, Context& ctx);

/// Runs the given criteria (all when empty), prints one line per criterion
/// and returns the number of failures.
int run_suite(const std::vector<int>& ids, std::ostream& out);

/// Manifests of the full-size trend comparison.
std::vector<bench::ExperimentManifest> benchmark_manifests();

}  // namespace p2gm::acceptance
