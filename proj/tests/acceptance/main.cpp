#include "acceptance.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite: one PASS/FAIL line per criterion"};
  std::vector<int> ids;
  app.add_option("criteria", ids, "Criterion numbers to run (default: all)")
      ->check(CLI::Range(1, p2gm::acceptance::kCriterionCount));
  CLI11_PARSE(app, argc, argv);
  const int failures = p2gm::acceptance::run_suite(ids, std::cout);
  return failures == 0 ? 0 : 1;
}
