#include "acceptance.hpp"
#include "p2gm/bench.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  using namespace p2gm::bench;
  CLI::App app{"Benchmark harness for the preconditioned proximal gradient solvers"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run one experiment family and write traces, summary and plots");
  std::string family;
  std::string algos = "all";
  std::uint64_t seed = 0;
  int max_iter = 0;
  int ref_mult = 10;
  std::string out;
  run_cmd->add_option("--family", family, "lasso | simplex-qp | structured-l1")->required();
  run_cmd->add_option("--algos", algos, "'all' or a comma-separated list of algorithm names");
  run_cmd->add_option("--seed", seed, "RNG seed");
  run_cmd->add_option("--max-iter", max_iter, "Iteration budget per algorithm (0: family default)");
  run_cmd->add_option("--reference-multiplier", ref_mult, "Reference run length as a multiple of --max-iter");
  run_cmd->add_option("--out", out, "Output directory")->required();

  auto* plot_cmd = app.add_subcommand("plot", "Regenerate the SVG plots of a report directory");
  std::string in;
  plot_cmd->add_option("--in", in, "Report directory")->required();

  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite, one PASS/FAIL line per criterion");
  std::vector<int> criteria;
  verify_cmd->add_option("criteria", criteria, "Criterion numbers to run (default: all)")
      ->check(CLI::Range(1, p2gm::acceptance::kCriterionCount));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      ExperimentManifest mf = ExperimentManifest::defaults(parse_family(family));
      mf.seed = seed;
      if (max_iter > 0) mf.max_iter = max_iter;
      mf.reference_multiplier = ref_mult;
      if (algos != "all") {
        mf.algos.clear();
        std::stringstream ss(algos);
        for (std::string name; std::getline(ss, name, ',');) mf.algos.push_back(parse_algo(name));
      }
      const ExperimentResult res = run_experiment(mf);
      emit_report(res, out);
      std::cout << family_name(mf.family) << " seed " << mf.seed << ", reference F = " << res.reference_value
                << "\n";
      for (const auto& o : res.outcomes) {
        std::cout << "  " << algo_name(o.algo) << ": " << o.status;
        if (!o.skipped()) {
          std::cout << ", iterations " << o.trace.iterations() << ", final gap " << o.final_gap << ", to "
                    << mf.target_gap << ": "
                    << (o.iterations_to_target ? std::to_string(*o.iterations_to_target) : std::string("never"))
                    << ", " << o.wall_seconds << " s";
        }
        std::cout << "\n";
      }
    } else if (*plot_cmd) {
      for (const auto& p : plot_directory(in)) std::cout << p.string() << "\n";
    } else if (*verify_cmd) {
      return p2gm::acceptance::run_suite(criteria, std::cout) == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
