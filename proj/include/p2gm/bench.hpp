#pragma once

#include "p2gm/baselines.hpp"
#include "p2gm/problem.hpp"
#include "p2gm/solver.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace p2gm::bench {

enum class Family { Lasso, SimplexQP, StructuredL1 };
enum class Algo { P2GM_CM, P2GM_M, FISTA_bt, FISTA_bt_rs, PDHG };

std::string family_name(Family family);  // "lasso", "simplex-qp", "structured-l1"
Family parse_family(const std::string& name);
std::string algo_name(Algo algo);        // "P2GM_CM", ...
Algo parse_algo(const std::string& name);
std::vector<Algo> all_algos();

/// Everything needed to regenerate an experiment bit for bit.
struct ExperimentManifest {
  Family family = Family::Lasso;
  std::uint64_t seed = 0;
  Index m = 0;
  Index n = 0;
  double kappa = 0.0;
  double lambda = 0.0;
  double noise = 0.0;
  double sparsity = 0.0;
  double sigma_a = 0.0;
  std::vector<Algo> algos;
  int max_iter = 1000;
  int reference_multiplier = 10;
  /// Gap level for the iterations-to-target statistic.
  double target_gap = 1e-6;
  std::string x0_rule;

  /// Full-size benchmark defaults for a family.
  static ExperimentManifest defaults(Family family);

  std::string to_json() const;
  static ExperimentManifest from_json(const std::string& text);
};

/// Independent generator for stream `stream` of `seed`: every matrix of an
/// instance draws from its own stream so that changing one size does not
/// shift the others.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// n values spaced evenly in log between lo and hi (inclusive, ascending).
VectorXd logspace(double lo, double hi, Index n);

/// rows x cols matrix with orthonormal columns (rows >= cols) from the thin
/// Householder QR of a Gaussian matrix.
MatrixXd random_orthonormal(Index rows, Index cols, std::mt19937_64& rng);

struct LassoInstance {
  CompositeProblem problem;
  VectorXd x0;
  MatrixXd a;
  VectorXd b;
  VectorXd x_true;
  MatrixXd u;      // m x n
  VectorXd sigma;  // singular values of a, ascending
  MatrixXd v;      // n x n
};

struct SimplexQpInstance {
  CompositeProblem problem;
  VectorXd x0;
  MatrixXd q;
  VectorXd c;
  MatrixXd basis;  // eigenvectors of q
  VectorXd eigs;   // eigenvalues of q, ascending
};

struct StructuredL1Instance {
  CompositeProblem problem;
  VectorXd x0;
  MatrixXd q;
  VectorXd c;
  MatrixXd basis;
  VectorXd eigs;
  MatrixXd a;        // m x n, full row rank
  MatrixXd a_left;   // m x m
  VectorXd a_sigma;  // ascending
  MatrixXd a_right;  // n x m
};

LassoInstance gen_lasso(std::uint64_t seed, Index m = 5000, Index n = 500, double sparsity = 0.005,
                        double noise = 1e-3, double lambda = 1e-4);
SimplexQpInstance gen_simplex_qp(std::uint64_t seed, Index n = 100, double kappa = 5e5);
StructuredL1Instance gen_structured_l1(std::uint64_t seed, Index n = 100, Index m = 50, double kappa = 5e4,
                                       double sigma_a = std::sqrt(5000.0), double lambda = 1.0 / 16.0);

/// Problem and starting point described by a manifest.
struct Instance {
  CompositeProblem problem;
  VectorXd x0;
};
Instance build_instance(const ExperimentManifest& manifest);

/// Descent bookkeeping for the P2GM runs of an experiment.
struct DescentAudit {
  int iterations = 0;
  int con1_violations = 0;
  int con2_violations = 0;
  int monotonicity_violations = 0;
  /// Largest value of decrement + bound (should be <= slack).
  double worst_con1 = -kInfinity;
  double worst_con2 = -kInfinity;
};

struct AlgoOutcome {
  Algo algo = Algo::P2GM_CM;
  /// "converged", "max_iter", "line_search_stalled", "completed" (fixed-length
  /// baselines) or "skipped: <reason>".
  std::string status;
  Trace trace;
  std::vector<double> gaps;
  /// First iteration with gap <= target_gap.
  std::optional<int> iterations_to_target;
  double final_gap = kInfinity;
  double wall_seconds = 0.0;
  int restarts = 0;
  std::optional<DescentAudit> audit;

  bool skipped() const { return status.rfind("skipped", 0) == 0; }
};

struct ExperimentResult {
  ExperimentManifest manifest;
  /// min(reference run value, every traced objective).
  double reference_value = 0.0;
  double reference_run_value = 0.0;
  int reference_iterations = 0;
  std::vector<AlgoOutcome> outcomes;
};

struct RunOptions {
  /// Concurrent algorithm runs; 0 reads BENCH_THREADS (default: hardware
  /// concurrency).
  unsigned threads = 0;
  /// Collect con1/con2/monotonicity statistics for the P2GM runs.
  bool audit = true;
};

/// Worker count from BENCH_THREADS, clamped to at least one.
unsigned bench_threads();

/// Gap floor used for log plots.
inline constexpr double kGapFloor = 1e-16;

ExperimentResult run_experiment(const ExperimentManifest& manifest, const RunOptions& options = {});

/// Gaps F(x^k) - reference, floored at kGapFloor.
std::vector<double> gap_series(const Trace& trace, double reference);

/// Writes trace_<ALGO>.csv per executed algorithm, summary.json and the two
/// SVG plots. Throws std::runtime_error if out_dir cannot be written.
void emit_report(const ExperimentResult& result, const std::filesystem::path& out_dir);

std::string trace_csv(const Trace& trace);
Trace parse_trace_csv(const std::string& text);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // plotted on a log10 axis
};

std::string svg_log_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                         const std::vector<Series>& series);

/// Re-reads the CSVs and summary.json of a report directory and rewrites
/// its SVG plots. Returns the written paths.
std::vector<std::filesystem::path> plot_directory(const std::filesystem::path& dir);

}  // namespace p2gm::bench
