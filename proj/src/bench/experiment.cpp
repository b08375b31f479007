#include "p2gm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace p2gm::bench {

namespace {

constexpr double kDescentSlack = 1e-8;

AlgoOutcome run_p2gm(const Instance& inst, const ExperimentManifest& mf, Algo algo, bool audit) {
  SolverConfig cfg;
  cfg.max_iter = mf.max_iter;
  cfg.variant = algo == Algo::P2GM_CM ? Variant::ConjugateMomentum : Variant::PlainMomentum;

  AlgoOutcome out;
  out.algo = algo;
  Observer observer;
  DescentAudit stats;
  if (audit) {
    observer = [&stats](const IterationInfo& info) {
      ++stats.iterations;
      const double con1 = info.model_decrement + 0.5 * info.c1 * info.d_norm * info.d_norm;
      const double con2 =
          info.model_decrement + 0.25 * info.c3 * std::min(1.0, info.c3 / info.c2) * info.v_norm * info.v_norm;
      stats.worst_con1 = std::max(stats.worst_con1, con1);
      stats.worst_con2 = std::max(stats.worst_con2, con2);
      if (con1 > kDescentSlack) ++stats.con1_violations;
      if (con2 > kDescentSlack) ++stats.con2_violations;
      if (info.objective_after > info.objective_before) ++stats.monotonicity_violations;
    };
  }
  RunResult res = run(inst.problem, inst.x0, cfg, observer);
  out.status = to_string(res.status);
  out.trace = std::move(res.trace);
  if (audit) out.audit = stats;
  return out;
}

AlgoOutcome run_algo(const Instance& inst, const ExperimentManifest& mf, Algo algo, bool audit) {
  if (algo == Algo::P2GM_CM || algo == Algo::P2GM_M) return run_p2gm(inst, mf, algo, audit);

  AlgoOutcome out;
  out.algo = algo;
  if (algo == Algo::PDHG) {
    if (!std::holds_alternative<L1Norm>(inst.problem.nonsmooth)) {
      out.status = "skipped: PDHG needs the l1 term";
      return out;
    }
    const PdhgConfig cfg = make_pdhg_config(inst.problem);
    BaselineResult res = pdhg(inst.problem, inst.x0, VectorXd::Zero(inst.problem.op->rows()), cfg, mf.max_iter);
    out.status = "completed";
    out.trace = std::move(res.trace);
    return out;
  }
  if (!fista_supported(inst.problem)) {
    out.status = "skipped: no closed-form prox";
    return out;
  }
  BaselineResult res = algo == Algo::FISTA_bt ? fista_bt(inst.problem, inst.x0, mf.max_iter)
                                              : fista_bt_rs(inst.problem, inst.x0, mf.max_iter);
  out.status = "completed";
  out.trace = std::move(res.trace);
  out.restarts = res.restarts;
  return out;
}

}  // namespace

unsigned bench_threads() {
  if (const char* env = std::getenv("BENCH_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> gap_series(const Trace& trace, double reference) {
  std::vector<double> gaps;
  gaps.reserve(trace.rows.size());
  for (const auto& r : trace.rows) gaps.push_back(std::max(r.objective - reference, kGapFloor));
  return gaps;
}

ExperimentResult run_experiment(const ExperimentManifest& manifest, const RunOptions& options) {
  if (manifest.max_iter < 0 || manifest.reference_multiplier < 1) {
    throw std::invalid_argument("run_experiment: bad budgets in manifest");
  }
  const Instance inst = build_instance(manifest);

  ExperimentResult result;
  result.manifest = manifest;

  SolverConfig ref_cfg;
  ref_cfg.max_iter = manifest.reference_multiplier * std::max(manifest.max_iter, 1);
  ref_cfg.tol = 1e-14;
  const RunResult ref = run(inst.problem, inst.x0, ref_cfg);
  result.reference_iterations = ref.iterations;
  result.reference_run_value = kInfinity;
  for (const auto& r : ref.trace.rows) result.reference_run_value = std::min(result.reference_run_value, r.objective);

  const std::vector<Algo>& algos = manifest.algos;
  result.outcomes.resize(algos.size());
  const unsigned workers =
      std::min<unsigned>(options.threads ? options.threads : bench_threads(), static_cast<unsigned>(algos.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(algos.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < algos.size(); i = next++) {
      try {
        result.outcomes[i] = run_algo(inst, manifest, algos[i], options.audit);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  double reference = result.reference_run_value;
  for (const auto& o : result.outcomes) {
    for (const auto& r : o.trace.rows) reference = std::min(reference, r.objective);
  }
  result.reference_value = reference;

  for (auto& o : result.outcomes) {
    if (o.skipped()) continue;
    o.gaps = gap_series(o.trace, reference);
    o.final_gap = o.gaps.back();
    o.wall_seconds = o.trace.rows.back().wall_seconds;
    for (std::size_t k = 0; k < o.gaps.size(); ++k) {
      if (o.gaps[k] <= manifest.target_gap) {
        o.iterations_to_target = o.trace.rows[k].iter;
        break;
      }
    }
  }
  return result;
}

}  // namespace p2gm::bench
