#include "helpers.hpp"
#include "oracles.hpp"

#include "p2gm/bench.hpp"
#include "p2gm/dualprox.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace p2gm;
using namespace p2gm::test;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Minimal well-formedness check: balanced, properly nested tags with quoted
/// attribute values and nothing but whitespace outside the root element.
bool well_formed_xml(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  while (i < text.size()) {
    if (text[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(text[i]))) return false;
      if (text[i] == '&') {
        const auto semi = text.find(';', i);
        if (semi == std::string::npos || semi - i > 8) return false;
      }
      ++i;
      continue;
    }
    if (text.compare(i, 4, "<!--") == 0) {
      const auto end = text.find("-->", i);
      if (end == std::string::npos) return false;
      i = end + 3;
      continue;
    }
    if (text.compare(i, 2, "<?") == 0) {
      const auto end = text.find("?>", i);
      if (end == std::string::npos) return false;
      i = end + 2;
      continue;
    }
    // Find the closing '>' outside of quoted attribute values.
    std::size_t j = i + 1;
    char quote = 0;
    for (; j < text.size(); ++j) {
      if (quote) {
        if (text[j] == quote) quote = 0;
        if (text[j] == '<') return false;
      } else if (text[j] == '"' || text[j] == '\'') {
        quote = text[j];
      } else if (text[j] == '>') {
        break;
      }
    }
    if (j >= text.size()) return false;
    std::string tag = text.substr(i + 1, j - i - 1);
    i = j + 1;
    if (!tag.empty() && tag[0] == '/') {
      const std::string name = tag.substr(1, tag.find_first_of(" \t\n") - 1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = !tag.empty() && tag.back() == '/';
    const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
    if (name.empty()) return false;
    if (stack.empty()) {
      if (root_seen) return false;
      root_seen = true;
    }
    if (!self_closing) stack.push_back(name);
  }
  return root_seen && stack.empty();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("p2gm_unit_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

bench::ExperimentManifest small_manifest(bench::Family family) {
  auto mf = bench::ExperimentManifest::defaults(family);
  switch (family) {
    case bench::Family::Lasso:
      mf.m = 80;
      mf.n = 20;
      mf.sparsity = 0.1;
      break;
    case bench::Family::SimplexQP:
      mf.n = 20;
      mf.kappa = 1e3;
      break;
    case bench::Family::StructuredL1:
      mf.n = 20;
      mf.m = 8;
      mf.kappa = 1e3;
      mf.sigma_a = 10.0;
      break;
  }
  mf.max_iter = 300;
  mf.reference_multiplier = 10;
  return mf;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("logspace") {
    const VectorXd v = bench::logspace(1, 1000, 4);
    CHECK(max_abs(v - vec({1, 10, 100, 1000})) < 1e-12);
    CHECK(bench::logspace(2, 5, 1)(0) == 2.0);
    CHECK_THROWS_AS(bench::logspace(0, 1, 3), std::invalid_argument);
  }

  TEST_CASE("lasso generator: spectrum, orthogonality, sparsity at default size") {
    const auto inst = bench::gen_lasso(0);
    CHECK(inst.a.rows() == 5000);
    CHECK(inst.a.cols() == 500);
    const Index nnz = (inst.x_true.array() != 0.0).count();
    CHECK(nnz == 3);
    for (Index j = 0; j < 500; ++j) {
      if (inst.x_true(j) != 0.0) CHECK((inst.x_true(j) >= 1.0 && inst.x_true(j) <= 2.0));
    }
    CHECK(max_abs(inst.u.transpose() * inst.u - MatrixXd::Identity(500, 500)) <= 1e-10);
    CHECK(max_abs(inst.v.transpose() * inst.v - MatrixXd::Identity(500, 500)) <= 1e-10);
    const double ratio = inst.sigma.maxCoeff() / inst.sigma.minCoeff();
    CHECK(std::abs(ratio - 1e3) <= 1e-8 * 1e3);
    CHECK(std::abs(inst.sigma.maxCoeff() - std::sqrt(5000.0)) <= 1e-8 * std::sqrt(5000.0));
  }

  TEST_CASE("lasso generator: singular values of the assembled matrix") {
    const auto inst = bench::gen_lasso(1, 300, 60);
    Eigen::JacobiSVD<MatrixXd> svd(inst.a);
    const VectorXd s = svd.singularValues();
    const double cond = s.maxCoeff() / s.minCoeff();
    CHECK(std::abs(cond - 1e3) <= 1e-8 * 1e3);
    CHECK(std::abs(cond * cond - 1e6) <= 1e-7 * 1e6);
  }

  TEST_CASE("simplex QP generator") {
    const auto inst = bench::gen_simplex_qp(0);
    CHECK(max_abs(inst.q - inst.q.transpose()) <= 1e-12 * max_abs(inst.q));
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(inst.q);
    CHECK(std::abs(eig.eigenvalues().minCoeff() - 1.0) <= 1e-8 * 5e5);
    CHECK(std::abs(eig.eigenvalues().maxCoeff() - 5e5) <= 1e-8 * 5e5);
    CHECK(std::abs(inst.eigs.maxCoeff() / inst.eigs.minCoeff() - 5e5) <= 1e-8 * 5e5);
    CHECK(Eigen::LLT<MatrixXd>(inst.q).info() == Eigen::Success);
    CHECK(max_abs(inst.basis.transpose() * inst.basis - MatrixXd::Identity(100, 100)) <= 1e-10);
    CHECK(max_abs(inst.x0 - VectorXd::Constant(100, 0.01)) < 1e-15);
    CHECK(domain_contains(inst.problem, inst.x0));
  }

  TEST_CASE("structured-l1 generator") {
    const auto inst = bench::gen_structured_l1(0);
    Eigen::JacobiSVD<MatrixXd> svd(inst.a);
    const VectorXd s = svd.singularValues();
    CHECK(std::abs(s.maxCoeff() / s.minCoeff() - std::sqrt(5000.0)) <= 1e-8 * std::sqrt(5000.0));
    CHECK(max_abs(inst.a_left.transpose() * inst.a_left - MatrixXd::Identity(50, 50)) <= 1e-10);
    CHECK(max_abs(inst.a_right.transpose() * inst.a_right - MatrixXd::Identity(50, 50)) <= 1e-10);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(inst.q);
    CHECK(std::abs(eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff() - 5e4) <= 1e-7 * 5e4);

    const auto p = make_preconditioner(inst.problem, inst.x0, 1.0);
    MatrixXd pinv_at(100, 50);
    for (Index j = 0; j < 50; ++j) pinv_at.col(j) = p.apply_inverse(inst.a.row(j).transpose());
    CHECK(max_abs(inst.a * pinv_at - MatrixXd::Identity(50, 50)) <= 1e-8);
    CHECK(inst.x0.isZero());
  }

  TEST_CASE("generators are deterministic per seed and differ across seeds") {
    const auto a1 = bench::gen_lasso(7, 100, 30, 0.1);
    const auto a2 = bench::gen_lasso(7, 100, 30, 0.1);
    CHECK(a1.a == a2.a);
    CHECK(a1.b == a2.b);
    CHECK(a1.x_true == a2.x_true);
    CHECK(bench::gen_lasso(8, 100, 30, 0.1).a != a1.a);
    CHECK(bench::gen_simplex_qp(3, 20, 10.0).q == bench::gen_simplex_qp(3, 20, 10.0).q);
    CHECK(bench::gen_structured_l1(3, 20, 8).a == bench::gen_structured_l1(3, 20, 8).a);
    // Independent streams: changing the noise level leaves A untouched.
    CHECK(bench::gen_lasso(7, 100, 30, 0.1, 0.5).a == a1.a);
  }

  TEST_CASE("manifest JSON round trip and name parsing") {
    for (auto family : {bench::Family::Lasso, bench::Family::SimplexQP, bench::Family::StructuredL1}) {
      auto mf = bench::ExperimentManifest::defaults(family);
      mf.seed = 0xFFFFFFFFFFFFull;
      mf.algos = {bench::Algo::PDHG, bench::Algo::P2GM_CM};
      const auto back = bench::ExperimentManifest::from_json(mf.to_json());
      CHECK(back.to_json() == mf.to_json());
      CHECK(back.seed == mf.seed);
      CHECK(back.family == family);
      CHECK(bench::parse_family(bench::family_name(family)) == family);
    }
    for (auto algo : bench::all_algos()) CHECK(bench::parse_algo(bench::algo_name(algo)) == algo);
    CHECK_THROWS(bench::parse_family("nope"));
    CHECK_THROWS(bench::ExperimentManifest::from_json("{not json"));
  }

  TEST_CASE("gap series, reference value and bookkeeping") {
    const auto mf = small_manifest(bench::Family::SimplexQP);
    bench::RunOptions opts;
    opts.threads = 1;
    const auto res = bench::run_experiment(mf, opts);
    REQUIRE(res.outcomes.size() == bench::all_algos().size());
    for (const auto& o : res.outcomes) {
      INFO(bench::algo_name(o.algo));
      if (o.algo == bench::Algo::PDHG) {
        CHECK(o.status == "skipped: PDHG needs the l1 term");
        continue;
      }
      REQUIRE(!o.gaps.empty());
      CHECK(o.gaps.front() > 0);
      CHECK(o.gaps.size() == o.trace.rows.size());
      double best = kInfinity;
      for (double g : o.gaps) {
        CHECK(g >= bench::kGapFloor);
        const double next = std::min(best, g);
        CHECK(next <= best);
        best = next;
      }
      for (const auto& row : o.trace.rows) CHECK(row.objective >= res.reference_value);
    }
    const auto& cm = res.outcomes.front();
    REQUIRE(cm.algo == bench::Algo::P2GM_CM);
    CHECK(cm.final_gap <= 1e-10 * (1 + std::abs(res.reference_value)));
    CHECK(res.reference_value <= res.reference_run_value);
  }

  TEST_CASE("skipped algorithms on the structured-l1 family") {
    auto mf = small_manifest(bench::Family::StructuredL1);
    mf.max_iter = 30;
    mf.reference_multiplier = 2;
    const auto res = bench::run_experiment(mf, {1, false});
    for (const auto& o : res.outcomes) {
      if (o.algo == bench::Algo::FISTA_bt || o.algo == bench::Algo::FISTA_bt_rs) {
        CHECK(o.status == "skipped: no closed-form prox");
        CHECK(o.skipped());
      } else {
        CHECK_FALSE(o.skipped());
      }
    }
  }

  TEST_CASE("reports: CSV rows, SVG well-formedness, byte-identical reruns and replotting") {
    auto mf = small_manifest(bench::Family::Lasso);
    mf.max_iter = 60;
    mf.reference_multiplier = 3;
    const fs::path d1 = scratch_dir("r1");
    const fs::path d2 = scratch_dir("r2");
    const auto res = bench::run_experiment(mf, {1, true});
    bench::emit_report(res, d1);
    bench::emit_report(bench::run_experiment(mf, {2, true}), d2);

    for (const auto& o : res.outcomes) {
      const fs::path csv = d1 / ("trace_" + bench::algo_name(o.algo) + ".csv");
      REQUIRE(fs::exists(csv));
      const std::string text = slurp(csv);
      CHECK(text.rfind("algo,iter,time_sec,objective,residual,stepsize\n", 0) == 0);
      const auto lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
      CHECK(lines - 1 == static_cast<std::size_t>(o.trace.iterations()) + 1);
      const auto parsed = bench::parse_trace_csv(text);
      CHECK(parsed.rows.size() == o.trace.rows.size());

      // Identical apart from the wall-clock column.
      auto strip = [](const std::string& t) {
        std::istringstream is(t);
        std::string line, out;
        while (std::getline(is, line)) {
          const auto a = line.find(',', line.find(',') + 1);
          const auto b = line.find(',', a + 1);
          out += line.substr(0, a) + line.substr(b) + "\n";
        }
        return out;
      };
      const fs::path csv2 = d2 / csv.filename();
      CHECK(strip(text) == strip(slurp(csv2)));
    }
    for (const char* svg : {"gap_vs_iteration.svg", "gap_vs_time.svg"}) {
      REQUIRE(fs::exists(d1 / svg));
      CHECK(well_formed_xml(slurp(d1 / svg)));
    }
    const auto summary = slurp(d1 / "summary.json");
    CHECK(summary.find("\"reference_value\"") != std::string::npos);

    fs::remove(d1 / "gap_vs_iteration.svg");
    const auto written = bench::plot_directory(d1);
    CHECK(written.size() == 2);
    CHECK(fs::exists(d1 / "gap_vs_iteration.svg"));
    CHECK(well_formed_xml(slurp(d1 / "gap_vs_iteration.svg")));
    CHECK_THROWS_AS(bench::plot_directory(d1 / "missing"), std::runtime_error);
    fs::remove_all(d1);
    fs::remove_all(d2);
  }

  TEST_CASE("SVG escaping and degenerate series") {
    const std::string svg = bench::svg_log_plot("a < b & c", "x", "y", {{"s<1>", {0, 1, 2}, {1, 1e-16, 1e-3}}});
    CHECK(well_formed_xml(svg));
    CHECK(well_formed_xml(bench::svg_log_plot("empty", "x", "y", {})));
    CHECK_FALSE(well_formed_xml("<svg><g></svg>"));
  }

  TEST_CASE("trace CSV round trip and rejection") {
    Trace t;
    t.algo = "P2GM_CM";
    t.rows = {{0, 1.5, 0.0, 0.0, 0.0}, {1, 0.25, 1e-3, 0.5, 1e-4}};
    const auto back = bench::parse_trace_csv(bench::trace_csv(t));
    REQUIRE(back.rows.size() == 2);
    CHECK(back.algo == "P2GM_CM");
    CHECK(back.rows[1].objective == 0.25);
    CHECK(back.rows[1].stepsize == 0.5);
    CHECK_THROWS_AS(bench::parse_trace_csv("wrong,header\n"), std::runtime_error);
  }

  TEST_CASE("BENCH_THREADS") {
    ::setenv("BENCH_THREADS", "3", 1);
    CHECK(bench::bench_threads() == 3);
    ::setenv("BENCH_THREADS", "0", 1);
    CHECK(bench::bench_threads() >= 1);
    ::setenv("BENCH_THREADS", "junk", 1);
    CHECK(bench::bench_threads() >= 1);
    ::unsetenv("BENCH_THREADS");
    CHECK(bench::bench_threads() >= 1);
  }
}
