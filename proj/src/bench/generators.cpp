#include "p2gm/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>

namespace p2gm::bench {

namespace {

// Stream ids: one per random object of an instance.
enum Stream : std::uint64_t { kLeft = 1, kRight = 2, kSupport = 3, kValues = 4, kNoise = 5, kLinear = 6, kBasis = 7 };

VectorXd gaussian_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

MatrixXd symmetric_from_spectrum(const MatrixXd& basis, const VectorXd& eigs) {
  MatrixXd q = basis * eigs.asDiagonal() * basis.transpose();
  return 0.5 * (q + q.transpose());
}

}  // namespace

std::string family_name(Family family) {
  switch (family) {
    case Family::Lasso: return "lasso";
    case Family::SimplexQP: return "simplex-qp";
    case Family::StructuredL1: return "structured-l1";
  }
  throw std::invalid_argument("unknown family");
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::Lasso, Family::SimplexQP, Family::StructuredL1}) {
    if (family_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown family '" + name + "' (expected lasso, simplex-qp or structured-l1)");
}

std::string algo_name(Algo algo) {
  switch (algo) {
    case Algo::P2GM_CM: return "P2GM_CM";
    case Algo::P2GM_M: return "P2GM_M";
    case Algo::FISTA_bt: return "FISTA_bt";
    case Algo::FISTA_bt_rs: return "FISTA_bt_rs";
    case Algo::PDHG: return "PDHG";
  }
  throw std::invalid_argument("unknown algorithm");
}

Algo parse_algo(const std::string& name) {
  for (Algo a : all_algos()) {
    if (algo_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::vector<Algo> all_algos() { return {Algo::P2GM_CM, Algo::P2GM_M, Algo::FISTA_bt, Algo::FISTA_bt_rs, Algo::PDHG}; }

ExperimentManifest ExperimentManifest::defaults(Family family) {
  ExperimentManifest mf;
  mf.family = family;
  mf.algos = all_algos();
  switch (family) {
    case Family::Lasso:
      mf.m = 5000;
      mf.n = 500;
      mf.kappa = 1e6;
      mf.lambda = 1e-4;
      mf.noise = 1e-3;
      mf.sparsity = 0.005;
      mf.x0_rule = "zeros";
      break;
    case Family::SimplexQP:
      mf.n = 100;
      mf.kappa = 5e5;
      mf.x0_rule = "centroid";
      break;
    case Family::StructuredL1:
      mf.m = 50;
      mf.n = 100;
      mf.kappa = 5e4;
      mf.lambda = 1.0 / 16.0;
      mf.sigma_a = std::sqrt(5000.0);
      mf.x0_rule = "zeros";
      break;
  }
  return mf;
}

std::string ExperimentManifest::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family);
  j["seed"] = seed;
  j["dims"] = {{"m", m}, {"n", n}};
  j["kappa"] = kappa;
  j["extra"] = {{"lambda", lambda}, {"noise", noise}, {"sparsity", sparsity}, {"sigma_a", sigma_a}};
  std::vector<std::string> names;
  for (Algo a : algos) names.push_back(algo_name(a));
  j["algos"] = names;
  j["budgets"] = {{"max_iter", max_iter}, {"reference_multiplier", reference_multiplier}};
  j["target_gap"] = target_gap;
  j["x0"] = x0_rule;
  return j.dump(2);
}

ExperimentManifest ExperimentManifest::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentManifest mf = defaults(parse_family(j.at("family").get<std::string>()));
  mf.seed = j.at("seed").get<std::uint64_t>();
  mf.m = j.at("dims").at("m").get<Index>();
  mf.n = j.at("dims").at("n").get<Index>();
  mf.kappa = j.at("kappa").get<double>();
  const auto& extra = j.at("extra");
  mf.lambda = extra.at("lambda").get<double>();
  mf.noise = extra.at("noise").get<double>();
  mf.sparsity = extra.at("sparsity").get<double>();
  mf.sigma_a = extra.at("sigma_a").get<double>();
  mf.algos.clear();
  for (const auto& name : j.at("algos")) mf.algos.push_back(parse_algo(name.get<std::string>()));
  mf.max_iter = j.at("budgets").at("max_iter").get<int>();
  mf.reference_multiplier = j.at("budgets").at("reference_multiplier").get<int>();
  mf.target_gap = j.value("target_gap", 1e-6);
  mf.x0_rule = j.value("x0", mf.x0_rule);
  return mf;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

VectorXd logspace(double lo, double hi, Index n) {
  if (!(lo > 0) || !(hi >= lo) || n < 1) throw std::invalid_argument("logspace: need 0 < lo <= hi and n >= 1");
  VectorXd out(n);
  if (n == 1) {
    out(0) = lo;
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (Index i = 0; i < n; ++i) out(i) = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  // Pin the endpoints so the spectrum ratio is exact.
  out(0) = lo;
  out(n - 1) = hi;
  return out;
}

MatrixXd random_orthonormal(Index rows, Index cols, std::mt19937_64& rng) {
  if (rows < cols || cols < 1) throw std::invalid_argument("random_orthonormal: need rows >= cols >= 1");
  std::normal_distribution<double> normal;
  MatrixXd g(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(rows, cols);
  // Fix signs so the factor is a deterministic function of g (Haar measure).
  const VectorXd diag = qr.matrixQR().diagonal();
  for (Index j = 0; j < cols; ++j) {
    if (diag(j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

LassoInstance gen_lasso(std::uint64_t seed, Index m, Index n, double sparsity, double noise, double lambda) {
  if (n < 1 || m < n) throw std::invalid_argument("gen_lasso: need m >= n >= 1");
  if (!(sparsity > 0 && sparsity <= 1)) throw std::invalid_argument("gen_lasso: sparsity must lie in (0, 1]");
  auto left = make_stream(seed, kLeft);
  auto right = make_stream(seed, kRight);
  MatrixXd u = random_orthonormal(m, n, left);
  MatrixXd v = random_orthonormal(n, n, right);
  VectorXd sigma = logspace(1e-3, 1.0, n) * std::sqrt(static_cast<double>(m));
  MatrixXd a = u * sigma.asDiagonal() * v.transpose();

  const Index nnz = std::min<Index>(n, static_cast<Index>(std::ceil(sparsity * static_cast<double>(n) - 1e-9)));
  auto support_rng = make_stream(seed, kSupport);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  // Partial Fisher-Yates: the first nnz entries are a uniform random subset.
  for (Index i = 0; i < nnz; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(support_rng))]);
  }
  auto value_rng = make_stream(seed, kValues);
  std::uniform_real_distribution<double> uni(1.0, 2.0);
  VectorXd x_true = VectorXd::Zero(n);
  for (Index i = 0; i < nnz; ++i) x_true(idx[static_cast<std::size_t>(i)]) = uni(value_rng);

  auto noise_rng = make_stream(seed, kNoise);
  VectorXd b = a * x_true + noise * gaussian_vector(m, noise_rng);

  CompositeProblem problem(least_squares_oracle(a, b), std::make_shared<const LinearMap>(LinearMap::identity(n)),
                           L1Norm{lambda});
  return {std::move(problem), VectorXd::Zero(n), std::move(a), std::move(b), std::move(x_true),
          std::move(u),       std::move(sigma),  std::move(v)};
}

SimplexQpInstance gen_simplex_qp(std::uint64_t seed, Index n, double kappa) {
  if (n < 2) throw std::invalid_argument("gen_simplex_qp: need n >= 2");
  if (!(kappa >= 1)) throw std::invalid_argument("gen_simplex_qp: kappa must be >= 1");
  auto basis_rng = make_stream(seed, kBasis);
  MatrixXd basis = random_orthonormal(n, n, basis_rng);
  VectorXd eigs = logspace(1.0, kappa, n);
  MatrixXd q = symmetric_from_spectrum(basis, eigs);
  auto linear_rng = make_stream(seed, kLinear);
  VectorXd c = gaussian_vector(n, linear_rng);
  CompositeProblem problem(quadratic_oracle(q, c), nullptr, SimplexConstraint{});
  return {std::move(problem), VectorXd::Constant(n, 1.0 / static_cast<double>(n)), std::move(q), std::move(c),
          std::move(basis), std::move(eigs)};
}

StructuredL1Instance gen_structured_l1(std::uint64_t seed, Index n, Index m, double kappa, double sigma_a,
                                       double lambda) {
  if (m < 1 || m >= n) throw std::invalid_argument("gen_structured_l1: need 1 <= m < n");
  if (!(kappa >= 1) || !(sigma_a >= 1)) throw std::invalid_argument("gen_structured_l1: kappa, sigma_a must be >= 1");
  auto basis_rng = make_stream(seed, kBasis);
  MatrixXd basis = random_orthonormal(n, n, basis_rng);
  VectorXd eigs = logspace(1.0, kappa, n);
  MatrixXd q = symmetric_from_spectrum(basis, eigs);
  auto linear_rng = make_stream(seed, kLinear);
  VectorXd c = gaussian_vector(n, linear_rng);

  auto left = make_stream(seed, kLeft);
  auto right = make_stream(seed, kRight);
  MatrixXd a_left = random_orthonormal(m, m, left);
  MatrixXd a_right = random_orthonormal(n, m, right);
  VectorXd a_sigma = logspace(1.0, sigma_a, m);
  MatrixXd a = a_left * a_sigma.asDiagonal() * a_right.transpose();

  CompositeProblem problem(quadratic_oracle(q, c), std::make_shared<const LinearMap>(a), L1Norm{lambda});
  return {std::move(problem), VectorXd::Zero(n), std::move(q),      std::move(c),      std::move(basis),
          std::move(eigs),    std::move(a),      std::move(a_left), std::move(a_sigma), std::move(a_right)};
}

Instance build_instance(const ExperimentManifest& mf) {
  switch (mf.family) {
    case Family::Lasso: {
      auto inst = gen_lasso(mf.seed, mf.m, mf.n, mf.sparsity, mf.noise, mf.lambda);
      return {std::move(inst.problem), std::move(inst.x0)};
    }
    case Family::SimplexQP: {
      auto inst = gen_simplex_qp(mf.seed, mf.n, mf.kappa);
      return {std::move(inst.problem), std::move(inst.x0)};
    }
    case Family::StructuredL1: {
      auto inst = gen_structured_l1(mf.seed, mf.n, mf.m, mf.kappa, mf.sigma_a, mf.lambda);
      return {std::move(inst.problem), std::move(inst.x0)};
    }
  }
  throw std::invalid_argument("build_instance: unknown family");
}

}  // namespace p2gm::bench
