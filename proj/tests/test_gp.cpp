#include <cmath>
#include <numbers>

#include "doctest.h"
#include "graphbo/bench.hpp"
#include "graphbo/candidate.hpp"
#include "graphbo/gp.hpp"

using namespace graphbo;

namespace {

std::vector<LabeledDigraph> sample_graphs(int n, uint64_t seed) {
  auto spec = SyntheticObjective::search_space();
  Rng rng(seed);
  std::vector<LabeledDigraph> graphs;
  std::set<std::string> seen;
  while (static_cast<int>(graphs.size()) < n) {
    auto g = random_graph(spec, rng);
    if (seen.insert(canonical_key(g).key).second) graphs.push_back(g);
  }
  return graphs;
}

std::vector<double> noiseless_errors(const std::vector<LabeledDigraph>& graphs) {
  auto obj = SyntheticObjective::default_instance(0.0);
  Rng rng(0);
  std::vector<double> errs;
  for (const auto& g : graphs) errs.push_back(synthetic_eval(obj, g, rng));
  return errs;
}

}  // namespace

TEST_CASE("target transform round trips and standardizes") {
  std::vector<double> errors = {0.1, 0.2, 0.3, 0.4};
  auto t = TargetTransform::fit(errors);
  double mean = 0.0, var = 0.0;
  std::vector<double> z;
  for (double e : errors) z.push_back(t.to_transformed(e));
  for (double v : z) mean += v / z.size();
  for (double v : z) var += (v - mean) * (v - mean) / z.size();
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(var == doctest::Approx(1.0).epsilon(1e-9));
  for (double e : errors) CHECK(t.to_error(t.to_transformed(e)) == doctest::Approx(e));
}

TEST_CASE("log marginal likelihood matches 2x2 closed form") {
  Eigen::MatrixXd K(2, 2);
  K << 2.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  const double noise = 0.1;

  Eigen::MatrixXd A = K + noise * Eigen::MatrixXd::Identity(2, 2);
  const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  Eigen::MatrixXd Ainv(2, 2);
  Ainv << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
  Ainv /= det;
  const double expected = -0.5 * y.dot(Ainv * y) - 0.5 * std::log(det) -
                          std::log(2.0 * std::numbers::pi);

  Eigen::LLT<Eigen::MatrixXd> factor;
  Eigen::VectorXd alpha;
  double jitter = 0.0;
  double got = log_marginal_likelihood(K, y, noise, &factor, &alpha, &jitter);
  CHECK(got == doctest::Approx(expected).epsilon(1e-8));
  CHECK((alpha - Ainv * y).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("noiseless fit interpolates the training targets") {
  auto graphs = sample_graphs(25, 11);
  auto errs = noiseless_errors(graphs);
  FitGrid grid;
  grid.noise_values = {1e-6};
  auto model = fit(graphs, errs, grid);
  auto pred = predict(model, graphs);
  for (size_t i = 0; i < graphs.size(); ++i)
    CHECK(pred.mean_error[i] == doctest::Approx(errs[i]).epsilon(1e-4));
}

TEST_CASE("predictive variance is nonnegative and small on training points") {
  auto graphs = sample_graphs(20, 21);
  auto errs = noiseless_errors(graphs);
  FitGrid grid;
  grid.noise_values = {1e-6};
  auto model = fit(graphs, errs, grid);
  auto pred = predict(model, graphs);
  for (int i = 0; i < pred.variance.size(); ++i) {
    CHECK(pred.variance(i) >= 0.0);
    CHECK(pred.variance(i) < 1e-3);
  }
  auto fresh = sample_graphs(5, 77);
  auto off = predict(model, fresh);
  for (int i = 0; i < off.variance.size(); ++i) CHECK(off.variance(i) >= 0.0);
}

TEST_CASE("fit is invariant to training permutation") {
  auto graphs = sample_graphs(15, 31);
  auto errs = noiseless_errors(graphs);
  auto permuted_graphs = graphs;
  auto permuted_errs = errs;
  std::reverse(permuted_graphs.begin(), permuted_graphs.end());
  std::reverse(permuted_errs.begin(), permuted_errs.end());

  auto a = fit(graphs, errs);
  auto b = fit(permuted_graphs, permuted_errs);
  CHECK(a.lml == doctest::Approx(b.lml).epsilon(1e-8));
  CHECK(a.cfg.H == b.cfg.H);
  CHECK(a.noise == b.noise);
  auto test = sample_graphs(6, 55);
  auto pa = predict(a, test);
  auto pb = predict(b, test);
  for (size_t i = 0; i < test.size(); ++i)
    CHECK(pa.mean_error[i] == doctest::Approx(pb.mean_error[i]).epsilon(1e-8));
}

TEST_CASE("constant targets select the simplest hyperparameters") {
  // y = 0 after standardization, so the data fit term vanishes and the
  // complexity penalty alone decides: smallest H, smallest noise
  auto graphs = sample_graphs(10, 41);
  std::vector<double> flat(graphs.size(), 0.3);
  FitGrid grid;
  auto model = fit(graphs, flat, grid);
  CHECK(model.cfg.H == 0);
  CHECK(model.noise == doctest::Approx(1e-6));
}

TEST_CASE("fit rejects degenerate input") {
  auto graphs = sample_graphs(3, 61);
  CHECK_THROWS_AS(fit(graphs, {0.1, 0.2}, FitGrid{}), GPError);
  CHECK_THROWS_AS(fit({}, {}, FitGrid{}), GPError);
}

TEST_CASE("incumbent is the earliest minimum") {
  auto graphs = sample_graphs(4, 71);
  auto model = fit(graphs, {0.4, 0.2, 0.2, 0.3}, FitGrid{});
  auto inc = incumbent(model);
  CHECK(inc.index == 1);
  CHECK(inc.error == doctest::Approx(0.2));
}
