#include <cmath>

#include "doctest.h"
#include "graphbo/bench.hpp"
#include "graphbo/candidate.hpp"
#include "graphbo/motif.hpp"

using namespace graphbo;

namespace {

std::pair<std::vector<LabeledDigraph>, std::vector<double>> training_set(int n,
                                                                         uint64_t seed) {
  auto spec = SyntheticObjective::search_space();
  auto obj = SyntheticObjective::default_instance(0.0);
  Rng rng(seed);
  std::vector<LabeledDigraph> graphs;
  std::vector<double> errs;
  std::set<std::string> seen;
  while (static_cast<int>(graphs.size()) < n) {
    auto g = random_graph(spec, rng);
    if (!seen.insert(canonical_key(g).key).second) continue;
    graphs.push_back(g);
    errs.push_back(synthetic_eval(obj, g, rng));
  }
  return {graphs, errs};
}

// Posterior mean at an arbitrary feature vector under the unnormalized
// dot-product kernel, written out from first principles.
double posterior_mean(const GPModel& model, const FeatureVector& fv) {
  double mean = 0.0;
  for (int i = 0; i < model.n_train(); ++i) {
    double k = 0.0;
    for (const auto& [id, c] : fv.counts) k += c * model.features[i].count(id);
    mean += k * model.alpha(i);
  }
  return mean;
}

}  // namespace

TEST_CASE("dot-base gradients equal finite differences of the posterior mean") {
  auto [graphs, errs] = training_set(20, 5);
  FitGrid grid;  // dot base, unnormalized
  auto model = fit(graphs, errs, grid);
  REQUIRE(model.cfg.base == BaseKernel::dot_product);

  const auto& g = graphs[3];
  auto grads = feature_gradients(model, g);
  FeatureIndex scratch = model.index;
  FeatureVector fv = extract_features(g, model.cfg.H, model.cfg.neighborhood, scratch);
  const double base_mean = posterior_mean(model, fv);
  for (const auto& [id, grad] : grads) {
    FeatureVector bumped = fv;
    ++bumped.counts[id];
    CHECK(posterior_mean(model, bumped) - base_mean ==
          doctest::Approx(grad).epsilon(1e-10));
  }
}

TEST_CASE("dot-base motif statistics: constant gradient, zero variance") {
  auto [graphs, errs] = training_set(18, 9);
  auto model = fit(graphs, errs, FitGrid{});
  for (const auto& ms : motif_scores(model)) {
    CHECK(ms.ev == doctest::Approx(0.0));
    // the per-graph derivative does not depend on the graph under the
    // linear kernel, so AG is that shared value
    double expected = 0.0;
    for (int i = 0; i < model.n_train(); ++i)
      expected += model.features[i].count(ms.feature_id) * model.alpha(i);
    CHECK(ms.ag == doctest::Approx(expected).epsilon(1e-10));
    CHECK(ms.score == doctest::Approx(-ms.ag / std::sqrt(1e-12)).epsilon(1e-10));
  }
}

TEST_CASE("occurrences count supporting training graphs") {
  auto [graphs, errs] = training_set(15, 13);
  auto model = fit(graphs, errs, FitGrid{});
  for (const auto& ms : motif_scores(model)) {
    int support = 0;
    for (const auto& fv : model.features) support += fv.count(ms.feature_id) > 0;
    CHECK(ms.occurrences == support);
    CHECK(ms.decoded == decode_feature(ms.feature_id, model.index));
  }
}

TEST_CASE("features constant across the training set are excluded") {
  auto [graphs, errs] = training_set(15, 17);
  auto model = fit(graphs, errs, FitGrid{});
  const int input_id = model.index.find("input", 0);
  REQUIRE(input_id >= 0);  // every valid graph has exactly one input node
  for (const auto& ms : motif_scores(model)) CHECK(ms.feature_id != input_id);
}

TEST_CASE("rank_motifs filters, sorts and takes symmetric quantiles") {
  auto [graphs, errs] = training_set(40, 23);
  auto model = fit(graphs, errs, FitGrid{});
  const int min_count = 5;
  auto ranking = rank_motifs(model, min_count, 0.25);

  int qualifying = 0;
  for (const auto& ms : motif_scores(model)) qualifying += ms.occurrences >= min_count;
  CHECK(ranking.good.size() == static_cast<size_t>(0.25 * qualifying));
  CHECK(ranking.good.size() == ranking.bad.size());

  for (size_t i = 1; i < ranking.good.size(); ++i)
    CHECK(ranking.good[i - 1].score >= ranking.good[i].score);
  for (size_t i = 1; i < ranking.bad.size(); ++i)
    CHECK(ranking.bad[i - 1].score <= ranking.bad[i].score);  // worst first
  if (!ranking.good.empty() && !ranking.bad.empty())
    CHECK(ranking.good.back().score >= ranking.bad.back().score);
  for (const auto& ms : ranking.good) CHECK(ms.occurrences >= min_count);

  CHECK_THROWS(rank_motifs(model, min_count, 0.9));
}

TEST_CASE("motif_match against a fitted index") {
  auto [graphs, errs] = training_set(10, 29);
  auto model = fit(graphs, errs, FitGrid{});
  LabeledDigraph g;
  g.node_labels = {"input", "conv3x3", "output"};
  g.edges = {{0, 1}, {1, 2}};
  int id = model.index.find("input", 0);
  REQUIRE(id >= 0);
  CHECK(motif_match(g, {id}, model.index, model.cfg) == 1);
  CHECK_THROWS(motif_match(g, {model.index.size() + 5}, model.index, model.cfg));
}

TEST_CASE("motif_match_subtrees is index free") {
  LabeledDigraph g;
  g.node_labels = {"input", "conv3x3", "output"};
  g.edges = {{0, 1}, {1, 2}};
  std::set<std::string> motifs = {"conv3x3(input)", "conv1x1(input)"};
  CHECK(motif_match_subtrees(g, motifs, 1, Neighborhood::in_neighbors) == 1);
  CHECK(motif_match_subtrees(g, {"conv1x1(input)"}, 1, Neighborhood::in_neighbors) == 0);
}

TEST_CASE("motif set json round trip") {
  MotifSet set;
  set.H = 2;
  set.mode = Neighborhood::both;
  set.motifs.push_back({7, "conv3x3(input)", 1, -0.25, 0.04, 12, 1.25});
  auto back = motifs_from_json(motifs_to_json(set));
  CHECK(back.H == 2);
  CHECK(back.mode == Neighborhood::both);
  REQUIRE(back.motifs.size() == 1);
  CHECK(back.motifs[0].feature_id == 7);
  CHECK(back.motifs[0].decoded == "conv3x3(input)");
  CHECK(back.motifs[0].level == 1);
  CHECK(back.motifs[0].ag == doctest::Approx(-0.25));
  CHECK(back.motifs[0].ev == doctest::Approx(0.04));
  CHECK(back.motifs[0].occurrences == 12);
  CHECK(back.motifs[0].score == doctest::Approx(1.25));
}
