#include <random>

#include "doctest.h"
#include "graphbo/candidate.hpp"
#include "graphbo/wl.hpp"
#include "wl_oracle.hpp"

using namespace graphbo;

namespace {

LabeledDigraph chain() {
  LabeledDigraph g;
  g.node_labels = {"input", "conv3x3", "output"};
  g.edges = {{0, 1}, {1, 2}};
  return g;
}

SearchSpaceSpec fuzz_spec() {
  SearchSpaceSpec spec;
  spec.min_nodes = 2;
  spec.max_nodes = 8;
  spec.max_edges = 12;
  spec.allowed_labels = {"input", "output", "conv3x3", "conv1x1", "maxpool3x3"};
  return spec;
}

}  // namespace

TEST_CASE("hand-checked H=1 features on a chain") {
  FeatureIndex index;
  auto fv = extract_features(chain(), 1, Neighborhood::in_neighbors, index);
  // 3 level-0 features plus one depth-1 subtree per node
  CHECK(fv.counts.size() == 6);
  graphbo_test::SubtreeCounts expected = {
      {{0, "input"}, 1},          {{0, "conv3x3"}, 1},
      {{0, "output"}, 1},         {{1, "input()"}, 1},
      {{1, "conv3x3(input)"}, 1}, {{1, "output(conv3x3)"}, 1},
  };
  CHECK(graphbo_test::decoded_counts(fv, index) == expected);
}

TEST_CASE("feature counts match the brute-force oracle") {
  auto spec = fuzz_spec();
  Rng rng(12345);
  for (int i = 0; i < 50; ++i) {
    auto g = random_graph(spec, rng);
    for (auto mode :
         {Neighborhood::in_neighbors, Neighborhood::out_neighbors, Neighborhood::both}) {
      for (int H = 0; H <= 3; ++H) {
        FeatureIndex index;
        auto fv = extract_features(g, H, mode, index);
        CHECK(graphbo_test::decoded_counts(fv, index) ==
              graphbo_test::brute_force_counts(g, H, mode));
      }
    }
  }
}

TEST_CASE("kernel_value bases on hand-built vectors") {
  FeatureVector a, b;
  a.counts = {{0, 2}, {1, 1}, {3, 4}};
  b.counts = {{0, 1}, {2, 5}, {3, 2}};
  KernelConfig cfg;
  cfg.base = BaseKernel::dot_product;
  CHECK(kernel_value(a, b, cfg) == doctest::Approx(2 * 1 + 4 * 2));
  cfg.base = BaseKernel::histogram_intersection;
  CHECK(kernel_value(a, b, cfg) == doctest::Approx(1 + 2));
}

TEST_CASE("normalized kernel is 1 on the diagonal and bounded") {
  auto spec = fuzz_spec();
  Rng rng(7);
  KernelConfig cfg;
  cfg.H = 2;
  cfg.normalize = true;
  for (auto base : {BaseKernel::dot_product, BaseKernel::histogram_intersection}) {
    cfg.base = base;
    FeatureIndex index;
    auto a = extract_features(random_graph(spec, rng), cfg.H, cfg.neighborhood, index);
    auto b = extract_features(random_graph(spec, rng), cfg.H, cfg.neighborhood, index);
    CHECK(kernel_value(a, a, cfg) == doctest::Approx(1.0));
    CHECK(kernel_value(a, b, cfg) <= 1.0 + 1e-12);
    CHECK(kernel_value(a, b, cfg) >= 0.0);
  }
}

TEST_CASE("gram matches gram_serial") {
  auto spec = fuzz_spec();
  Rng rng(99);
  std::vector<LabeledDigraph> graphs;
  for (int i = 0; i < 30; ++i) graphs.push_back(random_graph(spec, rng));
  KernelConfig cfg;
  cfg.H = 2;
  auto par = gram(graphs, cfg);
  auto ser = gram_serial(graphs, cfg);
  CHECK((par.gram - ser.gram).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("cross_gram against the training set reproduces the gram") {
  auto spec = fuzz_spec();
  Rng rng(4);
  std::vector<LabeledDigraph> graphs;
  for (int i = 0; i < 12; ++i) graphs.push_back(random_graph(spec, rng));
  KernelConfig cfg;
  cfg.H = 1;
  auto gr = gram(graphs, cfg);
  FeatureIndex index = gr.index;
  auto cross = cross_gram(gr.features, graphs, cfg, index);
  CHECK((cross - gr.gram).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("feature index json round trip preserves ids and levels") {
  FeatureIndex index;
  auto fv = extract_features(chain(), 2, Neighborhood::in_neighbors, index);
  auto back = FeatureIndex::from_json(index.to_json());
  REQUIRE(back.size() == index.size());
  for (int id = 0; id < index.size(); ++id) {
    CHECK(back.feature_string(id) == index.feature_string(id));
    CHECK(back.level_of(id) == index.level_of(id));
  }
  (void)fv;
}

TEST_CASE("kernel combination validates weights") {
  KernelCombination combo;
  auto unit = [](const LabeledDigraph&, const LabeledDigraph&) { return 2.0; };
  combo.components = {{unit, 0.25}, {unit, 0.75}};
  CHECK(combine(combo, chain(), chain()) == doctest::Approx(2.0));
  combo.components[0].weight = 0.5;
  CHECK_THROWS(combine(combo, chain(), chain()));
}
