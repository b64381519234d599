#include <filesystem>

#include "doctest.h"
#include "graphbo/bench.hpp"
#include "graphbo/candidate.hpp"

using namespace graphbo;
namespace fs = std::filesystem;

namespace {

LabeledDigraph witness() {
  LabeledDigraph g;
  g.node_labels = {"input", "conv3x3", "conv1x1", "conv1x1", "conv3x3", "conv1x1", "output"};
  g.edges = {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {2, 4}, {3, 4}, {0, 4},
             {1, 5}, {4, 5}, {0, 5}, {5, 6}, {1, 6}, {0, 6}};
  return g;
}

LabeledDigraph bare_chain() {
  LabeledDigraph g;
  g.node_labels = {"input", "output"};
  g.edges = {{0, 1}};
  return g;
}

}  // namespace

TEST_CASE("spearman on monotone, reversed and tied data") {
  CHECK(spearman({0.1, 0.2, 0.3, 0.4}, {1.0, 2.0, 3.0, 4.0}) == doctest::Approx(1.0));
  CHECK(spearman({0.4, 0.3, 0.2, 0.1}, {1.0, 2.0, 3.0, 4.0}) == doctest::Approx(-1.0));
  // tied pair takes the average rank 2.5; hand value sqrt(0.9)
  CHECK(spearman({1.0, 2.0, 2.0, 3.0}, {1.0, 2.0, 3.0, 4.0}) ==
        doctest::Approx(0.9486832981).epsilon(1e-9));
}

TEST_CASE("synthetic instances score the witness and the bare chain") {
  Rng rng(1);
  auto def = SyntheticObjective::default_instance(0.0);
  auto xfer = SyntheticObjective::transfer_instance(0.0);
  CHECK(synthetic_eval(def, witness(), rng) == doctest::Approx(0.18));
  CHECK(synthetic_eval(xfer, witness(), rng) == doctest::Approx(0.28));
  // no planted motif present: base error
  CHECK(synthetic_eval(def, bare_chain(), rng) == doctest::Approx(def.base_error));
  CHECK(synthetic_eval(xfer, bare_chain(), rng) == doctest::Approx(xfer.base_error));
}

TEST_CASE("transfer positives are a subset of the default positives") {
  auto def = SyntheticObjective::default_instance(0.0);
  auto xfer = SyntheticObjective::transfer_instance(0.0);
  std::set<std::string> def_pos;
  for (const auto& m : def.positive_motifs()) def_pos.insert(m);
  for (const auto& m : xfer.positive_motifs()) CHECK(def_pos.count(m) == 1);
  CHECK_FALSE(xfer.positive_motifs().empty());
}

TEST_CASE("witness lies in the shared search space") {
  auto spec = SyntheticObjective::search_space();
  CHECK(validates_against(witness(), spec));
}

TEST_CASE("noiseless objective reports equal validation and test error") {
  auto obj = make_synthetic_objective(SyntheticObjective::default_instance(0.0));
  Rng rng(2);
  auto [val, test] = obj(witness(), rng);
  CHECK(val == doctest::Approx(test));
  CHECK(val == doctest::Approx(0.18));
}

TEST_CASE("noisy objective keeps the test error noiseless") {
  auto obj = make_synthetic_objective(SyntheticObjective::default_instance(0.05));
  Rng rng(3);
  double spread = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto [val, test] = obj(witness(), rng);
    CHECK(test == doctest::Approx(0.18));
    spread = std::max(spread, std::abs(val - 0.18));
  }
  CHECK(spread > 0.0);
}

TEST_CASE("benchmark save / load round trip, with spec inference") {
  auto spec = SyntheticObjective::search_space();
  auto obj = SyntheticObjective::default_instance(0.0);
  Rng rng(5);
  auto bench = generate_synthetic_benchmark(obj, spec, 30, 2, rng);
  CHECK(bench.entries.size() == 30);

  auto path = (fs::temp_directory_path() / "graphbo_test_bench.jsonl").string();
  save_tabular(bench, path);
  auto loaded = load_tabular(path);
  REQUIRE(loaded.entries.size() == bench.entries.size());
  for (const auto& [key, e] : bench.entries) {
    REQUIRE(loaded.entries.count(key) == 1);
    const auto& l = loaded.entries.at(key);
    REQUIRE(l.val_errors.size() == e.val_errors.size());
    for (size_t i = 0; i < e.val_errors.size(); ++i)
      CHECK(l.val_errors[i] == doctest::Approx(e.val_errors[i]));
    CHECK(canonical_key(l.graph) == canonical_key(e.graph));
  }
  // inferred space must admit everything in the file
  for (const auto& [key, e] : loaded.entries)
    CHECK(validates_against(e.graph, loaded.spec));
  fs::remove(path);
}

TEST_CASE("query modes") {
  auto spec = SyntheticObjective::search_space();
  auto obj = SyntheticObjective::default_instance(0.0);
  Rng rng(7);
  auto bench = generate_synthetic_benchmark(obj, spec, 10, 3, rng);
  const auto& entry = bench.entries.begin()->second;

  double mean = 0.0;
  for (double v : entry.val_errors) mean += v / entry.val_errors.size();
  auto [val, test] = query(bench, entry.graph, QueryMode::deterministic, rng);
  CHECK(val == doctest::Approx(mean));

  auto [nval, ntest] = query(bench, entry.graph, QueryMode::noisy, rng);
  bool is_seed_draw = false;
  for (double v : entry.val_errors) is_seed_draw |= nval == doctest::Approx(v);
  CHECK(is_seed_draw);
  CHECK(ntest == doctest::Approx(test));

  LabeledDigraph unknown;
  unknown.node_labels = {"input", "conv3x3", "conv3x3", "conv3x3", "output"};
  unknown.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  CHECK_THROWS_AS(query(bench, unknown, QueryMode::deterministic, rng),
                  BenchmarkError);
}

TEST_CASE("regression eval shape and sanity") {
  auto spec = SyntheticObjective::search_space();
  auto obj = SyntheticObjective::default_instance(0.0);
  Rng rng(9);
  auto bench = generate_synthetic_benchmark(obj, spec, 120, 1, rng);
  std::vector<LabeledDigraph> graphs = bench.graphs();
  std::vector<double> errs;
  for (const auto& g : graphs)
    errs.push_back(query(bench, g, QueryMode::deterministic, rng).first);
  auto stats = run_regression_eval(graphs, errs, FitGrid{}, 30, 60, 5, rng);
  CHECK(stats.per_repeat.size() == 5);
  for (double r : stats.per_repeat) {
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
  }
  CHECK(stats.mean > 0.0);  // the surrogate must carry some signal
}
