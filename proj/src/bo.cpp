#include "graphbo/bo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace graphbo {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

constexpr double kEvFloor = 1e-12;

}  // namespace

void BOConfig::validate() const {
  if (batch < 1) throw std::invalid_argument("bo: batch must be >= 1");
  if (n_init < 2) throw std::invalid_argument("bo: n_init must be >= 2");
  if (budget < n_init) throw std::invalid_argument("bo: budget must cover n_init");
}

double expected_improvement(double mean, double sd, double incumbent_value, double xi) {
  const double gap = incumbent_value - mean - xi;
  if (sd <= 0.0) return std::max(gap, 0.0);
  const double gamma = gap / sd;
  return sd * (gamma * norm_cdf(gamma) + norm_pdf(gamma));
}

double ucb(double mean, double sd, int n_iteration, double beta0) {
  const double beta = beta0 * std::sqrt(0.5 * std::log(2.0 * (n_iteration + 1)));
  return -mean + beta * sd;
}

std::vector<int> select_batch(const std::vector<LabeledDigraph>& pool,
                              const GPModel& model, const BOConfig& cfg,
                              int n_iteration) {
  if (static_cast<int>(pool.size()) < cfg.batch)
    throw std::invalid_argument("select_batch: pool smaller than batch");
  Prediction p = predict(model, pool);
  const double inc = model.targets.minCoeff();
  std::vector<double> acq(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) {
    double sd = std::sqrt(p.variance(i));
    acq[i] = cfg.acquisition == Acquisition::ei
                 ? expected_improvement(p.mean(i), sd, inc, cfg.ei_xi)
                 : ucb(p.mean(i), sd, n_iteration, cfg.ucb_beta0);
  }
  std::vector<int> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return acq[a] > acq[b]; });
  std::vector<int> picked;
  std::set<std::string> keys;
  for (int i : order) {
    if (!keys.insert(canonical_key(pool[i]).key).second) continue;
    picked.push_back(i);
    if (static_cast<int>(picked.size()) == cfg.batch) break;
  }
  if (static_cast<int>(picked.size()) < cfg.batch)
    throw std::invalid_argument("select_batch: not enough distinct pool members");
  return picked;
}

namespace {

struct Tracker {
  SearchHistory history;
  std::vector<Observation> observations;
  double best_val = std::numeric_limits<double>::infinity();
  double best_test = std::numeric_limits<double>::infinity();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  bool record_wall_time = false;

  void record(int iteration, const LabeledDigraph& g, double val, double test) {
    observations.push_back({g, val, test});
    if (val < best_val) {
      best_val = val;
      best_test = test;
    }
    HistoryRecord r;
    r.iteration = iteration;
    r.n_evals = static_cast<int>(observations.size());
    r.graph = g;
    r.candidate_key = canonical_key(g).key;
    r.val_error = val;
    r.test_error = test;
    r.best_val_error = best_val;
    r.best_test_error = best_test;
    if (record_wall_time)
      r.wall_time_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
    history.records.push_back(std::move(r));
  }
};

// Occurrence-weighted merge of past-task and current-task motif scores,
// keyed by decoded subtree.
std::set<std::string> transfer_filter(const MotifSet& past, const GPModel& model,
                                      int min_occurrences, double quantile) {
  std::map<std::string, MotifScore> merged;
  for (const auto& m : past.motifs) merged[m.decoded] = m;
  for (const auto& cur : motif_scores(model)) {
    if (cur.occurrences < min_occurrences) continue;
    auto it = merged.find(cur.decoded);
    if (it == merged.end()) {
      merged[cur.decoded] = cur;
    } else {
      MotifScore& m = it->second;
      const double total = m.occurrences + cur.occurrences;
      m.ag = (m.occurrences * m.ag + cur.occurrences * cur.ag) / total;
      m.ev = (m.occurrences * m.ev + cur.occurrences * cur.ev) / total;
      m.occurrences = static_cast<int>(total);
      m.score = -m.ag / std::sqrt(std::max(m.ev, kEvFloor));
    }
  }
  std::vector<const MotifScore*> ranked;
  ranked.reserve(merged.size());
  for (const auto& [k, v] : merged) ranked.push_back(&v);
  std::sort(ranked.begin(), ranked.end(), [](const MotifScore* a, const MotifScore* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->decoded < b->decoded;
  });
  const auto take = std::max<size_t>(1, static_cast<size_t>(quantile * ranked.size()));
  std::set<std::string> filter;
  for (size_t i = 0; i < take && i < ranked.size(); ++i)
    filter.insert(ranked[i]->decoded);
  return filter;
}

void initial_design(Tracker& t, const Objective& objective, const SearchSpaceSpec& spec,
                    int n_init, Rng& rng, const std::vector<LabeledDigraph>* universe) {
  std::set<std::string> seen;
  int attempts = 0;
  while (static_cast<int>(t.observations.size()) < n_init) {
    if (++attempts > 200 * std::max(1, n_init))
      throw GenerationError("initial design: not enough distinct graphs");
    LabeledDigraph g =
        universe ? (*universe)[std::uniform_int_distribution<size_t>(0, universe->size() - 1)(rng)]
                 : random_graph(spec, rng);
    if (!seen.insert(canonical_key(g).key).second) continue;
    auto [val, test] = objective(g, rng);
    t.record(0, g, val, test);
  }
}

}  // namespace

SearchHistory run_bo(const Objective& objective, const SearchSpaceSpec& spec,
                     const BOConfig& cfg, Rng& rng,
                     const std::vector<LabeledDigraph>* universe) {
  cfg.validate();
  Tracker t;
  t.record_wall_time = cfg.record_wall_time;
  initial_design(t, objective, spec, std::min(cfg.n_init, cfg.budget), rng, universe);

  for (int iteration = 1; static_cast<int>(t.observations.size()) < cfg.budget;
       ++iteration) {
    std::vector<LabeledDigraph> graphs;
    std::vector<double> errors;
    for (const auto& obs : t.observations) {
      graphs.push_back(obs.graph);
      errors.push_back(obs.val_error);
    }
    GPModel model = fit(graphs, errors, cfg.grid);

    PoolConfig pool_cfg = cfg.pool;
    if (cfg.transfer_motifs) {
      pool_cfg.motif_filter = transfer_filter(*cfg.transfer_motifs, model,
                                              cfg.transfer_min_occurrences,
                                              cfg.transfer_quantile);
      pool_cfg.motif_H = cfg.transfer_motifs->H;
      pool_cfg.motif_mode = cfg.transfer_motifs->mode;
    }
    PoolResult pool = generate_pool(spec, t.observations, pool_cfg, rng, universe);
    if (pool.graphs.empty())
      throw GenerationError("run_bo: candidate pool is empty");

    const int remaining = cfg.budget - static_cast<int>(t.observations.size());
    BOConfig batch_cfg = cfg;
    batch_cfg.batch =
        std::min({cfg.batch, remaining, static_cast<int>(pool.graphs.size())});
    auto picked = select_batch(pool.graphs, model, batch_cfg, iteration);
    for (int i : picked) {
      auto [val, test] = objective(pool.graphs[i], rng);
      t.record(iteration, pool.graphs[i], val, test);
    }
  }
  return t.history;
}

SearchHistory random_search(const Objective& objective, const SearchSpaceSpec& spec,
                            int budget, Rng& rng,
                            const std::vector<LabeledDigraph>* universe) {
  Tracker t;
  for (int i = 0; i < budget; ++i) {
    LabeledDigraph g =
        universe ? (*universe)[std::uniform_int_distribution<size_t>(0, universe->size() - 1)(rng)]
                 : random_graph(spec, rng);
    auto [val, test] = objective(g, rng);
    t.record(i, g, val, test);
  }
  return t.history;
}

std::string SearchHistory::to_csv() const {
  std::ostringstream os;
  os << "iteration,n_evals,candidate_key,val_error,test_error,best_val_error,"
        "best_test_error,wall_time_s\n";
  os.precision(10);
  for (const auto& r : records)
    os << r.iteration << ',' << r.n_evals << ',' << r.candidate_key << ','
       << r.val_error << ',' << r.test_error << ',' << r.best_val_error << ','
       << r.best_test_error << ',' << r.wall_time_s << '\n';
  return os.str();
}

double SearchHistory::best_val() const {
  return records.empty() ? std::numeric_limits<double>::infinity()
                         : records.back().best_val_error;
}

double SearchHistory::best_test() const {
  return records.empty() ? std::numeric_limits<double>::infinity()
                         : records.back().best_test_error;
}

}  // namespace graphbo
