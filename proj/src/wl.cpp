#include "graphbo/wl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace graphbo {

using nlohmann::json;

namespace {

std::string intern_key(int level, const std::string& payload) {
  return std::to_string(level) + ":" + payload;
}

}  // namespace

int FeatureIndex::intern(const std::string& feature, int level) {
  auto [it, inserted] = forward_.try_emplace(intern_key(level, feature), size());
  if (inserted) {
    reverse_.push_back(feature);
    levels_.push_back(level);
  }
  return it->second;
}

int FeatureIndex::find(const std::string& feature, int level) const {
  auto it = forward_.find(intern_key(level, feature));
  return it == forward_.end() ? -1 : it->second;
}

const std::string& FeatureIndex::feature_string(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("feature id unknown to index");
  return reverse_[id];
}

int FeatureIndex::level_of(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("feature id unknown to index");
  return levels_[id];
}

std::string FeatureIndex::to_json() const {
  json doc;
  auto& arr = doc["features"] = json::array();
  for (int id = 0; id < size(); ++id)
    arr.push_back({{"id", id}, {"string", reverse_[id]}, {"level", levels_[id]}});
  return doc.dump();
}

FeatureIndex FeatureIndex::from_json(const std::string& text) {
  json doc = json::parse(text);
  FeatureIndex index;
  for (const auto& f : doc.at("features")) {
    int id = index.intern(f.at("string").get<std::string>(), f.at("level").get<int>());
    if (id != f.at("id").get<int>())
      throw std::runtime_error("feature index json: ids not in first-seen order");
  }
  return index;
}

FeatureVector extract_features(const LabeledDigraph& g, int H, Neighborhood mode,
                               FeatureIndex& index) {
  const int n = g.num_nodes();
  std::vector<std::vector<int>> nbr(n);
  for (const auto& [u, v] : g.edges) {
    if (mode == Neighborhood::in_neighbors || mode == Neighborhood::both)
      nbr[v].push_back(u);
    if (mode == Neighborhood::out_neighbors || mode == Neighborhood::both)
      nbr[u].push_back(v);
  }

  FeatureVector fv;
  std::vector<int> labels(n);
  for (int v = 0; v < n; ++v) {
    labels[v] = index.intern(g.node_labels[v], 0);
    ++fv.counts[labels[v]];
  }
  for (int h = 1; h <= H; ++h) {
    std::vector<int> next(n);
    for (int v = 0; v < n; ++v) {
      std::vector<int> ms;
      ms.reserve(nbr[v].size());
      for (int u : nbr[v]) ms.push_back(labels[u]);
      std::sort(ms.begin(), ms.end());
      std::ostringstream os;
      os << labels[v] << '|';
      for (size_t i = 0; i < ms.size(); ++i) {
        if (i) os << ',';
        os << ms[i];
      }
      next[v] = index.intern(os.str(), h);
      ++fv.counts[next[v]];
    }
    labels = std::move(next);
  }
  return fv;
}

double kernel_value(const FeatureVector& a, const FeatureVector& b,
                    const KernelConfig& cfg) {
  auto raw = [&cfg](const FeatureVector& x, const FeatureVector& y) {
    double s = 0.0;
    auto ix = x.counts.begin();
    auto iy = y.counts.begin();
    while (ix != x.counts.end() && iy != y.counts.end()) {
      if (ix->first < iy->first) {
        ++ix;
      } else if (iy->first < ix->first) {
        ++iy;
      } else {
        s += cfg.base == BaseKernel::dot_product
                 ? static_cast<double>(ix->second) * iy->second
                 : static_cast<double>(std::min(ix->second, iy->second));
        ++ix;
        ++iy;
      }
    }
    return s;
  };
  double k = raw(a, b);
  if (!cfg.normalize) return k;
  double ka = raw(a, a), kb = raw(b, b);
  if (ka <= 0.0 || kb <= 0.0) return 0.0;
  return k / std::sqrt(ka * kb);
}

namespace {

GramResult gram_impl(const std::vector<LabeledDigraph>& graphs,
                     const KernelConfig& cfg, bool parallel) {
  if (graphs.empty()) throw std::invalid_argument("gram: empty graph list");
  GramResult r;
  r.features.reserve(graphs.size());
  for (const auto& g : graphs)
    r.features.push_back(extract_features(g, cfg.H, cfg.neighborhood, r.index));
  const int n = static_cast<int>(graphs.size());
  r.gram.resize(n, n);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double k = kernel_value(r.features[i], r.features[j], cfg);
      r.gram(i, j) = k;
      r.gram(j, i) = k;
    }
  }
  return r;
}

}  // namespace

GramResult gram(const std::vector<LabeledDigraph>& graphs, const KernelConfig& cfg) {
  return gram_impl(graphs, cfg, true);
}

GramResult gram_serial(const std::vector<LabeledDigraph>& graphs,
                       const KernelConfig& cfg) {
  return gram_impl(graphs, cfg, false);
}

Eigen::MatrixXd cross_gram(const std::vector<FeatureVector>& train,
                           const std::vector<LabeledDigraph>& test,
                           const KernelConfig& cfg, FeatureIndex& index,
                           std::vector<FeatureVector>* test_features) {
  std::vector<FeatureVector> tf;
  tf.reserve(test.size());
  for (const auto& g : test)
    tf.push_back(extract_features(g, cfg.H, cfg.neighborhood, index));
  const int nt = static_cast<int>(test.size());
  const int ntr = static_cast<int>(train.size());
  Eigen::MatrixXd m(nt, ntr);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < ntr; ++j) m(i, j) = kernel_value(tf[i], train[j], cfg);
  if (test_features) *test_features = std::move(tf);
  return m;
}

double combine(const KernelCombination& combo, const LabeledDigraph& a,
               const LabeledDigraph& b) {
  double wsum = 0.0;
  for (const auto& c : combo.components) {
    if (c.weight < 0.0) throw std::invalid_argument("kernel combination: negative weight");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw std::invalid_argument("kernel combination: weights must sum to 1");
  double v = 0.0;
  for (const auto& c : combo.components) v += c.weight * c.kernel(a, b);
  return v;
}

std::string decode_feature(int id, const FeatureIndex& index) {
  const std::string& s = index.feature_string(id);
  if (index.level_of(id) == 0) return s;
  // payload is "prefix_id|child,ids"
  auto bar = s.find('|');
  // root label of a subtree is the level-0 root of its prefix chain
  int prefix = std::stoi(s.substr(0, bar));
  while (index.level_of(prefix) > 0) {
    const std::string& ps = index.feature_string(prefix);
    prefix = std::stoi(ps.substr(0, ps.find('|')));
  }
  std::string root = index.feature_string(prefix);
  std::vector<std::string> children;
  std::string rest = s.substr(bar + 1);
  std::istringstream is(rest);
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) children.push_back(decode_feature(std::stoi(tok), index));
  std::sort(children.begin(), children.end());
  std::string out = root + "(";
  for (size_t i = 0; i < children.size(); ++i) {
    if (i) out += ", ";
    out += children[i];
  }
  out += ")";
  return out;
}

}  // namespace graphbo
