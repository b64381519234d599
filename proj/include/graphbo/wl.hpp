#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "graphbo/graph.hpp"

namespace graphbo {

enum class BaseKernel { dot_product, histogram_intersection };
enum class Neighborhood { in_neighbors, out_neighbors, both };

struct KernelConfig {
  int H = 1;
  BaseKernel base = BaseKernel::dot_product;
  Neighborhood neighborhood = Neighborhood::in_neighbors;
  bool normalize = false;
};

/// Exact label-compression dictionary shared by a family of feature
/// vectors. Feature strings are either raw node labels (level 0) or
/// "prefix_id|sorted,child,ids" strings for deeper subtree labels; ids
/// are assigned in first-seen order.
class FeatureIndex {
 public:
  // Returns the id for a feature string, inserting it if new.
  int intern(const std::string& feature, int level);
  // Lookup without insertion; -1 when absent.
  int find(const std::string& feature, int level) const;

  int size() const { return static_cast<int>(reverse_.size()); }
  const std::string& feature_string(int id) const;
  int level_of(int id) const;

  std::string to_json() const;
  static FeatureIndex from_json(const std::string& text);

 private:
  std::unordered_map<std::string, int> forward_;
  std::vector<std::string> reverse_;
  std::vector<int> levels_;
};

/// Sparse count vector over a FeatureIndex; zero counts are never stored.
struct FeatureVector {
  std::map<int, int> counts;

  int count(int id) const {
    auto it = counts.find(id);
    return it == counts.end() ? 0 : it->second;
  }
};

struct KernelCombination {
  struct Component {
    std::function<double(const LabeledDigraph&, const LabeledDigraph&)> kernel;
    double weight = 1.0;
  };
  std::vector<Component> components;
};

// Weisfeiler-Lehman subtree features up to depth H; extends the index
// in place with features unseen so far.
FeatureVector extract_features(const LabeledDigraph& g, int H, Neighborhood mode,
                               FeatureIndex& index);

double kernel_value(const FeatureVector& a, const FeatureVector& b,
                    const KernelConfig& cfg);

struct GramResult {
  Eigen::MatrixXd gram;
  FeatureIndex index;
  std::vector<FeatureVector> features;
};

// Features are extracted once per graph, then compared pairwise. The
// pairwise stage runs under OpenMP; gram_serial is the reference path.
GramResult gram(const std::vector<LabeledDigraph>& graphs, const KernelConfig& cfg);
GramResult gram_serial(const std::vector<LabeledDigraph>& graphs, const KernelConfig& cfg);

// |test| x |train| kernel matrix against an index produced at fit time.
// Unseen test features get fresh ids but cannot overlap train support.
Eigen::MatrixXd cross_gram(const std::vector<FeatureVector>& train,
                           const std::vector<LabeledDigraph>& test,
                           const KernelConfig& cfg, FeatureIndex& index,
                           std::vector<FeatureVector>* test_features = nullptr);

double combine(const KernelCombination& combo, const LabeledDigraph& a,
               const LabeledDigraph& b);

// Expands a compressed feature id into a nested "root(child, ...)" string.
std::string decode_feature(int id, const FeatureIndex& index);

}  // namespace graphbo
