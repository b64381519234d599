#include "graphbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "json.hpp"

namespace graphbo {

double TargetTransform::to_transformed(double error) const {
  return (std::log(std::max(error, epsilon)) - mean) / std;
}

double TargetTransform::to_error(double transformed) const {
  return std::exp(std * transformed + mean);
}

TargetTransform TargetTransform::fit(const std::vector<double>& errors, double epsilon) {
  TargetTransform t;
  t.epsilon = epsilon;
  const int n = static_cast<int>(errors.size());
  double s = 0.0;
  for (double e : errors) s += std::log(std::max(e, epsilon));
  t.mean = s / n;
  double v = 0.0;
  for (double e : errors) {
    double d = std::log(std::max(e, epsilon)) - t.mean;
    v += d * d;
  }
  t.std = std::sqrt(v / n);
  if (!(t.std > 1e-12)) t.std = 1.0;  // constant targets
  return t;
}

double log_marginal_likelihood(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                               double noise, Eigen::LLT<Eigen::MatrixXd>* factor,
                               Eigen::VectorXd* alpha, double* jitter_used) {
  const int n = static_cast<int>(K.rows());
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += noise + jitter;
    llt.compute(A);
    if (llt.info() == Eigen::Success) break;
    jitter = jitter == 0.0 ? 1e-8 : jitter * 10.0;
    if (jitter > 1e-4)
      throw GPError("Gram factorization failed after jitter escalation");
  }
  Eigen::VectorXd a = llt.solve(y);
  double logdet = llt.matrixLLT().diagonal().array().log().sum();
  double lml = -0.5 * y.dot(a) - logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
  if (factor) *factor = llt;
  if (alpha) *alpha = std::move(a);
  if (jitter_used) *jitter_used = jitter;
  return lml;
}

namespace {

// Restriction of a feature vector to WL levels <= H.
FeatureVector restrict_levels(const FeatureVector& fv, const FeatureIndex& index, int H) {
  FeatureVector out;
  for (const auto& [id, c] : fv.counts)
    if (index.level_of(id) <= H) out.counts[id] = c;
  return out;
}

}  // namespace

GPModel fit(const std::vector<LabeledDigraph>& graphs,
            const std::vector<double>& val_errors, const FitGrid& grid) {
  if (graphs.size() != val_errors.size())
    throw GPError("fit: graphs and targets differ in length");
  if (graphs.size() < 2) throw GPError("fit: need at least 2 observations");
  for (double e : val_errors) {
    if (!std::isfinite(e)) throw GPError("fit: non-finite target");
    if (e < 0.0 || e > 1.0) throw GPError("fit: error outside [0,1]");
  }
  if (grid.H_values.empty() || grid.noise_values.empty() || grid.bases.empty())
    throw GPError("fit: empty hyperparameter grid");

  const int n = static_cast<int>(graphs.size());
  TargetTransform transform = TargetTransform::fit(val_errors);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = transform.to_transformed(val_errors[i]);

  int max_h = *std::max_element(grid.H_values.begin(), grid.H_values.end());
  FeatureIndex index;
  std::vector<FeatureVector> full;
  full.reserve(n);
  for (const auto& g : graphs)
    full.push_back(extract_features(g, max_h, grid.neighborhood, index));

  GPModel best;
  bool have_best = false;
  std::vector<int> hs = grid.H_values;
  std::sort(hs.begin(), hs.end());
  std::vector<double> noises = grid.noise_values;
  std::sort(noises.begin(), noises.end());

  for (BaseKernel base : grid.bases) {
    for (int H : hs) {
      KernelConfig cfg{H, base, grid.neighborhood, grid.normalize};
      std::vector<FeatureVector> feats;
      feats.reserve(n);
      for (const auto& fv : full) feats.push_back(restrict_levels(fv, index, H));
      Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
          double k = kernel_value(feats[i], feats[j], cfg);
          K(i, j) = k;
          K(j, i) = k;
        }
      for (double noise : noises) {
        Eigen::LLT<Eigen::MatrixXd> llt;
        Eigen::VectorXd alpha;
        double jitter = 0.0;
        double lml;
        try {
          lml = log_marginal_likelihood(K, y, noise, &llt, &alpha, &jitter);
        } catch (const GPError&) {
          continue;  // degenerate grid point; others may still factorize
        }
        // strict > keeps the smallest-H / smallest-noise maximizer
        if (!have_best || lml > best.lml + 1e-12) {
          best.cfg = cfg;
          best.noise = noise;
          best.jitter = jitter;
          best.gram_factor = llt;
          best.alpha = std::move(alpha);
          best.lml = lml;
          best.features = feats;
          have_best = true;
        }
      }
    }
  }
  if (!have_best) throw GPError("fit: every grid point failed to factorize");
  best.graphs = graphs;
  best.index = std::move(index);
  best.targets = std::move(y);
  best.transform = transform;
  best.raw_targets = val_errors;
  return best;
}

Prediction predict(const GPModel& model, const std::vector<LabeledDigraph>& graphs) {
  if (model.graphs.empty()) throw GPError("predict: unfitted model");
  FeatureIndex scratch = model.index;  // keep the model immutable
  std::vector<FeatureVector> tf;
  Eigen::MatrixXd Kx =
      cross_gram(model.features, graphs, model.cfg, scratch, &tf);
  const int nt = static_cast<int>(graphs.size());
  Prediction p;
  p.mean = Kx * model.alpha;
  p.variance.resize(nt);
  Eigen::MatrixXd sol = model.gram_factor.solve(Kx.transpose());
  for (int i = 0; i < nt; ++i) {
    double self = kernel_value(tf[i], tf[i], model.cfg);
    p.variance(i) = std::max(0.0, self - Kx.row(i).dot(sol.col(i)));
  }
  p.mean_error.resize(nt);
  for (int i = 0; i < nt; ++i) p.mean_error[i] = model.transform.to_error(p.mean(i));
  return p;
}

Incumbent incumbent(const GPModel& model) {
  if (model.graphs.empty()) throw GPError("incumbent: empty model");
  int best = 0;
  for (int i = 1; i < model.n_train(); ++i)
    if (model.raw_targets[i] < model.raw_targets[best]) best = i;
  return {best, model.graphs[best], model.raw_targets[best]};
}

std::string GPModel::summary_json() const {
  nlohmann::json doc;
  doc["H"] = cfg.H;
  doc["base"] = cfg.base == BaseKernel::dot_product ? "dot" : "oa";
  doc["noise"] = noise;
  doc["lml"] = lml;
  doc["n_train"] = n_train();
  return doc.dump();
}

}  // namespace graphbo
