#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "graphbo/graph.hpp"
#include "graphbo/wl.hpp"

namespace graphbo {

/// Maps raw validation errors to standardized log-errors and back.
struct TargetTransform {
  double epsilon = 1e-6;
  double mean = 0.0;
  double std = 1.0;

  double to_transformed(double error) const;
  double to_error(double transformed) const;

  static TargetTransform fit(const std::vector<double>& errors, double epsilon = 1e-6);
};

/// Hyperparameter grid searched by marginal likelihood.
struct FitGrid {
  std::vector<int> H_values = {0, 1, 2, 3};
  std::vector<double> noise_values = {1e-6, 1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<BaseKernel> bases = {BaseKernel::dot_product};
  Neighborhood neighborhood = Neighborhood::in_neighbors;
  bool normalize = false;
};

/// Fitted surrogate. Immutable after fit(); predict and the motif
/// machinery treat it as read-only.
struct GPModel {
  std::vector<LabeledDigraph> graphs;
  FeatureIndex index;
  std::vector<FeatureVector> features;
  KernelConfig cfg;
  double noise = 0.0;
  double jitter = 0.0;  // extra diagonal actually applied
  Eigen::LLT<Eigen::MatrixXd> gram_factor;
  Eigen::VectorXd alpha;  // (K + noise I)^-1 y, transformed space
  Eigen::VectorXd targets;  // transformed
  TargetTransform transform;
  std::vector<double> raw_targets;
  double lml = 0.0;

  int n_train() const { return static_cast<int>(graphs.size()); }
  std::string summary_json() const;
};

struct Prediction {
  Eigen::VectorXd mean;      // transformed space
  Eigen::VectorXd variance;  // transformed space, clamped at 0
  std::vector<double> mean_error;  // inverse-transformed
};

class GPError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact LML through a Cholesky factorization of K + noise I, with jitter
// escalation 1e-8 .. 1e-4 before giving up. Outputs the factor, the
// solved alpha and the jitter applied.
double log_marginal_likelihood(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                               double noise, Eigen::LLT<Eigen::MatrixXd>* factor,
                               Eigen::VectorXd* alpha, double* jitter_used);

// Grid search over (base, H, noise) maximizing the LML; ties broken
// toward smaller H then smaller noise.
GPModel fit(const std::vector<LabeledDigraph>& graphs,
            const std::vector<double>& val_errors, const FitGrid& grid = {});

Prediction predict(const GPModel& model, const std::vector<LabeledDigraph>& graphs);

struct Incumbent {
  int index = -1;
  LabeledDigraph graph;
  double error = 0.0;
};

// Minimum raw validation error; ties resolve to the earliest observation.
Incumbent incumbent(const GPModel& model);

}  // namespace graphbo
