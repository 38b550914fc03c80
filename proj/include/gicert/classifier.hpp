#pragma once

#include <memory>
#include <vector>

#include "gicert/smoothing.hpp"

namespace gicert {

// Base model contract: deterministic, and the prediction for node v depends
// only on the k-hop live neighborhood of v. Ties in scores break toward the
// lowest class index everywhere.
class BaseClassifier {
 public:
  virtual ~BaseClassifier() = default;
  virtual int num_classes() const = 0;
  virtual int receptive_depth() const = 0;
  virtual std::vector<int> predict_all(const SampledGraph& sg) const = 0;
};

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

// Graph-convolution forward pass: symmetric degree normalization with self
// loops on the live adjacency, ReLU between layers, argmax over the final
// layer. Weights are an input artifact; one weight matrix per layer.
class ForwardPassModel : public BaseClassifier {
 public:
  ForwardPassModel(std::vector<Matrix> weights, int num_classes);
  int num_classes() const override { return num_classes_; }
  int receptive_depth() const override { return static_cast<int>(weights_.size()); }
  std::vector<int> predict_all(const SampledGraph& sg) const override;

 private:
  std::vector<Matrix> weights_;
  int num_classes_;
};

// Deterministic test double: label(v) = hash of the sorted set of node ids
// within k live hops of v (including v) mod K. Exercises locality without
// training or features.
class SyntheticClassifier : public BaseClassifier {
 public:
  SyntheticClassifier(int num_classes, int depth) : num_classes_(num_classes), depth_(depth) {}
  int num_classes() const override { return num_classes_; }
  int receptive_depth() const override { return depth_; }
  std::vector<int> predict_all(const SampledGraph& sg) const override;

 private:
  int num_classes_;
  int depth_;
};

}  // namespace gicert
