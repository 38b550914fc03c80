#include "gicert/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gicert/rng.hpp"

namespace gicert {

namespace {

int argmax_lowest(const double* scores, int k) {
  int best = 0;
  for (int c = 1; c < k; ++c)
    if (scores[c] > scores[best]) best = c;
  return best;
}

}  // namespace

ForwardPassModel::ForwardPassModel(std::vector<Matrix> weights, int num_classes)
    : weights_(std::move(weights)), num_classes_(num_classes) {
  if (weights_.empty()) throw std::invalid_argument("forward-pass model needs at least one layer");
  for (std::size_t l = 0; l + 1 < weights_.size(); ++l)
    if (weights_[l].cols != weights_[l + 1].rows)
      throw std::invalid_argument("weight dimension chain mismatch");
  if (weights_.back().cols != num_classes_)
    throw std::invalid_argument("output layer width must equal the class count");
}

std::vector<int> ForwardPassModel::predict_all(const SampledGraph& sg) const {
  const Graph& g = *sg.g;
  if (!g.has_features() || g.feature_dim != weights_.front().rows)
    throw std::invalid_argument("feature dimension does not match the first layer");
  const int n = g.n;
  const Adjacency live = sg.live_adjacency();

  // Normalization with self loops keeps isolated nodes producing logits from
  // their own feature row.
  std::vector<double> inv_sqrt_deg(n);
  for (int v = 0; v < n; ++v) inv_sqrt_deg[v] = 1.0 / std::sqrt(1.0 + live.degree(v));

  std::vector<double> h = g.features;
  int dim = g.feature_dim;
  std::vector<double> agg, next;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Matrix& w = weights_[l];
    agg.assign(static_cast<std::size_t>(n) * dim, 0.0);
    for (int v = 0; v < n; ++v) {
      const double dv = inv_sqrt_deg[v];
      double* row = &agg[static_cast<std::size_t>(v) * dim];
      const double self = dv * dv;
      const double* hv = &h[static_cast<std::size_t>(v) * dim];
      for (int c = 0; c < dim; ++c) row[c] += self * hv[c];
      for (int e = live.offsets[v]; e < live.offsets[v + 1]; ++e) {
        const int u = live.neighbors[e];
        const double coef = dv * inv_sqrt_deg[u];
        const double* hu = &h[static_cast<std::size_t>(u) * dim];
        for (int c = 0; c < dim; ++c) row[c] += coef * hu[c];
      }
    }
    next.assign(static_cast<std::size_t>(n) * w.cols, 0.0);
    for (int v = 0; v < n; ++v) {
      const double* row = &agg[static_cast<std::size_t>(v) * dim];
      double* out = &next[static_cast<std::size_t>(v) * w.cols];
      for (int r = 0; r < dim; ++r) {
        const double x = row[r];
        if (x == 0.0) continue;
        const double* wr = &w.values[static_cast<std::size_t>(r) * w.cols];
        for (int c = 0; c < w.cols; ++c) out[c] += x * wr[c];
      }
    }
    if (l + 1 < weights_.size())
      for (double& x : next) x = std::max(0.0, x);
    h.swap(next);
    dim = w.cols;
  }

  std::vector<int> pred(n);
  for (int v = 0; v < n; ++v)
    pred[v] = argmax_lowest(&h[static_cast<std::size_t>(v) * num_classes_], num_classes_);
  return pred;
}

std::vector<int> SyntheticClassifier::predict_all(const SampledGraph& sg) const {
  const Graph& g = *sg.g;
  const int n = g.n;
  const Adjacency live = sg.live_adjacency();
  std::vector<int> pred(n);
  std::vector<int> dist(n), frontier;
  for (int v = 0; v < n; ++v) {
    dist.assign(n, -1);
    dist[v] = 0;
    frontier.assign(1, v);
    std::vector<int> ball{v};
    for (int d = 0; d < depth_ && !frontier.empty(); ++d) {
      std::vector<int> next;
      for (int u : frontier)
        for (int e = live.offsets[u]; e < live.offsets[u + 1]; ++e) {
          const int w = live.neighbors[e];
          if (dist[w] < 0) {
            dist[w] = d + 1;
            next.push_back(w);
            ball.push_back(w);
          }
        }
      frontier.swap(next);
    }
    std::sort(ball.begin(), ball.end());
    std::uint64_t h = 0x6b756d71756174ull;
    for (int id : ball) h = hash_combine(h, static_cast<std::uint64_t>(id));
    pred[v] = static_cast<int>(h % static_cast<std::uint64_t>(num_classes_));
  }
  return pred;
}

}  // namespace gicert
