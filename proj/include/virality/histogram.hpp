#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "virality/binning.hpp"
#include "virality/parallel.hpp"

namespace virality {

struct HistBin {
  double sum_grad = 0.0;
  double sum_hess = 0.0;
  std::uint32_t count = 0;
};

using FeatureHistogram = std::vector<HistBin>;

// One histogram per feature for a tree node's row set.
using NodeHistogram = std::vector<FeatureHistogram>;

// Exact per-bin gradient/hessian/count sums over the node's rows, accumulated
// in row order per feature. Feature-level parallelism keeps the reduction
// order deterministic.
inline NodeHistogram build_histograms(std::span<const std::uint32_t> rows,
                                      std::span<const double> gradients,
                                      std::span<const double> hessians,
                                      const BinnedMatrix& binned, int threads = 0) {
  const std::size_t n_features = binned.bins.size();
  NodeHistogram hist(n_features);
  parallel_for(n_features, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t f = begin; f < end; ++f) {
      const auto& feature_bins = binned.bins[f];
      FeatureHistogram& h = hist[f];
      h.assign(static_cast<std::size_t>(binned.mappers[f].num_bins()), HistBin{});
      for (const std::uint32_t r : rows) {
        HistBin& b = h[feature_bins[r]];
        b.sum_grad += gradients[r];
        b.sum_hess += hessians[r];
        ++b.count;
      }
    }
  });
  return hist;
}

// Sibling subtraction: child = parent - other child, elementwise.
inline NodeHistogram subtract_histograms(const NodeHistogram& parent,
                                         const NodeHistogram& child) {
  NodeHistogram out(parent.size());
  for (std::size_t f = 0; f < parent.size(); ++f) {
    out[f].resize(parent[f].size());
    for (std::size_t b = 0; b < parent[f].size(); ++b) {
      out[f][b].sum_grad = parent[f][b].sum_grad - child[f][b].sum_grad;
      out[f][b].sum_hess = parent[f][b].sum_hess - child[f][b].sum_hess;
      out[f][b].count = parent[f][b].count - child[f][b].count;
    }
  }
  return out;
}

}  // namespace virality
