#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "virality/histogram.hpp"
#include "virality/tree.hpp"

namespace virality {

struct SplitConstraints {
  std::uint32_t min_samples_leaf = 1;
  double min_sum_hessian_leaf = 0.0;
};

struct SplitCandidate {
  int feature = -1;
  bool categorical = false;
  int bin = -1;                         // numeric: rows with bin <= this go left
  std::vector<std::uint8_t> left_bins;  // categorical: codes routed left, ascending
  double gain = 0.0;
  double left_grad = 0.0, left_hess = 0.0;
  double right_grad = 0.0, right_hess = 0.0;
  std::uint32_t left_count = 0, right_count = 0;
};

namespace detail {

inline double split_gain(double gl, double hl, double gr, double hr) {
  const double gp = gl + gr;
  const double hp = hl + hr;
  return gl * gl / (hl + kDenomEpsilon) + gr * gr / (hr + kDenomEpsilon) -
         gp * gp / (hp + kDenomEpsilon);
}

struct SideSums {
  double grad = 0.0;
  double hess = 0.0;
  std::uint32_t count = 0;
};

inline void consider(SplitCandidate& best, int feature, const SideSums& left,
                     const SideSums& total, const SplitConstraints& limits,
                     int numeric_bin, const std::vector<std::uint8_t>* cat_prefix) {
  const std::uint32_t cr = total.count - left.count;
  if (left.count < limits.min_samples_leaf || cr < limits.min_samples_leaf) return;
  const double hr = total.hess - left.hess;
  if (left.hess < limits.min_sum_hessian_leaf || hr < limits.min_sum_hessian_leaf) return;
  const double gr = total.grad - left.grad;
  const double gain = split_gain(left.grad, left.hess, gr, hr);
  if (!(gain > best.gain)) return;  // ties keep the earlier (feature, bin)
  best.feature = feature;
  best.gain = gain;
  best.left_grad = left.grad;
  best.left_hess = left.hess;
  best.left_count = left.count;
  best.right_grad = gr;
  best.right_hess = hr;
  best.right_count = cr;
  if (cat_prefix != nullptr) {
    best.categorical = true;
    best.bin = -1;
    best.left_bins = *cat_prefix;
    std::sort(best.left_bins.begin(), best.left_bins.end());
  } else {
    best.categorical = false;
    best.bin = numeric_bin;
    best.left_bins.clear();
  }
}

}  // namespace detail

// Maximal-gain split over a node histogram under the second-order objective.
// Numeric features scan bin boundaries left to right. Categorical features
// sort the present categories by grad/hess and scan prefixes of that order,
// which reaches the optimal binary partition for this gain (Fisher's exact
// grouping argument). Equal gains break to the lowest feature index, then the
// lowest bin index / shortest prefix. Returns nullopt when no split has
// strictly positive gain under the constraints.
inline std::optional<SplitCandidate> best_split(
    const NodeHistogram& hist, const std::vector<bool>& categorical_feature,
    const SplitConstraints& limits) {
  SplitCandidate best;
  for (std::size_t f = 0; f < hist.size(); ++f) {
    const FeatureHistogram& h = hist[f];
    if (h.size() < 2) continue;
    detail::SideSums total;
    for (const auto& b : h) {
      total.grad += b.sum_grad;
      total.hess += b.sum_hess;
      total.count += b.count;
    }
    if (total.count < 2) continue;

    if (categorical_feature[f]) {
      std::vector<std::uint8_t> present;
      present.reserve(h.size());
      for (std::size_t b = 0; b < h.size(); ++b) {
        if (h[b].count > 0) present.push_back(static_cast<std::uint8_t>(b));
      }
      if (present.size() < 2) continue;
      std::sort(present.begin(), present.end(),
                [&h](std::uint8_t a, std::uint8_t b) {
                  const double ra = h[a].sum_grad / (h[a].sum_hess + kDenomEpsilon);
                  const double rb = h[b].sum_grad / (h[b].sum_hess + kDenomEpsilon);
                  if (ra != rb) return ra < rb;
                  return a < b;
                });
      detail::SideSums left;
      std::vector<std::uint8_t> prefix;
      prefix.reserve(present.size());
      for (std::size_t j = 0; j + 1 < present.size(); ++j) {
        const HistBin& b = h[present[j]];
        left.grad += b.sum_grad;
        left.hess += b.sum_hess;
        left.count += b.count;
        prefix.push_back(present[j]);
        detail::consider(best, static_cast<int>(f), left, total, limits, -1, &prefix);
      }
    } else {
      detail::SideSums left;
      for (std::size_t b = 0; b + 1 < h.size(); ++b) {
        left.grad += h[b].sum_grad;
        left.hess += h[b].sum_hess;
        left.count += h[b].count;
        if (left.count == 0) continue;
        if (left.count == total.count) break;
        detail::consider(best, static_cast<int>(f), left, total, limits,
                         static_cast<int>(b), nullptr);
      }
    }
  }
  if (best.feature < 0 || !(best.gain > 0.0)) return std::nullopt;
  return best;
}

// Second-order leaf weight with the overdispersion safeguard: the Newton step
// -G/(H+eps) clamped into [-leaf_cap, +leaf_cap].
inline double leaf_value(double sum_grad, double sum_hess, double leaf_cap) {
  const double raw = -sum_grad / (sum_hess + kDenomEpsilon);
  return std::clamp(raw, -leaf_cap, leaf_cap);
}

}  // namespace virality
