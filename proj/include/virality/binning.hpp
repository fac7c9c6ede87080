#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "virality/features.hpp"

namespace virality {

// Per-feature value -> bin mapping. Numeric features get quantile bin edges
// computed once on the training set; when a feature has at most max_bins
// distinct values every value receives its own bin and binning is lossless.
// Categorical features use their integer codes as bins directly.
class BinMapper {
 public:
  static BinMapper numeric(const std::vector<double>& values, int max_bins) {
    if (max_bins < 2 || max_bins > 256) {
      throw std::invalid_argument("BinMapper: max_bins must be in [2, 256]");
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    // distinct runs
    std::vector<double> distinct;
    std::vector<std::size_t> counts;
    for (double v : sorted) {
      if (distinct.empty() || v != distinct.back()) {
        distinct.push_back(v);
        counts.push_back(1);
      } else {
        ++counts.back();
      }
    }
    BinMapper m;
    m.categorical_ = false;
    if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        m.edges_.push_back(edge_between(distinct[i], distinct[i + 1]));
      }
    } else {
      const double per_bin =
          static_cast<double>(values.size()) / static_cast<double>(max_bins);
      std::size_t acc = 0;
      double next_cut = per_bin;
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        acc += counts[i];
        if (static_cast<double>(acc) >= next_cut) {
          m.edges_.push_back(edge_between(distinct[i], distinct[i + 1]));
          next_cut = static_cast<double>(acc) + per_bin;
        }
      }
    }
    m.num_bins_ = static_cast<int>(m.edges_.size()) + 1;
    return m;
  }

  static BinMapper categorical(const std::vector<double>& values, int max_bins) {
    int max_code = 0;
    for (double v : values) {
      if (!(v >= 0.0) || v != std::floor(v)) {
        throw std::invalid_argument("BinMapper: categorical codes must be non-negative integers");
      }
      max_code = std::max(max_code, static_cast<int>(v));
    }
    if (max_code + 1 > max_bins) {
      throw std::invalid_argument("BinMapper: more categories than max_bins");
    }
    BinMapper m;
    m.categorical_ = true;
    m.num_bins_ = max_code + 1;
    return m;
  }

  bool is_categorical() const { return categorical_; }
  int num_bins() const { return num_bins_; }

  std::uint8_t bin(double v) const {
    if (categorical_) {
      const int code = static_cast<int>(v);
      return static_cast<std::uint8_t>(std::clamp(code, 0, num_bins_ - 1));
    }
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), v);
    return static_cast<std::uint8_t>(it - edges_.begin());
  }

  // Threshold stored in the tree for a split after bin b: raw values route
  // left iff value <= upper_edge(b), which is exactly bin(value) <= b.
  double upper_edge(int b) const { return edges_.at(static_cast<std::size_t>(b)); }

 private:
  // Midpoint of two adjacent distinct values; falls back to the left value
  // when the midpoint rounds onto the right one, so `v <= edge` stays
  // consistent with bin membership.
  static double edge_between(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid >= hi) return lo;
    if (mid < lo) return lo;
    return mid;
  }

  bool categorical_ = false;
  int num_bins_ = 1;
  std::vector<double> edges_;
};

// Column-major binned view of a FeatureMatrix, built once per training run.
struct BinnedMatrix {
  std::vector<BinMapper> mappers;             // one per feature
  std::vector<std::vector<std::uint8_t>> bins;  // [feature][row]
  std::size_t n_rows = 0;

  static BinnedMatrix build(const FeatureMatrix& m, int max_bins) {
    BinnedMatrix out;
    out.n_rows = m.n_rows();
    out.mappers.reserve(m.columns.size());
    out.bins.reserve(m.columns.size());
    for (const auto& col : m.columns) {
      for (double v : col.values) {
        if (!std::isfinite(v)) {
          throw std::invalid_argument("non-finite value in feature column " + col.name);
        }
      }
      BinMapper mapper = col.kind == ColumnKind::categorical
                             ? BinMapper::categorical(col.values, max_bins)
                             : BinMapper::numeric(col.values, max_bins);
      std::vector<std::uint8_t> binned(out.n_rows);
      for (std::size_t i = 0; i < out.n_rows; ++i) binned[i] = mapper.bin(col.values[i]);
      out.mappers.push_back(std::move(mapper));
      out.bins.push_back(std::move(binned));
    }
    return out;
  }
};

}  // namespace virality
