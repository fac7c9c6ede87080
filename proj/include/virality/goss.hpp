#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "virality/rng.hpp"

namespace virality {

struct GossSample {
  std::vector<std::uint32_t> rows;  // ascending
  std::vector<double> weights;      // parallel to rows
  bool fell_back = false;           // true when the full dataset was used
};

// Gradient-based one-side sampling: keep the top_rate fraction of rows by
// |gradient|, uniformly sample an other_rate fraction of the remainder, and
// reweight the sampled remainder by (1 - top_rate) / other_rate so histogram
// sums stay unbiased. Falls back to the full dataset with unit weights when
// the fractions do not yield at least one row each.
inline GossSample goss_sample(const std::vector<double>& gradients, double top_rate,
                              double other_rate, std::uint64_t seed) {
  if (!(top_rate > 0.0) || !(other_rate > 0.0) || top_rate + other_rate > 1.0) {
    throw std::invalid_argument("goss_sample: need 0 < a, 0 < b, a + b <= 1");
  }
  const std::size_t n = gradients.size();
  GossSample out;
  // fractions are of the full row count; the sample is drawn from the rest
  const auto top_n = static_cast<std::size_t>(std::llround(top_rate * static_cast<double>(n)));
  auto rest_n = static_cast<std::size_t>(std::llround(other_rate * static_cast<double>(n)));
  if (top_n < n) rest_n = std::min(rest_n, n - top_n);
  if (top_n < 1 || rest_n < 1 || top_n >= n) {
    out.fell_back = true;
    out.rows.resize(n);
    std::iota(out.rows.begin(), out.rows.end(), 0);
    out.weights.assign(n, 1.0);
    return out;
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&gradients](std::uint32_t a, std::uint32_t b) {
    const double ga = std::fabs(gradients[a]);
    const double gb = std::fabs(gradients[b]);
    if (ga != gb) return ga > gb;
    return a < b;
  });

  std::vector<std::uint32_t> rest(order.begin() + static_cast<std::ptrdiff_t>(top_n),
                                  order.end());
  Rng rng(seed);
  // partial Fisher-Yates: the first rest_n entries become the sample
  for (std::size_t i = 0; i < rest_n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(rest.size() - i));
    std::swap(rest[i], rest[j]);
  }

  const double rest_weight = (1.0 - top_rate) / other_rate;
  std::vector<std::pair<std::uint32_t, double>> picked;
  picked.reserve(top_n + rest_n);
  for (std::size_t i = 0; i < top_n; ++i) picked.emplace_back(order[i], 1.0);
  for (std::size_t i = 0; i < rest_n; ++i) picked.emplace_back(rest[i], rest_weight);
  std::sort(picked.begin(), picked.end());

  out.rows.reserve(picked.size());
  out.weights.reserve(picked.size());
  for (const auto& [row, w] : picked) {
    out.rows.push_back(row);
    out.weights.push_back(w);
  }
  return out;
}

}  // namespace virality
