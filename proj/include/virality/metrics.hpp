#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

namespace virality {

// Fractional (average) ranks, 1-based: tied values receive the mean of the
// rank positions they span.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

struct SpearmanResult {
  double rho = 0.0;
  double p_value = 1.0;
  bool defined = false;  // false when either vector is constant
};

namespace detail {

inline double pearson_of(const std::vector<double>& x, const std::vector<double>& y,
                         bool& degenerate) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    degenerate = true;
    return 0.0;
  }
  degenerate = false;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Two-sided p from the t approximation t = rho sqrt((n-2)/(1-rho^2)).
inline double spearman_p_value(double rho, std::size_t n) {
  const double dof = static_cast<double>(n - 2);
  const double denom = (1.0 - rho) * (1.0 + rho);
  if (denom <= 0.0) return 0.0;
  const double t = rho * std::sqrt(dof / denom);
  const boost::math::students_t_distribution<double> dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

}  // namespace detail

// Tie-aware Spearman rank correlation: Pearson correlation of average ranks.
inline SpearmanResult spearman(const std::vector<double>& pred,
                               const std::vector<double>& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("spearman: length mismatch");
  }
  if (pred.size() < 3) throw std::invalid_argument("spearman: need at least 3 samples");
  const std::vector<double> rp = average_ranks(pred);
  const std::vector<double> rt = average_ranks(truth);
  SpearmanResult out;
  bool degenerate = false;
  out.rho = detail::pearson_of(rp, rt, degenerate);
  if (degenerate) {
    out.defined = false;
    out.rho = 0.0;
    out.p_value = 1.0;
    return out;
  }
  out.defined = true;
  out.p_value = detail::spearman_p_value(out.rho, pred.size());
  return out;
}

struct FitMetrics {
  double r_squared = 0.0;
  double rmse = 0.0;
  bool r2_defined = false;  // false when truth is constant
};

// R^2 and RMSE between the predicted raw score and the (log-scale) target.
inline FitMetrics fit_metrics(const std::vector<double>& pred,
                              const std::vector<double>& truth) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("fit_metrics: length mismatch");
  }
  const std::size_t n = pred.size();
  if (n < 2) throw std::invalid_argument("fit_metrics: need at least 2 samples");
  const double mean_truth =
      std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = pred[i] - truth[i];
    ss_res += e * e;
    const double d = truth[i] - mean_truth;
    ss_tot += d * d;
  }
  FitMetrics out;
  out.rmse = std::sqrt(ss_res / static_cast<double>(n));
  if (ss_tot == 0.0) {
    out.r2_defined = false;
    out.r_squared = 0.0;
  } else {
    out.r2_defined = true;
    out.r_squared = 1.0 - ss_res / ss_tot;
  }
  return out;
}

struct MapeResult {
  double value = 0.0;
  std::size_t n_used = 0;
  bool defined = false;  // false when no row has truth > 0
};

// Mean absolute percentage error restricted to rows with truth > 0 (it is
// undefined elsewhere).
inline MapeResult mape(const std::vector<double>& pred,
                       const std::vector<double>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("mape: length mismatch");
  MapeResult out;
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] > 0.0) {
      sum += std::fabs(pred[i] - truth[i]) / truth[i];
      ++out.n_used;
    }
  }
  if (out.n_used > 0) {
    out.defined = true;
    out.value = sum / static_cast<double>(out.n_used);
  }
  return out;
}

// Metric bundle for one evaluation run. `low_confidence` is set when the
// Spearman p-value misses the p < 0.001 reporting bar.
struct EvaluationReport {
  std::string feature_subset;
  double spearman_r = 0.0;
  double spearman_p = 1.0;
  bool spearman_defined = false;
  double r_squared = 0.0;
  bool r2_defined = false;
  double rmse = 0.0;
  double mape_value = 0.0;
  bool mape_defined = false;
  std::size_t n_total = 0;
  std::size_t n_mape = 0;
  bool low_confidence = true;
};

// Ranking uses the raw score (rank-identical to the rate); the fit and
// percentage errors compare the predicted rate exp(F) against the log-scale
// target, which is the quantity the Poisson leaf estimates.
inline EvaluationReport evaluate_predictions(const std::vector<double>& pred_raw,
                                             const std::vector<double>& truth,
                                             std::string feature_subset) {
  EvaluationReport r;
  r.feature_subset = std::move(feature_subset);
  r.n_total = truth.size();
  const SpearmanResult s = spearman(pred_raw, truth);
  r.spearman_r = s.rho;
  r.spearman_p = s.p_value;
  r.spearman_defined = s.defined;
  std::vector<double> rate(pred_raw.size());
  for (std::size_t i = 0; i < pred_raw.size(); ++i) rate[i] = std::exp(pred_raw[i]);
  const FitMetrics f = fit_metrics(rate, truth);
  r.r_squared = f.r_squared;
  r.r2_defined = f.r2_defined;
  r.rmse = f.rmse;
  const MapeResult m = mape(rate, truth);
  r.mape_value = m.value;
  r.mape_defined = m.defined;
  r.n_mape = m.n_used;
  r.low_confidence = !(s.defined && s.p_value < 0.001);
  return r;
}

inline nlohmann::ordered_json evaluation_report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["feature_subset"] = r.feature_subset;
  j["spearman_r"] = r.spearman_r;
  j["spearman_p"] = r.spearman_p;
  j["spearman_defined"] = r.spearman_defined;
  j["r_squared"] = r.r_squared;
  j["r2_defined"] = r.r2_defined;
  j["rmse"] = r.rmse;
  j["mape"] = r.mape_value;
  j["mape_defined"] = r.mape_defined;
  j["n_total"] = r.n_total;
  j["n_mape"] = r.n_mape;
  j["low_confidence"] = r.low_confidence;
  return j;
}

inline EvaluationReport evaluation_report_from_json(const nlohmann::json& j) {
  EvaluationReport r;
  r.feature_subset = j.at("feature_subset").get<std::string>();
  r.spearman_r = j.at("spearman_r").get<double>();
  r.spearman_p = j.at("spearman_p").get<double>();
  r.spearman_defined = j.at("spearman_defined").get<bool>();
  r.r_squared = j.at("r_squared").get<double>();
  r.r2_defined = j.at("r2_defined").get<bool>();
  r.rmse = j.at("rmse").get<double>();
  r.mape_value = j.at("mape").get<double>();
  r.mape_defined = j.at("mape_defined").get<bool>();
  r.n_total = j.at("n_total").get<std::size_t>();
  r.n_mape = j.at("n_mape").get<std::size_t>();
  r.low_confidence = j.at("low_confidence").get<bool>();
  return r;
}

}  // namespace virality
