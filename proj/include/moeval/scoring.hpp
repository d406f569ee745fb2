#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "moeval/error.hpp"
#include "moeval/metrics.hpp"
#include "moeval/tradeoff.hpp"

namespace moeval {

// Slope constants reported for the EvalRS 2022 <Hit Rate, MRED user-activity>
// pair. The implied slope of the original normalization scheme was 44.399;
// the regression over the submission front gives -7.944. Kept as reference
// values since the underlying submission data is not bundled.
inline constexpr double kEvalrsImpliedLegacySlope = 44.399;
inline constexpr double kEvalrsFittedSlope = -7.944;

// One leaderboard row.
struct ScoreReport {
  std::string model_id;
  std::map<std::string, double> deltas;  // aux metric id -> delta in base units
  double s_p = 0.0;
  std::optional<double> s_o;
  int rank_p = 0;
  std::optional<int> rank_o;
  bool thresholded = false;
};

// (m - m_base) / (m_best - m_base); no clipping outside [0,1].
inline double normalize_legacy(double m, double m_base, double m_best) {
  if (!std::isfinite(m) || !std::isfinite(m_base) || !std::isfinite(m_best))
    throw error("normalize_legacy: non-finite input");
  if (m_best == m_base) throw error("normalize_legacy: best equals baseline");
  return (m - m_base) / (m_best - m_base);
}

struct LegacyScore {
  double value = 0.0;
  bool thresholded = false;
};

// Weighted mean of normalized metrics, zeroed below the base-metric threshold.
inline LegacyScore score_legacy(const MetricVector& v, const LegacyConfig& cfg,
                                const std::string& base_id) {
  cfg.validate();
  auto base_it = v.find(base_id);
  if (base_it == v.end()) throw error("score_legacy: missing base metric '" + base_id + "'");
  if (base_it->second < cfg.base_threshold) return {0.0, true};

  double score = 0.0;
  for (const auto& [id, k] : cfg.category_weights) {
    auto it = v.find(id);
    if (it == v.end()) throw error("score_legacy: missing metric '" + id + "'");
    score += k * normalize_legacy(it->second, cfg.baseline_ref.at(id), cfg.best_ref.at(id));
  }
  return {score, false};
}

// Performance differential: (1-w)*base - w*EV(aux). Negative means the model
// underperforms the learned front at importance w.
inline double delta(double base_value, double aux_value, const TradeoffCurve& curve,
                    double w) {
  if (!(w > 0.0 && w < 1.0)) throw error("delta: w must lie in (0,1)");
  if (!std::isfinite(base_value) || !std::isfinite(aux_value))
    throw error("delta: non-finite input");
  return (1.0 - w) * base_value - w * ev(curve, aux_value);
}

struct ProposedScore {
  std::map<std::string, double> deltas;
  double s_p = 0.0;
};

// S_p: sum of per-auxiliary-metric differentials, all in base-metric units.
inline ProposedScore score_proposed(const MetricVector& v,
                                    const std::map<std::string, TradeoffCurve>& curves,
                                    const WeightConfig& weights) {
  auto base_it = v.find(weights.base_id);
  if (base_it == v.end())
    throw error("score_proposed: missing base metric '" + weights.base_id + "'");
  ProposedScore out;
  for (const auto& [aux_id, w] : weights.weights) {
    auto curve_it = curves.find(aux_id);
    if (curve_it == curves.end())
      throw error("score_proposed: missing curve for '" + aux_id + "'");
    auto aux_it = v.find(aux_id);
    if (aux_it == v.end()) throw error("score_proposed: missing metric '" + aux_id + "'");
    const double d = delta(base_it->second, aux_it->second, curve_it->second, w);
    out.deltas[aux_id] = d;
    out.s_p += d;
  }
  return out;
}

namespace detail {

// Dense ranks over descending score; exact ties share a rank.
inline void assign_dense_ranks(std::vector<std::pair<double, std::size_t>>& scored,
                               std::vector<int>& ranks) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  int rank = 0;
  double prev = 0.0;
  bool first = true;
  for (const auto& [score, idx] : scored) {
    if (first || score != prev) {
      ++rank;
      prev = score;
      first = false;
    }
    ranks[idx] = rank;
  }
}

}  // namespace detail

// Scores every record's aggregate vector and returns reports sorted by s_p
// descending; display ties broken by model id.
inline std::vector<ScoreReport> rank_models(const std::vector<ModelRecord>& records,
                                            const std::map<std::string, TradeoffCurve>& curves,
                                            const WeightConfig& weights,
                                            const std::optional<LegacyConfig>& legacy = {}) {
  if (records.empty()) throw error("rank_models: no records");
  std::vector<ScoreReport> reports;
  reports.reserve(records.size());
  for (const auto& rec : records) {
    ScoreReport rep;
    rep.model_id = rec.model_id;
    ProposedScore ps = score_proposed(rec.aggregate, curves, weights);
    rep.deltas = std::move(ps.deltas);
    rep.s_p = ps.s_p;
    if (legacy) {
      LegacyScore ls = score_legacy(rec.aggregate, *legacy, weights.base_id);
      rep.s_o = ls.value;
      rep.thresholded = ls.thresholded;
    }
    reports.push_back(std::move(rep));
  }

  std::vector<std::pair<double, std::size_t>> by_sp;
  for (std::size_t i = 0; i < reports.size(); ++i) by_sp.push_back({reports[i].s_p, i});
  std::vector<int> ranks_p(reports.size());
  detail::assign_dense_ranks(by_sp, ranks_p);
  for (std::size_t i = 0; i < reports.size(); ++i) reports[i].rank_p = ranks_p[i];

  if (legacy) {
    std::vector<std::pair<double, std::size_t>> by_so;
    for (std::size_t i = 0; i < reports.size(); ++i) by_so.push_back({*reports[i].s_o, i});
    std::vector<int> ranks_o(reports.size());
    detail::assign_dense_ranks(by_so, ranks_o);
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].rank_o = ranks_o[i];
  }

  std::sort(reports.begin(), reports.end(), [](const ScoreReport& a, const ScoreReport& b) {
    if (a.s_p != b.s_p) return a.s_p > b.s_p;
    return a.model_id < b.model_id;
  });
  return reports;
}

// Slope the two-point legacy normalization implicitly assumes between the
// best model <h1, mr1> and the baseline <h2, mr2>.
inline double implied_legacy_slope(double h1, double h2, double mr1, double mr2) {
  if (mr1 == mr2) throw error("implied_legacy_slope: equal aux reference values");
  return (h1 - h2) / (mr1 - mr2);
}

// Effective importance w/(1-w) the legacy scheme gave the auxiliary metric,
// relative to the base metric, compared against the fitted slope.
// k_ratio is k_aux / k_base of the legacy weighted mean.
inline double implied_importance_ratio(double c1_legacy, double c1_fitted, double k_ratio) {
  if (c1_fitted == 0.0) throw error("implied_importance_ratio: zero fitted slope");
  if (k_ratio <= 0.0) throw error("implied_importance_ratio: k_ratio must be positive");
  return -k_ratio * c1_legacy / c1_fitted;
}

}  // namespace moeval
