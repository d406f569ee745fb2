#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "moeval/error.hpp"
#include "moeval/metrics.hpp"
#include "moeval/rng.hpp"
#include "moeval/scoring.hpp"
#include "moeval/tradeoff.hpp"

namespace moeval {

// Synthetic model population around a known linear trade-off front.
struct PopulationSpec {
  double true_slope = 0.0;
  double true_intercept = 0.0;
  std::size_t n_models = 0;
  double aux_low = 0.0;
  double aux_high = 0.0;
  double noise_scale = 0.0;  // base-metric units, displacement below the front
  std::uint64_t seed = 0;
  std::string base_id = "base";
  std::string aux_id = "aux";
};

// At least 20% of models sit exactly on the front at evenly spaced aux values
// spanning the full range; the rest are displaced strictly below it by
// d in [noise_scale, 2*noise_scale). With noise_scale larger than
// |slope| * range / (n_front - 1) every noisy point is dominated by an
// on-front neighbor, so front extraction isolates the exact subset.
inline std::vector<ModelRecord> generate_population(const PopulationSpec& spec) {
  if (spec.n_models == 0) throw error("generate_population: n_models must be positive");
  if (!(spec.aux_low < spec.aux_high)) throw error("generate_population: empty aux range");
  if (spec.noise_scale < 0.0) throw error("generate_population: negative noise scale");

  const std::size_t n_front = std::max<std::size_t>(2, (spec.n_models + 4) / 5);
  Rng rng(splitmix64(spec.seed));
  std::vector<ModelRecord> out;
  out.reserve(spec.n_models);
  for (std::size_t i = 0; i < spec.n_models; ++i) {
    double aux, displacement;
    if (i < n_front) {
      aux = spec.aux_low +
            (spec.aux_high - spec.aux_low) * static_cast<double>(i) /
                static_cast<double>(n_front - 1);
      displacement = 0.0;
    } else {
      aux = rng.uniform(spec.aux_low, spec.aux_high);
      displacement = spec.noise_scale * (1.0 + rng.uniform());
    }
    const double base = spec.true_slope * aux + spec.true_intercept - displacement;
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%04zu", i + 1);
    out.push_back(make_record(id, {{{spec.base_id, base}, {spec.aux_id, aux}}}));
  }
  return out;
}

struct BacktestRow {
  std::string model_id;
  double w = 0.0;
  double s_p = 0.0;
  double s_o = 0.0;
  std::optional<double> s_p_norm;  // empty when the column is degenerate
  std::optional<double> s_o_norm;
  int rank_p = 0;
  int rank_o = 0;
};

struct BacktestWeightSummary {
  double w = 0.0;
  std::optional<double> spearman;  // empty when either column is constant
  bool s_p_degenerate = false;
  bool s_o_degenerate = false;
};

struct BacktestTable {
  std::vector<BacktestRow> rows;
  std::vector<BacktestWeightSummary> summaries;
};

namespace detail {

// 1-based ranks, average over ties, descending score.
inline std::vector<double> average_ranks(const std::vector<double>& scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline std::optional<double> spearman(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
    sxy += (rx[i] - mx) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

inline std::vector<int> dense_ranks_desc(const std::vector<double>& scores) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < scores.size(); ++i) scored.push_back({scores[i], i});
  std::vector<int> ranks(scores.size());
  assign_dense_ranks(scored, ranks);
  return ranks;
}

}  // namespace detail

// Fits curves once from the records, then for each uniform weight setting
// computes both scores per model, min-max normalized per weight column.
inline BacktestTable backtest(const std::vector<ModelRecord>& records,
                              const std::vector<double>& weight_grid,
                              const LegacyConfig& legacy, const std::string& base_id,
                              const std::vector<std::string>& aux_ids) {
  if (records.empty()) throw error("backtest: no records");
  if (weight_grid.empty()) throw error("backtest: empty weight grid");
  if (aux_ids.empty()) throw error("backtest: no auxiliary metrics");

  std::map<std::string, TradeoffCurve> curves;
  for (const auto& aux_id : aux_ids) {
    std::vector<BaseAuxPoint> data;
    for (const auto& rec : records) {
      auto b = rec.aggregate.find(base_id);
      auto a = rec.aggregate.find(aux_id);
      if (b == rec.aggregate.end() || a == rec.aggregate.end())
        throw error("backtest: record '" + rec.model_id + "' missing metric");
      data.push_back({b->second, a->second});
    }
    curves[aux_id] = fit_tradeoff(data, CurveFamily::Linear, base_id, aux_id);
  }

  BacktestTable table;
  for (double w : weight_grid) {
    WeightConfig weights;
    weights.base_id = base_id;
    for (const auto& aux_id : aux_ids) weights.weights[aux_id] = w;

    std::vector<double> sp_col, so_col;
    for (const auto& rec : records) {
      sp_col.push_back(score_proposed(rec.aggregate, curves, weights).s_p);
      so_col.push_back(score_legacy(rec.aggregate, legacy, base_id).value);
    }
    const auto [sp_min, sp_max] = std::minmax_element(sp_col.begin(), sp_col.end());
    const auto [so_min, so_max] = std::minmax_element(so_col.begin(), so_col.end());
    const bool sp_degen = *sp_min == *sp_max;
    const bool so_degen = *so_min == *so_max;
    const std::vector<int> ranks_p = detail::dense_ranks_desc(sp_col);
    const std::vector<int> ranks_o = detail::dense_ranks_desc(so_col);

    for (std::size_t i = 0; i < records.size(); ++i) {
      BacktestRow row;
      row.model_id = records[i].model_id;
      row.w = w;
      row.s_p = sp_col[i];
      row.s_o = so_col[i];
      if (!sp_degen) row.s_p_norm = (sp_col[i] - *sp_min) / (*sp_max - *sp_min);
      if (!so_degen) row.s_o_norm = (so_col[i] - *so_min) / (*so_max - *so_min);
      row.rank_p = ranks_p[i];
      row.rank_o = ranks_o[i];
      table.rows.push_back(std::move(row));
    }
    table.summaries.push_back({w, detail::spearman(sp_col, so_col), sp_degen, so_degen});
  }
  return table;
}

}  // namespace moeval
