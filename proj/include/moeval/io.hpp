#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "moeval/bncv.hpp"
#include "moeval/error.hpp"
#include "moeval/metrics.hpp"
#include "moeval/rsmetrics.hpp"
#include "moeval/scoring.hpp"
#include "moeval/synth.hpp"
#include "moeval/tradeoff.hpp"

namespace moeval {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Reals are rendered with 9 significant digits everywhere so emitted files
// are stable across platforms.
inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline double round9(double v) { return std::strtod(fmt9(v).c_str(), nullptr); }

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::string body = line;
  if (!body.empty() && body.back() == '\r') body.pop_back();
  std::stringstream ss(body);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!body.empty() && body.back() == ',') out.push_back("");
  return out;
}

inline double parse_real(const std::string& cell, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size())
    throw error(where + ": non-numeric cell '" + cell + "'");
  require_finite(where, v);
  return v;
}

}  // namespace detail

// Metric table CSV: header `model_id,fold,<metric-id>...`; one row per
// (model, fold). An empty fold cell marks a pre-aggregated single row.
inline std::vector<ModelRecord> parse_metric_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw error("metric table: empty input");
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "model_id" || header[1] != "fold")
    throw error("metric table: header must start with model_id,fold and one metric");
  const std::vector<std::string> metric_ids(header.begin() + 2, header.end());

  std::vector<std::string> model_order;
  std::map<std::string, std::map<long long, MetricVector>> folds;  // -1 = empty fold
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    const std::string where = "metric table row " + std::to_string(line_no);
    if (cells.size() != header.size()) throw error(where + ": ragged row");
    const std::string& model_id = cells[0];
    if (model_id.empty()) throw error(where + ": empty model_id");
    long long fold = -1;
    if (!cells[1].empty()) {
      fold = static_cast<long long>(detail::parse_real(cells[1], where));
      if (fold < 0 || std::to_string(fold) != cells[1])
        throw error(where + ": fold must be a nonnegative integer");
    }
    MetricVector v;
    for (std::size_t i = 0; i < metric_ids.size(); ++i)
      v[metric_ids[i]] = detail::parse_real(cells[i + 2], where);
    if (!folds.count(model_id)) model_order.push_back(model_id);
    auto& model_folds = folds[model_id];
    if (model_folds.count(fold))
      throw error(where + ": duplicate (" + model_id + ", " + cells[1] + ")");
    model_folds[fold] = std::move(v);
  }

  std::vector<ModelRecord> out;
  for (const auto& model_id : model_order) {
    const auto& model_folds = folds.at(model_id);
    if (model_folds.count(-1) && model_folds.size() > 1)
      throw error("metric table: model '" + model_id + "' mixes empty and numbered folds");
    std::vector<MetricVector> vectors;
    for (const auto& [fold, v] : model_folds) vectors.push_back(v);
    out.push_back(make_record(model_id, std::move(vectors)));
  }
  return out;
}

// Inverse of parse_metric_table; single-fold records get an empty fold cell.
inline std::string write_metric_table(const std::vector<ModelRecord>& records) {
  if (records.empty()) throw error("write_metric_table: no records");
  std::string out = "model_id,fold";
  for (const auto& [id, v] : records.front().aggregate) out += "," + id;
  out += "\n";
  for (const auto& rec : records) {
    if (rec.aggregate.size() != records.front().aggregate.size())
      throw error("write_metric_table: mismatched key sets");
    for (std::size_t f = 0; f < rec.fold_vectors.size(); ++f) {
      out += rec.model_id + ",";
      if (rec.fold_vectors.size() > 1) out += std::to_string(f);
      for (const auto& [id, v] : rec.fold_vectors[f]) out += "," + fmt9(v);
      out += "\n";
    }
  }
  return out;
}

// Interactions CSV: header `user_id,item_id,artist_id,timestamp` plus
// optional per-user attribute columns prefixed `attr_`.
inline InteractionDataset parse_interactions(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw error("interactions: empty input");
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "user_id" || header[1] != "item_id" ||
      header[2] != "artist_id" || header[3] != "timestamp")
    throw error("interactions: header must be user_id,item_id,artist_id,timestamp[,attr_*]");
  std::vector<std::string> attr_names;
  for (std::size_t i = 4; i < header.size(); ++i) {
    if (header[i].rfind("attr_", 0) != 0)
      throw error("interactions: extra column '" + header[i] + "' must be attr_-prefixed");
    attr_names.push_back(header[i].substr(5));
  }

  InteractionDataset dataset;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    const std::string where = "interactions row " + std::to_string(line_no);
    if (cells.size() != header.size()) throw error(where + ": ragged row");
    Event e;
    e.user_id = cells[0];
    e.item_id = cells[1];
    e.artist_id = cells[2];
    e.timestamp = static_cast<long long>(detail::parse_real(cells[3], where));
    for (std::size_t i = 0; i < attr_names.size(); ++i) {
      const std::string& value = cells[4 + i];
      if (value.empty()) continue;
      auto& attrs = dataset.user_attributes[e.user_id];
      auto it = attrs.find(attr_names[i]);
      if (it != attrs.end() && it->second != value)
        throw error(where + ": conflicting attr_" + attr_names[i] + " for user '" +
                    e.user_id + "'");
      attrs[attr_names[i]] = value;
    }
    dataset.events.push_back(std::move(e));
  }
  // canonical order: (user, timestamp, input order)
  std::stable_sort(dataset.events.begin(), dataset.events.end(),
                   [](const Event& a, const Event& b) {
                     if (a.user_id != b.user_id) return a.user_id < b.user_id;
                     return a.timestamp < b.timestamp;
                   });
  dataset.validate();
  return dataset;
}

struct EmbeddingLoadReport {
  std::size_t n_items = 0;
  std::size_t n_normalized = 0;  // rows re-normalized on load
};

// Embeddings CSV: header `item_id,d0,d1,...`; rows are L2-normalized on load
// when the norm drifts by more than 1e-6.
inline std::pair<ItemEmbeddings, EmbeddingLoadReport> parse_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw error("embeddings: empty input");
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "item_id")
    throw error("embeddings: header must be item_id,d0,d1,...");
  const std::size_t dim = header.size() - 1;

  ItemEmbeddings emb;
  EmbeddingLoadReport report;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    const std::string where = "embeddings row " + std::to_string(line_no);
    if (cells.size() != dim + 1) throw error(where + ": ragged dimensions");
    std::vector<double> v(dim);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      v[i] = detail::parse_real(cells[i + 1], where);
      norm_sq += v[i] * v[i];
    }
    if (norm_sq == 0.0) throw error(where + ": zero vector");
    const double norm = std::sqrt(norm_sq);
    if (std::abs(norm - 1.0) > 1e-6) {
      for (double& x : v) x /= norm;
      ++report.n_normalized;
    }
    emb.vectors[cells[0]] = std::move(v);
    ++report.n_items;
  }
  if (emb.vectors.empty()) throw error("embeddings: no rows");
  return {std::move(emb), report};
}

namespace detail {

inline nlohmann::ordered_json curve_to_json(const TradeoffCurve& curve) {
  nlohmann::ordered_json j;
  j["base_id"] = curve.base_id;
  j["aux_id"] = curve.aux_id;
  j["family"] = "linear";
  j["slope"] = round9(curve.slope);
  j["intercept"] = round9(curve.intercept);
  j["n_front_points"] = curve.n_front_points;
  j["r_squared"] = round9(curve.r_squared);
  j["aux_min"] = round9(curve.aux_min);
  j["aux_max"] = round9(curve.aux_max);
  return j;
}

}  // namespace detail

// Leaderboard document: version, registry, weights, fitted curves and one row
// per model sorted by rank_p. Key order and number rendering are stable so
// identical inputs give byte-identical output.
inline std::string emit_leaderboard(const std::vector<ScoreReport>& reports,
                                    const std::map<std::string, TradeoffCurve>& curves,
                                    const MetricRegistry& registry,
                                    const WeightConfig& weights,
                                    bool include_proposed = true) {
  if (reports.empty()) throw error("emit_leaderboard: no reports");
  nlohmann::ordered_json doc;
  doc["toolkit_version"] = kToolkitVersion;
  doc["registry"] = nlohmann::ordered_json::array();
  for (const auto& spec : registry.specs()) {
    nlohmann::ordered_json j;
    j["id"] = spec.id;
    j["direction"] = spec.direction == Direction::Maximize ? "maximize" : "minimize";
    j["is_base"] = spec.is_base;
    doc["registry"].push_back(j);
  }
  doc["weights"] = nlohmann::ordered_json::object();
  doc["weights"]["base_id"] = weights.base_id;
  doc["weights"]["weights"] = nlohmann::ordered_json::object();
  for (const auto& [id, w] : weights.weights) doc["weights"]["weights"][id] = round9(w);
  doc["curves"] = nlohmann::ordered_json::object();
  for (const auto& [aux_id, curve] : curves) doc["curves"][aux_id] = detail::curve_to_json(curve);
  doc["leaderboard"] = nlohmann::ordered_json::array();
  for (const auto& rep : reports) {
    nlohmann::ordered_json row;
    row["model_id"] = rep.model_id;
    if (include_proposed) {
      row["rank_p"] = rep.rank_p;
      row["s_p"] = round9(rep.s_p);
      row["deltas"] = nlohmann::ordered_json::object();
      for (const auto& [id, d] : rep.deltas) row["deltas"][id] = round9(d);
    }
    if (rep.s_o) {
      row["s_o"] = round9(*rep.s_o);
      row["rank_o"] = *rep.rank_o;
      row["thresholded"] = rep.thresholded;
    }
    doc["leaderboard"].push_back(row);
  }
  return doc.dump(2) + "\n";
}

// Front-extraction report for the `pareto` subcommand.
inline std::string emit_front_report(const std::vector<ModelRecord>& records,
                                     const FrontResult& front) {
  nlohmann::ordered_json doc;
  doc["toolkit_version"] = kToolkitVersion;
  doc["front"] = nlohmann::ordered_json::array();
  for (std::size_t i : front.front_indices) doc["front"].push_back(records[i].model_id);
  doc["dominated"] = nlohmann::ordered_json::object();
  for (const auto& [i, witness] : front.dominated_by)
    doc["dominated"][records[i].model_id] = records[witness].model_id;
  return doc.dump(2) + "\n";
}

inline std::string emit_curve_report(const TradeoffCurve& curve) {
  nlohmann::ordered_json doc;
  doc["toolkit_version"] = kToolkitVersion;
  doc["curve"] = detail::curve_to_json(curve);
  return doc.dump(2) + "\n";
}

inline std::string write_backtest_csv(const BacktestTable& table) {
  std::map<double, const BacktestWeightSummary*> by_w;
  for (const auto& s : table.summaries) by_w[s.w] = &s;
  std::string out = "model_id,w,s_p,s_o,s_p_norm,s_o_norm,rank_p,rank_o,spearman\n";
  for (const auto& row : table.rows) {
    const BacktestWeightSummary& summary = *by_w.at(row.w);
    out += row.model_id + "," + fmt9(row.w) + "," + fmt9(row.s_p) + "," + fmt9(row.s_o) + ",";
    out += (row.s_p_norm ? fmt9(*row.s_p_norm) : "") + std::string(",");
    out += (row.s_o_norm ? fmt9(*row.s_o_norm) : "") + std::string(",");
    out += std::to_string(row.rank_p) + "," + std::to_string(row.rank_o) + ",";
    out += summary.spearman ? fmt9(*summary.spearman) : "";
    out += "\n";
  }
  return out;
}

// Run configuration document (JSON).
struct RunConfig {
  std::vector<MetricSpec> registry_specs;
  WeightConfig weights;
  std::optional<LegacyConfig> legacy;
  std::size_t n_folds = 4;
  std::uint64_t seed = 42;
  std::size_t k_top = 10;

  MetricRegistry registry() const { return MetricRegistry(registry_specs); }
};

inline RunConfig parse_run_config(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw error(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    RunConfig cfg;
    for (const auto& s : j.at("registry")) {
      MetricSpec spec;
      spec.id = s.at("id").get<std::string>();
      const std::string dir = s.at("direction").get<std::string>();
      if (dir == "maximize")
        spec.direction = Direction::Maximize;
      else if (dir == "minimize")
        spec.direction = Direction::Minimize;
      else
        throw error("config: direction must be maximize or minimize");
      spec.is_base = s.value("is_base", false);
      cfg.registry_specs.push_back(std::move(spec));
    }
    const MetricRegistry registry(cfg.registry_specs);
    cfg.weights.base_id = j.at("weights").at("base_id").get<std::string>();
    for (const auto& [id, w] : j.at("weights").at("weights").items())
      cfg.weights.weights[id] = w.get<double>();
    cfg.weights.validate(registry);
    if (j.contains("legacy")) {
      LegacyConfig legacy;
      for (const auto& [id, k] : j.at("legacy").at("category_weights").items())
        legacy.category_weights[id] = k.get<double>();
      for (const auto& [id, v] : j.at("legacy").at("baseline_ref").items())
        legacy.baseline_ref[id] = v.get<double>();
      for (const auto& [id, v] : j.at("legacy").at("best_ref").items())
        legacy.best_ref[id] = v.get<double>();
      legacy.base_threshold = j.at("legacy").value("base_threshold", 0.0);
      legacy.validate();
      cfg.legacy = std::move(legacy);
    }
    if (j.contains("bncv")) {
      cfg.n_folds = j.at("bncv").value("n_folds", cfg.n_folds);
      cfg.seed = j.at("bncv").value("seed", cfg.seed);
      cfg.k_top = j.at("bncv").value("k_top", cfg.k_top);
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw error(std::string("config: ") + e.what());
  }
}

// Whole-file atomic write: temp file in the target directory, then rename.
inline void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw error("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw error("rename failed for '" + path + "'");
}

// Optional output-directory override: when MOEVAL_OUT_DIR is set, relative
// output paths are placed under it. The only environment variable consulted.
inline std::string resolve_output_path(const std::string& path) {
  const char* dir = std::getenv("MOEVAL_OUT_DIR");
  if (dir == nullptr || *dir == '\0' || path.empty() || path.front() == '/') return path;
  std::string base = dir;
  if (base.back() != '/') base += '/';
  return base + path;
}

}  // namespace moeval
