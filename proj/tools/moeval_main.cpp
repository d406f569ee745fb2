// moeval command line: multi-objective leaderboard scoring, trade-off curve
// fitting, recommendation metric evaluation and synthetic populations.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "moeval/bncv.hpp"
#include "moeval/io.hpp"
#include "moeval/metrics.hpp"
#include "moeval/pareto.hpp"
#include "moeval/rsmetrics.hpp"
#include "moeval/scoring.hpp"
#include "moeval/synth.hpp"
#include "moeval/tradeoff.hpp"

namespace {

using namespace moeval;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open '" + path + "'");
  return in;
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  atomic_write_file(resolve_output_path(path), content);
}

std::vector<ModelRecord> load_metric_table(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_metric_table(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_run_config(in);
}

// Re-orient all fold vectors and aggregates so higher is better everywhere.
std::vector<ModelRecord> canonicalize_records(const std::vector<ModelRecord>& records,
                                              const MetricRegistry& registry) {
  std::vector<ModelRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    std::vector<MetricVector> folds;
    for (const auto& fv : rec.fold_vectors) folds.push_back(canonicalize(fv, registry));
    out.push_back(make_record(rec.model_id, std::move(folds)));
  }
  return out;
}

std::map<std::string, TradeoffCurve> fit_curves(const std::vector<ModelRecord>& records,
                                                const std::string& base_id,
                                                const std::vector<std::string>& aux_ids) {
  std::map<std::string, TradeoffCurve> curves;
  for (const auto& aux_id : aux_ids) {
    std::vector<BaseAuxPoint> data;
    for (const auto& rec : records) {
      auto b = rec.aggregate.find(base_id);
      auto a = rec.aggregate.find(aux_id);
      if (b == rec.aggregate.end() || a == rec.aggregate.end())
        throw error("record '" + rec.model_id + "' missing metric for curve fit");
      data.push_back({b->second, a->second});
    }
    curves[aux_id] = fit_tradeoff(data, CurveFamily::Linear, base_id, aux_id);
  }
  return curves;
}

int cmd_pareto(const std::string& input, const std::string& output,
               const std::string& config_path) {
  const std::vector<ModelRecord> records = load_metric_table(input);
  std::vector<MetricSpec> specs;
  if (!config_path.empty()) {
    specs = load_config(config_path).registry_specs;
  } else {
    // no config: every column treated as maximize
    bool first = true;
    for (const auto& [id, v] : records.front().aggregate) {
      specs.push_back({id, Direction::Maximize, first});
      first = false;
    }
  }
  const MetricRegistry registry{specs};
  std::vector<MetricVector> points;
  for (const auto& rec : records) points.push_back(rec.aggregate);
  const FrontResult front = pareto_front(points, registry);
  write_output(output, emit_front_report(records, front));
  return 0;
}

int cmd_fit(const std::string& input, const std::string& base_id, const std::string& aux_id,
            const std::string& output) {
  const std::vector<ModelRecord> records = load_metric_table(input);
  const TradeoffCurve curve = fit_curves(records, base_id, {aux_id}).at(aux_id);
  write_output(output, emit_curve_report(curve));
  return 0;
}

int cmd_score(const std::string& input, const std::string& config_path,
              const std::string& method, const std::string& output) {
  const RunConfig cfg = load_config(config_path);
  const MetricRegistry registry = cfg.registry();
  const std::vector<ModelRecord> records =
      canonicalize_records(load_metric_table(input), registry);

  std::optional<LegacyConfig> legacy;
  if (method == "legacy" || method == "both") {
    if (!cfg.legacy) throw error("score: method '" + method + "' needs a legacy config");
    LegacyConfig lc = *cfg.legacy;
    lc.baseline_ref = canonicalize(lc.baseline_ref, registry);
    lc.best_ref = canonicalize(lc.best_ref, registry);
    legacy = std::move(lc);
  }

  if (method == "legacy") {
    std::vector<ScoreReport> reports;
    std::vector<std::pair<double, std::size_t>> scored;
    for (const auto& rec : records) {
      const LegacyScore ls = score_legacy(rec.aggregate, *legacy, registry.base_id());
      ScoreReport rep;
      rep.model_id = rec.model_id;
      rep.s_o = ls.value;
      rep.thresholded = ls.thresholded;
      scored.push_back({ls.value, reports.size()});
      reports.push_back(std::move(rep));
    }
    std::vector<int> ranks(reports.size());
    moeval::detail::assign_dense_ranks(scored, ranks);
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].rank_o = ranks[i];
    std::sort(reports.begin(), reports.end(), [](const ScoreReport& a, const ScoreReport& b) {
      if (*a.s_o != *b.s_o) return *a.s_o > *b.s_o;
      return a.model_id < b.model_id;
    });
    write_output(output, emit_leaderboard(reports, {}, registry, cfg.weights, false));
    return 0;
  }

  const std::map<std::string, TradeoffCurve> curves =
      fit_curves(records, registry.base_id(), registry.aux_ids());
  const std::vector<ScoreReport> reports = rank_models(records, curves, cfg.weights, legacy);
  write_output(output, emit_leaderboard(reports, curves, registry, cfg.weights));
  return 0;
}

int cmd_evaluate(const std::string& dataset_path, const std::string& embeddings_path,
                 const std::string& algo_name, std::size_t n_folds, std::uint64_t seed,
                 std::size_t k_top, const std::string& output) {
  std::ifstream in = open_input(dataset_path);
  const InteractionDataset dataset = parse_interactions(in);

  std::optional<ItemEmbeddings> emb;
  if (!embeddings_path.empty()) {
    std::ifstream ein = open_input(embeddings_path);
    emb = parse_embeddings(ein).first;
  }

  std::map<std::string, std::string> item_to_artist;
  for (const auto& e : dataset.events) item_to_artist.emplace(e.item_id, e.artist_id);

  std::vector<MetricComputation> suite;
  suite.push_back({"hit_rate", [](const RecommendationRun& run, const BootstrapSplit&) {
                     return hit_rate(run);
                   }});
  suite.push_back({"miss_rate", [](const RecommendationRun& run, const BootstrapSplit&) {
                     return miss_rate(run);
                   }});
  suite.push_back({"mrr", [](const RecommendationRun& run, const BootstrapSplit&) {
                     return mrr(run);
                   }});

  std::set<std::string> attr_names;
  for (const auto& [user, attrs] : dataset.user_attributes)
    for (const auto& [name, value] : attrs) attr_names.insert(name);
  for (const auto& name : attr_names) {
    suite.push_back({"mred_" + name,
                     [&dataset, name](const RecommendationRun& run, const BootstrapSplit&) {
                       GroupPartition partition;
                       partition.criterion = name;
                       for (const auto& [user, attrs] : dataset.user_attributes) {
                         auto it = attrs.find(name);
                         if (it != attrs.end()) partition.assignment[user] = it->second;
                       }
                       return mred(run, partition);
                     }});
  }

  suite.push_back({"variance_agreement",
                   [&item_to_artist](const RecommendationRun& run, const BootstrapSplit& split) {
                     std::map<std::string, std::vector<std::string>> histories;
                     for (const auto& e : split.train_events)
                       histories[e.user_id].push_back(e.item_id);
                     return variance_agreement(run, item_to_artist, histories);
                   }});

  if (emb) {
    suite.push_back({"less_wrong", [&emb](const RecommendationRun& run, const BootstrapSplit&) {
                       return being_less_wrong(run, *emb).value;
                     }});
    if (k_top >= 2)
      suite.push_back({"diversity", [&emb](const RecommendationRun& run, const BootstrapSplit&) {
                         return intra_list_diversity(run, *emb);
                       }});
  }

  std::unique_ptr<LearningAlgorithm> algo;
  if (algo_name == "popularity")
    algo = popularity_baseline();
  else if (algo_name == "random")
    algo = random_baseline(seed);
  else
    throw error("evaluate: unknown algorithm '" + algo_name + "'");

  const ModelRecord record = run_bncv(*algo, dataset, n_folds, seed, suite, k_top, algo_name);
  write_output(output, write_metric_table({record}));
  return 0;
}

int cmd_simulate(double slope, double intercept, std::size_t n, double noise,
                 std::uint64_t seed, const std::string& aux_range, const std::string& base_id,
                 const std::string& aux_id, const std::string& output) {
  PopulationSpec spec;
  spec.true_slope = slope;
  spec.true_intercept = intercept;
  spec.n_models = n;
  spec.noise_scale = noise;
  spec.seed = seed;
  spec.base_id = base_id;
  spec.aux_id = aux_id;
  const auto comma = aux_range.find(',');
  if (comma == std::string::npos) throw error("simulate: --aux-range must be lo,hi");
  spec.aux_low = moeval::detail::parse_real(aux_range.substr(0, comma), "aux-range");
  spec.aux_high = moeval::detail::parse_real(aux_range.substr(comma + 1), "aux-range");
  write_output(output, write_metric_table(generate_population(spec)));
  return 0;
}

int cmd_backtest(const std::string& input, const std::string& config_path,
                 const std::string& weights_list, const std::string& output) {
  const RunConfig cfg = load_config(config_path);
  if (!cfg.legacy) throw error("backtest: config needs a legacy section");
  const MetricRegistry registry = cfg.registry();
  const std::vector<ModelRecord> records =
      canonicalize_records(load_metric_table(input), registry);
  LegacyConfig legacy = *cfg.legacy;
  legacy.baseline_ref = canonicalize(legacy.baseline_ref, registry);
  legacy.best_ref = canonicalize(legacy.best_ref, registry);

  std::vector<double> grid;
  if (weights_list.empty()) {
    grid = {0.3, 0.4, 0.5, 0.55};
  } else {
    std::stringstream ss(weights_list);
    std::string cell;
    while (std::getline(ss, cell, ',')) grid.push_back(moeval::detail::parse_real(cell, "weights"));
  }
  const BacktestTable table = backtest(records, grid, legacy, registry.base_id(), registry.aux_ids());
  write_output(output, write_backtest_csv(table));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moeval: multi-objective model evaluation toolkit"};
  app.require_subcommand(1);

  std::string input, output = "-", config_path, base_id = "base", aux_id = "aux";
  std::string dataset_path, embeddings_path, algo = "popularity", method = "both";
  std::string aux_range = "0,1", weights_list;
  std::size_t n_folds = 4, k_top = 10, n_models = 100;
  std::uint64_t seed = 42;
  double slope = -1.0, intercept = 1.0, noise = 0.0;

  CLI::App* pareto_cmd = app.add_subcommand("pareto", "Extract the non-dominated front");
  pareto_cmd->add_option("--input", input, "metric table CSV")->required();
  pareto_cmd->add_option("--output", output, "report path or -");
  pareto_cmd->add_option("--config", config_path, "run config with metric directions");

  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the optimal trade-off curve");
  fit_cmd->add_option("--input", input, "metric table CSV")->required();
  fit_cmd->add_option("--base", base_id, "base metric id")->required();
  fit_cmd->add_option("--aux", aux_id, "auxiliary metric id")->required();
  fit_cmd->add_option("--output", output, "report path or -");

  CLI::App* score_cmd = app.add_subcommand("score", "Score and rank models");
  score_cmd->add_option("--input", input, "metric table CSV")->required();
  score_cmd->add_option("--config", config_path, "run config JSON")->required();
  score_cmd->add_option("--method", method, "proposed|legacy|both")
      ->check(CLI::IsMember({"proposed", "legacy", "both"}));
  score_cmd->add_option("--output", output, "leaderboard path or -");

  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Bootstrapped cross-validated evaluation");
  eval_cmd->add_option("--dataset", dataset_path, "interactions CSV")->required();
  eval_cmd->add_option("--embeddings", embeddings_path, "item embeddings CSV");
  eval_cmd->add_option("--algo", algo, "popularity|random")
      ->check(CLI::IsMember({"popularity", "random"}));
  eval_cmd->add_option("--folds", n_folds, "bootstrap folds");
  eval_cmd->add_option("--seed", seed, "random seed");
  eval_cmd->add_option("--k", k_top, "recommendations per user");
  eval_cmd->add_option("--output", output, "metric table path or -");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic model population");
  sim_cmd->add_option("--slope", slope, "true front slope");
  sim_cmd->add_option("--intercept", intercept, "true front intercept");
  sim_cmd->add_option("--n", n_models, "population size");
  sim_cmd->add_option("--noise", noise, "one-sided displacement scale");
  sim_cmd->add_option("--seed", seed, "random seed");
  sim_cmd->add_option("--aux-range", aux_range, "aux value range lo,hi");
  sim_cmd->add_option("--base-id", base_id, "base metric column name");
  sim_cmd->add_option("--aux-id", aux_id, "aux metric column name");
  sim_cmd->add_option("--output", output, "metric table path or -");

  CLI::App* back_cmd = app.add_subcommand("backtest", "Compare scores across weight settings");
  back_cmd->add_option("--input", input, "metric table CSV")->required();
  back_cmd->add_option("--config", config_path, "run config JSON with legacy section")->required();
  back_cmd->add_option("--weights", weights_list, "comma-separated uniform weight grid");
  back_cmd->add_option("--output", output, "CSV path or -");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (pareto_cmd->parsed()) return cmd_pareto(input, output, config_path);
    if (fit_cmd->parsed()) return cmd_fit(input, base_id, aux_id, output);
    if (score_cmd->parsed()) return cmd_score(input, config_path, method, output);
    if (eval_cmd->parsed())
      return cmd_evaluate(dataset_path, embeddings_path, algo, n_folds, seed, k_top, output);
    if (sim_cmd->parsed())
      return cmd_simulate(slope, intercept, n_models, noise, seed, aux_range, base_id, aux_id,
                          output);
    if (back_cmd->parsed()) return cmd_backtest(input, config_path, weights_list, output);
  } catch (const moeval::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
