#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "moeval/pareto.hpp"
#include "moeval/synth.hpp"
#include "moeval/tradeoff.hpp"

using namespace moeval;

namespace {

PopulationSpec basic_spec(double noise) {
  PopulationSpec spec;
  spec.true_slope = -2.0;
  spec.true_intercept = 1.0;
  spec.n_models = 100;
  spec.aux_low = 0.0;
  spec.aux_high = 0.2;
  spec.noise_scale = noise;
  spec.seed = 314;
  return spec;
}

std::vector<BaseAuxPoint> to_points(const std::vector<ModelRecord>& records) {
  std::vector<BaseAuxPoint> out;
  for (const auto& rec : records)
    out.push_back({rec.aggregate.at("base"), rec.aggregate.at("aux")});
  return out;
}

}  // namespace

TEST_CASE("noiseless population lies on the front and refits exactly") {
  const std::vector<ModelRecord> pop = generate_population(basic_spec(0.0));
  REQUIRE(pop.size() == 100);
  CHECK(pop.front().model_id == "synth-0001");

  const std::vector<BaseAuxPoint> pts = to_points(pop);
  for (const auto& [base, aux] : pts)
    CHECK(base == Catch::Approx(-2.0 * aux + 1.0).margin(1e-12));
  CHECK(pareto_front_2d(pts).size() == pts.size());

  const TradeoffCurve c = fit_tradeoff(pts);
  CHECK(std::abs(c.slope - (-2.0)) < 1e-9);
  CHECK(std::abs(c.intercept - 1.0) < 1e-9);
}

TEST_CASE("noisy population keeps the designated subset as the exact front") {
  // noise 0.05 > |slope| * spacing of the 20 on-front points (2 * 0.2/19)
  const std::vector<ModelRecord> pop = generate_population(basic_spec(0.05));
  const std::vector<BaseAuxPoint> pts = to_points(pop);

  std::size_t on_front = 0;
  for (const auto& [base, aux] : pts) {
    const double front_value = -2.0 * aux + 1.0;
    CHECK(base <= front_value + 1e-12);  // noise is one-sided, below the front
    if (base == front_value) ++on_front;
  }
  CHECK(on_front >= pop.size() / 5);

  const std::vector<BaseAuxPoint> front = pareto_front_2d(pts);
  CHECK(front.size() == on_front);  // noisy points all dominated

  const TradeoffCurve c = fit_tradeoff(pts);
  CHECK(std::abs(c.slope - (-2.0)) < 1e-9);
  CHECK(std::abs(c.intercept - 1.0) < 1e-9);
}

TEST_CASE("generation is deterministic per seed") {
  const auto a = generate_population(basic_spec(0.03));
  const auto b = generate_population(basic_spec(0.03));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].model_id == b[i].model_id);
    CHECK(a[i].aggregate == b[i].aggregate);
  }
  PopulationSpec other = basic_spec(0.03);
  other.seed = 315;
  CHECK(generate_population(other)[50].aggregate != a[50].aggregate);
}

TEST_CASE("generate_population input validation") {
  PopulationSpec spec = basic_spec(0.0);
  spec.n_models = 0;
  CHECK_THROWS_AS(generate_population(spec), error);
  spec = basic_spec(0.0);
  spec.aux_low = spec.aux_high;
  CHECK_THROWS_AS(generate_population(spec), error);
  spec = basic_spec(-0.1);
  CHECK_THROWS_AS(generate_population(spec), error);
}

TEST_CASE("backtest emits one row per model per weight") {
  const std::vector<ModelRecord> pop = generate_population(basic_spec(0.05));
  LegacyConfig legacy;
  legacy.category_weights = {{"base", 0.5}, {"aux", 0.5}};
  legacy.baseline_ref = {{"base", 0.0}, {"aux", 0.0}};
  legacy.best_ref = {{"base", 1.0}, {"aux", 0.2}};

  const std::vector<double> grid = {0.3, 0.5};
  const BacktestTable table = backtest(pop, grid, legacy, "base", {"aux"});
  CHECK(table.rows.size() == pop.size() * grid.size());
  CHECK(table.summaries.size() == grid.size());
  for (const auto& s : table.summaries) {
    CHECK_FALSE(s.s_p_degenerate);
    CHECK(s.spearman.has_value());
  }
}

TEST_CASE("all-on-front population at w = 0.5 degenerates the s_p column") {
  const std::vector<ModelRecord> pop = generate_population(basic_spec(0.0));
  LegacyConfig legacy;
  legacy.category_weights = {{"base", 0.5}, {"aux", 0.5}};
  legacy.baseline_ref = {{"base", 0.0}, {"aux", 0.0}};
  legacy.best_ref = {{"base", 1.0}, {"aux", 0.2}};

  const BacktestTable table = backtest(pop, {0.5}, legacy, "base", {"aux"});
  // parity: every model sits on the fitted curve (tolerate fp rounding in the
  // degeneracy flag by inspecting the spread directly)
  double lo = table.rows.front().s_p, hi = lo;
  for (const auto& row : table.rows) {
    lo = std::min(lo, row.s_p);
    hi = std::max(hi, row.s_p);
  }
  CHECK(hi - lo < 1e-9);
}

TEST_CASE("an all-thresholded legacy column is flagged degenerate") {
  const std::vector<ModelRecord> records = {
      make_record("a", {{{"base", 0.8}, {"aux", 0.1}}}),
      make_record("b", {{{"base", 0.4}, {"aux", 0.3}}})};
  LegacyConfig legacy;
  legacy.category_weights = {{"base", 1.0}};
  legacy.baseline_ref = {{"base", 0.0}};
  legacy.best_ref = {{"base", 1.0}};
  legacy.base_threshold = 0.9;  // zeroes every model

  const BacktestTable table = backtest(records, {0.3}, legacy, "base", {"aux"});
  REQUIRE(table.summaries.size() == 1);
  CHECK(table.summaries[0].s_o_degenerate);
  CHECK_FALSE(table.summaries[0].spearman.has_value());
  for (const auto& row : table.rows) {
    CHECK(row.s_o == 0.0);
    CHECK_FALSE(row.s_o_norm.has_value());
  }
}

TEST_CASE("spearman is 1 when legacy is an affine image of proposed") {
  // random two-metric records; legacy weights engineered so S_o is a positive
  // affine function of S_p at w = 0.5
  Rng rng(999);
  std::vector<ModelRecord> records;
  std::vector<BaseAuxPoint> data;
  for (int i = 0; i < 30; ++i) {
    const double base = rng.uniform(0.2, 0.9);
    const double aux = rng.uniform(0.0, 1.0);
    records.push_back(make_record("m" + std::to_string(i), {{{"base", base}, {"aux", aux}}}));
    data.push_back({base, aux});
  }
  const double c1 = fit_tradeoff(data).slope;
  REQUIRE(c1 < 0.0);
  LegacyConfig legacy;
  const double k1 = 1.0 / (1.0 - c1);
  legacy.category_weights = {{"base", k1}, {"aux", -c1 * k1}};
  legacy.baseline_ref = {{"base", 0.0}, {"aux", 0.0}};
  legacy.best_ref = {{"base", 1.0}, {"aux", 1.0}};

  const BacktestTable table = backtest(records, {0.5}, legacy, "base", {"aux"});
  REQUIRE(table.summaries.size() == 1);
  REQUIRE(table.summaries[0].spearman.has_value());
  CHECK(*table.summaries[0].spearman == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("backtest validation") {
  LegacyConfig legacy;
  legacy.category_weights = {{"base", 1.0}};
  legacy.baseline_ref = {{"base", 0.0}};
  legacy.best_ref = {{"base", 1.0}};
  CHECK_THROWS_AS(backtest({}, {0.5}, legacy, "base", {"aux"}), error);
  const std::vector<ModelRecord> pop = generate_population(basic_spec(0.05));
  CHECK_THROWS_AS(backtest(pop, {}, legacy, "base", {"aux"}), error);
  CHECK_THROWS_AS(backtest(pop, {0.5}, legacy, "base", {}), error);
}
