#include <catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "moeval/rng.hpp"
#include "moeval/rsmetrics.hpp"

using namespace moeval;

namespace {

RecommendationRun fixed_rank_run() {
  // truth ranks 1, 2, 4, miss over four users
  RecommendationRun run;
  run.users.push_back({"u1", {"t1", "x1", "x2", "x3"}, "t1"});
  run.users.push_back({"u2", {"x1", "t2", "x2", "x3"}, "t2"});
  run.users.push_back({"u3", {"x1", "x2", "x3", "t3"}, "t3"});
  run.users.push_back({"u4", {"x1", "x2", "x3", "x4"}, "t4"});
  return run;
}

RecommendationRun random_run(Rng& rng, std::size_t n_users, std::size_t k_top) {
  RecommendationRun run;
  for (std::size_t u = 0; u < n_users; ++u) {
    UserRec rec;
    rec.user_id = "u" + std::to_string(u);
    for (std::size_t i = 0; i < k_top; ++i)
      rec.predictions.push_back("p" + std::to_string(u) + "_" + std::to_string(i));
    // truth hits a random slot about half the time
    rec.truth = rng.below(2) ? rec.predictions[rng.below(k_top)] : "absent";
    run.users.push_back(std::move(rec));
  }
  return run;
}

ItemEmbeddings axis_embeddings() {
  ItemEmbeddings emb;
  emb.vectors["ex"] = {1.0, 0.0};
  emb.vectors["ey"] = {0.0, 1.0};
  emb.vectors["ex2"] = {1.0, 0.0};
  return emb;
}

}  // namespace

TEST_CASE("hit_rate and miss_rate") {
  const RecommendationRun run = fixed_rank_run();
  CHECK(hit_rate(run) == Catch::Approx(0.75));
  CHECK(miss_rate(run) == Catch::Approx(0.25));

  RecommendationRun all_hits;
  all_hits.users.push_back({"u", {"t"}, "t"});
  CHECK(hit_rate(all_hits) == 1.0);
  CHECK(miss_rate(all_hits) == 0.0);

  RecommendationRun none;
  none.users.push_back({"u", {"x"}, "t"});
  CHECK(hit_rate(none) == 0.0);
  CHECK(miss_rate(none) == 1.0);
  CHECK_THROWS_AS(hit_rate(RecommendationRun{}), error);
}

TEST_CASE("mrr over ranks 1, 2, 4, miss") {
  CHECK(mrr(fixed_rank_run()) == Catch::Approx(0.4375));
  RecommendationRun top;
  top.users.push_back({"u", {"t", "x"}, "t"});
  CHECK(mrr(top) == 1.0);
  RecommendationRun miss;
  miss.users.push_back({"u", {"x", "y"}, "t"});
  CHECK(mrr(miss) == 0.0);
}

TEST_CASE("hit_rate + miss_rate = 1 and mrr <= hit_rate on random runs") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const RecommendationRun run = random_run(rng, 1 + rng.below(30), 1 + rng.below(8));
    CHECK(hit_rate(run) + miss_rate(run) == 1.0);
    CHECK(mrr(run) <= hit_rate(run) + 1e-15);
  }
}

TEST_CASE("mred hand fixtures") {
  // group A: 10 users, 3 misses (MR 0.3); group B: 10 users, 5 misses (MR 0.5)
  // global MR = 8/20 = 0.4, so MRED = -(0.1 + 0.1) = -0.2
  RecommendationRun run;
  GroupPartition part{"activity", {}};
  for (int i = 0; i < 20; ++i) {
    const std::string uid = "u" + std::to_string(i);
    const bool in_a = i < 10;
    const bool miss = in_a ? (i < 3) : (i < 15);
    run.users.push_back({uid, {miss ? "wrong" : "t"}, "t"});
    part.assignment[uid] = in_a ? "A" : "B";
  }
  CHECK(mred(run, part) == Catch::Approx(-0.2).margin(1e-15));

  // all groups at the global miss rate
  RecommendationRun parity;
  GroupPartition ppart{"g", {}};
  for (int i = 0; i < 4; ++i) {
    const std::string uid = "u" + std::to_string(i);
    parity.users.push_back({uid, {i % 2 ? "wrong" : "t"}, "t"});
    ppart.assignment[uid] = i < 2 ? "A" : "B";
  }
  CHECK(mred(parity, ppart) == 0.0);
}

TEST_CASE("mred three-group fixture") {
  // groups of 5 with 1, 2, 3 misses: MRs 0.2, 0.4, 0.6, global 0.4
  RecommendationRun run;
  GroupPartition part{"g", {}};
  const int misses_per_group[3] = {1, 2, 3};
  int uid = 0;
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 5; ++i, ++uid) {
      const std::string id = "u" + std::to_string(uid);
      run.users.push_back({id, {i < misses_per_group[g] ? "wrong" : "t"}, "t"});
      part.assignment[id] = "g" + std::to_string(g);
    }
  CHECK(mred(run, part) == Catch::Approx(-0.4).margin(1e-15));
}

TEST_CASE("mred properties") {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const RecommendationRun run = random_run(rng, 4 + rng.below(30), 3);
    GroupPartition part{"g", {}};
    GroupPartition relabeled{"g", {}};
    GroupPartition single{"g", {}};
    for (const auto& u : run.users) {
      const std::string label = std::to_string(rng.below(3));
      part.assignment[u.user_id] = "g" + label;
      relabeled.assignment[u.user_id] = "renamed" + label;
      single.assignment[u.user_id] = "everyone";
    }
    const double m = mred(run, part);
    CHECK(m <= 0.0);
    CHECK(mred(run, relabeled) == m);
    CHECK(mred(run, single) == 0.0);
  }
  // unlabeled user is an error
  RecommendationRun run;
  run.users.push_back({"u", {"x"}, "t"});
  CHECK_THROWS_AS(mred(run, GroupPartition{"g", {}}), error);
}

TEST_CASE("being_less_wrong") {
  const ItemEmbeddings emb = axis_embeddings();

  RecommendationRun same;
  same.users.push_back({"u", {"ex"}, "ex2"});  // miss, identical vector
  const LessWrongResult r_same = being_less_wrong(same, emb);
  CHECK(r_same.value == Catch::Approx(0.0).margin(1e-12));
  CHECK_FALSE(r_same.no_misses);

  RecommendationRun ortho;
  ortho.users.push_back({"u", {"ex"}, "ey"});
  CHECK(being_less_wrong(ortho, emb).value == Catch::Approx(-1.0));

  // mean of distances 0 and 1 is 0.5
  RecommendationRun both;
  both.users.push_back({"u1", {"ex"}, "ex2"});
  both.users.push_back({"u2", {"ex"}, "ey"});
  CHECK(being_less_wrong(both, emb).value == Catch::Approx(-0.5));

  RecommendationRun hits;
  hits.users.push_back({"u", {"ex"}, "ex"});
  const LessWrongResult r_hits = being_less_wrong(hits, emb);
  CHECK(r_hits.value == 0.0);
  CHECK(r_hits.no_misses);

  RecommendationRun missing;
  missing.users.push_back({"u", {"nope"}, "ex"});
  CHECK_THROWS_AS(being_less_wrong(missing, emb), error);
}

TEST_CASE("intra_list_diversity") {
  const ItemEmbeddings emb = axis_embeddings();

  RecommendationRun flat;
  flat.users.push_back({"u", {"ex", "ex2"}, "t"});
  CHECK(intra_list_diversity(flat, emb) == Catch::Approx(0.0).margin(1e-12));

  RecommendationRun ortho;
  ortho.users.push_back({"u", {"ex", "ey"}, "t"});
  CHECK(intra_list_diversity(ortho, emb) == Catch::Approx(1.0));

  // mean over users of per-list diversity
  RecommendationRun both;
  both.users.push_back({"u1", {"ex", "ex2"}, "t"});
  both.users.push_back({"u2", {"ex", "ey"}, "t"});
  CHECK(intra_list_diversity(both, emb) == Catch::Approx(0.5));

  RecommendationRun short_list;
  short_list.users.push_back({"u", {"ex"}, "t"});
  CHECK_THROWS_AS(intra_list_diversity(short_list, emb), error);
}

TEST_CASE("gini_impurity") {
  CHECK(gini_impurity({10}) == 0.0);
  CHECK(gini_impurity({5, 5}) == Catch::Approx(0.5));
  CHECK(gini_impurity({1, 1, 1, 1}) == Catch::Approx(0.75));
  CHECK_THROWS_AS(gini_impurity({0, 0}), error);
  CHECK_THROWS_AS(gini_impurity({-1, 2}), error);

  Rng rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t j = 1 + rng.below(6);
    std::vector<long long> counts;
    for (std::size_t i = 0; i < j; ++i) counts.push_back(1 + rng.below(20));
    const double g = gini_impurity(counts);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0 - 1.0 / static_cast<double>(j) + 1e-12);
    std::vector<long long> permuted(counts.rbegin(), counts.rend());
    CHECK(gini_impurity(permuted) == Catch::Approx(g).margin(1e-15));
  }
}

TEST_CASE("variance_agreement") {
  const std::map<std::string, std::string> artists = {
      {"i1", "a1"}, {"i2", "a1"}, {"i3", "a2"}, {"i4", "a3"}};

  // history and recommendations with identical artist Gini
  RecommendationRun run;
  run.users.push_back({"u1", {"i1", "i3"}, "t"});  // rec gini 0.5
  std::map<std::string, std::vector<std::string>> hist = {{"u1", {"i2", "i4"}}};  // 0.5
  CHECK(variance_agreement(run, artists, hist) == Catch::Approx(0.0).margin(1e-12));

  // per-user diffs 0.0 and 0.32, negated mean
  RecommendationRun two;
  two.users.push_back({"u1", {"i1", "i3"}, "t"});          // rec gini 0.5
  two.users.push_back({"u2", {"i1", "i2"}, "t"});          // single artist: 0.0
  std::map<std::string, std::vector<std::string>> hist2 = {
      {"u1", {"i2", "i4"}},                                // gini 0.5, diff 0
      {"u2", {"i1", "i1", "i1", "i1", "i3"}}};             // counts 4,1: gini 0.32, diff 0.32
  CHECK(variance_agreement(two, artists, hist2) == Catch::Approx(-(0.0 + 0.32) / 2.0));

  // single-artist history and recommendations: both ginis zero
  RecommendationRun solo;
  solo.users.push_back({"u1", {"i1", "i2"}, "t"});
  std::map<std::string, std::vector<std::string>> hist3 = {{"u1", {"i3", "i3"}}};
  CHECK(variance_agreement(solo, artists, hist3) == 0.0);

  std::map<std::string, std::vector<std::string>> empty_hist = {{"u1", {}}};
  CHECK_THROWS_AS(variance_agreement(solo, artists, empty_hist), error);
  std::map<std::string, std::vector<std::string>> unmapped = {{"u1", {"zz"}}};
  CHECK_THROWS_AS(variance_agreement(solo, artists, unmapped), error);
}

TEST_CASE("run validation") {
  RecommendationRun dup;
  dup.users.push_back({"u", {"a", "a"}, "t"});
  CHECK_THROWS_AS(dup.validate(), error);
  RecommendationRun uneven;
  uneven.users.push_back({"u1", {"a", "b"}, "t"});
  uneven.users.push_back({"u2", {"a"}, "t"});
  CHECK_THROWS_AS(uneven.validate(), error);
}
