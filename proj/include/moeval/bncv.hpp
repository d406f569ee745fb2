#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "moeval/error.hpp"
#include "moeval/metrics.hpp"
#include "moeval/rng.hpp"
#include "moeval/rsmetrics.hpp"

namespace moeval {

struct Event {
  std::string user_id;
  std::string item_id;
  std::string artist_id;
  long long timestamp = 0;
};

// Events ordered by (user_id, timestamp, input order); every user has at
// least 2 events so one can be held out.
struct InteractionDataset {
  std::vector<Event> events;
  std::map<std::string, std::map<std::string, std::string>> user_attributes;

  void validate() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& e : events) ++counts[e.user_id];
    if (counts.empty()) throw error("dataset: no events");
    for (const auto& [user, n] : counts)
      if (n < 2) throw error("dataset: user '" + user + "' has fewer than 2 events");
  }
};

struct BootstrapSplit {
  std::vector<Event> train_events;
  // one (user, held-out truth item) per distinct sampled user, user-id order
  std::vector<std::pair<std::string, std::string>> test_pairs;
  // how often each distinct user was drawn in the bootstrap sample
  std::map<std::string, int> multiplicity;
};

// User-stratified bootstrap: draw |U| users with replacement, keyed by
// (seed, fold_index). Per sampled user the chronologically last event is the
// test truth; earlier events enter training once regardless of multiplicity.
inline BootstrapSplit bootstrap_split(const InteractionDataset& dataset,
                                      std::uint64_t seed, std::uint64_t fold_index) {
  dataset.validate();
  std::map<std::string, std::vector<const Event*>> per_user;
  for (const auto& e : dataset.events) per_user[e.user_id].push_back(&e);
  for (auto& [user, evs] : per_user)
    std::stable_sort(evs.begin(), evs.end(), [](const Event* a, const Event* b) {
      return a->timestamp < b->timestamp;  // ties keep input order
    });

  std::vector<const std::string*> user_ids;
  user_ids.reserve(per_user.size());
  for (const auto& [user, evs] : per_user) user_ids.push_back(&user);

  Rng rng = Rng::keyed(seed, fold_index);
  BootstrapSplit split;
  for (std::size_t i = 0; i < user_ids.size(); ++i)
    ++split.multiplicity[*user_ids[rng.below(user_ids.size())]];

  for (const auto& [user, count] : split.multiplicity) {
    const auto& evs = per_user.at(user);
    for (std::size_t i = 0; i + 1 < evs.size(); ++i)
      split.train_events.push_back(*evs[i]);
    split.test_pairs.push_back({user, evs.back()->item_id});
  }
  return split;
}

// Trains on a bootstrap sample and predicts ranked items per user. predict
// must be deterministic given the trained state and the declared seed.
class LearningAlgorithm {
 public:
  virtual ~LearningAlgorithm() = default;
  virtual void train(const BootstrapSplit& split) = 0;
  virtual std::vector<std::string> predict(const std::string& user_id, std::size_t k_top) const = 0;
};

struct MetricComputation {
  std::string id;
  std::function<double(const RecommendationRun&, const BootstrapSplit&)> fn;
};

// N bootstrap iterations of train/predict/evaluate, aggregated per metric.
inline ModelRecord run_bncv(LearningAlgorithm& algo, const InteractionDataset& dataset,
                            std::size_t n_folds, std::uint64_t seed,
                            const std::vector<MetricComputation>& suite,
                            std::size_t k_top, std::string model_id = "model") {
  if (n_folds == 0) throw error("run_bncv: n_folds must be positive");
  if (suite.empty()) throw error("run_bncv: empty metric suite");
  std::vector<MetricVector> fold_vectors;
  for (std::size_t fold = 0; fold < n_folds; ++fold) {
    BootstrapSplit split;
    RecommendationRun run;
    try {
      split = bootstrap_split(dataset, seed, fold);
      algo.train(split);
      for (const auto& [user, truth] : split.test_pairs)
        run.users.push_back({user, algo.predict(user, k_top), truth});
      run.validate();
      MetricVector v;
      for (const auto& metric : suite) v[metric.id] = metric.fn(run, split);
      fold_vectors.push_back(std::move(v));
    } catch (const error& e) {
      throw error("fold " + std::to_string(fold) + ": " + e.what());
    }
  }
  return make_record(std::move(model_id), std::move(fold_vectors));
}

// Recommends the globally most frequent training items the user has not
// already consumed; frequency ties broken by item id ascending. Returns a
// shorter list when fewer candidates exist.
class PopularityBaseline : public LearningAlgorithm {
 public:
  void train(const BootstrapSplit& split) override {
    ranked_items_.clear();
    histories_.clear();
    std::map<std::string, std::size_t> counts;
    for (const auto& e : split.train_events) {
      ++counts[e.item_id];
      histories_[e.user_id].insert(e.item_id);
    }
    for (const auto& [item, count] : counts) ranked_items_.push_back({item, count});
    std::sort(ranked_items_.begin(), ranked_items_.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
  }

  std::vector<std::string> predict(const std::string& user_id, std::size_t k_top) const override {
    static const std::set<std::string> empty;
    auto it = histories_.find(user_id);
    const std::set<std::string>& history = it == histories_.end() ? empty : it->second;
    std::vector<std::string> out;
    for (const auto& [item, count] : ranked_items_) {
      if (out.size() == k_top) break;
      if (!history.count(item)) out.push_back(item);
    }
    return out;
  }

 private:
  std::vector<std::pair<std::string, std::size_t>> ranked_items_;
  std::map<std::string, std::set<std::string>> histories_;
};

// Uniform sample without replacement from the training catalog, deterministic
// per (seed, user_id).
class RandomBaseline : public LearningAlgorithm {
 public:
  explicit RandomBaseline(std::uint64_t seed) : seed_(seed) {}

  void train(const BootstrapSplit& split) override {
    std::set<std::string> items;
    for (const auto& e : split.train_events) items.insert(e.item_id);
    catalog_.assign(items.begin(), items.end());
  }

  std::vector<std::string> predict(const std::string& user_id, std::size_t k_top) const override {
    Rng rng = Rng::keyed(seed_, hash_string(user_id));
    std::vector<std::string> pool = catalog_;
    const std::size_t n = std::min(k_top, pool.size());
    // partial Fisher-Yates
    for (std::size_t i = 0; i < n; ++i)
      std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    pool.resize(n);
    return pool;
  }

 private:
  std::uint64_t seed_;
  std::vector<std::string> catalog_;
};

inline std::unique_ptr<LearningAlgorithm> popularity_baseline() {
  return std::make_unique<PopularityBaseline>();
}

inline std::unique_ptr<LearningAlgorithm> random_baseline(std::uint64_t seed) {
  return std::make_unique<RandomBaseline>(seed);
}

}  // namespace moeval
