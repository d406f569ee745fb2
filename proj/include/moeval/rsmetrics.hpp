#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "moeval/error.hpp"

namespace moeval {

struct UserRec {
  std::string user_id;
  std::vector<std::string> predictions;  // ranked, no duplicates
  std::string truth;                     // single held-out item
};

struct RecommendationRun {
  std::vector<UserRec> users;

  void validate() const {
    if (users.empty()) throw error("run: empty");
    const std::size_t k_top = users.front().predictions.size();
    for (const auto& u : users) {
      if (u.predictions.size() != k_top) throw error("run: uneven k_top across users");
      std::set<std::string> seen;
      for (const auto& item : u.predictions)
        if (!seen.insert(item).second)
          throw error("run: duplicate prediction for user '" + u.user_id + "'");
    }
  }
};

struct GroupPartition {
  std::string criterion;
  std::map<std::string, std::string> assignment;  // user id -> group label
};

struct ItemEmbeddings {
  std::map<std::string, std::vector<double>> vectors;  // unit norm, uniform dim

  const std::vector<double>& at(const std::string& item_id) const {
    auto it = vectors.find(item_id);
    if (it == vectors.end()) throw error("embeddings: missing item '" + item_id + "'");
    return it->second;
  }
};

namespace detail {

inline double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw error("embeddings: dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return 1.0 - dot;  // vectors are unit norm
}

inline bool is_hit(const UserRec& u) {
  return std::find(u.predictions.begin(), u.predictions.end(), u.truth) !=
         u.predictions.end();
}

}  // namespace detail

inline double hit_rate(const RecommendationRun& run) {
  if (run.users.empty()) throw error("hit_rate: empty run");
  std::size_t hits = 0;
  for (const auto& u : run.users)
    if (detail::is_hit(u)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(run.users.size());
}

inline double miss_rate(const RecommendationRun& run) { return 1.0 - hit_rate(run); }

// Mean reciprocal rank of the truth item, 0 for misses.
inline double mrr(const RecommendationRun& run) {
  if (run.users.empty()) throw error("mrr: empty run");
  double sum = 0.0;
  for (const auto& u : run.users) {
    auto it = std::find(u.predictions.begin(), u.predictions.end(), u.truth);
    if (it != u.predictions.end())
      sum += 1.0 / static_cast<double>(std::distance(u.predictions.begin(), it) + 1);
  }
  return sum / static_cast<double>(run.users.size());
}

// Miss-rate equality difference: negated sum over groups of the absolute
// deviation of the group miss-rate from the global miss-rate. 0 = parity.
inline double mred(const RecommendationRun& run, const GroupPartition& partition) {
  if (run.users.empty()) throw error("mred: empty run");
  std::map<std::string, std::pair<std::size_t, std::size_t>> groups;  // label -> (misses, total)
  std::size_t global_misses = 0;
  for (const auto& u : run.users) {
    auto it = partition.assignment.find(u.user_id);
    if (it == partition.assignment.end())
      throw error("mred: user '" + u.user_id + "' has no group label under '" +
                  partition.criterion + "'");
    auto& [misses, total] = groups[it->second];
    ++total;
    if (!detail::is_hit(u)) {
      ++misses;
      ++global_misses;
    }
  }
  // misses/n directly, not 1 - hit_rate: keeps a single group exactly at parity
  const double global_mr =
      static_cast<double>(global_misses) / static_cast<double>(run.users.size());
  double sum = 0.0;
  for (const auto& [label, counts] : groups) {
    const double mr_i = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    sum += std::abs(mr_i - global_mr);
  }
  return -sum;
}

struct LessWrongResult {
  double value = 0.0;  // negated mean cosine distance over missed users
  bool no_misses = false;
};

// For users whose truth is missed entirely, how close the top-1 prediction
// stays to the truth in the item latent space.
inline LessWrongResult being_less_wrong(const RecommendationRun& run,
                                        const ItemEmbeddings& emb) {
  if (run.users.empty()) throw error("being_less_wrong: empty run");
  double sum = 0.0;
  std::size_t misses = 0;
  for (const auto& u : run.users) {
    if (detail::is_hit(u)) continue;
    if (u.predictions.empty()) throw error("being_less_wrong: empty prediction list");
    sum += detail::cosine_distance(emb.at(u.predictions.front()), emb.at(u.truth));
    ++misses;
  }
  if (misses == 0) return {0.0, true};
  return {-sum / static_cast<double>(misses), false};
}

// Mean over users of the mean pairwise cosine distance within the predicted list.
inline double intra_list_diversity(const RecommendationRun& run, const ItemEmbeddings& emb) {
  if (run.users.empty()) throw error("intra_list_diversity: empty run");
  double total = 0.0;
  for (const auto& u : run.users) {
    const std::size_t k = u.predictions.size();
    if (k < 2) throw error("intra_list_diversity: k_top < 2");
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        sum += detail::cosine_distance(emb.at(u.predictions[i]), emb.at(u.predictions[j]));
        ++pairs;
      }
    total += sum / static_cast<double>(pairs);
  }
  return total / static_cast<double>(run.users.size());
}

// 1 - sum p_j^2 over class proportions.
inline double gini_impurity(const std::vector<long long>& counts) {
  long long total = 0;
  for (long long c : counts) {
    if (c < 0) throw error("gini_impurity: negative count");
    total += c;
  }
  if (total == 0) throw error("gini_impurity: zero total");
  double sum_sq = 0.0;
  for (long long c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace detail {

inline double artist_gini(const std::vector<std::string>& items,
                          const std::map<std::string, std::string>& item_to_artist) {
  std::map<std::string, long long> counts;
  for (const auto& item : items) {
    auto it = item_to_artist.find(item);
    if (it == item_to_artist.end()) throw error("variance_agreement: unmapped item '" + item + "'");
    ++counts[it->second];
  }
  std::vector<long long> values;
  values.reserve(counts.size());
  for (const auto& [artist, c] : counts) values.push_back(c);
  return gini_impurity(values);
}

}  // namespace detail

// Match between the artist diversity of a user's history and of their
// recommendations, as negated mean absolute Gini difference. 0 = perfect.
inline double variance_agreement(const RecommendationRun& run,
                                 const std::map<std::string, std::string>& item_to_artist,
                                 const std::map<std::string, std::vector<std::string>>& user_histories) {
  if (run.users.empty()) throw error("variance_agreement: empty run");
  double sum = 0.0;
  for (const auto& u : run.users) {
    auto hist = user_histories.find(u.user_id);
    if (hist == user_histories.end() || hist->second.empty())
      throw error("variance_agreement: empty history for user '" + u.user_id + "'");
    const double g_hist = detail::artist_gini(hist->second, item_to_artist);
    const double g_rec = detail::artist_gini(u.predictions, item_to_artist);
    sum += std::abs(g_rec - g_hist);
  }
  return -sum / static_cast<double>(run.users.size());
}

}  // namespace moeval
