#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "moeval/error.hpp"

namespace moeval {

enum class Direction { Maximize, Minimize };

struct MetricSpec {
  std::string id;
  Direction direction = Direction::Maximize;
  bool is_base = false;
};

// Metric-id -> finite value. std::map keeps iteration order deterministic.
using MetricVector = std::map<std::string, double>;

// Validated list of MetricSpec: unique ids, exactly one base metric.
class MetricRegistry {
 public:
  explicit MetricRegistry(std::vector<MetricSpec> specs) : specs_(std::move(specs)) {
    std::size_t n_base = 0;
    for (const auto& s : specs_) {
      if (s.id.empty()) throw error("registry: empty metric id");
      if (by_id_.count(s.id)) throw error("registry: duplicate metric id '" + s.id + "'");
      by_id_[s.id] = &s;
      if (s.is_base) {
        ++n_base;
        base_id_ = s.id;
      }
    }
    if (n_base != 1) throw error("registry: expected exactly one base metric");
  }

  const std::vector<MetricSpec>& specs() const { return specs_; }
  const std::string& base_id() const { return base_id_; }

  const MetricSpec& at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw error("registry: unknown metric id '" + id + "'");
    return *it->second;
  }

  bool contains(const std::string& id) const { return by_id_.count(id) != 0; }

  std::vector<std::string> aux_ids() const {
    std::vector<std::string> out;
    for (const auto& s : specs_)
      if (!s.is_base) out.push_back(s.id);
    return out;
  }

 private:
  std::vector<MetricSpec> specs_;
  std::map<std::string, const MetricSpec*> by_id_;
  std::string base_id_;
};

struct ModelRecord {
  std::string model_id;
  std::vector<MetricVector> fold_vectors;  // one per fold, never empty
  MetricVector aggregate;                  // per-metric mean over folds
  MetricVector dispersion;                 // sample std, zero for one fold
};

// Importance ratios w_i in (0,1) for every auxiliary metric.
struct WeightConfig {
  std::string base_id;
  std::map<std::string, double> weights;

  void validate(const MetricRegistry& registry) const {
    if (base_id != registry.base_id())
      throw error("weights: base_id '" + base_id + "' does not match registry base");
    for (const auto& [id, w] : weights) {
      if (id == base_id) throw error("weights: base metric may not carry a weight");
      if (!registry.contains(id)) throw error("weights: unknown metric '" + id + "'");
      if (!(w > 0.0 && w < 1.0))
        throw error("weights: w for '" + id + "' must lie in (0,1)");
    }
  }
};

// Configuration of the original EvalRS-style score: per-metric weights
// summing to 1, baseline/best reference vectors and a base-metric threshold.
struct LegacyConfig {
  std::map<std::string, double> category_weights;
  MetricVector baseline_ref;
  MetricVector best_ref;
  double base_threshold = 0.0;

  void validate() const {
    double sum = 0.0;
    for (const auto& [id, k] : category_weights) {
      if (k < 0.0) throw error("legacy: negative weight for '" + id + "'");
      sum += k;
      auto lo = baseline_ref.find(id);
      auto hi = best_ref.find(id);
      if (lo == baseline_ref.end() || hi == best_ref.end())
        throw error("legacy: missing reference value for '" + id + "'");
      if (lo->second == hi->second)
        throw error("legacy: baseline and best coincide for '" + id + "'");
    }
    if (std::abs(sum - 1.0) > 1e-9) throw error("legacy: weights must sum to 1");
    if (base_threshold < 0.0) throw error("legacy: negative base threshold");
  }
};

inline void require_finite(const std::string& id, double v) {
  if (!std::isfinite(v)) throw error("non-finite value for metric '" + id + "'");
}

// Flips Minimize metrics so all downstream math can assume higher-is-better.
inline MetricVector canonicalize(const MetricVector& v, const MetricRegistry& registry) {
  MetricVector out;
  for (const auto& [id, value] : v) {
    require_finite(id, value);
    const MetricSpec& spec = registry.at(id);
    out[id] = spec.direction == Direction::Minimize ? -value : value;
  }
  return out;
}

// Per-metric mean and sample standard deviation (n-1) across folds.
inline std::pair<MetricVector, MetricVector> aggregate_folds(
    const std::vector<MetricVector>& fold_vectors) {
  if (fold_vectors.empty()) throw error("aggregate_folds: empty fold list");
  const MetricVector& first = fold_vectors.front();
  for (const auto& fv : fold_vectors) {
    if (fv.size() != first.size()) throw error("aggregate_folds: mismatched key sets");
    for (const auto& [id, value] : fv) {
      if (!first.count(id)) throw error("aggregate_folds: mismatched key sets");
      require_finite(id, value);
    }
  }
  const double n = static_cast<double>(fold_vectors.size());
  MetricVector mean, stdev;
  for (const auto& [id, _] : first) {
    double sum = 0.0;
    for (const auto& fv : fold_vectors) sum += fv.at(id);
    mean[id] = sum / n;
  }
  for (const auto& [id, m] : mean) {
    double ss = 0.0;
    for (const auto& fv : fold_vectors) {
      const double d = fv.at(id) - m;
      ss += d * d;
    }
    stdev[id] = fold_vectors.size() < 2 ? 0.0 : std::sqrt(ss / (n - 1.0));
  }
  return {std::move(mean), std::move(stdev)};
}

inline ModelRecord make_record(std::string model_id, std::vector<MetricVector> folds) {
  ModelRecord rec;
  rec.model_id = std::move(model_id);
  auto [mean, stdev] = aggregate_folds(folds);
  rec.fold_vectors = std::move(folds);
  rec.aggregate = std::move(mean);
  rec.dispersion = std::move(stdev);
  return rec;
}

}  // namespace moeval
