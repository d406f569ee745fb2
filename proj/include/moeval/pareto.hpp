#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "moeval/error.hpp"
#include "moeval/metrics.hpp"

namespace moeval {

struct FrontResult {
  std::set<std::size_t> front_indices;
  // dominated index -> one witness index that dominates it
  std::map<std::size_t, std::size_t> dominated_by;
};

namespace detail {

// a, b already canonicalized (higher is better everywhere).
inline bool dominates_canonical(const MetricVector& a, const MetricVector& b) {
  if (a.size() != b.size()) throw error("dominates: mismatched key sets");
  bool strict = false;
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) throw error("dominates: mismatched key sets");
    if (ia->second < ib->second) return false;
    if (ia->second > ib->second) strict = true;
  }
  return strict;
}

}  // namespace detail

// True iff a is at least as good as b on every metric and strictly better on
// at least one, with Minimize metrics flipped first.
inline bool dominates(const MetricVector& a, const MetricVector& b,
                      const MetricRegistry& registry) {
  return detail::dominates_canonical(canonicalize(a, registry),
                                     canonicalize(b, registry));
}

// O(n^2) non-dominated extraction. Exact duplicates are noncomparable and all
// stay on the front.
inline FrontResult pareto_front(const std::vector<MetricVector>& points,
                                const MetricRegistry& registry) {
  if (points.empty()) throw error("pareto_front: empty input");
  std::vector<MetricVector> canon;
  canon.reserve(points.size());
  for (const auto& p : points) canon.push_back(canonicalize(p, registry));

  FrontResult result;
  for (std::size_t i = 0; i < canon.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < canon.size(); ++j) {
      if (j == i) continue;
      if (detail::dominates_canonical(canon[j], canon[i])) {
        result.dominated_by[i] = j;
        dominated = true;
        break;
      }
    }
    if (!dominated) result.front_indices.insert(i);
  }
  return result;
}

// (base, aux) pairs, both oriented so higher is better.
using BaseAuxPoint = std::pair<double, double>;

// Two-metric front, sorted ascending by aux value; ties broken by base
// descending, then original input order.
inline std::vector<BaseAuxPoint> pareto_front_2d(const std::vector<BaseAuxPoint>& pairs) {
  if (pairs.empty()) throw error("pareto_front_2d: empty input");
  for (const auto& [base, aux] : pairs) {
    require_finite("base", base);
    require_finite("aux", aux);
  }
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      if (j == i) continue;
      const bool ge = pairs[j].first >= pairs[i].first && pairs[j].second >= pairs[i].second;
      const bool gt = pairs[j].first > pairs[i].first || pairs[j].second > pairs[i].second;
      if (ge && gt) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(i);
  }
  std::stable_sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
    if (pairs[a].second != pairs[b].second) return pairs[a].second < pairs[b].second;
    if (pairs[a].first != pairs[b].first) return pairs[a].first > pairs[b].first;
    return a < b;
  });
  std::vector<BaseAuxPoint> out;
  out.reserve(front.size());
  for (std::size_t i : front) out.push_back(pairs[i]);
  return out;
}

}  // namespace moeval
