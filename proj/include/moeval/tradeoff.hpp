#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "moeval/error.hpp"
#include "moeval/pareto.hpp"

namespace moeval {

enum class CurveFamily { Linear };

// Fitted optimal trade-off: converts an auxiliary metric value into the
// base-metric value an optimal model should attain.
struct TradeoffCurve {
  std::string base_id;
  std::string aux_id;
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n_front_points = 0;
  double r_squared = 0.0;
  CurveFamily family = CurveFamily::Linear;
  // Observed aux range of the front points; evaluation outside is flagged.
  double aux_min = 0.0;
  double aux_max = 0.0;
};

struct EvResult {
  double value = 0.0;
  bool extrapolated = false;
};

inline double ev(const TradeoffCurve& curve, double aux_value) {
  if (!std::isfinite(aux_value)) throw error("ev: non-finite aux value");
  return curve.slope * aux_value + curve.intercept;
}

inline EvResult ev_at(const TradeoffCurve& curve, double aux_value) {
  EvResult r;
  r.value = ev(curve, aux_value);
  r.extrapolated = aux_value < curve.aux_min || aux_value > curve.aux_max;
  return r;
}

// Extracts the two-metric Pareto front from (base, aux) data, then ordinary
// least squares of base on aux over the front points only.
inline TradeoffCurve fit_tradeoff(const std::vector<BaseAuxPoint>& data,
                                  CurveFamily family = CurveFamily::Linear,
                                  std::string base_id = "base",
                                  std::string aux_id = "aux") {
  if (family != CurveFamily::Linear) throw error("fit_tradeoff: unsupported curve family");
  const std::vector<BaseAuxPoint> front = pareto_front_2d(data);
  if (front.size() < 2) throw error("fit_tradeoff: fewer than 2 front points");

  double mean_aux = 0.0, mean_base = 0.0;
  for (const auto& [base, aux] : front) {
    mean_base += base;
    mean_aux += aux;
  }
  const double n = static_cast<double>(front.size());
  mean_base /= n;
  mean_aux /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [base, aux] : front) {
    const double dx = aux - mean_aux;
    const double dy = base - mean_base;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw error("fit_tradeoff: all front aux values identical");

  TradeoffCurve curve;
  curve.base_id = std::move(base_id);
  curve.aux_id = std::move(aux_id);
  curve.family = family;
  curve.slope = sxy / sxx;
  curve.intercept = mean_base - curve.slope * mean_aux;
  curve.n_front_points = front.size();
  curve.aux_min = front.front().second;
  curve.aux_max = front.back().second;

  if (syy == 0.0) {
    curve.r_squared = 1.0;
  } else {
    double ss_res = 0.0;
    for (const auto& [base, aux] : front) {
      const double r = base - (curve.slope * aux + curve.intercept);
      ss_res += r * r;
    }
    curve.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return curve;
}

// Stateless refit on the concatenated point set; batching never matters.
inline TradeoffCurve update_tradeoff(const std::vector<BaseAuxPoint>& existing_data,
                                     const std::vector<BaseAuxPoint>& new_points,
                                     CurveFamily family = CurveFamily::Linear,
                                     std::string base_id = "base",
                                     std::string aux_id = "aux") {
  std::vector<BaseAuxPoint> all = existing_data;
  all.insert(all.end(), new_points.begin(), new_points.end());
  return fit_tradeoff(all, family, std::move(base_id), std::move(aux_id));
}

}  // namespace moeval
