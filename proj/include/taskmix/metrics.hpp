#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "taskmix/error.hpp"

namespace taskmix {

/// A task qualifies when its multi-task score reaches this fraction of its
/// single-task baseline.
inline constexpr double kQualifiedFraction = 0.99;

/// score >= 0.99 * baseline, both on the [0,1] scale. Inclusive, no epsilon.
inline bool qualified(double baseline, double score) {
  if (baseline < 0.0 || baseline > 1.0 || score < 0.0 || score > 1.0)
    throw Error(ErrorCode::MixedScales,
                "qualified() expects both metrics on the [0,1] scale; use qualified_percent()");
  return score >= kQualifiedFraction * baseline;
}

/// Same rule for metrics already multiplied by 100.
inline bool qualified_percent(double baseline, double score) {
  if (baseline < 0.0 || baseline > 100.0 || score < 0.0 || score > 100.0)
    throw Error(ErrorCode::MixedScales, "qualified_percent() expects metrics in [0,100]");
  return score >= kQualifiedFraction * baseline;
}

/// Deployed models per qualified task: 1/num_qualified for one multi-task
/// model, 1 for one model per task. Undefined when nothing qualifies.
inline std::optional<double> overhead(std::size_t num_qualified, std::size_t num_models = 1) {
  if (num_models < 1) throw Error(ErrorCode::InvalidConfig, "num_models must be >= 1");
  if (num_qualified == 0) return std::nullopt;
  return static_cast<double>(num_models) / static_cast<double>(num_qualified);
}

/// Several models over one benchmark: 1 / (most qualified tasks on any model).
inline std::optional<double> overhead_multi_model(const std::vector<std::size_t>& qualified_per_model) {
  if (qualified_per_model.empty())
    throw Error(ErrorCode::EmptyInputList, "overhead_multi_model needs at least one model");
  const auto best = *std::max_element(qualified_per_model.begin(), qualified_per_model.end());
  if (best == 0) return std::nullopt;
  return 1.0 / static_cast<double>(best);
}

inline double macro_average(const std::vector<double>& scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInputList, "macro_average of nothing");
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

inline double macro_average(const std::map<std::string, double>& scores) {
  std::vector<double> v;
  v.reserve(scores.size());
  for (const auto& [_, s] : scores) v.push_back(s);
  return macro_average(v);
}

}  // namespace taskmix
