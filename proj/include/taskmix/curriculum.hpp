#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taskmix/error.hpp"
#include "taskmix/samplers.hpp"

namespace taskmix {

enum class ResourceClass { low, high };

inline std::string_view to_string(ResourceClass c) { return c == ResourceClass::low ? "low" : "high"; }

inline constexpr double kDefaultSaturationThreshold = 5.0;

struct ResourceEntry {
  std::string task_id;
  double saturation_epochs = 0.0;
  ResourceClass resource = ResourceClass::high;

  bool operator==(const ResourceEntry&) const = default;
};

struct ResourceClassification {
  std::vector<ResourceEntry> tasks;
  double threshold = kDefaultSaturationThreshold;

  std::vector<std::string> task_ids(std::optional<ResourceClass> only = std::nullopt) const {
    std::vector<std::string> ids;
    for (const auto& t : tasks)
      if (!only || t.resource == *only) ids.push_back(t.task_id);
    return ids;
  }

  bool operator==(const ResourceClassification&) const = default;
};

/// A task is low-resource iff it saturates in fewer than `threshold` epochs.
/// Exactly `threshold` counts as high-resource.
inline ResourceClassification classify_resources(const std::vector<std::string>& task_ids,
                                                  const std::map<std::string, double>& saturation,
                                                  double threshold = kDefaultSaturationThreshold) {
  if (!std::isfinite(threshold) || threshold <= 0.0)
    throw Error(ErrorCode::InvalidThreshold, "threshold must be > 0");
  ResourceClassification out;
  out.threshold = threshold;
  for (const auto& id : task_ids) {
    auto it = saturation.find(id);
    if (it == saturation.end()) throw Error(ErrorCode::MissingTask, "no saturation for '" + id + "'");
    if (!(it->second >= 0.0))
      throw Error(ErrorCode::NegativeEpochs, "task '" + id + "' has negative saturation epochs");
    out.tasks.push_back(
        {id, it->second, it->second < threshold ? ResourceClass::low : ResourceClass::high});
  }
  return out;
}

/// Epoch of the best dev metric; ties resolve to the earliest epoch.
inline double measure_saturation(const std::vector<std::pair<double, double>>& curve) {
  if (curve.empty()) throw Error(ErrorCode::EmptyCurve, "saturation curve is empty");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (!(curve[i].first > curve[i - 1].first))
      throw Error(ErrorCode::InvalidConfig, "curve epochs must be strictly increasing");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].second > curve[best].second) best = i;
  return curve[best].first;
}

struct Stage {
  std::string name;
  std::vector<std::string> task_ids;
  StrategyConfig strategy;
  double epochs = 1.0;
  std::optional<std::size_t> max_steps;

  bool operator==(const Stage&) const = default;
};

struct CurriculumPlan {
  std::vector<Stage> stages;
  /// Cap on the total number of steps across all stages.
  std::optional<std::size_t> step_cap;

  bool operator==(const CurriculumPlan&) const = default;
};

inline void validate(const CurriculumPlan& plan) {
  if (plan.stages.empty()) throw Error(ErrorCode::InvalidConfig, "plan has no stages");
  for (const auto& s : plan.stages) {
    if (!(s.epochs > 0.0) || !std::isfinite(s.epochs))
      throw Error(ErrorCode::InvalidConfig, "stage '" + s.name + "' epochs must be > 0");
    if (s.task_ids.empty())
      throw Error(ErrorCode::InvalidConfig, "stage '" + s.name + "' has no tasks");
    validate(s.strategy);
  }
  for (std::size_t i = 1; i < plan.stages.size(); ++i)
    for (const auto& id : plan.stages[i - 1].task_ids)
      if (std::find(plan.stages[i].task_ids.begin(), plan.stages[i].task_ids.end(), id) ==
          plan.stages[i].task_ids.end())
        throw Error(ErrorCode::InvalidConfig,
                    "stage '" + plan.stages[i].name + "' drops earlier task '" + id + "'");
}

inline CurriculumPlan single_stage_plan(std::vector<std::string> task_ids, StrategyConfig strategy,
                                        double epochs,
                                        std::optional<std::size_t> step_cap = std::nullopt) {
  CurriculumPlan plan;
  plan.stages.push_back({"mixture", std::move(task_ids), strategy, epochs, std::nullopt});
  plan.step_cap = step_cap;
  validate(plan);
  return plan;
}

/// Stage 1 trains the high-resource tasks with instance-balanced sampling;
/// stage 2 trains every task with capped temperature sampling. Stage 1 is
/// omitted when no task is high-resource.
inline CurriculumPlan build_two_stage_plan(const ResourceClassification& classification,
                                           double stage1_epochs, double stage2_epochs,
                                           std::size_t cap, double tau,
                                           std::optional<std::size_t> step_cap = std::nullopt) {
  CurriculumPlan plan;
  plan.step_cap = step_cap;
  auto high = classification.task_ids(ResourceClass::high);
  if (!high.empty())
    plan.stages.push_back(
        {"high_resource", std::move(high), StrategyConfig::instance_balanced(), stage1_epochs, {}});
  plan.stages.push_back(
      {"mixture", classification.task_ids(), StrategyConfig::capped(cap, tau), stage2_epochs, {}});
  validate(plan);
  return plan;
}

/// Effective data size a stage iterates over: capped sizes under the capped
/// strategy, raw sizes otherwise.
inline std::size_t effective_stage_size(const Stage& stage, const TaskSizes& sizes) {
  std::size_t total = 0;
  for (const auto& id : stage.task_ids) {
    auto it = std::find_if(sizes.begin(), sizes.end(), [&](const auto& p) { return p.first == id; });
    if (it == sizes.end()) throw Error(ErrorCode::PlanMismatch, "no size for task '" + id + "'");
    const std::size_t n = it->second;
    total += stage.strategy.kind == StrategyKind::capped_temperature_scaled
                 ? std::min(n, *stage.strategy.cap)
                 : n;
  }
  return total;
}

/// Proportional scale-down of stage step counts to at most `budget` in total.
/// Counts already within budget are returned unchanged.
inline std::vector<std::size_t> scale_to_budget(std::vector<std::size_t> steps, std::size_t budget) {
  std::size_t total = 0;
  for (auto s : steps) total += s;
  if (total <= budget) return steps;
  std::size_t assigned = 0;
  for (auto& s : steps) {
    s = s * budget / total;  // integer floor; operands stay far below 2^64
    assigned += s;
  }
  steps.back() += budget - assigned;
  return steps;
}

/// Step count per stage: ceil(epochs * effective_size / batch_size), bounded by
/// the stage's max_steps. When the total exceeds the plan's step cap, stages
/// are scaled down proportionally so the total equals the cap exactly.
inline std::vector<std::size_t> resolve_steps(const CurriculumPlan& plan, const TaskSizes& sizes,
                                              std::size_t batch_size) {
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  std::vector<std::size_t> steps;
  for (const auto& stage : plan.stages) {
    const double raw = std::ceil(stage.epochs * static_cast<double>(effective_stage_size(stage, sizes)) /
                                 static_cast<double>(batch_size));
    auto s = static_cast<std::size_t>(raw);
    if (stage.max_steps) s = std::min(s, *stage.max_steps);
    steps.push_back(s);
  }
  if (plan.step_cap) return scale_to_budget(steps, *plan.step_cap);
  return steps;
}

}  // namespace taskmix
