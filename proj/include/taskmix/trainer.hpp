#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taskmix/curriculum.hpp"
#include "taskmix/error.hpp"
#include "taskmix/features.hpp"
#include "taskmix/model.hpp"
#include "taskmix/registry.hpp"
#include "taskmix/rng.hpp"
#include "taskmix/samplers.hpp"

namespace taskmix {

struct TrainerConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double l2 = 1e-6;
  std::size_t eval_every = 500;
  std::uint32_t dimension = kDefaultFeatureDimension;
  bool shared_trunk = true;
  /// Also record train-split accuracy at every evaluation point.
  bool eval_train = false;

  bool operator==(const TrainerConfig&) const = default;
};

inline void validate(const TrainerConfig& c) {
  if (!(c.learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
  if (c.batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (!(c.l2 >= 0.0)) throw Error(ErrorCode::InvalidConfig, "l2 must be >= 0");
  if (c.eval_every < 1) throw Error(ErrorCode::InvalidConfig, "eval_every must be >= 1");
  if (c.dimension == 0 || (c.dimension & (c.dimension - 1)) != 0)
    throw Error(ErrorCode::InvalidConfig, "dimension must be a power of two");
}

/// Reference hyperparameters of the original large-model runs. Kept as
/// metadata only; they are not meaningful for the linear trainer.
struct ReferenceLlmHyperparameters {
  double learning_rate = 3e-5;
  std::size_t batch_size = 1;
  std::size_t gradient_accumulation = 8;
};

inline constexpr std::size_t kUnseenLabel = std::numeric_limits<std::size_t>::max();

/// Featurized view of one task. Dev records whose target is not a train label
/// carry kUnseenLabel and always score as wrong.
struct PreparedTask {
  TaskSpec spec;
  std::vector<std::string> labels;
  std::vector<FeatureVector> train_x;
  std::vector<std::size_t> train_y;
  std::vector<FeatureVector> dev_x;
  std::vector<std::size_t> dev_y;
};

/// Featurized registry. Immutable and shareable across concurrent runs.
class PreparedData {
 public:
  PreparedData(const Registry& registry, std::uint32_t dimension) : dimension_(dimension) {
    for (const auto& e : registry.entries()) {
      PreparedTask t;
      t.spec = e.spec;
      t.labels = candidate_targets(e.data);
      auto label_of = [&](const std::string& target) {
        auto it = std::lower_bound(t.labels.begin(), t.labels.end(), target);
        return it != t.labels.end() && *it == target
                   ? static_cast<std::size_t>(it - t.labels.begin())
                   : kUnseenLabel;
      };
      for (const auto& r : e.data.train) {
        t.train_x.push_back(featurize(r.input, dimension));
        t.train_y.push_back(label_of(r.target));
      }
      for (const auto& r : e.data.dev) {
        t.dev_x.push_back(featurize(r.input, dimension));
        t.dev_y.push_back(label_of(r.target));
      }
      tasks_.push_back(std::move(t));
    }
  }

  std::uint32_t dimension() const noexcept { return dimension_; }
  const std::vector<PreparedTask>& tasks() const noexcept { return tasks_; }

  const PreparedTask* find(std::string_view id) const noexcept {
    for (const auto& t : tasks_)
      if (t.spec.task_id == id) return &t;
    return nullptr;
  }

  const PreparedTask& at(std::string_view id) const {
    if (const auto* t = find(id)) return *t;
    throw Error(ErrorCode::UnknownTask, std::string(id));
  }

  TaskSizes sizes() const {
    TaskSizes out;
    for (const auto& t : tasks_) out.emplace_back(t.spec.task_id, t.train_x.size());
    return out;
  }

 private:
  std::uint32_t dimension_;
  std::vector<PreparedTask> tasks_;
};

struct CurvePoint {
  std::size_t step = 0;
  std::string task_id;
  std::string split;  // "dev" or "train"
  double metric = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

enum class Split { train, dev };

/// Fraction of the split predicted exactly right.
inline double evaluate(const LinearModel& model, std::size_t task, const PreparedTask& data,
                       Split split) {
  const auto& xs = split == Split::dev ? data.dev_x : data.train_x;
  const auto& ys = split == Split::dev ? data.dev_y : data.train_y;
  if (xs.empty()) throw Error(ErrorCode::EmptyDev, "task '" + data.spec.task_id + "' split is empty");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (ys[i] != kUnseenLabel && model.predict(task, xs[i]) == ys[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(xs.size());
}

/// Accuracy (classification) or exact match over the closed target set
/// (generation) of `model` on raw dev records.
inline double evaluate(const LinearModel& model, std::string_view task_id,
                       std::span<const Record> dev) {
  const auto task = model.task_index(task_id);
  if (dev.empty()) throw Error(ErrorCode::EmptyDev, "task '" + std::string(task_id) + "'");
  const auto& labels = model.labels(task);
  std::size_t correct = 0;
  for (const auto& r : dev)
    if (labels[model.predict(task, featurize(r.input, model.dimension()))] == r.target) ++correct;
  return static_cast<double>(correct) / static_cast<double>(dev.size());
}

struct TrainResult {
  LinearModel model;
  std::vector<CurvePoint> curve;
  std::vector<std::size_t> stage_steps;
};

struct TrainOptions {
  /// Overrides the plan's epoch-derived step counts (one entry per stage).
  std::optional<std::vector<std::size_t>> stage_steps;
  /// Explicit evaluation steps; when empty, every eval_every steps. The final
  /// step is always evaluated.
  std::vector<std::size_t> eval_steps;
};

inline LinearModel make_model(const PreparedData& data, const std::vector<std::string>& task_ids,
                              const TrainerConfig& config) {
  std::vector<LinearModel::TaskInfo> infos;
  for (const auto& id : task_ids) infos.push_back({id, data.at(id).labels});
  return LinearModel(infos, data.dimension(), config.shared_trunk);
}

/// Runs the plan's stages in order with mini-batch SGD. Every stage opens a
/// fresh sample stream; model weights carry over. Plain SGD keeps no optimizer
/// state, so nothing else carries across stages.
inline TrainResult train(const CurriculumPlan& plan, const PreparedData& data,
                         const TrainerConfig& config, const TrainOptions& options = {}) {
  validate(plan);
  validate(config);
  if (data.dimension() != config.dimension)
    throw Error(ErrorCode::InvalidConfig, "prepared data and trainer disagree on dimension");

  std::vector<std::string> task_ids;
  for (const auto& t : data.tasks()) {
    const auto& id = t.spec.task_id;
    for (const auto& stage : plan.stages)
      if (std::find(stage.task_ids.begin(), stage.task_ids.end(), id) != stage.task_ids.end()) {
        task_ids.push_back(id);
        break;
      }
  }
  for (const auto& stage : plan.stages)
    for (const auto& id : stage.task_ids)
      if (!data.find(id)) throw Error(ErrorCode::PlanMismatch, "plan task '" + id + "' not in data");

  const auto sizes = data.sizes();
  auto steps = options.stage_steps ? *options.stage_steps
                                   : resolve_steps(plan, sizes, config.batch_size);
  if (steps.size() != plan.stages.size())
    throw Error(ErrorCode::PlanMismatch, "stage step list does not match plan");

  std::size_t total_steps = 0;
  for (auto s : steps) total_steps += s;
  std::set<std::size_t> eval_at(options.eval_steps.begin(), options.eval_steps.end());
  if (options.eval_steps.empty())
    for (std::size_t s = config.eval_every; s <= total_steps; s += config.eval_every) eval_at.insert(s);
  eval_at.insert(total_steps);

  TrainResult result{make_model(data, task_ids, config), {}, steps};
  auto& model = result.model;
  std::vector<const PreparedTask*> prepared;
  for (const auto& id : task_ids) prepared.push_back(&data.at(id));

  auto record_eval = [&](std::size_t step) {
    for (std::size_t t = 0; t < task_ids.size(); ++t) {
      result.curve.push_back({step, task_ids[t], "dev", evaluate(model, t, *prepared[t], Split::dev)});
      if (config.eval_train)
        result.curve.push_back(
            {step, task_ids[t], "train", evaluate(model, t, *prepared[t], Split::train)});
    }
  };

  std::size_t global = 0;
  if (eval_at.count(0)) record_eval(0);
  std::vector<Example> batch(config.batch_size);
  for (std::size_t s = 0; s < plan.stages.size(); ++s) {
    const auto& stage = plan.stages[s];
    TaskSizes stage_sizes;
    std::vector<std::size_t> to_model;
    for (std::size_t t = 0; t < task_ids.size(); ++t)
      if (std::find(stage.task_ids.begin(), stage.task_ids.end(), task_ids[t]) !=
          stage.task_ids.end()) {
        stage_sizes.emplace_back(task_ids[t], prepared[t]->train_x.size());
        to_model.push_back(t);
      }
    SampleStream stream(weights_for(stage.strategy, stage_sizes), stage_sizes,
                        derive_seed(config.seed, 1000 + s));
    for (std::size_t i = 0; i < steps[s]; ++i) {
      for (auto& ex : batch) {
        const auto d = stream.next();
        const auto t = to_model[d.task];
        ex = {t, &prepared[t]->train_x[d.record], prepared[t]->train_y[d.record]};
      }
      model.apply(model.gradient(batch, config.l2), config.learning_rate);
      ++global;
      if (eval_at.count(global)) record_eval(global);
    }
  }
  return result;
}

/// Curve of one task and split as (step, metric), in step order.
inline std::vector<std::pair<std::size_t, double>> curve_of(const std::vector<CurvePoint>& curve,
                                                            std::string_view task_id,
                                                            std::string_view split = "dev") {
  std::vector<std::pair<std::size_t, double>> out;
  for (const auto& p : curve)
    if (p.task_id == task_id && p.split == split) out.emplace_back(p.step, p.metric);
  return out;
}

}  // namespace taskmix
