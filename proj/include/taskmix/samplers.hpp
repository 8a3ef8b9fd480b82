#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taskmix/error.hpp"
#include "taskmix/registry.hpp"
#include "taskmix/rng.hpp"

namespace taskmix {

using TaskSizes = std::vector<std::pair<std::string, std::size_t>>;

/// Normalized per-task sampling distribution, in registry order.
struct MixtureWeights {
  std::vector<std::pair<std::string, double>> entries;

  std::size_t size() const noexcept { return entries.size(); }

  std::vector<std::string> task_ids() const {
    std::vector<std::string> ids;
    ids.reserve(entries.size());
    for (const auto& [id, _] : entries) ids.push_back(id);
    return ids;
  }

  std::vector<double> probabilities() const {
    std::vector<double> p;
    p.reserve(entries.size());
    for (const auto& [_, q] : entries) p.push_back(q);
    return p;
  }

  double at(std::string_view task_id) const {
    for (const auto& [id, q] : entries)
      if (id == task_id) return q;
    throw Error(ErrorCode::UnknownTask, std::string(task_id));
  }

  bool operator==(const MixtureWeights&) const = default;
};

inline constexpr double kWeightSumTolerance = 1e-12;

/// Temperatures in common use for multilingual / multi-task mixing.
inline constexpr std::array<double, 3> kTemperaturePresets = {1.43, 2.0, 3.33};

inline void validate(const MixtureWeights& w) {
  if (w.entries.empty()) throw Error(ErrorCode::EmptyTaskSet, "mixture has no tasks");
  double sum = 0.0;
  for (const auto& [id, q] : w.entries) {
    if (!(q >= 0.0 && q <= 1.0))
      throw Error(ErrorCode::InvalidWeights, "probability of '" + id + "' outside [0,1]");
    sum += q;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance)
    throw Error(ErrorCode::InvalidWeights, "probabilities do not sum to one");
}

namespace detail {

inline MixtureWeights normalize(const std::vector<std::string>& ids, std::vector<double> mass) {
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  MixtureWeights w;
  w.entries.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) w.entries.emplace_back(ids[i], mass[i] / total);
  return w;
}

inline void check_sizes(const TaskSizes& sizes) {
  if (sizes.empty()) throw Error(ErrorCode::EmptyTaskSet, "no tasks");
  for (const auto& [id, n] : sizes)
    if (n == 0) throw Error(ErrorCode::ZeroSize, "task '" + id + "' has zero size");
}

inline void check_tau(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0)
    throw Error(ErrorCode::InvalidTemperature, "temperature must be finite and > 0");
}

}  // namespace detail

/// p_l = n_l / sum n.
inline MixtureWeights instance_balanced_weights(const TaskSizes& sizes) {
  detail::check_sizes(sizes);
  std::vector<std::string> ids;
  std::vector<double> mass;
  for (const auto& [id, n] : sizes) {
    ids.push_back(id);
    mass.push_back(static_cast<double>(n));
  }
  return detail::normalize(ids, std::move(mass));
}

/// Uniform over tasks.
inline MixtureWeights class_balanced_weights(const std::vector<std::string>& task_ids) {
  if (task_ids.empty()) throw Error(ErrorCode::EmptyTaskSet, "no tasks");
  return detail::normalize(task_ids, std::vector<double>(task_ids.size(), 1.0));
}

/// q_l proportional to p_l^(1/tau). tau == 1 returns `base` unchanged.
inline MixtureWeights temperature_scaled_weights(const MixtureWeights& base, double tau) {
  detail::check_tau(tau);
  validate(base);
  if (tau == 1.0) return base;

  std::vector<std::string> ids;
  std::vector<double> log_mass;
  for (const auto& [id, p] : base.entries) {
    ids.push_back(id);
    // p == 0 would give 0^(1/tau); such tasks keep zero mass.
    log_mass.push_back(p > 0.0 ? std::log(p) / tau : -std::numeric_limits<double>::infinity());
  }
  // Shifting by the max log leaves q unchanged and keeps exp() away from underflow.
  const double top = *std::max_element(log_mass.begin(), log_mass.end());
  std::vector<double> mass;
  mass.reserve(log_mass.size());
  for (double lm : log_mass) mass.push_back(std::exp(lm - top));
  return detail::normalize(ids, std::move(mass));
}

/// p_l = min(n_l, K) / sum min(n, K), then temperature scaled.
inline MixtureWeights capped_weights(const TaskSizes& sizes, std::size_t cap, double tau) {
  if (cap < 1) throw Error(ErrorCode::InvalidCap, "cap K must be >= 1");
  detail::check_tau(tau);
  detail::check_sizes(sizes);
  TaskSizes capped;
  capped.reserve(sizes.size());
  for (const auto& [id, n] : sizes) capped.emplace_back(id, std::min(n, cap));
  return temperature_scaled_weights(instance_balanced_weights(capped), tau);
}

// ---------------------------------------------------------------------------

enum class StrategyKind {
  instance_balanced,
  class_balanced,
  temperature_scaled,
  capped_temperature_scaled,
};

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::instance_balanced: return "instance_balanced";
    case StrategyKind::class_balanced: return "class_balanced";
    case StrategyKind::temperature_scaled: return "temperature_scaled";
    case StrategyKind::capped_temperature_scaled: return "capped_temperature_scaled";
  }
  return "?";
}

inline std::optional<StrategyKind> parse_strategy_kind(std::string_view s) {
  for (auto k : {StrategyKind::instance_balanced, StrategyKind::class_balanced,
                 StrategyKind::temperature_scaled, StrategyKind::capped_temperature_scaled})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline bool uses_temperature(StrategyKind k) {
  return k == StrategyKind::temperature_scaled || k == StrategyKind::capped_temperature_scaled;
}

struct StrategyConfig {
  StrategyKind kind = StrategyKind::instance_balanced;
  std::optional<double> tau;
  std::optional<std::size_t> cap;

  static StrategyConfig instance_balanced() { return {StrategyKind::instance_balanced, {}, {}}; }
  static StrategyConfig class_balanced() { return {StrategyKind::class_balanced, {}, {}}; }
  static StrategyConfig temperature_scaled(double tau) {
    return {StrategyKind::temperature_scaled, tau, {}};
  }
  static StrategyConfig capped(std::size_t cap, double tau) {
    return {StrategyKind::capped_temperature_scaled, tau, cap};
  }

  bool operator==(const StrategyConfig&) const = default;
};

inline void validate(const StrategyConfig& s) {
  if (uses_temperature(s.kind) != s.tau.has_value())
    throw Error(ErrorCode::InvalidConfig, std::string("tau must be set exactly for temperature "
                                                      "strategies (kind ") +
                                              std::string(to_string(s.kind)) + ")");
  if ((s.kind == StrategyKind::capped_temperature_scaled) != s.cap.has_value())
    throw Error(ErrorCode::InvalidConfig, "cap must be set exactly for the capped strategy");
  if (s.tau) detail::check_tau(*s.tau);
  if (s.cap && *s.cap < 1) throw Error(ErrorCode::InvalidCap, "cap K must be >= 1");
}

inline MixtureWeights weights_for(const StrategyConfig& s, const TaskSizes& sizes) {
  validate(s);
  switch (s.kind) {
    case StrategyKind::instance_balanced:
      return instance_balanced_weights(sizes);
    case StrategyKind::class_balanced: {
      detail::check_sizes(sizes);
      std::vector<std::string> ids;
      for (const auto& [id, _] : sizes) ids.push_back(id);
      return class_balanced_weights(ids);
    }
    case StrategyKind::temperature_scaled:
      return temperature_scaled_weights(instance_balanced_weights(sizes), *s.tau);
    case StrategyKind::capped_temperature_scaled:
      return capped_weights(sizes, *s.cap, *s.tau);
  }
  throw Error(ErrorCode::Internal, "unhandled strategy kind");
}

// ---------------------------------------------------------------------------

/// One draw: index of the task in the registry and of the record in its train split.
struct Draw {
  std::size_t task = 0;
  std::size_t record = 0;

  bool operator==(const Draw&) const = default;
};

/// Seeded stream of (task, record) draws. Tasks are drawn i.i.d. from the
/// mixture; within a task, records follow shuffled epochs so every record is
/// seen once before any repeats.
class SampleStream {
 public:
  /// `tasks` lists (task_id, train size) in the order draws are indexed by.
  SampleStream(const MixtureWeights& weights, const TaskSizes& tasks, std::uint64_t seed)
      : task_rng_(derive_seed(seed, 0)) {
    validate(weights);
    if (weights.size() != tasks.size())
      throw Error(ErrorCode::WeightsMismatch, "weights and registry cover different task counts");
    std::vector<double> prob(tasks.size(), 0.0);
    std::vector<bool> seen(tasks.size(), false);
    for (const auto& [id, q] : weights.entries) {
      auto it = std::find_if(tasks.begin(), tasks.end(), [&](const auto& t) { return t.first == id; });
      const auto idx = static_cast<std::size_t>(it - tasks.begin());
      if (it == tasks.end() || seen[idx])
        throw Error(ErrorCode::WeightsMismatch, "weights name '" + id + "' not in registry");
      seen[idx] = true;
      prob[idx] = q;
    }
    cumulative_.assign(tasks.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
      acc += prob[i];
      cumulative_[i] = acc;
      if (prob[i] > 0.0) last_positive_ = i;
    }
    epochs_.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].second == 0) throw Error(ErrorCode::ZeroSize, "task '" + tasks[i].first + "'");
      epochs_.emplace_back(tasks[i].second, derive_seed(seed, i + 1));
    }
  }

  Draw next() {
    const double u = task_rng_.uniform();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t task = static_cast<std::size_t>(it - cumulative_.begin());
    // u can exceed the last partial sum by rounding.
    if (task >= cumulative_.size()) task = last_positive_;
    return {task, epochs_[task].next()};
  }

 private:
  class EpochCursor {
   public:
    EpochCursor(std::size_t n, std::uint64_t seed) : rng_(seed), order_(n) {
      std::iota(order_.begin(), order_.end(), std::size_t{0});
      pos_ = n;
    }

    std::size_t next() {
      if (pos_ == order_.size()) {
        rng_.shuffle(std::span<std::size_t>(order_));
        pos_ = 0;
      }
      return order_[pos_++];
    }

   private:
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
  };

  Rng task_rng_;
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
  std::vector<EpochCursor> epochs_;
};

/// Materializes `length` draws as (task_id, record) pairs.
inline std::vector<std::pair<std::string, Record>> sample_stream(const MixtureWeights& weights,
                                                                 const Registry& registry,
                                                                 std::uint64_t seed,
                                                                 std::size_t length) {
  if (length < 1) throw Error(ErrorCode::InvalidConfig, "stream length must be >= 1");
  SampleStream stream(weights, registry.sizes(), seed);
  std::vector<std::pair<std::string, Record>> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const auto d = stream.next();
    const auto& entry = registry.entries()[d.task];
    out.emplace_back(entry.spec.task_id, entry.data.train[d.record]);
  }
  return out;
}

}  // namespace taskmix
