#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "taskmix/curriculum.hpp"
#include "taskmix/error.hpp"
#include "taskmix/metrics.hpp"
#include "taskmix/registry.hpp"
#include "taskmix/report.hpp"
#include "taskmix/rng.hpp"
#include "taskmix/samplers.hpp"
#include "taskmix/synth.hpp"
#include "taskmix/taxonomy.hpp"
#include "taskmix/trainer.hpp"

namespace taskmix {

// ---------------------------------------------------------------------------
// Methods

enum class MethodKind {
  instance_balanced,
  class_balanced,
  temperature_scaled,
  capped_temperature_scaled,
  two_stage,
};

inline std::string_view to_string(MethodKind k) {
  switch (k) {
    case MethodKind::instance_balanced: return "instance_balanced";
    case MethodKind::class_balanced: return "class_balanced";
    case MethodKind::temperature_scaled: return "temperature_scaled";
    case MethodKind::capped_temperature_scaled: return "capped_temperature_scaled";
    case MethodKind::two_stage: return "two_stage";
  }
  return "?";
}

/// A multi-task training method. Single-stage kinds train every task for
/// `epochs`; two_stage uses the resource split and both stage epoch counts.
struct MethodSpec {
  MethodKind kind = MethodKind::two_stage;
  double tau = 2.0;
  std::size_t cap = 20000;
  double threshold = kDefaultSaturationThreshold;
  double stage1_epochs = 1.0;
  double stage2_epochs = 10.0;
  double epochs = 10.0;
  std::string label;  // display name; defaults to the kind

  std::string name() const { return label.empty() ? std::string(to_string(kind)) : label; }

  StrategyConfig strategy() const {
    switch (kind) {
      case MethodKind::instance_balanced: return StrategyConfig::instance_balanced();
      case MethodKind::class_balanced: return StrategyConfig::class_balanced();
      case MethodKind::temperature_scaled: return StrategyConfig::temperature_scaled(tau);
      case MethodKind::capped_temperature_scaled:
      case MethodKind::two_stage: return StrategyConfig::capped(cap, tau);
    }
    return {};
  }
};

/// Table defaults of the two benchmark families.
struct PaperDefaults {
  std::size_t cap;
  double tau;
};
inline constexpr PaperDefaults kClueDefaults{20000, 2.0};
inline constexpr PaperDefaults kApplicationDefaults{8000, 3.33};
inline constexpr std::size_t kPaperStepCap = 15000;

inline nlohmann::json to_json(const MethodSpec& m) {
  nlohmann::json j{{"kind", to_string(m.kind)}, {"name", m.name()}};
  switch (m.kind) {
    case MethodKind::instance_balanced:
    case MethodKind::class_balanced: j["epochs"] = m.epochs; break;
    case MethodKind::temperature_scaled:
      j["epochs"] = m.epochs;
      j["tau"] = m.tau;
      break;
    case MethodKind::capped_temperature_scaled:
      j["epochs"] = m.epochs;
      j["tau"] = m.tau;
      j["cap"] = m.cap;
      break;
    case MethodKind::two_stage:
      j["tau"] = m.tau;
      j["cap"] = m.cap;
      j["threshold"] = m.threshold;
      j["stage1_epochs"] = m.stage1_epochs;
      j["stage2_epochs"] = m.stage2_epochs;
      break;
  }
  return j;
}

inline MethodSpec method_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw Error(ErrorCode::InvalidConfig, "method needs a string 'kind'");
  const auto kind = j["kind"].get<std::string>();
  MethodSpec m;
  if (kind == "instance_balanced") m.kind = MethodKind::instance_balanced;
  else if (kind == "class_balanced") m.kind = MethodKind::class_balanced;
  else if (kind == "temperature_scaled") m.kind = MethodKind::temperature_scaled;
  else if (kind == "capped_temperature_scaled" || kind == "capped") m.kind = MethodKind::capped_temperature_scaled;
  else if (kind == "two_stage") m.kind = MethodKind::two_stage;
  else if (kind == "few_shot" || kind == "unimax")
    throw Error(ErrorCode::UnsupportedMethod, "method '" + kind + "' is not implemented");
  else
    throw Error(ErrorCode::InvalidConfig, "unknown method kind '" + kind + "'");
  try {
    m.tau = j.value("tau", m.tau);
    m.cap = j.value("cap", m.cap);
    m.threshold = j.value("threshold", m.threshold);
    m.stage1_epochs = j.value("stage1_epochs", m.stage1_epochs);
    m.stage2_epochs = j.value("stage2_epochs", m.stage2_epochs);
    m.epochs = j.value("epochs", m.epochs);
    m.label = j.value("name", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("method: ") + e.what());
  }
  if (!(m.epochs > 0.0) || !(m.stage1_epochs > 0.0) || !(m.stage2_epochs > 0.0))
    throw Error(ErrorCode::InvalidConfig, "method epochs must be > 0");
  validate(m.strategy());
  return m;
}

// ---------------------------------------------------------------------------
// Single-task baselines

struct BaselineResult {
  std::string task_id;
  double baseline = 0.0;
  double saturation_epochs = 0.0;
  std::vector<std::pair<double, double>> curve;  // (epoch, dev metric)

  bool operator==(const BaselineResult&) const = default;
};

struct Baselines {
  std::vector<BaselineResult> tasks;

  const BaselineResult& at(std::string_view id) const {
    for (const auto& b : tasks)
      if (b.task_id == id) return b;
    throw Error(ErrorCode::MissingTask, "no baseline for '" + std::string(id) + "'");
  }

  std::map<std::string, double> saturation() const {
    std::map<std::string, double> out;
    for (const auto& b : tasks) out[b.task_id] = b.saturation_epochs;
    return out;
  }

  bool operator==(const Baselines&) const = default;
};

inline nlohmann::json to_json(const Baselines& b) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : b.tasks) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& [e, m] : t.curve) curve.push_back({e, m});
    arr.push_back({{"task_id", t.task_id},
                   {"baseline", t.baseline},
                   {"saturation_epochs", t.saturation_epochs},
                   {"curve", curve}});
  }
  return {{"baselines", arr}};
}

inline Baselines baselines_from_json(const nlohmann::json& j) {
  try {
    Baselines b;
    for (const auto& t : j.at("baselines")) {
      BaselineResult r{t.at("task_id").get<std::string>(), t.at("baseline").get<double>(),
                       t.at("saturation_epochs").get<double>(), {}};
      for (const auto& p : t.at("curve")) r.curve.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      b.tasks.push_back(std::move(r));
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed baselines: ") + e.what());
  }
}

/// Worker count from TASKMIX_WORKERS, defaulting to 1.
inline std::size_t workers_from_env() {
  if (const char* v = std::getenv("TASKMIX_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && n >= 1) return static_cast<std::size_t>(n);
    throw Error(ErrorCode::InvalidConfig, "TASKMIX_WORKERS must be a positive integer");
  }
  return 1;
}

/// Runs `jobs[i]()` for every i on up to `workers` threads. Results are
/// written by index, so the outcome does not depend on scheduling.
template <typename Job>
void run_parallel(std::size_t count, std::size_t workers, Job&& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Trains one model per task for `epochs` epochs, evaluating at every epoch
/// boundary. The baseline is the best dev metric; saturation is its epoch.
inline Baselines run_single_task_baselines(const PreparedData& data, const TrainerConfig& config,
                                           std::size_t epochs = 10, std::size_t workers = 1) {
  if (data.tasks().empty()) throw Error(ErrorCode::NoTasks, "no tasks to train");
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "baseline epochs must be >= 1");
  Baselines out;
  out.tasks.resize(data.tasks().size());
  run_parallel(data.tasks().size(), workers, [&](std::size_t i) {
    const auto& task = data.tasks()[i];
    const auto& id = task.spec.task_id;
    const std::size_t n = task.train_x.size();
    auto plan = single_stage_plan({id}, StrategyConfig::instance_balanced(),
                                  static_cast<double>(epochs));
    TrainOptions opts;
    for (std::size_t e = 1; e <= epochs; ++e)
      opts.eval_steps.push_back((e * n + config.batch_size - 1) / config.batch_size);
    opts.stage_steps = std::vector<std::size_t>{opts.eval_steps.back()};
    const auto result = train(plan, data, config, opts);
    BaselineResult r{id, 0.0, 0.0, {}};
    const auto dev = curve_of(result.curve, id);
    for (std::size_t e = 0; e < dev.size(); ++e)
      r.curve.emplace_back(static_cast<double>(e + 1), dev[e].second);
    r.saturation_epochs = measure_saturation(r.curve);
    for (const auto& [_, m] : r.curve) r.baseline = std::max(r.baseline, m);
    out.tasks[i] = std::move(r);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Multi-task runs

inline CurriculumPlan plan_for(const MethodSpec& method, const std::vector<std::string>& task_ids,
                               const Baselines& baselines, std::optional<std::size_t> step_cap) {
  if (method.kind == MethodKind::two_stage) {
    const auto cls = classify_resources(task_ids, baselines.saturation(), method.threshold);
    return build_two_stage_plan(cls, method.stage1_epochs, method.stage2_epochs, method.cap,
                                method.tau, step_cap);
  }
  return single_stage_plan(task_ids, method.strategy(), method.epochs, step_cap);
}

inline nlohmann::json to_json(const CurriculumPlan& plan, const std::vector<std::size_t>& steps) {
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const auto& s = plan.stages[i];
    nlohmann::json strategy{{"kind", to_string(s.strategy.kind)}};
    if (s.strategy.tau) strategy["tau"] = *s.strategy.tau;
    if (s.strategy.cap) strategy["cap"] = *s.strategy.cap;
    stages.push_back({{"name", s.name},
                      {"tasks", s.task_ids},
                      {"strategy", strategy},
                      {"epochs", s.epochs},
                      {"steps", i < steps.size() ? steps[i] : 0}});
  }
  return {{"stages", stages},
          {"step_cap", plan.step_cap ? nlohmann::json(*plan.step_cap) : nlohmann::json(nullptr)}};
}

struct GroupPlan {
  TaskGroup group;
  CurriculumPlan plan;
  std::vector<std::size_t> steps;
};

/// Splits `total` steps across groups in proportion to their task counts.
/// Remainders go to the earliest groups.
inline std::vector<std::size_t> split_budget(const TaskPartition& partition, std::size_t total) {
  std::size_t tasks = 0;
  for (const auto& g : partition.groups) tasks += g.task_ids.size();
  if (tasks == 0) throw Error(ErrorCode::EmptyTaskSet, "partition has no tasks");
  std::vector<std::size_t> out;
  std::size_t assigned = 0;
  for (const auto& g : partition.groups) {
    out.push_back(total * g.task_ids.size() / tasks);
    assigned += out.back();
  }
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++out[i % out.size()];
  return out;
}

/// Rescales stage steps (up or down) so they sum to exactly `budget`.
inline std::vector<std::size_t> fit_to_budget(std::vector<std::size_t> steps, std::size_t budget) {
  std::size_t total = 0;
  for (auto s : steps) total += s;
  if (steps.empty()) return steps;
  if (total == 0) {
    steps.back() = budget;
    return steps;
  }
  std::size_t assigned = 0;
  for (auto& s : steps) {
    s = s * budget / total;
    assigned += s;
  }
  steps.back() += budget - assigned;
  return steps;
}

/// Plans every taxonomy group for a method and resolves its step counts. With
/// a total budget, groups share it by task count and each plan is fitted to
/// its share.
inline std::vector<GroupPlan> plan_groups(const MethodSpec& method, const TaskPartition& partition,
                                          const PreparedData& data, const Baselines& baselines,
                                          const TrainerConfig& config,
                                          std::optional<std::size_t> step_cap,
                                          std::optional<std::size_t> budget = std::nullopt) {
  std::vector<GroupPlan> out;
  const auto shares = budget ? split_budget(partition, *budget) : std::vector<std::size_t>{};
  for (std::size_t i = 0; i < partition.groups.size(); ++i) {
    const auto& g = partition.groups[i];
    auto plan = plan_for(method, g.task_ids, baselines, step_cap);
    auto steps = resolve_steps(plan, data.sizes(), config.batch_size);
    if (budget) steps = fit_to_budget(std::move(steps), shares[i]);
    out.push_back({g, std::move(plan), std::move(steps)});
  }
  return out;
}

inline std::size_t total(const std::vector<std::size_t>& steps) {
  std::size_t t = 0;
  for (auto s : steps) t += s;
  return t;
}

/// Scales every method's per-group steps down to the smallest total among the
/// methods, so each group trains on the same budget under every method.
inline void equalize_budgets(std::vector<std::vector<GroupPlan>>& per_method) {
  if (per_method.empty()) return;
  for (std::size_t g = 0; g < per_method.front().size(); ++g) {
    std::size_t budget = total(per_method.front()[g].steps);
    for (const auto& m : per_method) budget = std::min(budget, total(m[g].steps));
    for (auto& m : per_method) m[g].steps = scale_to_budget(m[g].steps, budget);
  }
}

/// Trains one model per group and assembles the report.
inline RunReport run_groups(const MethodSpec& method, const std::vector<GroupPlan>& groups,
                            const PreparedData& data, const Baselines& baselines,
                            const TrainerConfig& config, TaxonomyRule rule,
                            std::size_t workers = 1) {
  RunReport report;
  report.method = method.name();
  std::vector<TrainResult> results(groups.size(),
                                   TrainResult{LinearModel({}, config.dimension, false), {}, {}});
  run_parallel(groups.size(), workers, [&](std::size_t i) {
    TrainOptions opts;
    opts.stage_steps = groups[i].steps;
    results[i] = train(groups[i].plan, data, config, opts);
  });

  nlohmann::json group_json = nlohmann::json::array();
  for (std::size_t i = 0; i < groups.size(); ++i) {
    group_json.push_back({{"name", groups[i].group.name},
                          {"tasks", groups[i].group.task_ids},
                          {"plan", to_json(groups[i].plan, groups[i].steps)}});
    report.curves.insert(report.curves.end(), results[i].curve.begin(), results[i].curve.end());
  }
  for (const auto& t : data.tasks()) {
    const auto& id = t.spec.task_id;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto& ids = groups[i].group.task_ids;
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) continue;
      const auto dev = curve_of(results[i].curve, id);
      if (dev.empty()) throw Error(ErrorCode::Internal, "no evaluation for '" + id + "'");
      report.tasks.push_back({id, groups[i].group.name, baselines.at(id).baseline,
                              dev.back().second, false});
    }
  }
  finalize(report);
  report.provenance = {{"method", to_json(method)},
                       {"taxonomy", to_string(rule)},
                       {"groups", group_json},
                       {"trainer",
                        {{"learning_rate", config.learning_rate},
                         {"batch_size", config.batch_size},
                         {"l2", config.l2},
                         {"eval_every", config.eval_every},
                         {"dimension", config.dimension},
                         {"shared_trunk", config.shared_trunk},
                         {"seed", config.seed}}},
                       {"rng", Rng::kName},
                       {"step_cap_scope", "total over all stages, per model"},
                       {"saturation_rule", "epoch of best single-task dev metric, earliest on ties"}};
  return report;
}

inline RunReport run_multi_task(const MethodSpec& method, const PreparedData& data,
                                const Registry& registry, const Baselines& baselines,
                                const TrainerConfig& config, TaxonomyRule rule,
                                std::optional<std::size_t> step_cap, std::size_t workers = 1,
                                std::optional<std::size_t> budget = std::nullopt) {
  const auto part = partition(registry, rule);
  const auto groups = plan_groups(method, part, data, baselines, config, step_cap, budget);
  return run_groups(method, groups, data, baselines, config, rule, workers);
}

/// Runs several methods on the same data and baselines with equal budgets.
inline std::vector<RunReport> compare(const std::vector<MethodSpec>& methods,
                                      const PreparedData& data, const Registry& registry,
                                      const Baselines& baselines, const TrainerConfig& config,
                                      TaxonomyRule rule, std::optional<std::size_t> step_cap,
                                      std::size_t workers = 1,
                                      std::optional<std::size_t> budget = std::nullopt) {
  const auto part = partition(registry, rule);
  std::vector<std::vector<GroupPlan>> plans;
  for (const auto& m : methods)
    plans.push_back(plan_groups(m, part, data, baselines, config, step_cap, budget));
  equalize_budgets(plans);
  std::vector<RunReport> reports;
  for (std::size_t i = 0; i < methods.size(); ++i)
    reports.push_back(run_groups(methods[i], plans[i], data, baselines, config, rule, workers));
  return reports;
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct SynthSource {
  SuitePreset preset = SuitePreset::clue_like;
  std::uint64_t seed = 0;
  std::optional<double> label_noise;
  struct Generation {
    std::string task_id;
    std::size_t n_train = 0;
    std::size_t reference = 0;
    double similarity = -1.0;
  };
  std::optional<Generation> generation;
};

struct ExperimentConfig {
  std::optional<std::filesystem::path> manifest;
  std::optional<SynthSource> synth;
  TaxonomyRule taxonomy = TaxonomyRule::none;
  std::vector<MethodSpec> methods;
  TrainerConfig trainer;
  std::optional<std::size_t> step_cap = kPaperStepCap;
  /// Fixed total steps shared by all groups; replaces epoch-derived counts.
  std::optional<std::size_t> budget;
  std::size_t baseline_epochs = 10;
  std::vector<std::uint64_t> seeds = {0};
  std::filesystem::path output = "taskmix-out";
  std::size_t workers = 1;
};

inline void validate(const ExperimentConfig& c) {
  if (c.manifest.has_value() == c.synth.has_value())
    throw Error(ErrorCode::InvalidConfig, "exactly one of data.manifest / data.synth is required");
  if (c.seeds.empty()) throw Error(ErrorCode::InvalidConfig, "seeds must be non-empty");
  if (c.baseline_epochs < 1) throw Error(ErrorCode::InvalidConfig, "baseline_epochs must be >= 1");
  if (c.step_cap && *c.step_cap < 1) throw Error(ErrorCode::InvalidConfig, "step_cap must be >= 1");
  if (c.budget && *c.budget < 1) throw Error(ErrorCode::InvalidConfig, "budget must be >= 1");
  if (c.workers < 1) throw Error(ErrorCode::InvalidConfig, "workers must be >= 1");
  validate(c.trainer);
}

inline SynthSuiteConfig suite_config(const SynthSource& s, std::uint64_t replicate_seed) {
  auto suite = paper_shaped_suite(s.preset, derive_seed(s.seed, replicate_seed));
  if (s.label_noise)
    for (auto& t : suite.tasks) t.label_noise = *s.label_noise;
  if (s.generation)
    suite = with_generation_task(std::move(suite), s.generation->task_id, s.generation->n_train,
                                 s.generation->reference, s.generation->similarity);
  return suite;
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {}) {
  ExperimentConfig c;
  try {
    const auto& data = j.at("data");
    if (data.contains("manifest")) c.manifest = base_dir / data["manifest"].get<std::string>();
    if (data.contains("synth")) {
      const auto& s = data["synth"];
      SynthSource src;
      const auto preset = s.at("preset").get<std::string>();
      if (auto p = parse_suite_preset(preset)) src.preset = *p;
      else throw Error(ErrorCode::InvalidConfig, "unknown synth preset '" + preset + "'");
      src.seed = s.value("seed", std::uint64_t{0});
      if (s.contains("label_noise")) src.label_noise = s["label_noise"].get<double>();
      if (s.contains("generation")) {
        const auto& g = s["generation"];
        src.generation = SynthSource::Generation{g.at("task_id").get<std::string>(),
                                                 g.at("n_train").get<std::size_t>(),
                                                 g.at("reference").get<std::size_t>(),
                                                 g.value("similarity", -1.0)};
      }
      c.synth = src;
    }
    const auto rule = j.value("taxonomy", std::string("none"));
    if (auto r = parse_taxonomy_rule(rule)) c.taxonomy = *r;
    else throw Error(ErrorCode::InvalidConfig, "unknown taxonomy rule '" + rule + "'");
    if (j.contains("method")) c.methods.push_back(method_from_json(j["method"]));
    if (j.contains("methods"))
      for (const auto& m : j["methods"]) c.methods.push_back(method_from_json(m));
    if (j.contains("trainer")) {
      const auto& t = j["trainer"];
      c.trainer.learning_rate = t.value("learning_rate", c.trainer.learning_rate);
      c.trainer.batch_size = t.value("batch_size", c.trainer.batch_size);
      c.trainer.l2 = t.value("l2", c.trainer.l2);
      c.trainer.eval_every = t.value("eval_every", c.trainer.eval_every);
      c.trainer.dimension = t.value("dimension", c.trainer.dimension);
      c.trainer.shared_trunk = t.value("shared_trunk", c.trainer.shared_trunk);
    }
    if (j.contains("step_cap"))
      c.step_cap = j["step_cap"].is_null() ? std::nullopt
                                           : std::optional(j["step_cap"].get<std::size_t>());
    if (j.contains("budget") && !j["budget"].is_null()) c.budget = j["budget"].get<std::size_t>();
    c.baseline_epochs = j.value("baseline_epochs", c.baseline_epochs);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("output")) c.output = base_dir / j["output"].get<std::string>();
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("experiment config: ") + e.what());
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

/// Registry for one replicate: the manifest as-is, or the synthetic suite
/// regenerated from the replicate seed.
inline Registry load_data(const ExperimentConfig& c, std::uint64_t replicate_seed) {
  if (c.manifest) return load_tasks(*c.manifest);
  return generate_registry(suite_config(*c.synth, replicate_seed));
}

/// Mean and (population) standard deviation across replicate reports.
inline nlohmann::json aggregate(const std::vector<RunReport>& reports) {
  auto stats = [](const std::vector<double>& v) {
    if (v.empty()) return nlohmann::json(nullptr);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return nlohmann::json{{"mean", mean}, {"std", std::sqrt(var / static_cast<double>(v.size()))},
                          {"n", v.size()}};
  };
  std::vector<double> avg, num, ovh;
  for (const auto& r : reports) {
    avg.push_back(r.macro_avg);
    num.push_back(static_cast<double>(r.num_qualified));
    if (r.overhead) ovh.push_back(*r.overhead);
  }
  return {{"method", reports.empty() ? "" : reports.front().method},
          {"replicates", reports.size()},
          {"macro_avg", stats(avg)},
          {"num_qualified", stats(num)},
          {"overhead", stats(ovh)}};
}

}  // namespace taskmix
