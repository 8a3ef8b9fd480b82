// taskmix: command-line runner for multi-task mixture experiments.
//
//   taskmix synth    --preset clue_like --seed 7 --out data/
//   taskmix baseline --config exp.json
//   taskmix train    --config exp.json
//   taskmix compare  --config exp.json
//   taskmix report   run/report.json [more.json ...]

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "taskmix/taskmix.hpp"

namespace fs = std::filesystem;
using namespace taskmix;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> output;
  std::optional<std::string> taxonomy;
  std::optional<std::size_t> step_cap;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> baseline_epochs;
  std::optional<double> learning_rate;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> eval_every;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> workers;
  std::optional<std::string> baselines;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "Experiment config (JSON)")->required();
  cmd->add_option("-o,--output", o.output, "Output directory");
  cmd->add_option("--taxonomy", o.taxonomy, "none | modality_split | ss | bm | bom");
  cmd->add_option("--step-cap", o.step_cap, "Total step cap per model");
  cmd->add_option("--budget", o.budget, "Fixed total steps shared by all groups");
  cmd->add_option("--baseline-epochs", o.baseline_epochs, "Single-task epochs");
  cmd->add_option("--lr", o.learning_rate, "Learning rate");
  cmd->add_option("--batch-size", o.batch_size, "Batch size");
  cmd->add_option("--eval-every", o.eval_every, "Evaluation interval in steps");
  cmd->add_option("--seed", o.seeds, "Replicate seed (repeatable)");
  cmd->add_option("--workers", o.workers, "Concurrent runs (default: TASKMIX_WORKERS or 1)");
}

ExperimentConfig resolve(const Overrides& o) {
  auto c = load_experiment(o.config);
  if (o.output) c.output = *o.output;
  if (o.taxonomy) {
    auto r = parse_taxonomy_rule(*o.taxonomy);
    if (!r) throw Error(ErrorCode::InvalidConfig, "unknown taxonomy rule '" + *o.taxonomy + "'");
    c.taxonomy = *r;
  }
  if (o.step_cap) c.step_cap = *o.step_cap;
  if (o.budget) c.budget = *o.budget;
  if (o.baseline_epochs) c.baseline_epochs = *o.baseline_epochs;
  if (o.learning_rate) c.trainer.learning_rate = *o.learning_rate;
  if (o.batch_size) c.trainer.batch_size = *o.batch_size;
  if (o.eval_every) c.trainer.eval_every = *o.eval_every;
  if (!o.seeds.empty()) c.seeds = o.seeds;
  c.workers = o.workers ? *o.workers : (std::getenv("TASKMIX_WORKERS") ? workers_from_env() : c.workers);
  validate(c);
  return c;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path seed_dir(const ExperimentConfig& c, std::uint64_t seed) {
  return c.seeds.size() == 1 ? c.output : c.output / ("seed-" + std::to_string(seed));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::Unwritable, dir.string());
}

struct Replicate {
  Registry registry;
  PreparedData data;
  Baselines baselines;
};

TrainerConfig trainer_for(const ExperimentConfig& c, std::uint64_t seed) {
  auto t = c.trainer;
  t.seed = seed;
  return t;
}

Replicate prepare(const ExperimentConfig& c, std::uint64_t seed,
                  const std::optional<std::string>& baselines_path) {
  auto registry = load_data(c, seed);
  PreparedData data(registry, c.trainer.dimension);
  Baselines b;
  const auto cached = baselines_path ? fs::path(*baselines_path) : seed_dir(c, seed) / "baselines.json";
  if (baselines_path || fs::exists(cached)) {
    std::ifstream in(cached, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingFile, cached.string());
    b = baselines_from_json(nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false));
  } else {
    b = run_single_task_baselines(data, trainer_for(c, seed), c.baseline_epochs, c.workers);
    ensure_dir(seed_dir(c, seed));
    write_text(cached, to_json(b).dump(2) + "\n");
  }
  for (const auto& t : data.tasks()) b.at(t.spec.task_id);
  return {std::move(registry), std::move(data), std::move(b)};
}

void stamp(RunReport& r, const ExperimentConfig& c, std::uint64_t seed) {
  r.provenance["seed"] = seed;
  r.provenance["step_cap"] = c.step_cap ? nlohmann::json(*c.step_cap) : nlohmann::json(nullptr);
  r.provenance["budget"] = c.budget ? nlohmann::json(*c.budget) : nlohmann::json(nullptr);
  r.provenance["data"] = c.manifest ? nlohmann::json{{"manifest", c.manifest->string()}}
                                    : nlohmann::json{{"synth", to_string(c.synth->preset)},
                                                     {"synth_seed", c.synth->seed}};
  r.metadata["created_at"] = timestamp();
}

int cmd_synth(const std::string& preset_name, std::uint64_t seed, const std::string& out,
              const std::optional<std::string>& gen_id, std::size_t gen_n, std::size_t gen_ref,
              double gen_sim) {
  auto preset = parse_suite_preset(preset_name);
  if (!preset) throw Error(ErrorCode::InvalidConfig, "unknown preset '" + preset_name + "'");
  auto suite = paper_shaped_suite(*preset, seed);
  if (gen_id) suite = with_generation_task(std::move(suite), *gen_id, gen_n, gen_ref, gen_sim);
  const auto manifest = generate(suite, out);
  std::cout << manifest.string() << "\n";
  return 0;
}

int cmd_baseline(const Overrides& o) {
  const auto c = resolve(o);
  for (auto seed : c.seeds) {
    const auto rep = prepare(c, seed, std::nullopt);
    for (const auto& b : rep.baselines.tasks)
      std::printf("seed %llu  %-10s baseline %s  saturation %g\n",
                  static_cast<unsigned long long>(seed), b.task_id.c_str(),
                  format_metric(b.baseline).c_str(), b.saturation_epochs);
  }
  return 0;
}

void write_aggregate(const fs::path& dir, const std::vector<std::vector<RunReport>>& by_method) {
  nlohmann::json agg = nlohmann::json::array();
  for (const auto& reports : by_method) agg.push_back(aggregate(reports));
  write_text(dir / "aggregate.json", agg.dump(2) + "\n");
}

int cmd_train(const Overrides& o) {
  const auto c = resolve(o);
  if (c.methods.size() != 1)
    throw Error(ErrorCode::InvalidConfig, "train needs exactly one method; use compare for several");
  std::vector<RunReport> reports;
  for (auto seed : c.seeds) {
    const auto rep = prepare(c, seed, o.baselines);
    auto r = run_multi_task(c.methods.front(), rep.data, rep.registry, rep.baselines,
                            trainer_for(c, seed), c.taxonomy, c.step_cap, c.workers, c.budget);
    stamp(r, c, seed);
    emit_report(r, seed_dir(c, seed));
    std::cout << render_table({r});
    reports.push_back(std::move(r));
  }
  if (c.seeds.size() > 1) write_aggregate(c.output, {reports});
  return 0;
}

int cmd_compare(const Overrides& o) {
  const auto c = resolve(o);
  if (c.methods.empty()) throw Error(ErrorCode::InvalidConfig, "compare needs at least one method");
  std::vector<std::vector<RunReport>> by_method(c.methods.size());
  for (auto seed : c.seeds) {
    const auto rep = prepare(c, seed, o.baselines);
    auto reports = compare(c.methods, rep.data, rep.registry, rep.baselines, trainer_for(c, seed),
                           c.taxonomy, c.step_cap, c.workers, c.budget);
    const auto dir = seed_dir(c, seed);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      stamp(reports[i], c, seed);
      emit_report(reports[i], dir / reports[i].method);
      by_method[i].push_back(reports[i]);
    }
    const auto table = render_table(reports);
    write_text(dir / "tables.md", table);
    std::cout << table;
  }
  if (c.seeds.size() > 1) write_aggregate(c.output, by_method);
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::optional<std::string>& out) {
  std::vector<RunReport> reports;
  for (const auto& p : inputs) reports.push_back(read_report(p));
  const auto table = render_table(reports);
  if (out) {
    ensure_dir(*out);
    write_text(fs::path(*out) / "tables.md", table);
    if (reports.size() == 1) write_text(fs::path(*out) / "curves.csv", render_curves_csv(reports[0].curves));
  }
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task mixture and curriculum experiments"};
  app.require_subcommand(1);

  std::string preset = "clue_like", out;
  std::uint64_t synth_seed = 0;
  std::optional<std::string> gen_id;
  std::size_t gen_n = 1000, gen_ref = 0;
  double gen_sim = -1.0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic suite (manifest + records)");
  synth->add_option("--preset", preset, "clue_like | application_like");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("-o,--out", out, "Output directory")->required();
  synth->add_option("--generation-task", gen_id, "Append a generation-like task with this id");
  synth->add_option("--generation-size", gen_n, "Training records of the generation-like task");
  synth->add_option("--generation-reference", gen_ref, "Index of the task it borrows vocabulary from");
  synth->add_option("--generation-similarity", gen_sim, "Vocabulary similarity in [-1, 1]");

  Overrides base_o, train_o, compare_o;
  auto* baseline = app.add_subcommand("baseline", "Single-task baselines and saturation epochs");
  add_common(baseline, base_o);
  auto* train = app.add_subcommand("train", "One multi-task method");
  add_common(train, train_o);
  train->add_option("--baselines", train_o.baselines, "Precomputed baselines.json");
  auto* cmp = app.add_subcommand("compare", "Several methods on equal step budgets");
  add_common(cmp, compare_o);
  cmp->add_option("--baselines", compare_o.baselines, "Precomputed baselines.json");

  std::vector<std::string> report_inputs;
  std::optional<std::string> report_out;
  auto* report = app.add_subcommand("report", "Render tables from report.json files");
  report->add_option("inputs", report_inputs, "report.json files")->required();
  report->add_option("-o,--out", report_out, "Write tables.md (and curves.csv) here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::Config);
  }

  try {
    if (*synth) return cmd_synth(preset, synth_seed, out, gen_id, gen_n, gen_ref, gen_sim);
    if (*baseline) return cmd_baseline(base_o);
    if (*train) return cmd_train(train_o);
    if (*cmp) return cmd_compare(compare_o);
    if (*report) return cmd_report(report_inputs, report_out);
  } catch (const Error& e) {
    std::cerr << "taskmix: " << e.what() << "\n";
    return static_cast<int>(exit_code_for(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "taskmix: internal error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::Internal);
  }
  return static_cast<int>(ExitCode::Internal);
}
