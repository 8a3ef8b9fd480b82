#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taskmix/error.hpp"
#include "taskmix/registry.hpp"
#include "taskmix/rng.hpp"

namespace taskmix {

struct SynthTaskConfig {
  std::string task_id;
  Modality modality = Modality::classification;
  InputArity input_arity = InputArity::single_sentence;
  LabelScheme label_scheme = LabelScheme::binary;
  std::size_t n_train = 1000;
  /// 0 selects max(200, n_train / 10).
  std::size_t n_dev = 0;
  std::size_t num_labels = 2;
  std::size_t vocab_size = 200;
  double label_noise = 0.0;
  /// Fraction of the vocabulary taken from `reference`. Negative values flip
  /// the label association of every shared signal word.
  double similarity = 0.0;
  std::optional<std::size_t> reference;
  /// Tokens per document.
  std::size_t doc_length = 12;
  /// Probability that a token is a signal word of the document's label.
  double signal_rate = 0.3;
  /// Signal words owned by each label; 0 selects vocab_size / (2 * num_labels).
  std::size_t signal_words_per_label = 0;

  std::size_t dev_size() const { return n_dev ? n_dev : std::max<std::size_t>(200, n_train / 10); }
  std::size_t signal_words() const {
    return signal_words_per_label ? signal_words_per_label
                                  : std::max<std::size_t>(1, vocab_size / (2 * num_labels));
  }
};

struct SynthSuiteConfig {
  std::vector<SynthTaskConfig> tasks;
  std::uint64_t seed = 0;
};

inline void validate(const SynthSuiteConfig& config) {
  if (config.tasks.empty()) throw Error(ErrorCode::InvalidConfig, "synthetic suite has no tasks");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < config.tasks.size(); ++i) {
    const auto& t = config.tasks[i];
    const auto where = "synthetic task '" + t.task_id + "': ";
    if (t.task_id.empty()) throw Error(ErrorCode::InvalidConfig, "synthetic task without id");
    if (!ids.insert(t.task_id).second) throw Error(ErrorCode::DuplicateTask, t.task_id);
    if (t.num_labels < 2) throw Error(ErrorCode::InvalidConfig, where + "needs >= 2 labels");
    if (t.n_train < t.num_labels) throw Error(ErrorCode::InvalidConfig, where + "n_train < num_labels");
    if (t.vocab_size < 10 * t.num_labels)
      throw Error(ErrorCode::InvalidConfig, where + "vocab_size < 10 * num_labels");
    if (!(t.label_noise >= 0.0 && t.label_noise < 0.5))
      throw Error(ErrorCode::InvalidConfig, where + "label_noise must be in [0, 0.5)");
    if (!(t.similarity >= -1.0 && t.similarity <= 1.0))
      throw Error(ErrorCode::InvalidConfig, where + "similarity must be in [-1, 1]");
    if (t.similarity != 0.0 && !t.reference)
      throw Error(ErrorCode::InvalidConfig, where + "similarity needs a reference task");
    if (t.reference) {
      if (*t.reference >= i)
        throw Error(ErrorCode::InvalidConfig, where + "reference must be an earlier task");
      if (config.tasks[*t.reference].num_labels != t.num_labels)
        throw Error(ErrorCode::InvalidConfig, where + "reference must have the same label count");
    }
    if (!(t.signal_rate > 0.0 && t.signal_rate <= 1.0))
      throw Error(ErrorCode::InvalidConfig, where + "signal_rate must be in (0, 1]");
    if (t.doc_length < 2) throw Error(ErrorCode::InvalidConfig, where + "doc_length must be >= 2");
    if (t.signal_words() * t.num_labels > t.vocab_size)
      throw Error(ErrorCode::InvalidConfig, where + "signal words exceed the vocabulary");
    validate(TaskSpec{t.task_id, t.modality, t.input_arity, t.label_scheme, "x",
                      t.modality == Modality::generation ? Metric::exact_match : Metric::accuracy});
  }
}

/// Vocabulary and label layout of one generated task.
struct SynthTaskLayout {
  std::vector<std::string> label_names;
  std::vector<std::vector<std::string>> signal;  // per label
  std::vector<std::string> background;
  /// Vocabulary in canonical order: signal words label by label, then background.
  std::vector<std::string> vocabulary;
};

struct SynthTaskData {
  TaskSpec spec;
  SynthTaskLayout layout;
  std::vector<std::pair<std::string, std::string>> train;  // raw (input, target)
  std::vector<std::pair<std::string, std::string>> dev;
};

namespace detail {

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::vector<SynthTaskLayout> build_layouts(const SynthSuiteConfig& config) {
  std::vector<SynthTaskLayout> layouts;
  for (std::size_t i = 0; i < config.tasks.size(); ++i) {
    const auto& t = config.tasks[i];
    const std::size_t k = t.num_labels;
    const std::size_t m = t.signal_words();
    SynthTaskLayout lay;
    lay.signal.resize(k);
    std::size_t taken = 0;
    std::vector<std::string> shared_background;
    if (t.reference && t.similarity != 0.0) {
      const auto& ref = layouts[*t.reference];
      lay.label_names = ref.label_names;
      const auto shared = static_cast<std::size_t>(
          std::llround(std::abs(t.similarity) * static_cast<double>(t.vocab_size)));
      const std::size_t shift = t.similarity < 0.0 ? 1 : 0;
      // Walk the reference vocabulary in canonical order.
      std::size_t ref_signal_total = 0;
      for (const auto& s : ref.signal) ref_signal_total += s.size();
      for (std::size_t w = 0; w < shared && w < ref.vocabulary.size(); ++w, ++taken) {
        const auto& word = ref.vocabulary[w];
        if (w < ref_signal_total) {
          std::size_t label = 0, acc = 0;
          while (w >= acc + ref.signal[label].size()) acc += ref.signal[label++].size();
          lay.signal[(label + shift) % k].push_back(word);
        } else {
          shared_background.push_back(word);
        }
      }
    } else {
      for (std::size_t j = 0; j < k; ++j) lay.label_names.push_back("c" + std::to_string(j));
    }
    std::size_t fresh = 0;
    auto new_word = [&] { return "t" + std::to_string(i) + "w" + std::to_string(fresh++); };
    for (auto& s : lay.signal)
      while (s.size() < m && taken < t.vocab_size) {
        s.push_back(new_word());
        ++taken;
      }
    lay.background = std::move(shared_background);
    while (taken < t.vocab_size) {
      lay.background.push_back(new_word());
      ++taken;
    }
    for (const auto& s : lay.signal) lay.vocabulary.insert(lay.vocabulary.end(), s.begin(), s.end());
    lay.vocabulary.insert(lay.vocabulary.end(), lay.background.begin(), lay.background.end());
    layouts.push_back(std::move(lay));
  }
  return layouts;
}

inline std::pair<std::string, std::string> make_document(const SynthTaskConfig& t,
                                                         const SynthTaskLayout& lay, Rng& rng,
                                                         std::optional<std::size_t> forced_label) {
  const std::size_t k = t.num_labels;
  const std::size_t label = forced_label ? *forced_label : static_cast<std::size_t>(rng.below(k));
  std::string text;
  const std::size_t split = t.input_arity == InputArity::sentence_pair ? t.doc_length / 2 : 0;
  for (std::size_t w = 0; w < t.doc_length; ++w) {
    const auto& pool = lay.background.empty() || rng.bernoulli(t.signal_rate) ? lay.signal[label]
                                                                               : lay.background;
    if (w > 0) text += (split && w == split) ? " ||| " : " ";
    text += pool[static_cast<std::size_t>(rng.below(pool.size()))];
  }
  std::size_t target = label;
  if (!forced_label && rng.bernoulli(t.label_noise))
    target = (label + 1 + static_cast<std::size_t>(rng.below(k - 1))) % k;
  return {std::move(text), lay.label_names[target]};
}

}  // namespace detail

/// Generates every task of the suite in memory. Deterministic in the config.
inline std::vector<SynthTaskData> generate_suite(const SynthSuiteConfig& config) {
  validate(config);
  const auto layouts = detail::build_layouts(config);
  std::vector<SynthTaskData> out;
  for (std::size_t i = 0; i < config.tasks.size(); ++i) {
    const auto& t = config.tasks[i];
    Rng rng(derive_seed(config.seed, i));
    SynthTaskData d;
    d.spec = {t.task_id,     t.modality, t.input_arity, t.label_scheme,
              detail::lowercase(t.task_id) + ":",
              t.modality == Modality::generation ? Metric::exact_match : Metric::accuracy};
    d.layout = layouts[i];
    std::set<std::pair<std::string, std::string>> seen;
    // The first num_labels records cover every label without noise.
    for (std::size_t r = 0; r < t.n_train; ++r) {
      auto rec = detail::make_document(t, d.layout, rng,
                                       r < t.num_labels ? std::optional(r) : std::nullopt);
      seen.insert(rec);
      d.train.push_back(std::move(rec));
    }
    while (d.dev.size() < t.dev_size()) {
      auto rec = detail::make_document(t, d.layout, rng, std::nullopt);
      if (seen.count(rec)) continue;
      d.dev.push_back(std::move(rec));
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Writes the suite as a manifest plus record files and returns the manifest path.
inline std::filesystem::path generate(const SynthSuiteConfig& config,
                                      const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Unwritable, dir.string() + ": " + ec.message());
  std::vector<ManifestTask> manifest;
  for (const auto& d : generate_suite(config)) {
    const std::string train_name = d.spec.task_id + ".train.jsonl";
    const std::string dev_name = d.spec.task_id + ".dev.jsonl";
    write_records(dir / train_name, d.train);
    write_records(dir / dev_name, d.dev);
    manifest.push_back({d.spec, train_name, dev_name});
  }
  const auto path = dir / "manifest.json";
  write_manifest(path, manifest);
  return path;
}

/// Builds the registry directly, as load_tasks would from generate()'s output.
inline Registry generate_registry(const SynthSuiteConfig& config) {
  std::vector<TaskEntry> entries;
  for (const auto& d : generate_suite(config)) {
    TaskEntry e;
    e.spec = d.spec;
    e.data.task_id = d.spec.task_id;
    for (const auto& [in, tg] : d.train) e.data.train.push_back(cast_text_to_text(d.spec, in, tg));
    for (const auto& [in, tg] : d.dev) e.data.dev.push_back(cast_text_to_text(d.spec, in, tg));
    e.data.n_train = e.data.train.size();
    std::set<std::string> targets;
    for (const auto& r : e.data.train) targets.insert(r.target);
    for (const auto& r : e.data.dev)
      if (!targets.count(r.target)) ++e.data.unseen_dev_targets;
    entries.push_back(std::move(e));
  }
  return Registry(std::move(entries));
}

// ---------------------------------------------------------------------------

enum class SuitePreset { clue_like, application_like };

inline std::string_view to_string(SuitePreset p) {
  return p == SuitePreset::clue_like ? "clue_like" : "application_like";
}

inline std::optional<SuitePreset> parse_suite_preset(std::string_view s) {
  if (s == "clue_like") return SuitePreset::clue_like;
  if (s == "application_like") return SuitePreset::application_like;
  return std::nullopt;
}

/// Presets use larger dev splits than the generic default so that 99%
/// comparisons are not decided by a single dev example.
inline constexpr std::size_t kPresetMinDev = 1000;

namespace detail {

inline SynthTaskConfig preset_task(std::string id, LabelScheme scheme, InputArity arity,
                                   std::size_t n, std::size_t labels) {
  SynthTaskConfig t;
  t.task_id = std::move(id);
  t.label_scheme = scheme;
  t.input_arity = arity;
  t.n_train = n;
  t.num_labels = labels;
  t.n_dev = std::max<std::size_t>(kPresetMinDev, n / 10);
  t.label_noise = 0.1;
  t.vocab_size = std::max<std::size_t>(400, 20 * labels);
  return t;
}

}  // namespace detail

/// Task size profiles of the two benchmark families. Sizes and label schemes
/// follow the benchmark tables; generator difficulty knobs are local choices.
inline SynthSuiteConfig paper_shaped_suite(SuitePreset preset, std::uint64_t seed = 0) {
  using detail::preset_task;
  constexpr auto B = LabelScheme::binary;
  constexpr auto O = LabelScheme::ordinal;
  constexpr auto M = LabelScheme::multiclass;
  constexpr auto S = InputArity::single_sentence;
  constexpr auto P = InputArity::sentence_pair;
  SynthSuiteConfig c;
  c.seed = seed;
  if (preset == SuitePreset::clue_like) {
    c.tasks = {preset_task("CWSC", B, S, 947, 2),    preset_task("TNEWS", M, S, 49726, 15),
               preset_task("IFLYTEK", M, S, 11425, 119), preset_task("CSL", B, P, 19836, 2),
               preset_task("AFQMC", B, P, 6564, 2),  preset_task("OCNLI", M, P, 50437, 3)};
  } else {
    c.tasks = {preset_task("RC-A", B, S, 17059, 2), preset_task("RC-I", B, S, 6056, 2),
               preset_task("UC-A", B, S, 1950, 2),  preset_task("UC-I", B, S, 8624, 2),
               preset_task("PG-A", B, S, 2341, 2),  preset_task("PG-I", B, S, 2108, 2),
               preset_task("ID", B, S, 6884, 2),    preset_task("CSA", B, S, 5011, 2),
               preset_task("NR-A", B, S, 40397, 2), preset_task("NR-I", B, S, 19726, 2),
               preset_task("HS", B, S, 1328, 2),    preset_task("IDM", B, S, 1200, 2),
               preset_task("CSQR", O, S, 2489, 4),  preset_task("SEE", O, S, 9314, 5),
               preset_task("RTC", M, S, 8447, 12),  preset_task("CSC", M, S, 8168, 10),
               preset_task("EC", M, S, 6564, 8)};
  }
  return c;
}

/// Appends a generation-like task whose targets reuse the label vocabulary of
/// `reference` and whose shared signal words carry the given similarity.
inline SynthSuiteConfig with_generation_task(SynthSuiteConfig config, std::string task_id,
                                             std::size_t n_train, std::size_t reference,
                                             double similarity) {
  if (reference >= config.tasks.size())
    throw Error(ErrorCode::InvalidConfig, "generation task reference out of range");
  const auto& ref = config.tasks[reference];
  SynthTaskConfig t = ref;
  t.task_id = std::move(task_id);
  t.modality = Modality::generation;
  t.label_scheme = LabelScheme::freeform;
  t.input_arity = InputArity::single_sentence;
  t.n_train = n_train;
  t.n_dev = 0;
  t.reference = reference;
  t.similarity = similarity;
  config.tasks.push_back(std::move(t));
  return config;
}

}  // namespace taskmix
