#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "taskmix/error.hpp"

namespace taskmix {

enum class Modality { classification, generation };
enum class InputArity { single_sentence, sentence_pair };
enum class LabelScheme { binary, ordinal, multiclass, freeform };
enum class Metric { accuracy, exact_match };

namespace detail {

template <typename Enum, std::size_t N>
struct EnumNames {
  std::array<std::pair<Enum, std::string_view>, N> items;

  std::string_view name(Enum value) const {
    for (const auto& [v, n] : items)
      if (v == value) return n;
    return "?";
  }

  std::optional<Enum> parse(std::string_view text) const {
    for (const auto& [v, n] : items)
      if (n == text) return v;
    return std::nullopt;
  }
};

inline constexpr EnumNames<Modality, 2> kModalityNames{
    {{{Modality::classification, "classification"}, {Modality::generation, "generation"}}}};
inline constexpr EnumNames<InputArity, 2> kArityNames{
    {{{InputArity::single_sentence, "single_sentence"},
      {InputArity::sentence_pair, "sentence_pair"}}}};
inline constexpr EnumNames<LabelScheme, 4> kSchemeNames{{{{LabelScheme::binary, "binary"},
                                                          {LabelScheme::ordinal, "ordinal"},
                                                          {LabelScheme::multiclass, "multiclass"},
                                                          {LabelScheme::freeform, "freeform"}}}};
inline constexpr EnumNames<Metric, 2> kMetricNames{
    {{{Metric::accuracy, "accuracy"}, {Metric::exact_match, "exact_match"}}}};

}  // namespace detail

inline std::string_view to_string(Modality m) { return detail::kModalityNames.name(m); }
inline std::string_view to_string(InputArity a) { return detail::kArityNames.name(a); }
inline std::string_view to_string(LabelScheme s) { return detail::kSchemeNames.name(s); }
inline std::string_view to_string(Metric m) { return detail::kMetricNames.name(m); }

inline std::optional<Modality> parse_modality(std::string_view s) {
  return detail::kModalityNames.parse(s);
}
inline std::optional<InputArity> parse_input_arity(std::string_view s) {
  return detail::kArityNames.parse(s);
}
inline std::optional<LabelScheme> parse_label_scheme(std::string_view s) {
  return detail::kSchemeNames.parse(s);
}
inline std::optional<Metric> parse_metric(std::string_view s) {
  return detail::kMetricNames.parse(s);
}

struct TaskSpec {
  std::string task_id;
  Modality modality = Modality::classification;
  InputArity input_arity = InputArity::single_sentence;
  LabelScheme label_scheme = LabelScheme::binary;
  std::string prefix;
  Metric metric = Metric::accuracy;

  bool operator==(const TaskSpec&) const = default;
};

/// Throws InvalidTaskSpec when the spec breaks a structural invariant.
inline void validate(const TaskSpec& spec) {
  if (spec.task_id.empty()) throw Error(ErrorCode::InvalidTaskSpec, "empty task_id");
  if (spec.prefix.empty())
    throw Error(ErrorCode::InvalidTaskSpec, "task '" + spec.task_id + "' has an empty prefix");
  const bool freeform = spec.label_scheme == LabelScheme::freeform;
  if ((spec.modality == Modality::generation) != freeform)
    throw Error(ErrorCode::InvalidTaskSpec,
                "task '" + spec.task_id + "': generation tasks must use the freeform label scheme "
                "and classification tasks must not");
}

struct Record {
  std::string input;
  std::string target;

  auto operator<=>(const Record&) const = default;
};

struct TaskDataset {
  std::string task_id;
  std::vector<Record> train;
  std::vector<Record> dev;
  std::size_t n_train = 0;
  /// Dev records whose target never occurs in train. They stay in the split and
  /// can never be scored correct.
  std::size_t unseen_dev_targets = 0;

  bool operator==(const TaskDataset&) const = default;
};

/// Separator placed between the task prefix and the raw input.
inline constexpr std::string_view kPrefixSeparator = " ";

/// Text-to-text casting: prepend the task prefix to the raw input.
/// Not idempotent; callers cast raw text exactly once.
inline Record cast_text_to_text(const TaskSpec& spec, std::string_view raw_input,
                                std::string_view raw_target) {
  if (raw_input.empty())
    throw Error(ErrorCode::EmptyInput, "task '" + spec.task_id + "': empty raw input");
  Record r;
  r.input.reserve(spec.prefix.size() + kPrefixSeparator.size() + raw_input.size());
  r.input.append(spec.prefix).append(kPrefixSeparator).append(raw_input);
  r.target = std::string(raw_target);
  return r;
}

/// Distinct train targets in lexicographic order. Works for any modality; the
/// trainer scores generation tasks as exact match over this closed set.
inline std::vector<std::string> candidate_targets(const TaskDataset& dataset) {
  std::set<std::string> distinct;
  for (const auto& r : dataset.train) distinct.insert(r.target);
  return {distinct.begin(), distinct.end()};
}

inline std::vector<std::string> classification_labels(const TaskSpec& spec,
                                                      const TaskDataset& dataset) {
  if (spec.modality != Modality::classification)
    throw Error(ErrorCode::WrongModality,
                "classification_labels called on generation task '" + spec.task_id + "'");
  return candidate_targets(dataset);
}

struct TaskEntry {
  TaskSpec spec;
  TaskDataset data;

  bool operator==(const TaskEntry&) const = default;
};

/// Immutable set of tasks in manifest order.
class Registry {
 public:
  Registry() = default;

  explicit Registry(std::vector<TaskEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> seen;
    for (const auto& e : entries_) {
      validate(e.spec);
      if (!seen.insert(e.spec.task_id).second)
        throw Error(ErrorCode::DuplicateTask, e.spec.task_id);
      if (e.data.task_id != e.spec.task_id)
        throw Error(ErrorCode::InvalidTaskSpec, "dataset/spec id mismatch for " + e.spec.task_id);
      if (e.data.train.empty())
        throw Error(ErrorCode::EmptySplit, "task '" + e.spec.task_id + "' has no train records");
      if (e.data.dev.empty())
        throw Error(ErrorCode::EmptySplit, "task '" + e.spec.task_id + "' has no dev records");
      if (e.data.n_train != e.data.train.size())
        throw Error(ErrorCode::InvalidTaskSpec, "n_train mismatch for " + e.spec.task_id);
    }
  }

  const std::vector<TaskEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const TaskEntry* find(std::string_view task_id) const noexcept {
    for (const auto& e : entries_)
      if (e.spec.task_id == task_id) return &e;
    return nullptr;
  }

  const TaskEntry& at(std::string_view task_id) const {
    if (const auto* e = find(task_id)) return *e;
    throw Error(ErrorCode::UnknownTask, std::string(task_id));
  }

  std::vector<std::string> task_ids() const {
    std::vector<std::string> ids;
    ids.reserve(entries_.size());
    for (const auto& e : entries_) ids.push_back(e.spec.task_id);
    return ids;
  }

  /// (task_id, n_train) in registry order.
  std::vector<std::pair<std::string, std::size_t>> sizes() const {
    std::vector<std::pair<std::string, std::size_t>> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.emplace_back(e.spec.task_id, e.data.n_train);
    return out;
  }

  /// Restriction to the given tasks, keeping registry order.
  Registry subset(const std::vector<std::string>& ids) const {
    std::vector<TaskEntry> picked;
    for (const auto& e : entries_)
      if (std::find(ids.begin(), ids.end(), e.spec.task_id) != ids.end()) picked.push_back(e);
    if (picked.size() != ids.size())
      throw Error(ErrorCode::UnknownTask, "subset names a task outside the registry");
    return Registry(std::move(picked));
  }

  bool operator==(const Registry&) const = default;

 private:
  std::vector<TaskEntry> entries_;
};

// ---------------------------------------------------------------------------
// External format: manifest JSON + newline-delimited JSON record files.

struct ManifestTask {
  TaskSpec spec;
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
};

inline nlohmann::json to_manifest_json(const ManifestTask& t) {
  return nlohmann::json{{"task_id", t.spec.task_id},
                        {"modality", to_string(t.spec.modality)},
                        {"input_arity", to_string(t.spec.input_arity)},
                        {"label_scheme", to_string(t.spec.label_scheme)},
                        {"prefix", t.spec.prefix},
                        {"metric", to_string(t.spec.metric)},
                        {"train_path", t.train_path.generic_string()},
                        {"dev_path", t.dev_path.generic_string()}};
}

namespace detail {

inline std::string required_string(const nlohmann::json& obj, const char* key,
                                   const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_string())
    throw Error(ErrorCode::InvalidTaskSpec, where + ": missing string field '" + key + "'");
  return obj.at(key).get<std::string>();
}

template <typename Enum, typename Parse>
Enum required_enum(const nlohmann::json& obj, const char* key, const std::string& where,
                   Parse parse) {
  const auto text = required_string(obj, key, where);
  if (auto v = parse(text)) return *v;
  throw Error(ErrorCode::InvalidTaskSpec, where + ": bad value '" + text + "' for '" + key + "'");
}

inline std::vector<Record> read_records(const TaskSpec& spec, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<Record> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::MalformedRecord, where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("input") || !obj.contains("target") ||
        !obj["input"].is_string() || !obj["target"].is_string())
      throw Error(ErrorCode::MalformedRecord, where + ": expected string fields input, target");
    const auto raw_input = obj["input"].get<std::string>();
    const auto raw_target = obj["target"].get<std::string>();
    if (raw_input.empty() || raw_target.empty())
      throw Error(ErrorCode::MalformedRecord, where + ": empty input or target");
    records.push_back(cast_text_to_text(spec, raw_input, raw_target));
  }
  return records;
}

}  // namespace detail

inline std::vector<ManifestTask> read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, manifest_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidTaskSpec, manifest_path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("tasks") || !doc["tasks"].is_array())
    throw Error(ErrorCode::InvalidTaskSpec, manifest_path.string() + ": expected {\"tasks\": [...]}");

  const auto base = manifest_path.parent_path();
  std::vector<ManifestTask> tasks;
  std::size_t index = 0;
  for (const auto& t : doc["tasks"]) {
    const auto where = manifest_path.string() + " task #" + std::to_string(index++);
    ManifestTask mt;
    mt.spec.task_id = detail::required_string(t, "task_id", where);
    mt.spec.modality = detail::required_enum<Modality>(t, "modality", where, parse_modality);
    mt.spec.input_arity =
        detail::required_enum<InputArity>(t, "input_arity", where, parse_input_arity);
    mt.spec.label_scheme =
        detail::required_enum<LabelScheme>(t, "label_scheme", where, parse_label_scheme);
    mt.spec.prefix = detail::required_string(t, "prefix", where);
    mt.spec.metric = mt.spec.modality == Modality::generation ? Metric::exact_match
                                                              : Metric::accuracy;
    if (t.contains("metric"))
      mt.spec.metric = detail::required_enum<Metric>(t, "metric", where, parse_metric);
    mt.train_path = base / detail::required_string(t, "train_path", where);
    mt.dev_path = base / detail::required_string(t, "dev_path", where);
    validate(mt.spec);
    tasks.push_back(std::move(mt));
  }
  return tasks;
}

/// Loads and validates every task named in the manifest.
inline Registry load_tasks(const std::filesystem::path& manifest_path) {
  const auto manifest = read_manifest(manifest_path);
  if (manifest.empty()) throw Error(ErrorCode::NoTasks, manifest_path.string());

  std::set<std::string> ids;
  for (const auto& mt : manifest)
    if (!ids.insert(mt.spec.task_id).second)
      throw Error(ErrorCode::DuplicateTask, mt.spec.task_id);

  std::vector<TaskEntry> entries;
  entries.reserve(manifest.size());
  for (const auto& mt : manifest) {
    TaskEntry e;
    e.spec = mt.spec;
    e.data.task_id = mt.spec.task_id;
    e.data.train = detail::read_records(mt.spec, mt.train_path);
    e.data.dev = detail::read_records(mt.spec, mt.dev_path);
    if (e.data.train.empty())
      throw Error(ErrorCode::EmptySplit, mt.spec.task_id + " train: " + mt.train_path.string());
    if (e.data.dev.empty())
      throw Error(ErrorCode::EmptySplit, mt.spec.task_id + " dev: " + mt.dev_path.string());
    e.data.n_train = e.data.train.size();

    std::set<Record> train_set(e.data.train.begin(), e.data.train.end());
    std::set<std::string> train_targets;
    for (const auto& r : e.data.train) train_targets.insert(r.target);
    for (std::size_t i = 0; i < e.data.dev.size(); ++i) {
      if (train_set.count(e.data.dev[i]))
        throw Error(ErrorCode::OverlappingSplits, mt.spec.task_id + " dev line " +
                                                      std::to_string(i + 1) +
                                                      " duplicates a train record");
      if (!train_targets.count(e.data.dev[i].target)) ++e.data.unseen_dev_targets;
    }
    entries.push_back(std::move(e));
  }
  return Registry(std::move(entries));
}

/// Writes raw (un-prefixed) records in the line-delimited format.
inline void write_records(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, std::string>>& raw) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Unwritable, path.string());
  for (const auto& [input, target] : raw)
    out << nlohmann::json{{"input", input}, {"target", target}}.dump() << '\n';
  if (!out) throw Error(ErrorCode::Unwritable, path.string());
}

/// Writes a manifest; paths are stored relative to the manifest directory.
inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<ManifestTask>& tasks) {
  nlohmann::json doc{{"tasks", nlohmann::json::array()}};
  for (const auto& t : tasks) doc["tasks"].push_back(to_manifest_json(t));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Unwritable, path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Unwritable, path.string());
}

}  // namespace taskmix
