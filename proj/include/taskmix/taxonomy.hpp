#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taskmix/error.hpp"
#include "taskmix/registry.hpp"

namespace taskmix {

/// How tasks are split into separately trained groups.
///   modality_split  classification vs generation
///   ss              single sentence vs sentence pair
///   bm              binary vs multiclass (ordinal counts as multiclass)
///   bom             binary vs ordinal vs multiclass
enum class TaxonomyRule { none, modality_split, ss, bm, bom };

inline std::string_view to_string(TaxonomyRule r) {
  switch (r) {
    case TaxonomyRule::none: return "none";
    case TaxonomyRule::modality_split: return "modality_split";
    case TaxonomyRule::ss: return "ss";
    case TaxonomyRule::bm: return "bm";
    case TaxonomyRule::bom: return "bom";
  }
  return "?";
}

inline std::optional<TaxonomyRule> parse_taxonomy_rule(std::string_view s) {
  for (auto r : {TaxonomyRule::none, TaxonomyRule::modality_split, TaxonomyRule::ss,
                 TaxonomyRule::bm, TaxonomyRule::bom})
    if (to_string(r) == s) return r;
  if (s == "SS") return TaxonomyRule::ss;
  if (s == "BM") return TaxonomyRule::bm;
  if (s == "BOM") return TaxonomyRule::bom;
  return std::nullopt;
}

struct TaskGroup {
  std::string name;
  std::vector<std::string> task_ids;

  bool operator==(const TaskGroup&) const = default;
};

/// Disjoint, non-empty groups whose union is the input set.
struct TaskPartition {
  std::vector<TaskGroup> groups;

  const TaskGroup* find(std::string_view name) const {
    for (const auto& g : groups)
      if (g.name == name) return &g;
    return nullptr;
  }

  bool operator==(const TaskPartition&) const = default;
};

namespace detail {

/// Group names of a rule, in declaration order.
inline std::vector<std::string_view> group_names(TaxonomyRule rule) {
  switch (rule) {
    case TaxonomyRule::none: return {"all"};
    case TaxonomyRule::modality_split: return {"classification", "generation"};
    case TaxonomyRule::ss: return {"single_sentence", "sentence_pair"};
    case TaxonomyRule::bm: return {"binary", "multiclass"};
    case TaxonomyRule::bom: return {"binary", "ordinal", "multiclass"};
  }
  return {};
}

inline std::size_t group_of(const TaskSpec& spec, TaxonomyRule rule) {
  const bool needs_classification =
      rule == TaxonomyRule::ss || rule == TaxonomyRule::bm || rule == TaxonomyRule::bom;
  if (needs_classification && spec.modality != Modality::classification)
    throw Error(ErrorCode::RuleNotApplicable, "rule '" + std::string(to_string(rule)) +
                                                  "' applies only to classification tasks; '" +
                                                  spec.task_id + "' is a generation task");
  switch (rule) {
    case TaxonomyRule::none: return 0;
    case TaxonomyRule::modality_split: return spec.modality == Modality::classification ? 0 : 1;
    case TaxonomyRule::ss: return spec.input_arity == InputArity::single_sentence ? 0 : 1;
    case TaxonomyRule::bm: return spec.label_scheme == LabelScheme::binary ? 0 : 1;
    case TaxonomyRule::bom:
      switch (spec.label_scheme) {
        case LabelScheme::binary: return 0;
        case LabelScheme::ordinal: return 1;
        default: return 2;
      }
  }
  return 0;
}

}  // namespace detail

/// Splits tasks by the attribute the rule inspects. Groups follow the rule's
/// declaration order; tasks keep their input order inside a group; empty
/// groups are dropped.
inline TaskPartition partition(const std::vector<TaskSpec>& tasks, TaxonomyRule rule) {
  const auto names = detail::group_names(rule);
  std::vector<std::vector<std::string>> members(names.size());
  std::set<std::string> seen;
  for (const auto& spec : tasks) {
    if (!seen.insert(spec.task_id).second) throw Error(ErrorCode::DuplicateTask, spec.task_id);
    members[detail::group_of(spec, rule)].push_back(spec.task_id);
  }
  TaskPartition out;
  for (std::size_t g = 0; g < names.size(); ++g)
    if (!members[g].empty()) out.groups.push_back({std::string(names[g]), std::move(members[g])});
  return out;
}

inline TaskPartition partition(const Registry& registry, TaxonomyRule rule) {
  std::vector<TaskSpec> specs;
  for (const auto& e : registry.entries()) specs.push_back(e.spec);
  return partition(specs, rule);
}

}  // namespace taskmix
