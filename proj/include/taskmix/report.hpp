#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskmix/error.hpp"
#include "taskmix/metrics.hpp"
#include "taskmix/trainer.hpp"

namespace taskmix {

struct TaskScore {
  std::string task_id;
  std::string group;
  double single_task_baseline = 0.0;
  double multi_task_score = 0.0;
  bool qualified = false;

  bool operator==(const TaskScore&) const = default;
};

/// Outcome of one multi-task method on one suite. Metrics live on [0,1].
struct RunReport {
  std::string method;
  std::vector<TaskScore> tasks;
  double macro_avg = 0.0;
  std::size_t num_qualified = 0;
  std::size_t num_models = 1;
  std::optional<double> overhead;
  /// Resolved configuration: strategy, taxonomy, plans with step counts, seeds, RNG.
  nlohmann::json provenance = nlohmann::json::object();
  /// Non-deterministic fields (timestamps). Excluded from reproducibility checks.
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<CurvePoint> curves;

  bool operator==(const RunReport&) const = default;
};

/// Fills the derived fields (qualified flags, macro average, counts, overhead)
/// from the per-task baselines and scores.
inline void finalize(RunReport& report) {
  if (report.tasks.empty()) throw Error(ErrorCode::NoTasks, "report has no tasks");
  std::vector<double> scores;
  std::vector<std::string> groups;
  std::vector<std::size_t> per_group;
  report.num_qualified = 0;
  for (auto& t : report.tasks) {
    t.qualified = qualified(t.single_task_baseline, t.multi_task_score);
    scores.push_back(t.multi_task_score);
    auto it = std::find(groups.begin(), groups.end(), t.group);
    if (it == groups.end()) {
      groups.push_back(t.group);
      per_group.push_back(0);
      it = groups.end() - 1;
    }
    if (t.qualified) {
      ++report.num_qualified;
      ++per_group[static_cast<std::size_t>(it - groups.begin())];
    }
  }
  report.macro_avg = macro_average(scores);
  report.num_models = groups.size();
  report.overhead = report.num_models == 1 ? overhead(report.num_qualified, 1)
                                           : overhead_multi_model(per_group);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const CurvePoint& p) {
  return {{"step", p.step}, {"task_id", p.task_id}, {"split", p.split}, {"metric", p.metric}};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : r.tasks)
    tasks.push_back({{"task_id", t.task_id},
                     {"group", t.group},
                     {"single_task_baseline", t.single_task_baseline},
                     {"multi_task_score", t.multi_task_score},
                     {"qualified", t.qualified}});
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& p : r.curves) curves.push_back(to_json(p));
  return {{"method", r.method},
          {"tasks", tasks},
          {"macro_avg", r.macro_avg},
          {"num_qualified", r.num_qualified},
          {"num_models", r.num_models},
          {"overhead", r.overhead ? nlohmann::json(*r.overhead) : nlohmann::json(nullptr)},
          {"provenance", r.provenance},
          {"metadata", r.metadata},
          {"curves", curves}};
}

inline RunReport run_report_from_json(const nlohmann::json& j) {
  try {
    RunReport r;
    r.method = j.at("method").get<std::string>();
    for (const auto& t : j.at("tasks"))
      r.tasks.push_back({t.at("task_id").get<std::string>(), t.at("group").get<std::string>(),
                         t.at("single_task_baseline").get<double>(),
                         t.at("multi_task_score").get<double>(), t.at("qualified").get<bool>()});
    r.macro_avg = j.at("macro_avg").get<double>();
    r.num_qualified = j.at("num_qualified").get<std::size_t>();
    r.num_models = j.at("num_models").get<std::size_t>();
    if (!j.at("overhead").is_null()) r.overhead = j.at("overhead").get<double>();
    r.provenance = j.value("provenance", nlohmann::json::object());
    r.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& p : j.value("curves", nlohmann::json::array()))
      r.curves.push_back({p.at("step").get<std::size_t>(), p.at("task_id").get<std::string>(),
                          p.at("split").get<std::string>(), p.at("metric").get<double>()});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed report JSON: ") + e.what());
  }
}

/// report.json text with the metadata block removed, for byte comparisons.
inline std::string deterministic_dump(const RunReport& r) {
  auto j = to_json(r);
  j.erase("metadata");
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string format_metric(double unit_value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", unit_value * 100.0);
  return buf;
}

inline std::string format_overhead(const std::optional<double>& o) {
  if (!o) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", *o * 100.0);
  return buf;
}

/// Markdown table: Methods, one column per task, Avg., Num., Overhead.
/// Qualified cells (and every single-task cell) are bold.
inline std::string render_table(const std::vector<RunReport>& reports) {
  if (reports.empty()) return {};
  const auto& first = reports.front();
  std::ostringstream os;
  os << "| Methods |";
  for (const auto& t : first.tasks) os << ' ' << t.task_id << " |";
  os << " Avg. | Num. | Overhead |\n|---|";
  for (std::size_t i = 0; i < first.tasks.size(); ++i) os << "---|";
  os << "---|---|---|\n";

  std::vector<double> baselines;
  os << "| Single-task |";
  for (const auto& t : first.tasks) {
    os << " **" << format_metric(t.single_task_baseline) << "** |";
    baselines.push_back(t.single_task_baseline);
  }
  os << ' ' << format_metric(macro_average(baselines)) << " | " << first.tasks.size()
     << " | 100% |\n";

  for (const auto& r : reports) {
    os << "| " << r.method << " |";
    for (const auto& t : r.tasks) {
      const auto cell = format_metric(t.multi_task_score);
      os << ' ' << (t.qualified ? "**" + cell + "**" : cell) << " |";
    }
    os << ' ' << format_metric(r.macro_avg) << " | " << r.num_qualified << " | "
       << format_overhead(r.overhead) << " |\n";
  }
  return os.str();
}

inline std::string render_curves_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << "step,task_id,split,metric\n";
  char buf[32];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.6f", p.metric);
    os << p.step << ',' << p.task_id << ',' << p.split << ',' << buf << '\n';
  }
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Unwritable, path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Unwritable, path.string());
}

/// Writes report.json, tables.md and curves.csv into `dir`, replacing old files.
inline void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error(ErrorCode::Unwritable, dir.string() + (ec ? ": " + ec.message() : ""));
  write_text(dir / "report.json", to_json(report).dump(2) + "\n");
  write_text(dir / "tables.md", render_table({report}));
  write_text(dir / "curves.csv", render_curves_csv(report.curves));
}

inline RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  try {
    return run_report_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

}  // namespace taskmix
