#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "taskmix/error.hpp"
#include "taskmix/features.hpp"

namespace taskmix {

/// One labeled training example: model task index, features, label index.
struct Example {
  std::size_t task = 0;
  const FeatureVector* x = nullptr;
  std::size_t label = 0;
};

/// Label-by-feature weight matrix whose feature columns are allocated on first
/// write. Absent columns read as zero.
class ColumnStore {
 public:
  static constexpr std::uint32_t kAbsent = std::numeric_limits<std::uint32_t>::max();

  ColumnStore(std::size_t rows, std::uint32_t dimension)
      : rows_(rows), slot_of_(dimension, kAbsent) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t allocated_columns() const noexcept { return rows_ ? data_.size() / rows_ : 0; }

  const double* column(std::uint32_t feature) const noexcept {
    const auto slot = slot_of_[feature];
    return slot == kAbsent ? nullptr : data_.data() + static_cast<std::size_t>(slot) * rows_;
  }

  double* column_mut(std::uint32_t feature) {
    auto& slot = slot_of_[feature];
    if (slot == kAbsent) {
      slot = static_cast<std::uint32_t>(data_.size() / rows_);
      data_.resize(data_.size() + rows_, 0.0);
    }
    return data_.data() + static_cast<std::size_t>(slot) * rows_;
  }

  bool operator==(const ColumnStore&) const = default;

 private:
  std::size_t rows_;
  std::vector<std::uint32_t> slot_of_;
  std::vector<double> data_;
};

/// Sparse gradient: one dense label column per touched (matrix, feature).
struct Gradient {
  struct Column {
    std::size_t matrix;
    std::uint32_t feature;
    std::size_t offset;  // into values
    std::size_t rows;
  };
  std::vector<Column> columns;
  std::vector<double> values;

  double get(std::size_t matrix, std::uint32_t feature, std::size_t row) const {
    for (const auto& c : columns)
      if (c.matrix == matrix && c.feature == feature) return values[c.offset + row];
    return 0.0;
  }
};

/// Linear softmax classifier with one head per task over a shared hashed
/// feature space. With the shared trunk enabled, task logits are
///   z_t = (W_t + S_b(t)) x
/// where S_b is shared by every task whose label vocabulary is identical.
/// Weights start at zero, so an untrained model ties every label and predicts
/// label index 0.
class LinearModel {
 public:
  struct TaskInfo {
    std::string task_id;
    std::vector<std::string> labels;
  };

  LinearModel(const std::vector<TaskInfo>& tasks, std::uint32_t dimension, bool shared_trunk)
      : dimension_(dimension), shared_trunk_(shared_trunk) {
    if (dimension == 0 || (dimension & (dimension - 1)) != 0)
      throw Error(ErrorCode::InvalidConfig, "feature dimension must be a power of two");
    std::map<std::vector<std::string>, std::size_t> block_of;
    std::vector<std::size_t> block_rows;
    for (const auto& t : tasks) {
      if (t.labels.empty())
        throw Error(ErrorCode::InvalidConfig, "task '" + t.task_id + "' has no labels");
      task_ids_.push_back(t.task_id);
      labels_.push_back(t.labels);
      auto [it, inserted] = block_of.emplace(t.labels, block_of.size());
      if (inserted) block_rows.push_back(t.labels.size());
      block_index_.push_back(it->second);
    }
    for (const auto& t : tasks) matrices_.emplace_back(t.labels.size(), dimension);
    if (shared_trunk_)
      for (auto rows : block_rows) matrices_.emplace_back(rows, dimension);
  }

  std::uint32_t dimension() const noexcept { return dimension_; }
  bool shared_trunk() const noexcept { return shared_trunk_; }
  std::size_t num_tasks() const noexcept { return task_ids_.size(); }
  const std::vector<std::string>& task_ids() const noexcept { return task_ids_; }
  const std::vector<std::string>& labels(std::size_t task) const { return labels_.at(task); }
  std::size_t num_matrices() const noexcept { return matrices_.size(); }
  const ColumnStore& matrix(std::size_t m) const { return matrices_.at(m); }
  ColumnStore& matrix_mut(std::size_t m) { return matrices_.at(m); }

  std::size_t task_index(std::string_view task_id) const {
    for (std::size_t i = 0; i < task_ids_.size(); ++i)
      if (task_ids_[i] == task_id) return i;
    throw Error(ErrorCode::UnknownTask, std::string(task_id));
  }

  /// Matrices contributing to a task's logits: its head, then its trunk block.
  std::pair<std::size_t, std::size_t> matrices_of(std::size_t task) const {
    const std::size_t none = matrices_.size();
    return {task, shared_trunk_ ? task_ids_.size() + block_index_[task] : none};
  }

  void logits(std::size_t task, const FeatureVector& x, std::span<double> out) const {
    const auto k = labels_[task].size();
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
    const auto [head, trunk] = matrices_of(task);
    for (const auto& [f, v] : x.entries) {
      if (const double* col = matrices_[head].column(f))
        for (std::size_t c = 0; c < k; ++c) out[c] += col[c] * v;
      if (trunk < matrices_.size())
        if (const double* col = matrices_[trunk].column(f))
          for (std::size_t c = 0; c < k; ++c) out[c] += col[c] * v;
    }
  }

  /// Argmax label index; ties go to the lowest index.
  std::size_t predict(std::size_t task, const FeatureVector& x) const {
    std::vector<double> z(labels_[task].size());
    logits(task, x, z);
    return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
  }

  /// Mean softmax cross-entropy over the batch plus (l2/2)*||w||^2 over every
  /// column the batch touches.
  double loss(std::span<const Example> batch, double l2) const {
    double total = 0.0;
    std::vector<double> z;
    for (const auto& ex : batch) {
      z.assign(labels_[ex.task].size(), 0.0);
      logits(ex.task, *ex.x, z);
      const double top = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (double v : z) sum += std::exp(v - top);
      total += top + std::log(sum) - z[ex.label];
    }
    double reg = 0.0;
    if (l2 > 0.0)
      for (const auto& [m, f] : active_columns(batch))
        if (const double* col = matrices_[m].column(f))
          for (std::size_t c = 0; c < matrices_[m].rows(); ++c) reg += col[c] * col[c];
    return total / static_cast<double>(batch.size()) + 0.5 * l2 * reg;
  }

  /// Exact gradient of loss(batch, l2).
  Gradient gradient(std::span<const Example> batch, double l2) const {
    Gradient g;
    std::unordered_map<std::uint64_t, std::size_t> where;
    auto column_of = [&](std::size_t m, std::uint32_t f) -> std::size_t {
      const std::uint64_t key = (static_cast<std::uint64_t>(m) << 32) | f;
      auto [it, inserted] = where.emplace(key, g.columns.size());
      if (inserted) {
        const auto rows = matrices_[m].rows();
        g.columns.push_back({m, f, g.values.size(), rows});
        g.values.resize(g.values.size() + rows, 0.0);
        if (l2 > 0.0)
          if (const double* col = matrices_[m].column(f))
            for (std::size_t c = 0; c < rows; ++c) g.values[g.columns.back().offset + c] = l2 * col[c];
      }
      return g.columns[it->second].offset;
    };

    const double scale = 1.0 / static_cast<double>(batch.size());
    std::vector<double> p;
    for (const auto& ex : batch) {
      const auto k = labels_[ex.task].size();
      p.assign(k, 0.0);
      logits(ex.task, *ex.x, p);
      const double top = *std::max_element(p.begin(), p.end());
      double sum = 0.0;
      for (auto& v : p) sum += (v = std::exp(v - top));
      for (auto& v : p) v = v / sum * scale;
      p[ex.label] -= scale;

      const auto [head, trunk] = matrices_of(ex.task);
      for (const auto& [f, v] : ex.x->entries) {
        for (std::size_t m : {head, trunk}) {
          if (m >= matrices_.size()) continue;
          const auto off = column_of(m, f);
          for (std::size_t c = 0; c < k; ++c) g.values[off + c] += p[c] * v;
        }
      }
    }
    return g;
  }

  void apply(const Gradient& g, double learning_rate) {
    for (const auto& c : g.columns) {
      double* col = matrices_[c.matrix].column_mut(c.feature);
      for (std::size_t r = 0; r < c.rows; ++r) col[r] -= learning_rate * g.values[c.offset + r];
    }
  }

  bool operator==(const LinearModel&) const = default;

 private:
  std::vector<std::pair<std::size_t, std::uint32_t>> active_columns(
      std::span<const Example> batch) const {
    std::vector<std::pair<std::size_t, std::uint32_t>> cols;
    for (const auto& ex : batch) {
      const auto [head, trunk] = matrices_of(ex.task);
      for (const auto& [f, _] : ex.x->entries) {
        cols.emplace_back(head, f);
        if (trunk < matrices_.size()) cols.emplace_back(trunk, f);
      }
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
  }

  std::uint32_t dimension_;
  bool shared_trunk_;
  std::vector<std::string> task_ids_;
  std::vector<std::vector<std::string>> labels_;
  std::vector<std::size_t> block_index_;
  std::vector<ColumnStore> matrices_;
};

/// Compares the analytic gradient with central finite differences on up to
/// `max_coords` coordinates drawn from the columns the batch touches. Returns
/// the largest |analytic - numeric| / max(|analytic|, |numeric|).
template <typename Pick>
double gradient_check(LinearModel& model, std::span<const Example> batch, double l2, double h,
                      std::size_t max_coords, Pick&& pick) {
  const auto g = model.gradient(batch, l2);
  std::vector<std::pair<std::size_t, std::size_t>> coords;  // (column index, row)
  for (std::size_t i = 0; i < g.columns.size(); ++i)
    for (std::size_t r = 0; r < g.columns[i].rows; ++r) coords.emplace_back(i, r);
  if (coords.size() > max_coords) {
    for (std::size_t i = 0; i < max_coords; ++i) std::swap(coords[i], coords[i + pick(coords.size() - i)]);
    coords.resize(max_coords);
  }
  double worst = 0.0;
  for (const auto& [ci, r] : coords) {
    const auto& c = g.columns[ci];
    double* w = model.matrix_mut(c.matrix).column_mut(c.feature) + r;
    const double saved = *w;
    *w = saved + h;
    const double up = model.loss(batch, l2);
    *w = saved - h;
    const double down = model.loss(batch, l2);
    *w = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = g.values[c.offset + r];
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    if (denom > 0.0) worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

}  // namespace taskmix
