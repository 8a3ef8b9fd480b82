// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any selected criterion fails. `--only N` (repeatable) selects criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskmix/taskmix.hpp"
#include "../fixtures/clue_results.hpp"

using namespace taskmix;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Sum of a row in integer hundredths, so rounding comparisons are exact.
long hundredths(double v) { return std::lround(v * 100.0); }

// ---------------------------------------------------------------------------

Outcome metric_arithmetic() {
  std::vector<std::string> bad;
  auto avg_ok = [&](const fixtures::ResultRow& row) {
    long sum = 0;
    for (double c : row.cells) sum += hundredths(c);
    // |sum/6 - avg| <= 0.005  <=>  |sum - 6*avg| <= 3 (in hundredths)
    return std::labs(sum - 6 * hundredths(row.avg)) <= 3;
  };
  auto mean_of = [](const fixtures::ResultRow& row) {
    return macro_average(std::vector<double>(row.cells.begin(), row.cells.end()));
  };
  const auto& llama = fixtures::kMainRows[0];
  const auto& qwen = fixtures::kMainRows[7];
  if (!avg_ok(qwen)) bad.push_back(fmt("Qwen single-task avg %.4f", mean_of(qwen)));
  if (!avg_ok(llama)) bad.push_back(fmt("LLaMA single-task avg %.4f", mean_of(llama)));

  if (format_overhead(overhead(5)) != "20.0%") bad.push_back("overhead(5)");
  if (format_overhead(overhead(11)) != "9.1%") bad.push_back("overhead(11)");
  if (format_overhead(overhead_multi_model({3, 2})) != "33.3%") bad.push_back("overhead([3,2])");
  if (format_overhead(overhead(0)) != "-") bad.push_back("overhead(0)");

  int cells = 0;
  for (std::size_t r = 7; r < fixtures::kMainRows.size(); ++r) {
    const auto& row = fixtures::kMainRows[r];
    int num = 0;
    for (std::size_t c = 0; c < 6; ++c) {
      const bool q = qualified_percent(qwen.cells[c], row.cells[c]);
      num += q;
      ++cells;
      if (q != row.shaded[c])
        bad.push_back(fmt("Qwen %s %s", std::string(row.method).c_str(),
                          std::string(fixtures::kClueColumns[c]).c_str()));
    }
    if (num != row.num) bad.push_back(fmt("Qwen %s Num.", std::string(row.method).c_str()));
    const auto o = row.num ? format_overhead(overhead(static_cast<std::size_t>(row.num))) : "-";
    if (row.method != "Single-task" && o != row.overhead)
      bad.push_back(fmt("Qwen %s Overhead", std::string(row.method).c_str()));
  }
  std::string detail = fmt("avg %.3f / %.3f, %d shaded cells checked", mean_of(qwen), mean_of(llama), cells);
  for (const auto& b : bad) detail += "; mismatch: " + b;
  return {bad.empty(), detail};
}

// ---------------------------------------------------------------------------

Outcome sampler_distributions() {
  Rng rng(20240601);
  const std::array<double, 5> taus = {1.0, 1.43, 2.0, 3.33, 10.0};
  std::size_t failures = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (!failures++) first = what;
  };
  auto sum_ok = [](const MixtureWeights& w) {
    double s = 0.0;
    for (const auto& [_, q] : w.entries) s += q;
    return std::abs(s - 1.0) <= 1e-12;
  };
  auto argmax = [](const std::vector<double>& p) {
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  };

  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.below(30);
    TaskSizes sizes;
    std::size_t largest = 0;
    for (std::size_t i = 0; i < k; ++i) {
      // Log-uniform sizes from 1 to ~10^6 to cover heavy imbalance.
      const auto n = static_cast<std::size_t>(std::exp(rng.uniform() * std::log(1e6))) + 1;
      sizes.emplace_back("t" + std::to_string(i), n);
      largest = std::max(largest, n);
    }
    std::vector<std::string> ids;
    for (const auto& [id, _] : sizes) ids.push_back(id);

    const auto inst = instance_balanced_weights(sizes);
    const auto cls = class_balanced_weights(ids);
    if (!sum_ok(inst) || !sum_ok(cls)) fail("sum-to-one (instance/class)");
    for (const auto& [_, q] : cls.entries)
      if (std::abs(q - 1.0 / static_cast<double>(k)) > 1e-12) fail("class-balanced uniform");

    if (temperature_scaled_weights(inst, 1.0) != inst) fail("tau=1 identity");
    for (const auto& [_, q] : temperature_scaled_weights(inst, 1e9).entries)
      if (std::abs(q - 1.0 / static_cast<double>(k)) > 1e-6) fail("tau=1e9 uniformity");

    const auto base = inst.probabilities();
    double prev_max = std::numeric_limits<double>::infinity();
    double prev_min = -std::numeric_limits<double>::infinity();
    for (double tau : taus) {
      const auto w = temperature_scaled_weights(inst, tau);
      if (!sum_ok(w)) fail("sum-to-one (temperature)");
      const auto p = w.probabilities();
      if (base[argmax(base)] > base[argmax(p)]) fail("argmax preservation");
      const double mx = *std::max_element(p.begin(), p.end());
      const double mn = *std::min_element(p.begin(), p.end());
      if (mx > prev_max + 1e-12 || mn < prev_min - 1e-12) fail("flattening monotonicity");
      prev_max = mx;
      prev_min = mn;
    }

    const std::size_t cap = 1 + rng.below(largest + largest / 2);
    for (double tau : taus) {
      const auto w = capped_weights(sizes, cap, tau);
      if (!sum_ok(w)) fail("sum-to-one (capped)");
      if (cap >= largest && w != temperature_scaled_weights(inst, tau)) fail("cap inactivity");
      // Every task at or above the cap gets the same weight.
      double at_cap = -1.0;
      for (std::size_t i = 0; i < k; ++i)
        if (sizes[i].second >= cap) {
          if (at_cap < 0.0) at_cap = w.entries[i].second;
          else if (std::abs(w.entries[i].second - at_cap) > 1e-15) fail("capped ties");
        }
    }
    if (capped_weights(sizes, largest, 1.0) != inst) fail("cap at max size is instance-balanced");
  }
  return {failures == 0, failures ? fmt("%zu violations, first: %s", failures, first.c_str())
                                  : std::string("1000 random size maps, 5 temperatures")};
}

// ---------------------------------------------------------------------------

Outcome stream_convergence() {
  constexpr std::size_t N = 100000;
  auto frequencies = [&](const MixtureWeights& w, std::uint64_t seed) {
    TaskSizes sizes;
    for (std::size_t i = 0; i < w.size(); ++i) sizes.emplace_back(w.entries[i].first, 17 + i);
    SampleStream s(w, sizes, seed);
    std::vector<double> f(w.size(), 0.0);
    for (std::size_t i = 0; i < N; ++i) f[s.next().task] += 1.0;
    for (auto& v : f) v /= static_cast<double>(N);
    return f;
  };
  const MixtureWeights two{{{"a", 0.75}, {"b", 0.25}}};
  const auto f = frequencies(two, 7);
  bool pass = std::abs(f[0] - 0.75) <= 0.01;
  std::string detail = fmt("freq(a)=%.4f", f[0]);

  Rng rng(99);
  double worst_ratio = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 2 + rng.below(19);
    std::vector<std::string> ids;
    std::vector<double> mass;
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      ids.push_back("t" + std::to_string(i));
      mass.push_back(rng.uniform() + 1e-3);
      total += mass.back();
    }
    MixtureWeights w;
    for (std::size_t i = 0; i < k; ++i) w.entries.emplace_back(ids[i], mass[i] / total);
    const auto emp = frequencies(w, 1000 + static_cast<std::uint64_t>(t));
    double l1 = 0.0;
    for (std::size_t i = 0; i < k; ++i) l1 += std::abs(emp[i] - w.entries[i].second);
    const double bound = 5.0 * std::sqrt(static_cast<double>(k) / static_cast<double>(N));
    worst_ratio = std::max(worst_ratio, l1 / bound);
  }
  pass = pass && worst_ratio <= 1.0;
  detail += fmt(", worst L1/bound over 50 vectors %.3f", worst_ratio);
  return {pass, detail};
}

// ---------------------------------------------------------------------------


TaskEntry entry_from(const SynthTaskData& d, std::string id_override = {}) {
  TaskEntry e;
  e.spec = d.spec;
  if (!id_override.empty()) {
    e.spec.task_id = id_override;
    e.spec.prefix = d.spec.prefix;  // identical inputs on purpose
  }
  e.data.task_id = e.spec.task_id;
  for (const auto& [in, tg] : d.train) e.data.train.push_back(cast_text_to_text(d.spec, in, tg));
  for (const auto& [in, tg] : d.dev) e.data.dev.push_back(cast_text_to_text(d.spec, in, tg));
  e.data.n_train = e.data.train.size();
  return e;
}

Outcome trainer_correctness() {
  std::string detail;
  bool pass = true;

  // Gradient check at D = 64 with a shared trunk and non-zero weights.
  {
    constexpr std::uint32_t D = 64;
    LinearModel model({{"a", {"x", "y", "z"}}, {"b", {"x", "y", "z"}}, {"c", {"p", "q"}}}, D, true);
    Rng rng(5);
    for (std::size_t m = 0; m < model.num_matrices(); ++m)
      for (std::uint32_t f = 0; f < D; ++f) {
        double* col = model.matrix_mut(m).column_mut(f);
        for (std::size_t r = 0; r < model.matrix(m).rows(); ++r) col[r] = rng.uniform() - 0.5;
      }
    std::vector<FeatureVector> xs;
    for (int i = 0; i < 24; ++i) {
      std::string text;
      for (int w = 0; w < 8; ++w) text += "w" + std::to_string(rng.below(40)) + " ";
      xs.push_back(featurize(text, D));
    }
    std::vector<Example> batch;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const std::size_t task = i % 3;
      batch.push_back({task, &xs[i], static_cast<std::size_t>(rng.below(task == 2 ? 2 : 3))});
    }
    const double err = gradient_check(model, batch, 1e-3, 1e-5, 4000,
                                      [&](std::size_t n) { return static_cast<std::size_t>(rng.below(n)); });
    pass = pass && err < 1e-4;
    detail += fmt("grad rel err %.2e", err);
  }

  // Symmetry: a task and its exact duplicate trained jointly.
  {
    SynthSuiteConfig cfg;
    SynthTaskConfig t;
    t.task_id = "SYM";
    t.n_train = 3000;
    t.num_labels = 3;
    t.label_noise = 0.1;
    t.vocab_size = 300;
    cfg.tasks = {t};
    cfg.seed = 11;
    const auto suite = generate_suite(cfg);
    Registry reg({entry_from(suite[0]), entry_from(suite[0], "SYM_COPY")});
    TrainerConfig tc;
    tc.seed = 3;
    tc.eval_every = 100;
    // Separate heads only, so each copy learns from its own draws.
    tc.shared_trunk = false;
    PreparedData data(reg, tc.dimension);
    const auto res = train(single_stage_plan(reg.task_ids(), StrategyConfig::class_balanced(), 1.0),
                           data, tc, {std::vector<std::size_t>{2000}, {}});
    const auto a = curve_of(res.curve, "SYM");
    const auto b = curve_of(res.curve, "SYM_COPY");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i].second - b[i].second));
    pass = pass && a.size() == b.size() && !a.empty() && worst <= 0.02;
    detail += fmt(", duplicate-task max gap %.4f over %zu evals", worst, a.size());
  }

  // Separable task: every token is a signal word of the true label.
  {
    SynthSuiteConfig cfg;
    SynthTaskConfig t;
    t.task_id = "SEP";
    t.n_train = 4000;
    t.num_labels = 4;
    t.vocab_size = 200;
    t.signal_rate = 1.0;
    t.label_noise = 0.0;
    cfg.tasks = {t};
    cfg.seed = 12;
    const auto reg = generate_registry(cfg);
    TrainerConfig tc;
    tc.seed = 4;
    tc.eval_every = 50;
    PreparedData data(reg, tc.dimension);
    const auto res = train(single_stage_plan({"SEP"}, StrategyConfig::instance_balanced(), 1.0), data,
                           tc, {std::vector<std::size_t>{500}, {}});
    const auto c = curve_of(res.curve, "SEP");
    std::size_t first_perfect = 0;
    for (const auto& [s, m] : c)
      if (m == 1.0) {
        first_perfect = s;
        break;
      }
    pass = pass && first_perfect > 0 && c.back().second == 1.0;
    detail += first_perfect ? fmt(", separable task at 1.0 from step %zu", first_perfect)
                            : fmt(", separable task final %.4f", c.back().second);
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

struct Suite {
  Registry registry;
  PreparedData data;
  Baselines baselines;
};

Suite build_suite(SynthSuiteConfig cfg, const TrainerConfig& tc) {
  auto reg = generate_registry(cfg);
  PreparedData data(reg, tc.dimension);
  auto b = run_single_task_baselines(data, tc, 10, workers_from_env());
  return {std::move(reg), std::move(data), std::move(b)};
}

Outcome overfitting_signature() {
  TrainerConfig tc;
  tc.seed = 1;
  tc.eval_every = 250;
  const auto suite = build_suite(paper_shaped_suite(SuitePreset::clue_like, 1), tc);
  const std::string small = "CWSC";
  auto gap = [&](const MethodSpec& m) {
    const auto plan = plan_for(m, suite.registry.task_ids(), suite.baselines, kPaperStepCap);
    const auto res = train(plan, suite.data, tc);
    const auto c = curve_of(res.curve, small);
    double peak = 0.0;
    for (const auto& [_, v] : c) peak = std::max(peak, v);
    return std::pair{peak - c.back().second, c.back().second};
  };
  MethodSpec inst{MethodKind::instance_balanced};
  MethodSpec two{MethodKind::two_stage};
  two.cap = kClueDefaults.cap;
  two.tau = kClueDefaults.tau;
  const auto [g_inst, f_inst] = gap(inst);
  const auto [g_two, f_two] = gap(two);
  const bool pass = g_inst >= 0.02 && g_two < g_inst;
  return {pass, fmt("%s final-vs-peak gap: instance_balanced %.4f (final %.4f), two_stage %.4f (final %.4f); "
                    "needs instance >= 0.02 and two_stage < instance",
                    small.c_str(), g_inst, f_inst, g_two, f_two)};
}

// ---------------------------------------------------------------------------

Outcome qualified_ordering() {
  bool pass = true;
  std::string detail;
  for (auto preset : {SuitePreset::clue_like, SuitePreset::application_like}) {
    const auto d = preset == SuitePreset::clue_like ? kClueDefaults : kApplicationDefaults;
    MethodSpec inst{MethodKind::instance_balanced};
    MethodSpec capped{MethodKind::capped_temperature_scaled};
    MethodSpec two{MethodKind::two_stage};
    capped.cap = two.cap = d.cap;
    capped.tau = two.tau = d.tau;
    int two_ge_capped = 0, capped_ge_inst = 0;
    std::string counts;
    for (std::uint64_t seed : {1, 2, 3}) {
      TrainerConfig tc;
      tc.seed = seed;
      const auto suite = build_suite(paper_shaped_suite(preset, seed), tc);
      const auto reports = compare({inst, capped, two}, suite.data, suite.registry, suite.baselines, tc,
                                   TaxonomyRule::none, kPaperStepCap, workers_from_env());
      const auto ni = reports[0].num_qualified, nc = reports[1].num_qualified, nt = reports[2].num_qualified;
      two_ge_capped += nt >= nc;
      capped_ge_inst += nc >= ni;
      counts += fmt(" %zu/%zu/%zu", ni, nc, nt);
    }
    pass = pass && two_ge_capped >= 2 && capped_ge_inst >= 2;
    detail += fmt("%s inst/capped/two:%s (two>=capped %d/3, capped>=inst %d/3); ",
                  std::string(to_string(preset)).c_str(), counts.c_str(), two_ge_capped, capped_ge_inst);
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome negative_transfer() {
  TrainerConfig tc;
  tc.seed = 1;
  auto cfg = with_generation_task(paper_shaped_suite(SuitePreset::clue_like, 1), "GEN", 947, 0, -1.0);
  const auto suite = build_suite(cfg, tc);
  MethodSpec cb{MethodKind::class_balanced};
  constexpr std::size_t kBudget = 3000;
  const auto joint = run_multi_task(cb, suite.data, suite.registry, suite.baselines, tc, TaxonomyRule::none,
                                    std::nullopt, 1, kBudget);
  const auto split = run_multi_task(cb, suite.data, suite.registry, suite.baselines, tc,
                                    TaxonomyRule::modality_split, std::nullopt, workers_from_env(), kBudget);
  auto cls_avg = [&](const RunReport& r) {
    std::vector<double> v;
    for (const auto& t : r.tasks)
      if (suite.registry.at(t.task_id).spec.modality == Modality::classification) v.push_back(t.multi_task_score);
    return macro_average(v);
  };
  const double j = cls_avg(joint), s = cls_avg(split);
  return {j < s, fmt("classification macro avg: joint %.2f (group-wise %.2f), %zu total steps each",
                     100.0 * j, 100.0 * s, kBudget)};
}

// ---------------------------------------------------------------------------

Outcome determinism() {
  const auto root = fs::temp_directory_path() / ("taskmix-acceptance-" + std::to_string(::getpid()));
  std::vector<std::string> dumps;
  for (std::size_t run = 0; run < 3; ++run) {
    TrainerConfig tc;
    tc.seed = 8;
    tc.eval_every = 100;
    auto cfg = paper_shaped_suite(SuitePreset::clue_like, 8);
    auto reg = generate_registry(cfg);
    PreparedData data(reg, tc.dimension);
    // Third run uses several workers; the bytes must not change.
    const std::size_t workers = run == 2 ? 3 : 1;
    const auto b = run_single_task_baselines(data, tc, 2, workers);
    MethodSpec two{MethodKind::two_stage};
    auto r = run_multi_task(two, data, reg, b, tc, TaxonomyRule::bm, 600, workers);
    r.metadata["created_at"] = std::to_string(std::chrono::system_clock::now().time_since_epoch().count());
    const auto dir = root / std::to_string(run);
    emit_report(r, dir);
    std::ifstream in(dir / "report.json", std::ios::binary);
    auto j = nlohmann::json::parse(in);
    j.erase("metadata");
    dumps.push_back(j.dump());
  }
  fs::remove_all(root);
  const bool pass = dumps[0] == dumps[1] && dumps[1] == dumps[2];
  return {pass, fmt("3 reruns (1, 1, 3 workers), report.json %zu bytes excluding metadata", dumps[0].size())};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only.insert(std::atoi(argv[++i]));

  const std::vector<Criterion> criteria = {
      {1, "metric arithmetic", metric_arithmetic},
      {2, "sampler distributions", sampler_distributions},
      {3, "stream convergence", stream_convergence},
      {4, "trainer correctness", trainer_correctness},
      {5, "overfitting signature", overfitting_signature},
      {6, "qualified-count ordering", qualified_ordering},
      {7, "negative transfer", negative_transfer},
      {8, "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d [PRIMARY] %-26s %s  (%.1fs)  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL",
                secs, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
