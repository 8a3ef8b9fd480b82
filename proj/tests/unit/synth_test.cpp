#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "taskmix/synth.hpp"
#include "taskmix/trainer.hpp"

using namespace taskmix;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Presets, ClueSizes) {
  const auto c = paper_shaped_suite(SuitePreset::clue_like);
  const std::map<std::string, std::size_t> expected = {{"CWSC", 947},  {"TNEWS", 49726}, {"IFLYTEK", 11425},
                                                       {"CSL", 19836}, {"AFQMC", 6564},  {"OCNLI", 50437}};
  ASSERT_EQ(c.tasks.size(), 6u);
  for (const auto& t : c.tasks) {
    EXPECT_EQ(t.n_train, expected.at(t.task_id));
    EXPECT_GE(t.dev_size(), kPresetMinDev);
  }
  for (const auto& t : c.tasks)
    if (t.task_id == "IFLYTEK") EXPECT_EQ(t.num_labels, 119u);
    else if (t.task_id == "TNEWS") EXPECT_EQ(t.num_labels, 15u);
}

TEST(Presets, ApplicationSchemes) {
  const auto c = paper_shaped_suite(SuitePreset::application_like);
  ASSERT_EQ(c.tasks.size(), 17u);
  std::map<LabelScheme, int> count;
  for (const auto& t : c.tasks) ++count[t.label_scheme];
  EXPECT_EQ(count[LabelScheme::binary], 12);
  EXPECT_EQ(count[LabelScheme::ordinal], 2);
  EXPECT_EQ(count[LabelScheme::multiclass], 3);
}

TEST(Synth, Deterministic) {
  auto c = paper_shaped_suite(SuitePreset::application_like, 4);
  for (auto& t : c.tasks) t.n_train = std::min<std::size_t>(t.n_train, 300);
  const auto a = generate_suite(c);
  const auto b = generate_suite(c);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].train, b[i].train);
    EXPECT_EQ(a[i].dev, b[i].dev);
  }
  c.seed = 5;
  EXPECT_NE(generate_suite(c)[0].train, a[0].train);
}

TEST(Synth, FilesAreByteIdenticalAndLoadable) {
  SynthSuiteConfig c;
  c.seed = 1;
  SynthTaskConfig t;
  t.task_id = "alpha";
  t.n_train = 120;
  t.num_labels = 3;
  t.label_noise = 0.2;
  c.tasks = {t};
  const auto root = fs::temp_directory_path() / "taskmix-synth-test";
  fs::remove_all(root);
  const auto m1 = generate(c, root / "one");
  const auto m2 = generate(c, root / "two");
  for (const auto* name : {"manifest.json", "alpha.train.jsonl", "alpha.dev.jsonl"})
    EXPECT_EQ(slurp(root / "one" / name), slurp(root / "two" / name)) << name;
  const auto reg = load_tasks(m1);
  EXPECT_EQ(reg, generate_registry(c));
  EXPECT_EQ(reg.at("alpha").data.dev.size(), 200u);
  fs::remove_all(root);
}

TEST(Synth, SplitsDisjointAndLabelsCovered) {
  auto c = paper_shaped_suite(SuitePreset::clue_like, 3);
  c.tasks.resize(3);  // CWSC, TNEWS, IFLYTEK
  const auto reg = generate_registry(c);
  for (const auto& e : reg.entries()) {
    std::set<Record> train(e.data.train.begin(), e.data.train.end());
    for (const auto& r : e.data.dev) EXPECT_FALSE(train.count(r));
    const auto& cfg = *std::find_if(c.tasks.begin(), c.tasks.end(),
                                    [&](const auto& t) { return t.task_id == e.spec.task_id; });
    EXPECT_EQ(candidate_targets(e.data).size(), cfg.num_labels);
  }
}

TEST(Synth, PositiveSimilarityCopiesSignalMapping) {
  SynthSuiteConfig c;
  SynthTaskConfig a;
  a.task_id = "a";
  a.num_labels = 3;
  a.vocab_size = 300;
  SynthTaskConfig b = a;
  b.task_id = "b";
  b.reference = 0;
  b.similarity = 1.0;
  c.tasks = {a, b};
  const auto suite = generate_suite(c);
  EXPECT_EQ(suite[1].layout.signal, suite[0].layout.signal);
  EXPECT_EQ(suite[1].layout.label_names, suite[0].layout.label_names);

  c.tasks[1].similarity = -1.0;
  const auto flipped = generate_suite(c);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(flipped[1].layout.signal[(l + 1) % 3], suite[0].layout.signal[l]);
}

TEST(Synth, NoiselessDisjointTaskIsLearnable) {
  SynthSuiteConfig c;
  c.seed = 8;
  SynthTaskConfig t;
  t.task_id = "clean";
  t.n_train = 20000;
  t.num_labels = 4;
  t.vocab_size = 400;
  c.tasks = {t};
  const auto reg = generate_registry(c);
  const TrainerConfig tc;
  const PreparedData data(reg, tc.dimension);
  const auto res = train(single_stage_plan({"clean"}, StrategyConfig::instance_balanced(), 1.0), data, tc);
  // Documents without any signal word (about 0.7^12) cap accuracy just under 1.
  EXPECT_GE(curve_of(res.curve, "clean").back().second, 0.98);
}

TEST(Synth, GenerationTaskReusesReference) {
  const auto c = with_generation_task(paper_shaped_suite(SuitePreset::clue_like), "GEN", 947, 0, -1.0);
  ASSERT_EQ(c.tasks.size(), 7u);
  const auto& g = c.tasks.back();
  EXPECT_EQ(g.modality, Modality::generation);
  EXPECT_EQ(g.label_scheme, LabelScheme::freeform);
  EXPECT_EQ(g.num_labels, c.tasks[0].num_labels);
  EXPECT_THROW(with_generation_task(c, "X", 10, 99, -1.0), Error);
}

TEST(Synth, ConfigValidation) {
  SynthSuiteConfig c;
  EXPECT_THROW(validate(c), Error);
  SynthTaskConfig t;
  t.task_id = "x";
  t.num_labels = 1;
  c.tasks = {t};
  EXPECT_THROW(validate(c), Error);
  c.tasks[0].num_labels = 2;
  c.tasks[0].label_noise = 0.5;
  EXPECT_THROW(validate(c), Error);
  c.tasks[0].label_noise = 0.0;
  c.tasks[0].similarity = 0.5;
  EXPECT_THROW(validate(c), Error);  // no reference
}
