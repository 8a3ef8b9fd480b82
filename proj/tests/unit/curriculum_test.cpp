#include <gtest/gtest.h>

#include "taskmix/curriculum.hpp"

using namespace taskmix;

using Ids = std::vector<std::string>;

TEST(Resources, ThresholdRule) {
  const auto c = classify_resources({"a", "b"}, {{"a", 3}, {"b", 7}}, 5);
  EXPECT_EQ(c.task_ids(ResourceClass::low), Ids{"a"});
  EXPECT_EQ(c.task_ids(ResourceClass::high), Ids{"b"});
  EXPECT_EQ(classify_resources({"a"}, {{"a", 5}}, 5).tasks[0].resource, ResourceClass::high);
}

TEST(Resources, Errors) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  EXPECT_EQ(code([] { classify_resources({"a"}, {}); }), ErrorCode::MissingTask);
  EXPECT_EQ(code([] { classify_resources({"a"}, {{"a", -1}}); }), ErrorCode::NegativeEpochs);
  EXPECT_EQ(code([] { classify_resources({"a"}, {{"a", 1}}, 0); }), ErrorCode::InvalidThreshold);
  EXPECT_EQ(code([] { measure_saturation({}); }), ErrorCode::EmptyCurve);
}

TEST(Saturation, Argmax) {
  EXPECT_EQ(measure_saturation({{1, .6}, {2, .7}, {3, .69}}), 2);
  EXPECT_EQ(measure_saturation({{1, .5}, {2, .5}}), 1);
  std::vector<std::pair<double, double>> rising;
  for (int e = 1; e <= 10; ++e) rising.emplace_back(e, 0.05 * e);
  EXPECT_EQ(measure_saturation(rising), 10);
}

TEST(TwoStage, ClueDefaults) {
  const auto c = classify_resources({"CWSC", "TNEWS", "CSL"}, {{"CWSC", 2}, {"TNEWS", 9}, {"CSL", 6}});
  const auto plan = build_two_stage_plan(c, 1, 10, 20000, 2.0, 15000);
  ASSERT_EQ(plan.stages.size(), 2u);
  EXPECT_EQ(plan.stages[0].task_ids, (Ids{"TNEWS", "CSL"}));
  EXPECT_EQ(plan.stages[0].strategy, StrategyConfig::instance_balanced());
  EXPECT_EQ(plan.stages[0].epochs, 1.0);
  EXPECT_EQ(plan.stages[1].task_ids, (Ids{"CWSC", "TNEWS", "CSL"}));
  EXPECT_EQ(plan.stages[1].strategy, StrategyConfig::capped(20000, 2.0));
  EXPECT_EQ(plan.stages[1].epochs, 10.0);
  EXPECT_EQ(plan.step_cap, 15000u);
}

TEST(TwoStage, ApplicationDefaults) {
  const auto c = classify_resources({"a", "b"}, {{"a", 8}, {"b", 1}});
  const auto plan = build_two_stage_plan(c, 1, 10, 8000, 3.33);
  EXPECT_EQ(plan.stages.back().strategy, StrategyConfig::capped(8000, 3.33));
}

TEST(TwoStage, NoHighResourceTasks) {
  const auto c = classify_resources({"a", "b"}, {{"a", 2}, {"b", 2}});
  const auto plan = build_two_stage_plan(c, 1, 10, 20000, 2.0);
  ASSERT_EQ(plan.stages.size(), 1u);
  EXPECT_EQ(plan.stages[0].task_ids, (Ids{"a", "b"}));
}

TEST(Steps, EpochsTimesEffectiveSize) {
  const TaskSizes sizes = {{"big", 30000}, {"small", 1000}};
  CurriculumPlan plan;
  plan.stages.push_back({"high_resource", {"big"}, StrategyConfig::instance_balanced(), 1.0, {}});
  plan.stages.push_back({"mixture", {"big", "small"}, StrategyConfig::capped(20000, 2.0), 10.0, {}});
  // ceil(30000/32) and ceil(10 * (20000 + 1000) / 32)
  EXPECT_EQ(resolve_steps(plan, sizes, 32), (std::vector<std::size_t>{938, 6563}));
  plan.stages[1].max_steps = 100;
  EXPECT_EQ(resolve_steps(plan, sizes, 32), (std::vector<std::size_t>{938, 100}));
}

TEST(Steps, CapScalesProportionally) {
  const TaskSizes sizes = {{"big", 30000}, {"small", 1000}};
  CurriculumPlan plan;
  plan.step_cap = 1000;
  plan.stages.push_back({"high_resource", {"big"}, StrategyConfig::instance_balanced(), 1.0, {}});
  plan.stages.push_back({"mixture", {"big", "small"}, StrategyConfig::capped(20000, 2.0), 10.0, {}});
  // 938 * 1000 / 7501 = 125 (floor); the rest goes to the last stage.
  EXPECT_EQ(resolve_steps(plan, sizes, 32), (std::vector<std::size_t>{125, 875}));
  EXPECT_EQ(scale_to_budget({10, 20}, 100), (std::vector<std::size_t>{10, 20}));
  EXPECT_EQ(scale_to_budget({10, 20}, 3), (std::vector<std::size_t>{1, 2}));
}

TEST(Plan, Validation) {
  EXPECT_THROW(single_stage_plan({}, StrategyConfig::instance_balanced(), 1.0), Error);
  EXPECT_THROW(single_stage_plan({"a"}, StrategyConfig::instance_balanced(), 0.0), Error);
  CurriculumPlan dropping;
  dropping.stages.push_back({"s1", {"a", "b"}, StrategyConfig::instance_balanced(), 1.0, {}});
  dropping.stages.push_back({"s2", {"a"}, StrategyConfig::instance_balanced(), 1.0, {}});
  EXPECT_THROW(validate(dropping), Error);
}
