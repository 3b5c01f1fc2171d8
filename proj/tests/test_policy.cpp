#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "therasim/assistance_policy.hpp"
#include "therasim/error.hpp"

namespace {

using namespace therasim;

NeedState feed(NeedState state, std::initializer_list<NeedSignalKind> kinds, int step, bool boundary = false) {
  std::vector<NeedSignal> signals;
  for (auto k : kinds) signals.push_back({k, step});
  return update_need(state, signals, NeedWeights{}, boundary);
}

AssistanceAction action_at(int level) {
  return {"a" + std::to_string(level), AssistanceLevel(level), level == 0 ? ActionKind::kNone : ActionKind::kCorrect,
          std::nullopt};
}

TEST(Need, DignityTraceCalibration) {
  const auto ladder = default_ladder();
  NeedState s;
  s = feed(s, {NeedSignalKind::kMistake}, 0);
  EXPECT_EQ(s.need, 2.0);
  EXPECT_EQ(select_action(s.need, ladder).level.value(), 2);
  EXPECT_EQ(select_action(s.need, ladder).utterance, "I think you made a mistake.");
  s = feed(s, {NeedSignalKind::kHesitation, NeedSignalKind::kGazeAtRobot}, 1);
  EXPECT_EQ(s.need, 3.0);
  EXPECT_EQ(select_action(s.need, ladder).level.value(), 3);
}

TEST(Need, ClampedToScale) {
  NeedState s;
  for (int i = 0; i < 10; ++i) s = feed(s, {NeedSignalKind::kMistake, NeedSignalKind::kExplicitRequest}, i);
  EXPECT_EQ(s.need, 9.0);
  for (int i = 0; i < 20; ++i) s = feed(s, {NeedSignalKind::kProgress}, 10 + i);
  EXPECT_EQ(s.need, 0.0);
  EXPECT_EQ(s.last_progress_step, 29);
}

TEST(Need, NoProgressEscalates) {
  NeedState s;
  s = feed(s, {NeedSignalKind::kNoProgressTick}, 0);
  EXPECT_DOUBLE_EQ(s.need, 0.25);
  s = feed(s, {NeedSignalKind::kNoProgressTick}, 1);
  EXPECT_DOUBLE_EQ(s.need, 0.75);
  s = feed(s, {NeedSignalKind::kNoProgressTick}, 2);
  EXPECT_DOUBLE_EQ(s.need, 1.5);
  EXPECT_EQ(s.consecutive_no_progress, 3);
  s = feed(s, {NeedSignalKind::kProgress}, 3);
  EXPECT_EQ(s.consecutive_no_progress, 0);
  EXPECT_DOUBLE_EQ(s.need, 0.5);
}

TEST(Need, BoundaryDecaysAndResets) {
  NeedState s{4.0, -1, 5};
  s = feed(s, {}, 0, true);
  EXPECT_DOUBLE_EQ(s.need, 2.0);
  EXPECT_EQ(s.consecutive_no_progress, 0);
  s = feed(s, {}, 1, false);
  EXPECT_DOUBLE_EQ(s.need, 2.0);
}

TEST(Levels, RangeAndLabels) {
  EXPECT_THROW(AssistanceLevel(-1), Error);
  EXPECT_THROW(AssistanceLevel(10), Error);
  EXPECT_EQ(AssistanceLevel(0).label(), assistance_label(0));
  const auto ladder = default_ladder();
  ASSERT_EQ(ladder.size(), 10u);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(ladder[i].level.value(), i);
    EXPECT_NO_THROW(validate_action(ladder[i]));
  }
  EXPECT_EQ(ladder[3].kind, ActionKind::kCorrect);
  EXPECT_EQ(ladder[6].kind, ActionKind::kDemonstrate);
  EXPECT_EQ(ladder[9].kind, ActionKind::kPhysicalAssist);
}

TEST(Levels, ActionValidation) {
  EXPECT_THROW(validate_action({"x", AssistanceLevel(0), ActionKind::kEncourage, std::nullopt}), Error);
  EXPECT_THROW(validate_action({"x", AssistanceLevel(2), ActionKind::kNone, std::nullopt}), Error);
  EXPECT_NO_THROW(validate_action(halt_action()));
  EXPECT_EQ(halt_action().kind, ActionKind::kHalt);
  for (auto k : {ActionKind::kNone, ActionKind::kContinue, ActionKind::kEncourage, ActionKind::kCorrect,
                 ActionKind::kDemonstrate, ActionKind::kPhysicalAssist, ActionKind::kHalt}) {
    EXPECT_EQ(parse_action_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_action_kind("dance"));
}

TEST(Autonomy, EqualNeedAndLevelIsOne) {
  for (int level = 0; level <= 9; ++level) {
    EXPECT_EQ(autonomy(level, action_at(level)), 1.0);
    EXPECT_EQ(autonomy(level, action_at(level), 20.0), 1.0);
  }
}

TEST(Autonomy, MonotoneOnGrid) {
  // For each level, sort grid points by distance and check autonomy never rises.
  for (int level = 0; level <= 9; ++level) {
    double previous_distance = -1.0;
    double previous_value = 2.0;
    for (int step = 0; step <= 90; ++step) {
      const double need = level + step * 0.1 <= 9.0 + 1e-12 ? level + step * 0.1 : -1.0;
      if (need < 0) break;
      const double distance = std::abs(need - level);
      const double value = autonomy(need, action_at(level));
      EXPECT_GE(distance, previous_distance);
      EXPECT_LE(value, previous_value + 1e-15);
      EXPECT_NEAR(value, (9.0 - distance) / 9.0, 1e-12);
      previous_distance = distance;
      previous_value = value;
    }
  }
  // Full grid, pairwise.
  std::vector<std::pair<double, double>> points;
  for (int n = 0; n <= 90; ++n) {
    for (int l = 0; l <= 9; ++l) {
      const double need = n * 0.1;
      points.emplace_back(std::abs(need - l), autonomy(need, action_at(l)));
    }
  }
  std::sort(points.begin(), points.end());
  for (std::size_t i = 1; i < points.size(); ++i) EXPECT_LE(points[i].second, points[i - 1].second + 1e-12);
  for (const auto& p : points) {
    EXPECT_GE(p.second, 0.0);
    EXPECT_LE(p.second, 1.0);
  }
}

TEST(Autonomy, Errors) {
  EXPECT_THROW(autonomy(1.0, action_at(1), 0.0), Error);
  EXPECT_THROW(autonomy(9.0, action_at(0), 5.0), Error);
}

TEST(Select, ArgminOnRandomDraws) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> need_dist(0.0, 9.0);
  std::uniform_int_distribution<int> level_dist(0, 9);
  std::uniform_int_distribution<int> size_dist(1, 10);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<AssistanceAction> ladder;
    const int n = size_dist(gen);
    for (int i = 0; i < n; ++i) ladder.push_back(action_at(level_dist(gen)));
    const double need = trial % 7 == 0 ? std::round(need_dist(gen) * 2.0) / 2.0 : need_dist(gen);
    const auto& chosen = select_action(need, ladder);
    const double best = std::abs(need - chosen.level.value());
    for (const auto& a : ladder) {
      const double d = std::abs(need - a.level.value());
      EXPECT_GE(d, best);
      if (d == best) EXPECT_GE(a.level, chosen.level);
    }
  }
}

TEST(Select, TieGoesToLowerLevel) {
  const std::vector<AssistanceAction> ladder{action_at(3), action_at(2)};
  EXPECT_EQ(select_action(2.5, ladder).level.value(), 2);
  EXPECT_THROW(select_action(1.0, std::span<const AssistanceAction>{}), Error);
}

}  // namespace
