#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "therasim/signal.hpp"

namespace therasim {

inline constexpr int kMaxAssistanceLevel = 9;
inline constexpr double kMaxNeed = 9.0;

// Graded assistance on the 0..9 scale: 0 is no assistance, 1..9 follow the
// PASS ordering from verbal support up to complete assistance.
class AssistanceLevel {
 public:
  constexpr AssistanceLevel() = default;
  // Throws Error(kInvalidArgument) outside [0, 9].
  explicit AssistanceLevel(int level);

  constexpr int value() const { return level_; }
  std::string_view label() const;

  friend constexpr auto operator<=>(AssistanceLevel, AssistanceLevel) = default;

 private:
  int level_ = 0;
};

std::string_view assistance_label(int level);

enum class ActionKind { kNone, kContinue, kEncourage, kCorrect, kDemonstrate, kPhysicalAssist, kHalt };

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> parse_action_kind(std::string_view text);

struct AssistanceAction {
  std::string id;
  AssistanceLevel level;
  ActionKind kind = ActionKind::kNone;
  std::optional<std::string> utterance;

  friend bool operator==(const AssistanceAction&, const AssistanceAction&) = default;
};

// Enforces: kind none <=> level 0 (halt is allowed at any level).
void validate_action(const AssistanceAction& action);

// The robot action that ends the current task.
AssistanceAction halt_action();

// One action per level 0..9.
std::vector<AssistanceAction> default_ladder();

struct NeedState {
  double need = 0.0;
  int last_progress_step = -1;
  int consecutive_no_progress = 0;

  friend bool operator==(const NeedState&, const NeedState&) = default;
};

struct NeedSignal {
  NeedSignalKind kind;
  int step_index = 0;
};

struct NeedWeights {
  double mistake = 2.0;
  double hesitation = 0.5;
  double gaze_at_robot = 0.5;
  double explicit_request = 2.0;
  double progress = -1.0;
  double no_progress = 0.25;  // multiplied by the consecutive tick count
  double decay_within_task = 1.0;
  double decay_at_boundary = 0.5;

  double weight(NeedSignalKind kind) const;
};

// need' = clamp(decay * need + sum of weights, 0, 9). The decay factor is
// decay_at_boundary on the first step of a new task (which also clears the
// no-progress counter), else decay_within_task.
NeedState update_need(const NeedState& state, std::span<const NeedSignal> signals, const NeedWeights& weights,
                      bool task_boundary = false);

// argmin |need - level| over candidates; ties go to the lower level, then
// to the earlier candidate. Throws on an empty list.
const AssistanceAction& select_action(double need, std::span<const AssistanceAction> candidates);

// (c - |need - level|) / c. Throws if c <= 0 or the distance exceeds c.
double autonomy(double need, const AssistanceAction& action, double c = 9.0);

}  // namespace therasim
