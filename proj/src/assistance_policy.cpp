#include "therasim/assistance_policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "therasim/error.hpp"

namespace therasim {

namespace {

constexpr std::array<std::string_view, 10> kLevelLabels = {
    "no assistance",
    "verbal supportive",
    "verbal non-directive",
    "verbal directive",
    "gestures",
    "task or environment modification",
    "demonstration",
    "physical guidance",
    "partial physical assistance",
    "total assistance",
};

}  // namespace

AssistanceLevel::AssistanceLevel(int level) : level_(level) {
  if (level < 0 || level > kMaxAssistanceLevel) {
    fail(ErrorCode::kInvalidArgument, "assistance level " + std::to_string(level) + " outside [0, 9]");
  }
}

std::string_view AssistanceLevel::label() const { return kLevelLabels[static_cast<std::size_t>(level_)]; }

std::string_view assistance_label(int level) { return AssistanceLevel(level).label(); }

std::string_view to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::kNone: return "none";
    case ActionKind::kContinue: return "continue";
    case ActionKind::kEncourage: return "encourage";
    case ActionKind::kCorrect: return "correct";
    case ActionKind::kDemonstrate: return "demonstrate";
    case ActionKind::kPhysicalAssist: return "physical_assist";
    case ActionKind::kHalt: return "halt";
  }
  return "unknown";
}

std::optional<ActionKind> parse_action_kind(std::string_view text) {
  for (auto kind : {ActionKind::kNone, ActionKind::kContinue, ActionKind::kEncourage, ActionKind::kCorrect,
                    ActionKind::kDemonstrate, ActionKind::kPhysicalAssist, ActionKind::kHalt}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

void validate_action(const AssistanceAction& action) {
  if (action.kind == ActionKind::kHalt) return;
  const bool is_none = action.kind == ActionKind::kNone;
  const bool is_zero = action.level.value() == 0;
  if (is_none != is_zero) {
    fail(ErrorCode::kInvalidArgument, "action '" + action.id + "': kind none requires level 0 and vice versa");
  }
}

AssistanceAction halt_action() { return {"halt", AssistanceLevel(0), ActionKind::kHalt, std::nullopt}; }

std::vector<AssistanceAction> default_ladder() {
  return {
      {"no_assistance", AssistanceLevel(0), ActionKind::kNone, std::nullopt},
      {"keep_going", AssistanceLevel(1), ActionKind::kEncourage, "Keep going."},
      {"flag_mistake", AssistanceLevel(2), ActionKind::kCorrect, "I think you made a mistake."},
      {"directive_hint", AssistanceLevel(3), ActionKind::kCorrect, "Try the next step I point out."},
      {"gesture", AssistanceLevel(4), ActionKind::kCorrect, std::nullopt},
      {"modify_task", AssistanceLevel(5), ActionKind::kCorrect, std::nullopt},
      {"demonstrate", AssistanceLevel(6), ActionKind::kDemonstrate, "Watch me do it."},
      {"physical_guidance", AssistanceLevel(7), ActionKind::kPhysicalAssist, std::nullopt},
      {"partial_physical", AssistanceLevel(8), ActionKind::kPhysicalAssist, std::nullopt},
      {"total_assistance", AssistanceLevel(9), ActionKind::kPhysicalAssist, std::nullopt},
  };
}

double NeedWeights::weight(NeedSignalKind kind) const {
  switch (kind) {
    case NeedSignalKind::kMistake: return mistake;
    case NeedSignalKind::kHesitation: return hesitation;
    case NeedSignalKind::kGazeAtRobot: return gaze_at_robot;
    case NeedSignalKind::kExplicitRequest: return explicit_request;
    case NeedSignalKind::kProgress: return progress;
    case NeedSignalKind::kNoProgressTick: return no_progress;
  }
  return 0.0;
}

NeedState update_need(const NeedState& state, std::span<const NeedSignal> signals, const NeedWeights& weights,
                      bool task_boundary) {
  NeedState next = state;
  if (task_boundary) next.consecutive_no_progress = 0;
  double need = (task_boundary ? weights.decay_at_boundary : weights.decay_within_task) * state.need;
  for (const auto& signal : signals) {
    switch (signal.kind) {
      case NeedSignalKind::kProgress:
        next.consecutive_no_progress = 0;
        next.last_progress_step = signal.step_index;
        need += weights.progress;
        break;
      case NeedSignalKind::kNoProgressTick:
        ++next.consecutive_no_progress;
        need += weights.no_progress * next.consecutive_no_progress;
        break;
      default:
        need += weights.weight(signal.kind);
        break;
    }
  }
  next.need = std::clamp(need, 0.0, kMaxNeed);
  return next;
}

const AssistanceAction& select_action(double need, std::span<const AssistanceAction> candidates) {
  if (candidates.empty()) fail(ErrorCode::kInvalidArgument, "select_action: no candidate actions");
  const AssistanceAction* best = &candidates.front();
  double best_distance = std::abs(need - best->level.value());
  for (const auto& candidate : candidates.subspan(1)) {
    const double distance = std::abs(need - candidate.level.value());
    if (distance < best_distance || (distance == best_distance && candidate.level < best->level)) {
      best = &candidate;
      best_distance = distance;
    }
  }
  return *best;
}

double autonomy(double need, const AssistanceAction& action, double c) {
  if (!(c > 0.0)) fail(ErrorCode::kInvalidArgument, "autonomy: c must be positive");
  const double distance = std::abs(need - action.level.value());
  if (distance > c) fail(ErrorCode::kInvalidArgument, "autonomy: distance exceeds c");
  return (c - distance) / c;
}

}  // namespace therasim
