#include "therasim/error.hpp"
#include "therasim/signal.hpp"

namespace therasim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

std::string_view to_string(NeedSignalKind kind) {
  switch (kind) {
    case NeedSignalKind::kMistake: return "mistake";
    case NeedSignalKind::kHesitation: return "hesitation";
    case NeedSignalKind::kGazeAtRobot: return "gaze_at_robot";
    case NeedSignalKind::kExplicitRequest: return "explicit_request";
    case NeedSignalKind::kProgress: return "progress";
    case NeedSignalKind::kNoProgressTick: return "no_progress_tick";
  }
  return "unknown";
}

std::optional<NeedSignalKind> parse_need_signal_kind(std::string_view text) {
  for (auto kind : kAllNeedSignalKinds) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

}  // namespace therasim
