#pragma once

#include <optional>
#include <string_view>

namespace therasim {

// Observations the assistance policy turns into a need estimate.
enum class NeedSignalKind {
  kMistake,
  kHesitation,
  kGazeAtRobot,
  kExplicitRequest,
  kProgress,
  kNoProgressTick,
};

inline constexpr NeedSignalKind kAllNeedSignalKinds[] = {
    NeedSignalKind::kMistake,         NeedSignalKind::kHesitation,
    NeedSignalKind::kGazeAtRobot,     NeedSignalKind::kExplicitRequest,
    NeedSignalKind::kProgress,        NeedSignalKind::kNoProgressTick,
};

std::string_view to_string(NeedSignalKind kind);
std::optional<NeedSignalKind> parse_need_signal_kind(std::string_view text);

}  // namespace therasim
