#include "therasim/role_fsm.hpp"

#include "therasim/error.hpp"

namespace therasim {

std::string_view to_string(DyadState state) {
  switch (state) {
    case DyadState::kDemonstrate: return "DEMONSTRATE";
    case DyadState::kObserve: return "OBSERVE";
    case DyadState::kHelp: return "HELP";
  }
  return "unknown";
}

std::optional<DyadState> parse_dyad_state(std::string_view text) {
  for (auto s : kAllDyadStates) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

CueChannel channel_of(CueKind kind) {
  switch (kind) {
    case CueKind::kReaches:
    case CueKind::kLifts:
    case CueKind::kStabilizes:
    case CueKind::kDoesNotReach:
    case CueKind::kDoesNotLift:
      return CueChannel::kPhysical;
    case CueKind::kSupports:
    case CueKind::kRequests:
    case CueKind::kCommands:
    case CueKind::kStates:
      return CueChannel::kVerbal;
    case CueKind::kEndOfTask:
    case CueKind::kPatientBegins:
    case CueKind::kPatientResumesProgress:
      return CueChannel::kControl;
  }
  return CueChannel::kControl;
}

bool is_error_cue(CueKind kind) { return kind == CueKind::kDoesNotReach || kind == CueKind::kDoesNotLift; }

std::string_view to_string(CueChannel channel) {
  switch (channel) {
    case CueChannel::kPhysical: return "physical";
    case CueChannel::kVerbal: return "verbal";
    case CueChannel::kControl: return "control";
  }
  return "unknown";
}

std::string_view to_string(CueKind kind) {
  switch (kind) {
    case CueKind::kReaches: return "reaches";
    case CueKind::kLifts: return "lifts";
    case CueKind::kStabilizes: return "stabilizes";
    case CueKind::kDoesNotReach: return "does_not_reach";
    case CueKind::kDoesNotLift: return "does_not_lift";
    case CueKind::kSupports: return "supports";
    case CueKind::kRequests: return "requests";
    case CueKind::kCommands: return "commands";
    case CueKind::kStates: return "states";
    case CueKind::kEndOfTask: return "end_of_task";
    case CueKind::kPatientBegins: return "patient_begins";
    case CueKind::kPatientResumesProgress: return "patient_resumes_progress";
  }
  return "unknown";
}

std::string_view to_string(CueActor actor) {
  return actor == CueActor::kTherapistRobot ? "therapist_robot" : "patient";
}

std::optional<CueChannel> parse_cue_channel(std::string_view text) {
  for (auto c : {CueChannel::kPhysical, CueChannel::kVerbal, CueChannel::kControl}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::optional<CueKind> parse_cue_kind(std::string_view text) {
  for (auto k : kAllCueKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<CueActor> parse_cue_actor(std::string_view text) {
  for (auto a : {CueActor::kTherapistRobot, CueActor::kPatient}) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

FsmState transition(const FsmState& state, const Cue& cue, double need, double theta_help) {
  if (channel_of(cue.kind) != cue.channel) {
    fail(ErrorCode::kInvalidArgument, "cue '" + std::string(to_string(cue.kind)) + "' is not a " +
                                          std::string(to_string(cue.channel)) + " cue");
  }
  if (!(theta_help >= 0.0 && theta_help <= 9.0)) {
    fail(ErrorCode::kInvalidArgument, "theta_help must lie in [0, 9]");
  }
  FsmState next = state;
  switch (state.dyad) {
    case DyadState::kDemonstrate:
      if (cue.kind == CueKind::kEndOfTask) {
        next.end_of_task_seen = true;
      } else if (cue.kind == CueKind::kPatientBegins && state.end_of_task_seen) {
        next = {DyadState::kObserve, false};
      }
      break;
    case DyadState::kObserve:
      if (is_error_cue(cue.kind)) next.dyad = need >= theta_help ? DyadState::kHelp : DyadState::kDemonstrate;
      break;
    case DyadState::kHelp:
      if (cue.kind == CueKind::kPatientResumesProgress) next.dyad = DyadState::kObserve;
      break;
  }
  return next;
}

void OccupancyStats::record_step(DyadState state) { ++steps_[index(state)]; }

void OccupancyStats::record_transition(DyadState from, DyadState to) {
  if (from != to) ++transitions_[index(from)][index(to)];
}

std::uint64_t OccupancyStats::total_steps() const { return steps_[0] + steps_[1] + steps_[2]; }

double OccupancyStats::fraction(DyadState state) const {
  const auto total = total_steps();
  return total == 0 ? 0.0 : static_cast<double>(steps(state)) / static_cast<double>(total);
}

std::uint64_t OccupancyStats::exits(DyadState from) const {
  const auto& row = transitions_[index(from)];
  return row[0] + row[1] + row[2];
}

OccupancyStats record_step(OccupancyStats stats, DyadState state) {
  stats.record_step(state);
  return stats;
}

OccupancyStats record_transition(OccupancyStats stats, DyadState from, DyadState to) {
  stats.record_transition(from, to);
  return stats;
}

}  // namespace therasim
