#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace therasim {

// Therapist/patient role pairs. Roles only ever change together.
enum class DyadState {
  kDemonstrate,  // therapist demonstrator, patient observer
  kObserve,      // therapist observer, patient performer
  kHelp,         // therapist helper, patient performer with assistance
};

inline constexpr std::array<DyadState, 3> kAllDyadStates = {DyadState::kDemonstrate, DyadState::kObserve,
                                                            DyadState::kHelp};

std::string_view to_string(DyadState state);
std::optional<DyadState> parse_dyad_state(std::string_view text);

enum class CueChannel { kPhysical, kVerbal, kControl };

enum class CueKind {
  // physical
  kReaches,
  kLifts,
  kStabilizes,
  kDoesNotReach,
  kDoesNotLift,
  // verbal
  kSupports,
  kRequests,
  kCommands,
  kStates,
  // control
  kEndOfTask,
  kPatientBegins,
  kPatientResumesProgress,
};

inline constexpr std::array<CueKind, 12> kAllCueKinds = {
    CueKind::kReaches,   CueKind::kLifts,    CueKind::kStabilizes, CueKind::kDoesNotReach,
    CueKind::kDoesNotLift, CueKind::kSupports, CueKind::kRequests,   CueKind::kCommands,
    CueKind::kStates,    CueKind::kEndOfTask, CueKind::kPatientBegins, CueKind::kPatientResumesProgress,
};

enum class CueActor { kTherapistRobot, kPatient };

CueChannel channel_of(CueKind kind);
bool is_error_cue(CueKind kind);

std::string_view to_string(CueChannel channel);
std::string_view to_string(CueKind kind);
std::string_view to_string(CueActor actor);
std::optional<CueChannel> parse_cue_channel(std::string_view text);
std::optional<CueKind> parse_cue_kind(std::string_view text);
std::optional<CueActor> parse_cue_actor(std::string_view text);

struct Cue {
  CueChannel channel;
  CueKind kind;
  CueActor actor;

  // Cue with the channel implied by its kind.
  static Cue make(CueKind kind, CueActor actor) { return {channel_of(kind), kind, actor}; }

  friend bool operator==(const Cue&, const Cue&) = default;
};

// FSM position. `end_of_task_seen` is the pending half of the compound
// end_of_task -> patient_begins guard out of DEMONSTRATE.
struct FsmState {
  DyadState dyad = DyadState::kDemonstrate;
  bool end_of_task_seen = false;

  friend bool operator==(const FsmState&, const FsmState&) = default;
};

// Transition map:
//   DEMONSTRATE + end_of_task, later patient_begins  -> OBSERVE
//   OBSERVE + does_not_reach | does_not_lift          -> HELP if need >= theta_help, else DEMONSTRATE
//   HELP + patient_resumes_progress                   -> OBSERVE
//   anything else                                     -> unchanged
// Throws Error(kInvalidArgument) for a cue whose kind is not on its channel
// or theta_help outside [0, 9].
FsmState transition(const FsmState& state, const Cue& cue, double need, double theta_help);

// Step and transition accounting. Fractions are exact count ratios.
class OccupancyStats {
 public:
  void record_step(DyadState state);
  // Self-transitions are ignored; only role changes are counted.
  void record_transition(DyadState from, DyadState to);

  std::uint64_t steps(DyadState state) const { return steps_[index(state)]; }
  std::uint64_t total_steps() const;
  // 0 for every state when nothing has been recorded.
  double fraction(DyadState state) const;
  std::uint64_t transitions(DyadState from, DyadState to) const { return transitions_[index(from)][index(to)]; }
  std::uint64_t exits(DyadState from) const;

  friend bool operator==(const OccupancyStats&, const OccupancyStats&) = default;

 private:
  static std::size_t index(DyadState s) { return static_cast<std::size_t>(s); }

  std::array<std::uint64_t, 3> steps_{};
  std::array<std::array<std::uint64_t, 3>, 3> transitions_{};
};

OccupancyStats record_step(OccupancyStats stats, DyadState state);
OccupancyStats record_transition(OccupancyStats stats, DyadState from, DyadState to);

}  // namespace therasim
