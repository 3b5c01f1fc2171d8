#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "therasim/assistance_policy.hpp"
#include "therasim/behavior_model.hpp"
#include "therasim/child_simulator.hpp"
#include "therasim/rng.hpp"
#include "therasim/role_fsm.hpp"

namespace therasim {

enum class GateMode { kAutoApprove, kInteractive };

std::string_view to_string(GateMode mode);

struct TaskSpec {
  std::string activity_id;
  std::vector<AssistanceAction> ladder = default_ladder();
  int max_steps = 10;
  int progress_goal = 3;
  std::optional<double> intensity;
};

struct PolicyConfig {
  NeedWeights weights;
  double c = 9.0;
  double theta_help = 3.0;
};

// How cues are generated from the simulated child's response.
struct CueConfig {
  // Robot verbal cue kinds, sampled in proportion to these weights.
  std::map<CueKind, double> verbal_weights = {
      {CueKind::kSupports, 59.5}, {CueKind::kRequests, 38.5}, {CueKind::kCommands, 30.5}, {CueKind::kStates, 59.5}};
  // does_not_reach: a motor feature at or above the value triggers it with this probability.
  double motor_error_probability = 0.7;
  int motor_error_min_value = 2;
  // does_not_lift: mean feature value at or above the threshold triggers it with this probability.
  double task_error_probability = 0.5;
  double task_error_min_mean = 1.5;
  // Minimum engagement for patient_begins after a demonstration.
  double begin_engagement = 0.3;
};

struct ProgressConfig {
  // Progress needs the response's mean feature value strictly below this.
  double max_mean_feature_value = 1.0;
  // ...and the previously executed action to be one of these kinds.
  std::vector<ActionKind> action_kinds = {ActionKind::kNone, ActionKind::kContinue, ActionKind::kEncourage};
};

struct SessionConfig {
  std::uint64_t seed = 0;
  ChildProfile profile;
  std::vector<TaskSpec> scenario;
  PolicyConfig policy;
  GateMode caregiver_gate = GateMode::kAutoApprove;
  CueConfig cues;
  ProgressConfig progress;
  double engagement_noise = 0.05;
};

// Strict: id, level, kind and optional utterance.
AssistanceAction parse_assistance_action(const nlohmann::json& j, const std::string& where);
nlohmann::ordered_json assistance_action_to_json(const AssistanceAction& action);

// Strict parse; defaults fill omitted optional sections.
SessionConfig parse_session_config(const nlohmann::json& doc);
SessionConfig load_session_config(const std::string& path);

// Fully expanded config. The gate mode is left out of the trace echo
// (include_gate = false) so batch and interactive traces coincide.
nlohmann::ordered_json session_config_to_json(const SessionConfig& config, bool include_gate = true);

// Checks the config against catalog and table; throws naming the field.
void validate_session_config(const SessionConfig& config, const BehaviorCatalog& catalog,
                             const InstantiationTable& table);

enum class GateOutcome { kApproved, kOverridden, kHalted };

std::string_view to_string(GateOutcome outcome);

struct GateDecision {
  GateOutcome outcome = GateOutcome::kApproved;
  std::optional<AssistanceAction> action;  // override only

  static GateDecision approve() { return {}; }
  static GateDecision override_with(AssistanceAction action) { return {GateOutcome::kOverridden, std::move(action)}; }
  static GateDecision halt() { return {GateOutcome::kHalted, std::nullopt}; }
};

enum class TaskOutcomeKind { kPending, kCompleted, kExhausted, kHalted };

std::string_view to_string(TaskOutcomeKind kind);

struct TaskOutcome {
  std::string activity_id;
  TaskOutcomeKind outcome = TaskOutcomeKind::kPending;
  int steps = 0;
  int progress = 0;

  friend bool operator==(const TaskOutcome&, const TaskOutcome&) = default;
};

struct SessionStep {
  std::size_t step_index = 0;
  std::size_t task_index = 0;
  StimulusEvent stimulus;
  ChildResponse response;
  std::vector<NeedSignalKind> need_signals;
  double need_before = 0.0;
  double need_after = 0.0;
  AssistanceAction chosen_action;
  AssistanceAction executed_action;
  GateOutcome gate_decision = GateOutcome::kApproved;
  std::vector<Cue> cues;
  DyadState dyad_before = DyadState::kDemonstrate;
  DyadState dyad_after = DyadState::kDemonstrate;
  double autonomy = 1.0;
  bool progress = false;
  // Set on the step that closed its task.
  std::optional<TaskOutcomeKind> task_outcome;
};

struct SessionSummary {
  std::size_t steps = 0;
  double mean_autonomy = 0.0;
  double min_autonomy = 0.0;
  OccupancyStats occupancy;
  std::vector<TaskOutcome> tasks;
  std::size_t approved = 0;
  std::size_t overridden = 0;
  std::size_t halted = 0;
};

struct SessionTrace {
  SessionConfig config;
  std::vector<SessionStep> steps;
  SessionSummary summary;
  bool finalized = false;
};

// One closed-loop session. Sequential; do not share between threads without
// external synchronization. Catalog and table must outlive the session.
class Session {
 public:
  // Validates the config; starts in DEMONSTRATE with need 0 at step 0.
  Session(SessionConfig config, const BehaviorCatalog& catalog, const InstantiationTable& table);

  const SessionConfig& config() const { return config_; }
  bool finished() const { return task_index_ >= config_.scenario.size(); }
  DyadState dyad() const { return fsm_.dyad; }
  const NeedState& need_state() const { return need_; }
  std::size_t step_count() const { return steps_.size(); }
  std::size_t task_index() const { return task_index_; }
  const std::vector<SessionStep>& steps() const { return steps_; }
  const std::optional<SessionStep>& pending() const { return pending_; }

  // Runs the loop through action selection and holds the result until a
  // gate decision arrives. Repeated calls return the same proposal.
  const SessionStep& propose();
  // Commits the pending proposal. Throws kConflict when nothing is pending.
  const SessionStep& decide(const GateDecision& decision);

  // Auto-approve mode only: propose and commit in one call. An override
  // replaces the policy's choice.
  const SessionStep& step(const std::optional<AssistanceAction>& override_action = std::nullopt);

  // Auto-approve mode only; steps until the scenario is exhausted.
  SessionTrace run_to_completion();

  SessionSummary summary() const;
  SessionTrace trace() const;

 private:
  void close_task(TaskOutcomeKind outcome, SessionStep& step);

  SessionConfig config_;
  const BehaviorCatalog* catalog_;
  const InstantiationTable* table_;
  Rng rng_;
  NeedState need_;
  FsmState fsm_;
  OccupancyStats occupancy_;
  std::size_t task_index_ = 0;
  int task_step_ = 0;
  int task_progress_ = 0;
  ActionKind previous_kind_ = ActionKind::kNone;
  std::vector<TaskOutcome> outcomes_;
  std::vector<SessionStep> steps_;
  std::optional<SessionStep> pending_;
};

// Summary recomputed from a step list; used for traces read back from disk.
SessionSummary summarize(const SessionConfig& config, const std::vector<SessionStep>& steps);

}  // namespace therasim
