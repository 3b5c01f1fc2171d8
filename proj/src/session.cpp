#include "therasim/session.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "therasim/error.hpp"

namespace therasim {

namespace {

using detail::json;
using ojson = nlohmann::ordered_json;

void read_number(const json& obj, std::string_view key, const std::string& where, double& out) {
  if (const auto* v = detail::find(obj, key)) out = detail::as_number(*v, detail::join_path(where, key));
}

void read_int(const json& obj, std::string_view key, const std::string& where, int& out) {
  if (const auto* v = detail::find(obj, key)) out = static_cast<int>(detail::as_int(*v, detail::join_path(where, key)));
}

NeedWeights parse_weights(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j,
                              {"mistake", "hesitation", "gaze_at_robot", "explicit_request", "progress",
                               "no_progress", "decay_within_task", "decay_at_boundary"},
                              where);
  NeedWeights w;
  read_number(j, "mistake", where, w.mistake);
  read_number(j, "hesitation", where, w.hesitation);
  read_number(j, "gaze_at_robot", where, w.gaze_at_robot);
  read_number(j, "explicit_request", where, w.explicit_request);
  read_number(j, "progress", where, w.progress);
  read_number(j, "no_progress", where, w.no_progress);
  read_number(j, "decay_within_task", where, w.decay_within_task);
  read_number(j, "decay_at_boundary", where, w.decay_at_boundary);
  return w;
}

TaskSpec parse_task(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"activity", "ladder", "max_steps", "progress_goal", "intensity"}, where);
  TaskSpec t;
  t.activity_id = detail::get_string(j, "activity", where);
  if (const auto* ladder = detail::find(j, "ladder")) {
    detail::expect_array(*ladder, where + ".ladder");
    t.ladder.clear();
    for (std::size_t i = 0; i < ladder->size(); ++i) {
      t.ladder.push_back(parse_assistance_action((*ladder)[i], where + ".ladder[" + std::to_string(i) + "]"));
    }
  }
  read_int(j, "max_steps", where, t.max_steps);
  read_int(j, "progress_goal", where, t.progress_goal);
  if (const auto* v = detail::find(j, "intensity"); v && !v->is_null()) {
    t.intensity = detail::as_number(*v, where + ".intensity");
  }
  return t;
}

CueConfig parse_cues(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j,
                              {"verbal_weights", "motor_error_probability", "motor_error_min_value",
                               "task_error_probability", "task_error_min_mean", "begin_engagement"},
                              where);
  CueConfig c;
  if (const auto* vw = detail::find(j, "verbal_weights")) {
    const auto path = where + ".verbal_weights";
    detail::expect_object(*vw, path);
    c.verbal_weights.clear();
    for (const auto& [key, value] : vw->items()) {
      auto kind = parse_cue_kind(key);
      if (!kind || channel_of(*kind) != CueChannel::kVerbal) {
        fail(ErrorCode::kInvalidArgument, path + "." + key + ": not a verbal cue kind");
      }
      c.verbal_weights[*kind] = detail::as_number(value, path + "." + key);
    }
  }
  read_number(j, "motor_error_probability", where, c.motor_error_probability);
  read_int(j, "motor_error_min_value", where, c.motor_error_min_value);
  read_number(j, "task_error_probability", where, c.task_error_probability);
  read_number(j, "task_error_min_mean", where, c.task_error_min_mean);
  read_number(j, "begin_engagement", where, c.begin_engagement);
  return c;
}

ProgressConfig parse_progress(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"max_mean_feature_value", "action_kinds"}, where);
  ProgressConfig p;
  read_number(j, "max_mean_feature_value", where, p.max_mean_feature_value);
  if (const auto* kinds = detail::find(j, "action_kinds")) {
    const auto path = where + ".action_kinds";
    detail::expect_array(*kinds, path);
    p.action_kinds.clear();
    for (const auto& k : *kinds) {
      const auto text = detail::as_string(k, path);
      auto kind = parse_action_kind(text);
      if (!kind) fail(ErrorCode::kInvalidArgument, path + ": unknown kind '" + text + "'");
      p.action_kinds.push_back(*kind);
    }
  }
  return p;
}

void require_probability(double p, const std::string& where) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::kInvalidArgument, where + ": must lie in [0, 1]");
}

}  // namespace

AssistanceAction parse_assistance_action(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"id", "level", "kind", "utterance"}, where);
  AssistanceAction a;
  a.id = detail::get_string(j, "id", where);
  try {
    a.level = AssistanceLevel(static_cast<int>(detail::get_int(j, "level", where)));
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidArgument, where + ".level: " + e.what());
  }
  const auto kind_text = detail::get_string(j, "kind", where);
  auto kind = parse_action_kind(kind_text);
  if (!kind) fail(ErrorCode::kInvalidArgument, where + ".kind: unknown kind '" + kind_text + "'");
  a.kind = *kind;
  if (const auto* u = detail::find(j, "utterance"); u && !u->is_null()) {
    a.utterance = detail::as_string(*u, where + ".utterance");
  }
  try {
    validate_action(a);
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidArgument, where + ": " + e.what());
  }
  return a;
}

nlohmann::ordered_json assistance_action_to_json(const AssistanceAction& a) {
  nlohmann::ordered_json j;
  j["id"] = a.id;
  j["level"] = a.level.value();
  j["kind"] = std::string(to_string(a.kind));
  j["utterance"] = a.utterance ? nlohmann::ordered_json(*a.utterance) : nlohmann::ordered_json(nullptr);
  return j;
}

std::string_view to_string(GateMode mode) {
  return mode == GateMode::kAutoApprove ? "auto_approve" : "interactive";
}

std::string_view to_string(GateOutcome outcome) {
  switch (outcome) {
    case GateOutcome::kApproved: return "approved";
    case GateOutcome::kOverridden: return "overridden";
    case GateOutcome::kHalted: return "halted";
  }
  return "unknown";
}

std::string_view to_string(TaskOutcomeKind kind) {
  switch (kind) {
    case TaskOutcomeKind::kPending: return "pending";
    case TaskOutcomeKind::kCompleted: return "completed";
    case TaskOutcomeKind::kExhausted: return "exhausted";
    case TaskOutcomeKind::kHalted: return "halted";
  }
  return "unknown";
}

SessionConfig parse_session_config(const nlohmann::json& doc) {
  const std::string root;
  detail::reject_unknown_keys(doc,
                              {"seed", "profile", "scenario", "policy", "caregiver_gate", "cues", "progress",
                               "engagement_noise"},
                              "config");
  SessionConfig config;
  config.seed = detail::as_uint64(detail::require(doc, "seed", root), "seed");

  const auto& profile = detail::require(doc, "profile", root);
  detail::reject_unknown_keys(profile, {"age_band", "language_ability", "severity"}, "profile");
  config.profile.age_band = detail::get_string(profile, "age_band", "profile");
  config.profile.language_ability = detail::get_string(profile, "language_ability", "profile");
  config.profile.severity = detail::get_string(profile, "severity", "profile");

  const auto& scenario = detail::require(doc, "scenario", root);
  detail::expect_array(scenario, "scenario");
  for (std::size_t i = 0; i < scenario.size(); ++i) {
    config.scenario.push_back(parse_task(scenario[i], "scenario[" + std::to_string(i) + "]"));
  }

  if (const auto* policy = detail::find(doc, "policy")) {
    detail::reject_unknown_keys(*policy, {"weights", "c", "theta_help"}, "policy");
    if (const auto* w = detail::find(*policy, "weights")) config.policy.weights = parse_weights(*w, "policy.weights");
    read_number(*policy, "c", "policy", config.policy.c);
    read_number(*policy, "theta_help", "policy", config.policy.theta_help);
  }
  if (const auto* gate = detail::find(doc, "caregiver_gate")) {
    const auto text = detail::as_string(*gate, "caregiver_gate");
    if (text == "auto_approve") {
      config.caregiver_gate = GateMode::kAutoApprove;
    } else if (text == "interactive") {
      config.caregiver_gate = GateMode::kInteractive;
    } else {
      fail(ErrorCode::kInvalidArgument, "caregiver_gate: unknown mode '" + text + "'");
    }
  }
  if (const auto* cues = detail::find(doc, "cues")) config.cues = parse_cues(*cues, "cues");
  if (const auto* progress = detail::find(doc, "progress")) config.progress = parse_progress(*progress, "progress");
  read_number(doc, "engagement_noise", root, config.engagement_noise);
  return config;
}

SessionConfig load_session_config(const std::string& path) {
  return parse_session_config(detail::read_json_file(path));
}

nlohmann::ordered_json session_config_to_json(const SessionConfig& config, bool include_gate) {
  ojson j;
  j["seed"] = config.seed;
  j["profile"] = {{"age_band", config.profile.age_band},
                  {"language_ability", config.profile.language_ability},
                  {"severity", config.profile.severity}};
  ojson scenario = ojson::array();
  for (const auto& task : config.scenario) {
    ojson t;
    t["activity"] = task.activity_id;
    ojson ladder = ojson::array();
    for (const auto& a : task.ladder) ladder.push_back(assistance_action_to_json(a));
    t["ladder"] = std::move(ladder);
    t["max_steps"] = task.max_steps;
    t["progress_goal"] = task.progress_goal;
    t["intensity"] = task.intensity ? ojson(*task.intensity) : ojson(nullptr);
    scenario.push_back(std::move(t));
  }
  j["scenario"] = std::move(scenario);
  const auto& w = config.policy.weights;
  ojson weights;
  weights["mistake"] = w.mistake;
  weights["hesitation"] = w.hesitation;
  weights["gaze_at_robot"] = w.gaze_at_robot;
  weights["explicit_request"] = w.explicit_request;
  weights["progress"] = w.progress;
  weights["no_progress"] = w.no_progress;
  weights["decay_within_task"] = w.decay_within_task;
  weights["decay_at_boundary"] = w.decay_at_boundary;
  ojson policy;
  policy["weights"] = std::move(weights);
  policy["c"] = config.policy.c;
  policy["theta_help"] = config.policy.theta_help;
  j["policy"] = std::move(policy);
  if (include_gate) j["caregiver_gate"] = std::string(to_string(config.caregiver_gate));
  ojson cues;
  ojson verbal = ojson::object();
  for (const auto& [kind, weight] : config.cues.verbal_weights) verbal[std::string(to_string(kind))] = weight;
  cues["verbal_weights"] = std::move(verbal);
  cues["motor_error_probability"] = config.cues.motor_error_probability;
  cues["motor_error_min_value"] = config.cues.motor_error_min_value;
  cues["task_error_probability"] = config.cues.task_error_probability;
  cues["task_error_min_mean"] = config.cues.task_error_min_mean;
  cues["begin_engagement"] = config.cues.begin_engagement;
  j["cues"] = std::move(cues);
  ojson progress;
  progress["max_mean_feature_value"] = config.progress.max_mean_feature_value;
  ojson kinds = ojson::array();
  for (auto k : config.progress.action_kinds) kinds.push_back(std::string(to_string(k)));
  progress["action_kinds"] = std::move(kinds);
  j["progress"] = std::move(progress);
  j["engagement_noise"] = config.engagement_noise;
  return j;
}

void validate_session_config(const SessionConfig& config, const BehaviorCatalog& catalog,
                             const InstantiationTable& table) {
  table.validate_profile(config.profile);
  if (config.scenario.empty()) fail(ErrorCode::kInvalidArgument, "scenario: must not be empty");
  for (std::size_t i = 0; i < config.scenario.size(); ++i) {
    const auto& task = config.scenario[i];
    const std::string where = "scenario[" + std::to_string(i) + "]";
    const auto* activity = catalog.find_activity(task.activity_id);
    if (!activity) fail(ErrorCode::kInvalidArgument, where + ".activity: unknown activity '" + task.activity_id + "'");
    if (task.ladder.empty()) fail(ErrorCode::kInvalidArgument, where + ".ladder: must not be empty");
    for (const auto& a : task.ladder) validate_action(a);
    if (task.max_steps <= 0) fail(ErrorCode::kInvalidArgument, where + ".max_steps: must be positive");
    if (task.progress_goal <= 0) fail(ErrorCode::kInvalidArgument, where + ".progress_goal: must be positive");
    if (task.intensity) require_probability(*task.intensity, where + ".intensity");
    for (const auto& feature_id : activity->features) {
      if (!table.find_cell(feature_id, config.profile)) {
        fail(ErrorCode::kInvalidArgument, where + ".activity: no instantiation cell for (" + feature_id + ", " +
                                              cell_key(config.profile) + ")");
      }
    }
  }
  // Every need/level pair must stay within c.
  if (!(config.policy.c >= kMaxNeed)) fail(ErrorCode::kInvalidArgument, "policy.c: must be at least 9");
  if (!(config.policy.theta_help >= 0.0 && config.policy.theta_help <= kMaxNeed)) {
    fail(ErrorCode::kInvalidArgument, "policy.theta_help: must lie in [0, 9]");
  }
  const auto& w = config.policy.weights;
  if (!(w.decay_within_task >= 0.0) || !(w.decay_at_boundary >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "policy.weights: decay factors must be nonnegative");
  }
  double verbal_total = 0.0;
  for (const auto& [kind, weight] : config.cues.verbal_weights) {
    if (!(weight >= 0.0)) fail(ErrorCode::kInvalidArgument, "cues.verbal_weights: weights must be nonnegative");
    verbal_total += weight;
  }
  if (!(verbal_total > 0.0)) fail(ErrorCode::kInvalidArgument, "cues.verbal_weights: total weight must be positive");
  require_probability(config.cues.motor_error_probability, "cues.motor_error_probability");
  require_probability(config.cues.task_error_probability, "cues.task_error_probability");
  require_probability(config.cues.begin_engagement, "cues.begin_engagement");
  if (!(config.engagement_noise >= 0.0)) fail(ErrorCode::kInvalidArgument, "engagement_noise: must be nonnegative");
}

Session::Session(SessionConfig config, const BehaviorCatalog& catalog, const InstantiationTable& table)
    : config_(std::move(config)), catalog_(&catalog), table_(&table), rng_(config_.seed) {
  validate_session_config(config_, catalog, table);
  for (const auto& task : config_.scenario) outcomes_.push_back({task.activity_id, TaskOutcomeKind::kPending, 0, 0});
}

const SessionStep& Session::propose() {
  if (finished()) fail(ErrorCode::kConflict, "session is finished");
  if (pending_) return *pending_;

  const TaskSpec& task = config_.scenario[task_index_];
  const bool boundary = task_step_ == 0 && task_index_ > 0;
  SessionStep step;
  step.step_index = steps_.size();
  step.task_index = task_index_;
  step.stimulus = {task.activity_id, step.step_index, task.intensity};
  step.dyad_before = fsm_.dyad;
  step.response = respond(config_.profile, step.stimulus, *catalog_, *table_, rng_, {config_.engagement_noise});

  // Patient-side cues: performance errors happen only while the patient performs.
  std::optional<CueKind> error_cue;
  if (fsm_.dyad != DyadState::kDemonstrate) {
    bool motor_trigger = false;
    for (const auto& id : step.response.behaviors) {
      const auto& b = catalog_->behavior(id);
      motor_trigger = motor_trigger ||
                      (catalog_->feature(b.feature_id).motor && b.feature_value >= config_.cues.motor_error_min_value);
    }
    if (motor_trigger && rng_.bernoulli(config_.cues.motor_error_probability)) {
      error_cue = CueKind::kDoesNotReach;
    } else if (step.response.mean_feature_value >= config_.cues.task_error_min_mean &&
               rng_.bernoulli(config_.cues.task_error_probability)) {
      error_cue = CueKind::kDoesNotLift;
    }
  }
  const auto& kinds = config_.progress.action_kinds;
  step.progress = fsm_.dyad != DyadState::kDemonstrate && !error_cue &&
                  std::find(kinds.begin(), kinds.end(), previous_kind_) != kinds.end() &&
                  step.response.mean_feature_value < config_.progress.max_mean_feature_value;

  step.need_signals = step.response.signals;
  if (error_cue) {
    step.cues.push_back(Cue::make(*error_cue, CueActor::kPatient));
    step.need_signals.push_back(NeedSignalKind::kMistake);
  }
  if (step.progress) step.need_signals.push_back(NeedSignalKind::kProgress);
  std::sort(step.need_signals.begin(), step.need_signals.end());
  step.need_signals.erase(std::unique(step.need_signals.begin(), step.need_signals.end()), step.need_signals.end());
  if (std::find(step.need_signals.begin(), step.need_signals.end(), NeedSignalKind::kExplicitRequest) !=
      step.need_signals.end()) {
    step.cues.push_back(Cue::make(CueKind::kRequests, CueActor::kPatient));
  }
  // A quiet performing step without progress escalates need.
  if (fsm_.dyad != DyadState::kDemonstrate && !step.progress && step.need_signals.empty()) {
    step.need_signals.push_back(NeedSignalKind::kNoProgressTick);
  }

  std::vector<NeedSignal> signals;
  for (auto kind : step.need_signals) signals.push_back({kind, static_cast<int>(step.step_index)});
  step.need_before = need_.need;
  step.need_after = update_need(need_, signals, config_.policy.weights, boundary).need;
  step.chosen_action = select_action(step.need_after, task.ladder);
  step.executed_action = step.chosen_action;
  step.dyad_after = step.dyad_before;
  step.autonomy = autonomy(step.need_after, step.chosen_action, config_.policy.c);
  pending_ = std::move(step);
  return *pending_;
}

const SessionStep& Session::decide(const GateDecision& decision) {
  if (!pending_) fail(ErrorCode::kConflict, "no pending decision");
  if (decision.outcome == GateOutcome::kOverridden) {
    if (!decision.action) fail(ErrorCode::kInvalidArgument, "override requires an action");
    validate_action(*decision.action);
    if (decision.action->kind == ActionKind::kHalt) fail(ErrorCode::kInvalidArgument, "use halt, not an override");
  }
  SessionStep step = std::move(*pending_);
  pending_.reset();

  // Recompute the need state exactly as propose() did; the pending step only
  // carries the resulting scalar.
  const bool boundary = task_step_ == 0 && task_index_ > 0;
  std::vector<NeedSignal> signals;
  for (auto kind : step.need_signals) signals.push_back({kind, static_cast<int>(step.step_index)});
  need_ = update_need(need_, signals, config_.policy.weights, boundary);

  step.gate_decision = decision.outcome;
  switch (decision.outcome) {
    case GateOutcome::kApproved: step.executed_action = step.chosen_action; break;
    case GateOutcome::kOverridden: step.executed_action = *decision.action; break;
    case GateOutcome::kHalted: step.executed_action = halt_action(); break;
  }
  step.autonomy = autonomy(step.need_after, step.executed_action, config_.policy.c);

  occupancy_.record_step(step.dyad_before);
  ++task_step_;
  if (step.progress) ++task_progress_;
  auto& outcome = outcomes_[task_index_];
  outcome.steps = task_step_;
  outcome.progress = task_progress_;

  if (decision.outcome == GateOutcome::kHalted) {
    close_task(TaskOutcomeKind::kHalted, step);
    steps_.push_back(std::move(step));
    return steps_.back();
  }

  // Robot-side cues from the executed action, then control cues.
  const auto& executed = step.executed_action;
  if (executed.level.value() >= 1) {
    double total = 0.0;
    for (const auto& [kind, weight] : config_.cues.verbal_weights) total += weight;
    double draw = rng_.uniform01() * total;
    CueKind verbal = config_.cues.verbal_weights.rbegin()->first;
    for (const auto& [kind, weight] : config_.cues.verbal_weights) {
      if (draw < weight) {
        verbal = kind;
        break;
      }
      draw -= weight;
    }
    step.cues.push_back(Cue::make(verbal, CueActor::kTherapistRobot));
  }
  if (executed.kind == ActionKind::kPhysicalAssist) {
    const int level = executed.level.value();
    const CueKind physical = level <= 7 ? CueKind::kReaches : level == 8 ? CueKind::kLifts : CueKind::kStabilizes;
    step.cues.push_back(Cue::make(physical, CueActor::kTherapistRobot));
  }
  if (fsm_.dyad == DyadState::kDemonstrate) {
    if (!fsm_.end_of_task_seen) step.cues.push_back(Cue::make(CueKind::kEndOfTask, CueActor::kTherapistRobot));
    if (step.response.engagement >= config_.cues.begin_engagement) {
      step.cues.push_back(Cue::make(CueKind::kPatientBegins, CueActor::kPatient));
    }
  }
  if (fsm_.dyad == DyadState::kHelp && step.progress) {
    step.cues.push_back(Cue::make(CueKind::kPatientResumesProgress, CueActor::kPatient));
  }
  for (const auto& cue : step.cues) {
    const DyadState before = fsm_.dyad;
    fsm_ = transition(fsm_, cue, step.need_after, config_.policy.theta_help);
    occupancy_.record_transition(before, fsm_.dyad);
  }
  step.dyad_after = fsm_.dyad;
  previous_kind_ = executed.kind;

  const TaskSpec& task = config_.scenario[task_index_];
  if (task_progress_ >= task.progress_goal) {
    close_task(TaskOutcomeKind::kCompleted, step);
  } else if (task_step_ >= task.max_steps) {
    close_task(TaskOutcomeKind::kExhausted, step);
  }
  steps_.push_back(std::move(step));
  return steps_.back();
}

void Session::close_task(TaskOutcomeKind outcome, SessionStep& step) {
  outcomes_[task_index_].outcome = outcome;
  step.task_outcome = outcome;
  // The next task opens with a fresh demonstration.
  const DyadState before = fsm_.dyad;
  fsm_ = FsmState{};
  occupancy_.record_transition(before, fsm_.dyad);
  ++task_index_;
  task_step_ = 0;
  task_progress_ = 0;
  previous_kind_ = ActionKind::kNone;
}

const SessionStep& Session::step(const std::optional<AssistanceAction>& override_action) {
  if (config_.caregiver_gate != GateMode::kAutoApprove) {
    fail(ErrorCode::kConflict, "interactive session: use propose and decide");
  }
  propose();
  return decide(override_action ? GateDecision::override_with(*override_action) : GateDecision::approve());
}

SessionTrace Session::run_to_completion() {
  if (config_.caregiver_gate != GateMode::kAutoApprove) {
    fail(ErrorCode::kConflict, "run_to_completion requires caregiver_gate auto_approve");
  }
  while (!finished()) step();
  return trace();
}

SessionSummary Session::summary() const {
  SessionSummary s = summarize(config_, steps_);
  s.occupancy = occupancy_;
  s.tasks = outcomes_;
  return s;
}

SessionTrace Session::trace() const { return {config_, steps_, summary(), finished()}; }

SessionSummary summarize(const SessionConfig& config, const std::vector<SessionStep>& steps) {
  SessionSummary s;
  s.steps = steps.size();
  for (const auto& task : config.scenario) s.tasks.push_back({task.activity_id, TaskOutcomeKind::kPending, 0, 0});
  double total = 0.0;
  s.min_autonomy = steps.empty() ? 0.0 : 1.0;
  for (const auto& step : steps) {
    total += step.autonomy;
    s.min_autonomy = std::min(s.min_autonomy, step.autonomy);
    s.occupancy.record_step(step.dyad_before);
    // At most one cue-driven change happens per step.
    s.occupancy.record_transition(step.dyad_before, step.dyad_after);
    if (step.task_outcome) s.occupancy.record_transition(step.dyad_after, DyadState::kDemonstrate);
    switch (step.gate_decision) {
      case GateOutcome::kApproved: ++s.approved; break;
      case GateOutcome::kOverridden: ++s.overridden; break;
      case GateOutcome::kHalted: ++s.halted; break;
    }
    if (step.task_index < s.tasks.size()) {
      auto& t = s.tasks[step.task_index];
      ++t.steps;
      if (step.progress) ++t.progress;
      if (step.task_outcome) t.outcome = *step.task_outcome;
    }
  }
  s.mean_autonomy = steps.empty() ? 0.0 : total / static_cast<double>(steps.size());
  return s;
}

}  // namespace therasim
