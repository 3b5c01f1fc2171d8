#include "therasim/trace_io.hpp"

#include <iomanip>
#include <sstream>

#include "json_util.hpp"
#include "therasim/error.hpp"

namespace therasim {

namespace {

using detail::json;
using ojson = nlohmann::ordered_json;

template <typename Kinds>
ojson names(const Kinds& kinds) {
  ojson out = ojson::array();
  for (auto k : kinds) out.push_back(std::string(to_string(k)));
  return out;
}

template <typename T, typename ParseFn>
T parse_enum(const json& v, const std::string& where, ParseFn parse) {
  const auto text = detail::as_string(v, where);
  auto value = parse(text);
  if (!value) fail(ErrorCode::kInvalidArgument, where + ": unknown value '" + text + "'");
  return *value;
}

std::optional<GateOutcome> parse_gate_outcome(std::string_view text) {
  for (auto g : {GateOutcome::kApproved, GateOutcome::kOverridden, GateOutcome::kHalted}) {
    if (to_string(g) == text) return g;
  }
  return std::nullopt;
}

std::optional<TaskOutcomeKind> parse_task_outcome(std::string_view text) {
  for (auto t : {TaskOutcomeKind::kPending, TaskOutcomeKind::kCompleted, TaskOutcomeKind::kExhausted,
                 TaskOutcomeKind::kHalted}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string join_names(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += sep;
    out += item;
  }
  return out;
}

}  // namespace

ojson step_to_json(const SessionStep& step) {
  ojson j;
  j["type"] = "step";
  j["step"] = step.step_index;
  j["task"] = step.task_index;
  ojson stimulus;
  stimulus["activity"] = step.stimulus.activity_id;
  stimulus["step_index"] = step.stimulus.step_index;
  stimulus["intensity"] = step.stimulus.intensity ? ojson(*step.stimulus.intensity) : ojson(nullptr);
  j["stimulus"] = std::move(stimulus);
  ojson response;
  ojson instantiation = ojson::object();
  for (const auto& [feature, value] : step.response.instantiation) instantiation[feature] = value;
  response["instantiation"] = std::move(instantiation);
  response["behaviors"] = step.response.behaviors;
  response["mean_feature_value"] = step.response.mean_feature_value;
  response["engagement"] = step.response.engagement;
  response["signals"] = names(step.response.signals);
  j["response"] = std::move(response);
  j["need_signals"] = names(step.need_signals);
  j["need_before"] = step.need_before;
  j["need_after"] = step.need_after;
  j["chosen_action"] = assistance_action_to_json(step.chosen_action);
  j["executed_action"] = assistance_action_to_json(step.executed_action);
  j["gate_decision"] = std::string(to_string(step.gate_decision));
  ojson cues = ojson::array();
  for (const auto& cue : step.cues) {
    ojson c;
    c["channel"] = std::string(to_string(cue.channel));
    c["kind"] = std::string(to_string(cue.kind));
    c["actor"] = std::string(to_string(cue.actor));
    cues.push_back(std::move(c));
  }
  j["cues"] = std::move(cues);
  j["dyad_before"] = std::string(to_string(step.dyad_before));
  j["dyad_after"] = std::string(to_string(step.dyad_after));
  j["autonomy"] = step.autonomy;
  j["progress"] = step.progress;
  j["task_outcome"] = step.task_outcome ? ojson(std::string(to_string(*step.task_outcome))) : ojson(nullptr);
  return j;
}

ojson summary_to_json(const SessionSummary& summary) {
  ojson j;
  j["type"] = "summary";
  j["steps"] = summary.steps;
  j["mean_autonomy"] = summary.mean_autonomy;
  j["min_autonomy"] = summary.min_autonomy;
  ojson occupancy;
  for (auto s : kAllDyadStates) {
    ojson entry;
    entry["steps"] = summary.occupancy.steps(s);
    entry["fraction"] = summary.occupancy.fraction(s);
    occupancy[std::string(to_string(s))] = std::move(entry);
  }
  ojson matrix = ojson::array();
  for (auto from : kAllDyadStates) {
    ojson row = ojson::array();
    for (auto to : kAllDyadStates) row.push_back(summary.occupancy.transitions(from, to));
    matrix.push_back(std::move(row));
  }
  occupancy["transitions"] = std::move(matrix);
  j["occupancy"] = std::move(occupancy);
  ojson tasks = ojson::array();
  for (const auto& t : summary.tasks) {
    ojson entry;
    entry["activity"] = t.activity_id;
    entry["outcome"] = std::string(to_string(t.outcome));
    entry["steps"] = t.steps;
    entry["progress"] = t.progress;
    tasks.push_back(std::move(entry));
  }
  j["tasks"] = std::move(tasks);
  ojson gate;
  gate["approved"] = summary.approved;
  gate["overridden"] = summary.overridden;
  gate["halted"] = summary.halted;
  j["gate"] = std::move(gate);
  return j;
}

std::string serialize_trace(const SessionTrace& trace) {
  std::string out;
  ojson config;
  config["type"] = "config";
  const auto echo = session_config_to_json(trace.config, false);
  for (const auto& [key, value] : echo.items()) config[key] = value;
  out += config.dump() + "\n";
  for (const auto& step : trace.steps) out += step_to_json(step).dump() + "\n";
  if (trace.finalized) out += summary_to_json(trace.summary).dump() + "\n";
  return out;
}

SessionStep step_from_json(const json& j) {
  const std::string where = "step";
  SessionStep step;
  step.step_index = detail::as_uint64(detail::require(j, "step", where), "step.step");
  step.task_index = detail::as_uint64(detail::require(j, "task", where), "step.task");
  const auto& stimulus = detail::require(j, "stimulus", where);
  step.stimulus.activity_id = detail::get_string(stimulus, "activity", "step.stimulus");
  step.stimulus.step_index = detail::as_uint64(detail::require(stimulus, "step_index", "step.stimulus"),
                                               "step.stimulus.step_index");
  if (const auto* v = detail::find(stimulus, "intensity"); v && !v->is_null()) {
    step.stimulus.intensity = detail::as_number(*v, "step.stimulus.intensity");
  }
  const auto& response = detail::require(j, "response", where);
  for (const auto& [feature, value] : detail::require(response, "instantiation", "step.response").items()) {
    step.response.instantiation[feature] = static_cast<int>(detail::as_int(value, "step.response.instantiation"));
  }
  for (const auto& b : detail::require(response, "behaviors", "step.response")) {
    step.response.behaviors.push_back(detail::as_string(b, "step.response.behaviors"));
  }
  step.response.mean_feature_value = detail::get_number(response, "mean_feature_value", "step.response");
  step.response.engagement = detail::get_number(response, "engagement", "step.response");
  for (const auto& s : detail::require(response, "signals", "step.response")) {
    step.response.signals.push_back(parse_enum<NeedSignalKind>(s, "step.response.signals", parse_need_signal_kind));
  }
  for (const auto& s : detail::require(j, "need_signals", where)) {
    step.need_signals.push_back(parse_enum<NeedSignalKind>(s, "step.need_signals", parse_need_signal_kind));
  }
  step.need_before = detail::get_number(j, "need_before", where);
  step.need_after = detail::get_number(j, "need_after", where);
  step.chosen_action = parse_assistance_action(detail::require(j, "chosen_action", where), "step.chosen_action");
  step.executed_action =
      parse_assistance_action(detail::require(j, "executed_action", where), "step.executed_action");
  step.gate_decision = parse_enum<GateOutcome>(detail::require(j, "gate_decision", where), "step.gate_decision",
                                               parse_gate_outcome);
  for (const auto& c : detail::require(j, "cues", where)) {
    Cue cue{parse_enum<CueChannel>(detail::require(c, "channel", "step.cues"), "step.cues.channel", parse_cue_channel),
            parse_enum<CueKind>(detail::require(c, "kind", "step.cues"), "step.cues.kind", parse_cue_kind),
            parse_enum<CueActor>(detail::require(c, "actor", "step.cues"), "step.cues.actor", parse_cue_actor)};
    step.cues.push_back(cue);
  }
  step.dyad_before = parse_enum<DyadState>(detail::require(j, "dyad_before", where), "step.dyad_before",
                                           parse_dyad_state);
  step.dyad_after = parse_enum<DyadState>(detail::require(j, "dyad_after", where), "step.dyad_after",
                                          parse_dyad_state);
  step.autonomy = detail::get_number(j, "autonomy", where);
  step.progress = detail::as_bool(detail::require(j, "progress", where), "step.progress");
  if (const auto* v = detail::find(j, "task_outcome"); v && !v->is_null()) {
    step.task_outcome = parse_enum<TaskOutcomeKind>(*v, "step.task_outcome", parse_task_outcome);
  }
  return step;
}

SessionTrace parse_trace(std::string_view text) {
  SessionTrace trace;
  bool have_config = false;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::kInvalidArgument, "trace line " + std::to_string(line_number) + ": " + e.what());
    }
    const auto type = detail::get_string(j, "type", "trace line " + std::to_string(line_number));
    if (type == "config") {
      if (have_config) fail(ErrorCode::kInvalidArgument, "trace: duplicate config line");
      j.erase("type");
      trace.config = parse_session_config(j);
      have_config = true;
    } else if (!have_config) {
      fail(ErrorCode::kInvalidArgument, "trace: first line must be the config echo");
    } else if (type == "step") {
      if (trace.finalized) fail(ErrorCode::kInvalidArgument, "trace: step after summary");
      trace.steps.push_back(step_from_json(j));
    } else if (type == "summary") {
      trace.finalized = true;
    } else {
      fail(ErrorCode::kInvalidArgument, "trace line " + std::to_string(line_number) + ": unknown type '" + type + "'");
    }
  }
  if (!have_config) fail(ErrorCode::kInvalidArgument, "trace: empty");
  trace.summary = summarize(trace.config, trace.steps);
  return trace;
}

std::string trace_to_csv(const SessionTrace& trace) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "step,task,activity,behaviors,mean_feature_value,engagement,need_signals,need_before,need_after,"
         "chosen_level,executed_level,executed_kind,gate_decision,cues,dyad_before,dyad_after,autonomy,progress,"
         "task_outcome\n";
  for (const auto& s : trace.steps) {
    std::vector<std::string> signals;
    for (auto k : s.need_signals) signals.emplace_back(to_string(k));
    std::vector<std::string> cues;
    for (const auto& c : s.cues) cues.emplace_back(to_string(c.kind));
    out << s.step_index << ',' << s.task_index << ',' << csv_field(s.stimulus.activity_id) << ','
        << csv_field(join_names(s.response.behaviors, ';')) << ',' << s.response.mean_feature_value << ','
        << s.response.engagement << ',' << join_names(signals, ';') << ',' << s.need_before << ',' << s.need_after
        << ',' << s.chosen_action.level.value() << ',' << s.executed_action.level.value() << ','
        << to_string(s.executed_action.kind) << ',' << to_string(s.gate_decision) << ',' << join_names(cues, ';')
        << ',' << to_string(s.dyad_before) << ',' << to_string(s.dyad_after) << ',' << s.autonomy << ','
        << (s.progress ? 1 : 0) << ',' << (s.task_outcome ? to_string(*s.task_outcome) : std::string_view{})
        << '\n';
  }
  return out.str();
}

ReplayResult replay_trace(std::string_view text, const BehaviorCatalog& catalog, const InstantiationTable& table) {
  const SessionTrace recorded = parse_trace(text);
  Session session(recorded.config, catalog, table);
  for (const auto& step : recorded.steps) {
    if (session.finished()) break;
    session.propose();
    switch (step.gate_decision) {
      case GateOutcome::kApproved: session.decide(GateDecision::approve()); break;
      case GateOutcome::kOverridden: session.decide(GateDecision::override_with(step.executed_action)); break;
      case GateOutcome::kHalted: session.decide(GateDecision::halt()); break;
    }
  }
  ReplayResult result;
  result.regenerated = serialize_trace(session.trace());
  if (result.regenerated == text) {
    result.identical = true;
    return result;
  }
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(text.size(), result.regenerated.size()); ++i) {
    if (text[i] != result.regenerated[i]) break;
    if (text[i] == '\n') ++line;
  }
  result.first_mismatch_line = line;
  return result;
}

}  // namespace therasim
