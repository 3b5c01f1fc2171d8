#include "therasim/service.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "therasim/error.hpp"
#include "therasim/trace_io.hpp"

namespace therasim {

namespace {

using detail::json;
using ojson = nlohmann::ordered_json;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kIo: return 500;
  }
  return 500;
}

ServiceResponse ok(const ojson& body, int status = 200) { return {status, body.dump(), "application/json"}; }

json parse_body(const std::string& body, bool allow_empty) {
  if (body.empty() && allow_empty) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) fail(ErrorCode::kInvalidArgument, "request body: expected a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("request body: ") + e.what());
  }
}

ojson snapshot(const std::string& id, const Session& s) {
  ojson j;
  j["id"] = id;
  j["caregiver_gate"] = std::string(to_string(s.config().caregiver_gate));
  j["finished"] = s.finished();
  j["step"] = s.step_count();
  j["task"] = s.task_index();
  j["activity"] = s.finished() ? ojson(nullptr) : ojson(s.config().scenario[s.task_index()].activity_id);
  j["dyad"] = std::string(to_string(s.dyad()));
  j["need"] = s.need_state().need;
  j["pending"] = s.pending() ? step_to_json(*s.pending()) : ojson(nullptr);
  j["last_step"] = s.steps().empty() ? ojson(nullptr) : step_to_json(s.steps().back());
  j["summary"] = summary_to_json(s.summary());
  return j;
}

// "/api/sessions/s1/step" -> {"s1", "step"}
bool split_session_path(const std::string& path, std::string& id, std::string& action) {
  const std::string prefix = "/api/sessions/";
  if (path.rfind(prefix, 0) != 0) return false;
  const auto rest = path.substr(prefix.size());
  const auto slash = rest.find('/');
  id = rest.substr(0, slash);
  action = slash == std::string::npos ? "" : rest.substr(slash + 1);
  return !id.empty() && action.find('/') == std::string::npos;
}

}  // namespace

ServiceResponse error_response(ErrorCode code, const std::string& message) {
  ojson j;
  j["error"] = {{"code", std::string(to_string(code))}, {"message", message}};
  return {status_for(code), j.dump(), "application/json"};
}

SessionService::SessionService(BehaviorCatalog catalog, InstantiationTable table,
                               std::optional<std::filesystem::path> trace_dir)
    : catalog_(std::move(catalog)), table_(std::move(table)), trace_dir_(std::move(trace_dir)) {
  const auto problems = table_.check_against(catalog_);
  if (!problems.empty()) fail(ErrorCode::kInvalidArgument, "table does not fit catalog: " + problems.front());
}

ServiceResponse SessionService::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    if (path == "/api/catalog") {
      if (method == "GET") return get_catalog();
    } else if (path == "/api/sessions") {
      if (method == "GET") return list_sessions();
      if (method == "POST") return create_session(body);
    } else {
      std::string id;
      std::string action;
      if (!split_session_path(path, id, action)) return error_response(ErrorCode::kNotFound, "no route for " + path);
      if (action.empty() && method == "GET") return get_session(id);
      if (action == "step" && method == "POST") return step_session(id, body);
      if (action == "decide" && method == "POST") return decide_session(id, body);
      if (action == "trace" && method == "GET") return get_trace(id);
      if (action != "" && action != "step" && action != "decide" && action != "trace") {
        return error_response(ErrorCode::kNotFound, "no route for " + path);
      }
    }
    return {405, R"({"error":{"code":"method_not_allowed","message":")" + method + " " + path + R"("}})",
            "application/json"};
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    return error_response(ErrorCode::kInvalidArgument, e.what());
  }
}

ServiceResponse SessionService::get_catalog() const {
  ojson j;
  j["catalog"] = catalog_.to_json();
  const auto& cats = table_.categories();
  j["categories"] = {{"age_band", cats.age_bands},
                     {"language_ability", cats.language_abilities},
                     {"severity", cats.severities}};
  return ok(j);
}

ServiceResponse SessionService::list_sessions() const {
  std::lock_guard lock(registry_mutex_);
  ojson ids = ojson::array();
  for (const auto& [id, entry] : sessions_) ids.push_back(id);
  return ok({{"sessions", ids}});
}

ServiceResponse SessionService::create_session(const std::string& body) {
  auto config = parse_session_config(parse_body(body, false));
  auto entry = std::make_shared<Entry>(std::move(config), catalog_, table_);
  std::string id;
  {
    std::lock_guard lock(registry_mutex_);
    id = "s" + std::to_string(next_id_++);
    sessions_.emplace(id, entry);
  }
  std::lock_guard lock(entry->mutex);
  return ok(snapshot(id, entry->session), 201);
}

std::shared_ptr<SessionService::Entry> SessionService::lookup(const std::string& id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::kNotFound, "unknown session '" + id + "'");
  return it->second;
}

ServiceResponse SessionService::get_session(const std::string& id) {
  auto entry = lookup(id);
  std::lock_guard lock(entry->mutex);
  return ok(snapshot(id, entry->session));
}

ServiceResponse SessionService::step_session(const std::string& id, const std::string& body) {
  auto entry = lookup(id);
  const auto request = parse_body(body, true);
  detail::reject_unknown_keys(request, {"override"}, "request");
  std::lock_guard lock(entry->mutex);
  auto& session = entry->session;
  if (session.finished()) fail(ErrorCode::kConflict, "session '" + id + "' is finished");
  if (session.config().caregiver_gate == GateMode::kInteractive) {
    if (request.contains("override")) fail(ErrorCode::kInvalidArgument, "override: use decide in interactive mode");
    session.propose();
    return ok(snapshot(id, session));
  }
  std::optional<AssistanceAction> override_action;
  if (const auto* o = detail::find(request, "override")) override_action = parse_assistance_action(*o, "override");
  session.step(override_action);
  save_if_finished(id, session);
  return ok(snapshot(id, session));
}

ServiceResponse SessionService::decide_session(const std::string& id, const std::string& body) {
  auto entry = lookup(id);
  const auto request = parse_body(body, false);
  detail::reject_unknown_keys(request, {"decision", "action", "level"}, "request");
  const auto decision = detail::get_string(request, "decision", "request");
  std::lock_guard lock(entry->mutex);
  auto& session = entry->session;
  if (!session.pending()) fail(ErrorCode::kConflict, "session '" + id + "' has no pending proposal");
  if (decision == "approve") {
    session.decide(GateDecision::approve());
  } else if (decision == "halt") {
    session.decide(GateDecision::halt());
  } else if (decision == "override") {
    if (const auto* a = detail::find(request, "action")) {
      session.decide(GateDecision::override_with(parse_assistance_action(*a, "action")));
    } else if (const auto* l = detail::find(request, "level")) {
      const auto level = detail::as_int(*l, "level");
      const auto& ladder = session.config().scenario[session.task_index()].ladder;
      auto it = std::find_if(ladder.begin(), ladder.end(),
                             [&](const AssistanceAction& a) { return a.level.value() == level; });
      if (it == ladder.end()) {
        fail(ErrorCode::kInvalidArgument, "level: no ladder action at level " + std::to_string(level));
      }
      session.decide(GateDecision::override_with(*it));
    } else {
      fail(ErrorCode::kInvalidArgument, "override: needs an action or a level");
    }
  } else {
    fail(ErrorCode::kInvalidArgument, "decision: unknown value '" + decision + "'");
  }
  save_if_finished(id, session);
  return ok(snapshot(id, session));
}

ServiceResponse SessionService::get_trace(const std::string& id) {
  auto entry = lookup(id);
  std::lock_guard lock(entry->mutex);
  return {200, serialize_trace(entry->session.trace()), "application/x-ndjson"};
}

void SessionService::save_if_finished(const std::string& id, const Session& session) const {
  if (!trace_dir_ || !session.finished()) return;
  const auto path = *trace_dir_ / (id + ".jsonl");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write trace " + path.string());
  out << serialize_trace(session.trace());
}

}  // namespace therasim
