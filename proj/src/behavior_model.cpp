#include "therasim/behavior_model.hpp"

#include <algorithm>
#include <numeric>

#include "json_util.hpp"
#include "therasim/error.hpp"

namespace therasim {

namespace {

using detail::json;

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& part : parts) {
    if (!out.empty()) out += sep;
    out += part;
  }
  return out;
}

// Reference checks that need the whole catalog.
void check_semantics(const std::map<std::string, Feature>& features,
                     const std::map<std::string, Behavior>& behaviors,
                     const std::map<std::string, Activity>& activities,
                     std::vector<std::string>& problems) {
  for (const auto& [id, feature] : features) {
    if (feature.relevant_activities.empty()) {
      problems.push_back("feature '" + id + "': relevant_activities is empty");
    }
    if (feature.max_value < 0) problems.push_back("feature '" + id + "': max_value is negative");
    for (const auto& activity_id : feature.relevant_activities) {
      auto it = activities.find(activity_id);
      if (it == activities.end()) {
        problems.push_back("feature '" + id + "': unknown activity '" + activity_id + "'");
      } else if (std::find(it->second.features.begin(), it->second.features.end(), id) ==
                 it->second.features.end()) {
        problems.push_back("feature '" + id + "': activity '" + activity_id + "' does not list it");
      }
    }
  }
  for (const auto& [id, activity] : activities) {
    if (activity.features.empty()) problems.push_back("activity '" + id + "': features is empty");
    std::set<std::string> seen;
    for (const auto& feature_id : activity.features) {
      if (!seen.insert(feature_id).second) {
        problems.push_back("activity '" + id + "': duplicate feature '" + feature_id + "'");
      }
      auto it = features.find(feature_id);
      if (it == features.end()) {
        problems.push_back("activity '" + id + "': unknown feature '" + feature_id + "'");
      } else if (!it->second.relevant_activities.contains(id)) {
        problems.push_back("activity '" + id + "': feature '" + feature_id +
                           "' does not list it in relevant_activities");
      }
    }
  }
  std::set<std::string> referenced;
  for (const auto& [id, behavior] : behaviors) {
    auto it = features.find(behavior.feature_id);
    if (it == features.end()) {
      problems.push_back("behavior '" + id + "': unknown feature '" + behavior.feature_id + "'");
      continue;
    }
    referenced.insert(behavior.feature_id);
    if (behavior.feature_value < 0 || behavior.feature_value > it->second.max_value) {
      problems.push_back("behavior '" + id + "': value " + std::to_string(behavior.feature_value) +
                         " outside [0, " + std::to_string(it->second.max_value) + "]");
    }
  }
  for (const auto& [id, feature] : features) {
    if (!referenced.contains(id)) problems.push_back("feature '" + id + "': no behavior references it");
  }
}

struct ParsedCatalog {
  std::map<std::string, Feature> features;
  std::map<std::string, Behavior> behaviors;
  std::map<std::string, Activity> activities;
  std::vector<std::string> problems;
};

Feature parse_feature(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"id", "name", "relevant_activities", "max_value", "motor"}, where);
  Feature f;
  f.id = detail::get_string(j, "id", where);
  f.name = detail::get_string(j, "name", where);
  const auto& acts = detail::require(j, "relevant_activities", where);
  detail::expect_array(acts, where + ".relevant_activities");
  for (const auto& a : acts) f.relevant_activities.insert(detail::as_string(a, where + ".relevant_activities"));
  if (const auto* v = detail::find(j, "max_value")) f.max_value = static_cast<int>(detail::as_int(*v, where + ".max_value"));
  if (const auto* v = detail::find(j, "motor")) f.motor = detail::as_bool(*v, where + ".motor");
  return f;
}

Behavior parse_behavior(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"id", "feature", "value", "description", "channels", "signals"}, where);
  Behavior b;
  b.id = detail::get_string(j, "id", where);
  b.feature_id = detail::get_string(j, "feature", where);
  b.feature_value = static_cast<int>(detail::get_int(j, "value", where));
  b.description = detail::get_string(j, "description", where);
  try {
    b.channels = ChannelVector::parse(detail::get_string(j, "channels", where));
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidArgument, where + ".channels: " + e.what());
  }
  if (const auto* v = detail::find(j, "signals")) {
    detail::expect_array(*v, where + ".signals");
    std::vector<NeedSignalKind> kinds;
    for (const auto& s : *v) {
      auto text = detail::as_string(s, where + ".signals");
      auto kind = parse_need_signal_kind(text);
      if (!kind) fail(ErrorCode::kInvalidArgument, where + ".signals: unknown signal '" + text + "'");
      kinds.push_back(*kind);
    }
    b.signals = std::move(kinds);
  }
  return b;
}

Activity parse_activity(const json& j, const std::string& where) {
  detail::reject_unknown_keys(j, {"id", "name", "features"}, where);
  Activity a;
  a.id = detail::get_string(j, "id", where);
  a.name = detail::get_string(j, "name", where);
  const auto& feats = detail::require(j, "features", where);
  detail::expect_array(feats, where + ".features");
  for (const auto& f : feats) a.features.push_back(detail::as_string(f, where + ".features"));
  return a;
}

template <typename T, typename ParseFn>
void parse_section(const json& doc, const char* key, std::map<std::string, T>& out,
                   std::vector<std::string>& problems, ParseFn parse) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    problems.push_back(std::string(key) + ": missing");
    return;
  }
  if (!it->is_array()) {
    problems.push_back(std::string(key) + ": expected an array");
    return;
  }
  for (std::size_t i = 0; i < it->size(); ++i) {
    const std::string where = std::string(key) + "[" + std::to_string(i) + "]";
    try {
      T item = parse((*it)[i], where);
      const std::string id = item.id;
      if (!out.emplace(id, std::move(item)).second) problems.push_back(where + ": duplicate id '" + id + "'");
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
}

ParsedCatalog parse_catalog(const json& doc) {
  ParsedCatalog parsed;
  if (!doc.is_object()) {
    parsed.problems.push_back("catalog: expected an object");
    return parsed;
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "features" && key != "behaviors" && key != "activities" && key != "meta") {
      parsed.problems.push_back(key + ": unknown key");
    }
  }
  parse_section(doc, "features", parsed.features, parsed.problems, parse_feature);
  parse_section(doc, "behaviors", parsed.behaviors, parsed.problems, parse_behavior);
  parse_section(doc, "activities", parsed.activities, parsed.problems, parse_activity);
  check_semantics(parsed.features, parsed.behaviors, parsed.activities, parsed.problems);
  return parsed;
}

}  // namespace

ChannelValue parse_channel_value(char symbol) {
  switch (symbol) {
    case 'x': return ChannelValue::kNoMention;
    case 'a': return ChannelValue::kAbsent;
    case 'p': return ChannelValue::kPositive;
    case 'n': return ChannelValue::kNegative;
    default: break;
  }
  fail(ErrorCode::kInvalidArgument, std::string("invalid channel value '") + symbol + "'");
}

ChannelVector ChannelVector::parse(std::string_view text) {
  if (text.size() != kChannelCount) {
    fail(ErrorCode::kInvalidArgument, "channel vector '" + std::string(text) + "' must have 4 symbols");
  }
  ChannelVector v;
  for (std::size_t i = 0; i < kChannelCount; ++i) v.values[i] = parse_channel_value(text[i]);
  return v;
}

std::string ChannelVector::to_string() const {
  std::string out(kChannelCount, 'x');
  for (std::size_t i = 0; i < kChannelCount; ++i) out[i] = to_char(values[i]);
  return out;
}

BehaviorCatalog::BehaviorCatalog(std::vector<Feature> features, std::vector<Behavior> behaviors,
                                 std::vector<Activity> activities) {
  std::vector<std::string> problems;
  for (auto& f : features) {
    const std::string id = f.id;
    if (!features_.emplace(id, std::move(f)).second) problems.push_back("duplicate feature id '" + id + "'");
  }
  for (auto& b : behaviors) {
    const std::string id = b.id;
    if (!behaviors_.emplace(id, std::move(b)).second) problems.push_back("duplicate behavior id '" + id + "'");
  }
  for (auto& a : activities) {
    const std::string id = a.id;
    if (!activities_.emplace(id, std::move(a)).second) problems.push_back("duplicate activity id '" + id + "'");
  }
  check_semantics(features_, behaviors_, activities_, problems);
  if (!problems.empty()) fail(ErrorCode::kInvalidArgument, "invalid catalog: " + join(problems, "; "));
}

BehaviorCatalog BehaviorCatalog::from_json(const nlohmann::json& doc) {
  auto parsed = parse_catalog(doc);
  if (!parsed.problems.empty()) fail(ErrorCode::kInvalidArgument, "invalid catalog: " + join(parsed.problems, "; "));
  BehaviorCatalog catalog;
  catalog.features_ = std::move(parsed.features);
  catalog.behaviors_ = std::move(parsed.behaviors);
  catalog.activities_ = std::move(parsed.activities);
  return catalog;
}

BehaviorCatalog BehaviorCatalog::load(const std::filesystem::path& path) {
  return from_json(detail::read_json_file(path.string()));
}

std::vector<std::string> BehaviorCatalog::diagnose(const nlohmann::json& doc) {
  return parse_catalog(doc).problems;
}

nlohmann::json BehaviorCatalog::to_json() const {
  json doc = json::object();
  json features = json::array();
  for (const auto& [id, f] : features_) {
    features.push_back({{"id", f.id},
                        {"name", f.name},
                        {"relevant_activities", f.relevant_activities},
                        {"max_value", f.max_value},
                        {"motor", f.motor}});
  }
  json behaviors = json::array();
  for (const auto& [id, b] : behaviors_) {
    json entry = {{"id", b.id},
                  {"feature", b.feature_id},
                  {"value", b.feature_value},
                  {"description", b.description},
                  {"channels", b.channels.to_string()}};
    if (b.signals) {
      json signals = json::array();
      for (auto s : *b.signals) signals.push_back(std::string(therasim::to_string(s)));
      entry["signals"] = std::move(signals);
    }
    behaviors.push_back(std::move(entry));
  }
  json activities = json::array();
  for (const auto& [id, a] : activities_) {
    activities.push_back({{"id", a.id}, {"name", a.name}, {"features", a.features}});
  }
  doc["features"] = std::move(features);
  doc["behaviors"] = std::move(behaviors);
  doc["activities"] = std::move(activities);
  return doc;
}

const Feature* BehaviorCatalog::find_feature(const std::string& id) const {
  auto it = features_.find(id);
  return it == features_.end() ? nullptr : &it->second;
}

const Behavior* BehaviorCatalog::find_behavior(const std::string& id) const {
  auto it = behaviors_.find(id);
  return it == behaviors_.end() ? nullptr : &it->second;
}

const Activity* BehaviorCatalog::find_activity(const std::string& id) const {
  auto it = activities_.find(id);
  return it == activities_.end() ? nullptr : &it->second;
}

const Feature& BehaviorCatalog::feature(const std::string& id) const {
  if (const auto* f = find_feature(id)) return *f;
  fail(ErrorCode::kNotFound, "unknown feature '" + id + "'");
}

const Behavior& BehaviorCatalog::behavior(const std::string& id) const {
  if (const auto* b = find_behavior(id)) return *b;
  fail(ErrorCode::kNotFound, "unknown behavior '" + id + "'");
}

const Activity& BehaviorCatalog::activity(const std::string& id) const {
  if (const auto* a = find_activity(id)) return *a;
  fail(ErrorCode::kNotFound, "unknown activity '" + id + "'");
}

std::vector<const Behavior*> BehaviorCatalog::behaviors_for(const std::string& feature_id, int value) const {
  std::vector<const Behavior*> out;
  for (const auto& [id, b] : behaviors_) {
    if (b.feature_id == feature_id && b.feature_value == value) out.push_back(&b);
  }
  return out;
}

bool behaviors_compatible(const Behavior& lhs, const Behavior& rhs) {
  if (lhs.feature_id == rhs.feature_id) return false;
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    if (channel_conflict(lhs.channels.values[i], rhs.channels.values[i])) return false;
  }
  return true;
}

CompatibilityGraph::CompatibilityGraph(std::vector<Behavior> nodes)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size() * nodes_.size(), 0) {
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const unsigned char edge = behaviors_compatible(nodes_[i], nodes_[j]) ? 1 : 0;
      adjacency_[i * n + j] = edge;
      adjacency_[j * n + i] = edge;
    }
  }
}

std::size_t CompatibilityGraph::edge_count() const {
  return static_cast<std::size_t>(std::accumulate(adjacency_.begin(), adjacency_.end(), std::size_t{0})) / 2;
}

std::vector<std::pair<std::size_t, std::size_t>> CompatibilityGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes_.size(); ++j) {
      if (adjacent(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<std::string> CompatibilityGraph::features() const {
  std::vector<std::string> out;
  for (const auto& b : nodes_) {
    if (std::find(out.begin(), out.end(), b.feature_id) == out.end()) out.push_back(b.feature_id);
  }
  return out;
}

CompatibilityGraph build_graph(const BehaviorCatalog& catalog, const std::string& activity_id,
                               const FeatureInstantiation& instantiation) {
  const Activity& activity = catalog.activity(activity_id);
  std::vector<Behavior> nodes;
  for (const auto& feature_id : activity.features) {
    auto it = instantiation.find(feature_id);
    if (it == instantiation.end()) {
      fail(ErrorCode::kInvalidArgument,
           "instantiation for activity '" + activity_id + "' is missing feature '" + feature_id + "'");
    }
    auto matches = catalog.behaviors_for(feature_id, it->second);
    if (matches.empty()) {
      fail(ErrorCode::kInvalidArgument, "no behavior for feature '" + feature_id + "' with value " +
                                            std::to_string(it->second));
    }
    for (const auto* b : matches) nodes.push_back(*b);
  }
  return CompatibilityGraph(std::move(nodes));
}

namespace {

// Branch and bound over feature groups, fewest candidates first. Each group
// either contributes one candidate or is skipped, so every distinct
// one-per-feature compatible set is visited at most once. Maximum sets are
// sampled uniformly by reservoir sampling over ties.
class CompatibleSetSearch {
 public:
  CompatibleSetSearch(const CompatibilityGraph& graph, Rng& rng) : graph_(graph), rng_(rng) {
    std::map<std::string, std::vector<std::size_t>> by_feature;
    for (std::size_t i = 0; i < graph.size(); ++i) by_feature[graph.node(i).feature_id].push_back(i);
    for (auto& [feature, members] : by_feature) groups_.push_back(std::move(members));
    std::stable_sort(groups_.begin(), groups_.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
  }

  std::vector<std::size_t> run() {
    expand(0);
    std::sort(best_.begin(), best_.end());
    return best_;
  }

 private:
  void expand(std::size_t depth) {
    if (chosen_.size() + (groups_.size() - depth) < best_.size()) return;
    if (depth == groups_.size()) {
      if (chosen_.size() > best_.size() || ties_ == 0) {
        best_ = chosen_;
        ties_ = 1;
      } else {
        ++ties_;
        if (rng_.uniform_index(ties_) == 0) best_ = chosen_;
      }
      return;
    }
    for (std::size_t candidate : groups_[depth]) {
      bool fits = true;
      for (std::size_t member : chosen_) fits = fits && graph_.adjacent(candidate, member);
      if (!fits) continue;
      chosen_.push_back(candidate);
      expand(depth + 1);
      chosen_.pop_back();
    }
    expand(depth + 1);
  }

  const CompatibilityGraph& graph_;
  Rng& rng_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> best_;
  std::uint64_t ties_ = 0;
};

}  // namespace

std::vector<std::size_t> select_compatible_indices(const CompatibilityGraph& graph, Rng rng) {
  if (graph.empty()) return {};
  return CompatibleSetSearch(graph, rng).run();
}

std::vector<std::string> select_compatible_set(const CompatibilityGraph& graph, Rng rng) {
  std::vector<std::string> ids;
  for (std::size_t i : select_compatible_indices(graph, rng)) ids.push_back(graph.node(i).id);
  return ids;
}

}  // namespace therasim
