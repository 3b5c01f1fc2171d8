#include "therasim/child_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json_util.hpp"
#include "therasim/error.hpp"

namespace therasim {

namespace {

using detail::json;

constexpr double kProbabilityTolerance = 1e-9;

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = key.find('/', start);
    parts.push_back(key.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool contains(const std::vector<std::string>& items, const std::string& item) {
  return std::find(items.begin(), items.end(), item) != items.end();
}

std::vector<std::string> parse_category_list(const json& j, std::string_view key, const std::string& where) {
  const auto& list = detail::require(j, key, where);
  const auto path = detail::join_path(where, key);
  detail::expect_array(list, path);
  std::vector<std::string> out;
  for (const auto& item : list) {
    auto value = detail::as_string(item, path);
    if (value == "*" || value.find('/') != std::string::npos) {
      fail(ErrorCode::kInvalidArgument, path + ": category '" + value + "' may not contain '/' or be '*'");
    }
    if (contains(out, value)) fail(ErrorCode::kInvalidArgument, path + ": duplicate category '" + value + "'");
    out.push_back(std::move(value));
  }
  if (out.empty()) fail(ErrorCode::kInvalidArgument, path + ": must not be empty");
  return out;
}

}  // namespace

std::string cell_key(const ChildProfile& profile) {
  return profile.severity + "/" + profile.language_ability + "/" + profile.age_band;
}

InstantiationTable::InstantiationTable(Categories categories,
                                       std::map<std::string, std::map<std::string, Distribution>> cells)
    : categories_(std::move(categories)), cells_(std::move(cells)) {
  for (const auto& [feature, rows] : cells_) {
    for (const auto& [key, dist] : rows) {
      const std::string where = "features." + feature + "." + key;
      auto parts = split_key(key);
      if (parts.size() != 3) fail(ErrorCode::kInvalidArgument, where + ": key must be severity/language/age");
      const std::vector<std::string>* sets[] = {&categories_.severities, &categories_.language_abilities,
                                                &categories_.age_bands};
      for (std::size_t i = 0; i < 3; ++i) {
        if (parts[i] != "*" && !contains(*sets[i], parts[i])) {
          fail(ErrorCode::kInvalidArgument, where + ": undeclared category '" + parts[i] + "'");
        }
      }
      if (dist.empty()) fail(ErrorCode::kInvalidArgument, where + ": empty distribution");
      double total = 0.0;
      for (double p : dist) {
        if (!(p >= 0.0)) fail(ErrorCode::kInvalidArgument, where + ": negative probability");
        total += p;
      }
      if (std::abs(total - 1.0) > kProbabilityTolerance) {
        fail(ErrorCode::kInvalidArgument, where + ": probabilities sum to " + std::to_string(total));
      }
    }
  }
}

InstantiationTable InstantiationTable::from_json(const nlohmann::json& doc) {
  detail::reject_unknown_keys(doc, {"categories", "features", "meta"}, "table");
  const auto& cats = detail::require(doc, "categories", "table");
  detail::reject_unknown_keys(cats, {"age_band", "language_ability", "severity"}, "categories");
  Categories categories;
  categories.age_bands = parse_category_list(cats, "age_band", "categories");
  categories.language_abilities = parse_category_list(cats, "language_ability", "categories");
  categories.severities = parse_category_list(cats, "severity", "categories");

  const auto& features = detail::require(doc, "features", "table");
  detail::expect_object(features, "features");
  std::map<std::string, std::map<std::string, Distribution>> cells;
  for (const auto& [feature, rows] : features.items()) {
    const std::string where = "features." + feature;
    detail::expect_object(rows, where);
    for (const auto& [key, dist] : rows.items()) {
      detail::expect_array(dist, where + "." + key);
      Distribution probabilities;
      for (const auto& p : dist) probabilities.push_back(detail::as_number(p, where + "." + key));
      cells[feature][key] = std::move(probabilities);
    }
  }
  return InstantiationTable(std::move(categories), std::move(cells));
}

InstantiationTable InstantiationTable::load(const std::filesystem::path& path) {
  return from_json(detail::read_json_file(path.string()));
}

nlohmann::json InstantiationTable::to_json() const {
  json doc = json::object();
  doc["categories"] = {{"age_band", categories_.age_bands},
                       {"language_ability", categories_.language_abilities},
                       {"severity", categories_.severities}};
  json features = json::object();
  for (const auto& [feature, rows] : cells_) {
    for (const auto& [key, dist] : rows) features[feature][key] = dist;
  }
  doc["features"] = std::move(features);
  return doc;
}

void InstantiationTable::validate_profile(const ChildProfile& profile) const {
  if (!contains(categories_.age_bands, profile.age_band)) {
    fail(ErrorCode::kInvalidArgument, "profile.age_band: undeclared category '" + profile.age_band + "'");
  }
  if (!contains(categories_.language_abilities, profile.language_ability)) {
    fail(ErrorCode::kInvalidArgument,
         "profile.language_ability: undeclared category '" + profile.language_ability + "'");
  }
  if (!contains(categories_.severities, profile.severity)) {
    fail(ErrorCode::kInvalidArgument, "profile.severity: undeclared category '" + profile.severity + "'");
  }
}

const InstantiationTable::Distribution* InstantiationTable::find_cell(const std::string& feature_id,
                                                                      const ChildProfile& profile) const {
  auto rows = cells_.find(feature_id);
  if (rows == cells_.end()) return nullptr;
  const std::string s = profile.severity;
  const std::string l = profile.language_ability;
  const std::string a = profile.age_band;
  const std::string candidates[] = {s + "/" + l + "/" + a, s + "/" + l + "/*", s + "/*/" + a, s + "/*/*",
                                    "*/" + l + "/" + a,    "*/" + l + "/*",    "*/*/" + a,    "*/*/*"};
  for (const auto& key : candidates) {
    auto it = rows->second.find(key);
    if (it != rows->second.end()) return &it->second;
  }
  return nullptr;
}

const InstantiationTable::Distribution& InstantiationTable::cell(const std::string& feature_id,
                                                                 const ChildProfile& profile) const {
  if (const auto* dist = find_cell(feature_id, profile)) return *dist;
  fail(ErrorCode::kNotFound, "no instantiation cell for (" + feature_id + ", " + cell_key(profile) + ")");
}

std::vector<std::string> InstantiationTable::check_against(const BehaviorCatalog& catalog) const {
  std::vector<std::string> problems;
  for (const auto& [feature, rows] : cells_) {
    if (!catalog.find_feature(feature)) problems.push_back("table feature '" + feature + "' not in catalog");
  }
  for (const auto& [feature_id, feature] : catalog.features()) {
    for (const auto& s : categories_.severities) {
      for (const auto& l : categories_.language_abilities) {
        for (const auto& a : categories_.age_bands) {
          const ChildProfile profile{a, l, s};
          const auto* dist = find_cell(feature_id, profile);
          if (!dist) {
            problems.push_back("no instantiation cell for (" + feature_id + ", " + cell_key(profile) + ")");
            continue;
          }
          for (std::size_t v = 0; v < dist->size(); ++v) {
            if ((*dist)[v] <= 0.0) continue;
            if (static_cast<int>(v) > feature.max_value) {
              problems.push_back("(" + feature_id + ", " + cell_key(profile) + "): mass on value " +
                                 std::to_string(v) + " above max_value");
            } else if (catalog.behaviors_for(feature_id, static_cast<int>(v)).empty()) {
              problems.push_back("(" + feature_id + ", " + cell_key(profile) + "): mass on value " +
                                 std::to_string(v) + " with no behavior");
            }
          }
        }
      }
    }
  }
  return problems;
}

FeatureInstantiation instantiate_features(const ChildProfile& profile, const std::string& activity_id,
                                          const BehaviorCatalog& catalog, const InstantiationTable& table,
                                          Rng& rng) {
  const Activity& activity = catalog.activity(activity_id);
  FeatureInstantiation values;
  for (const auto& feature_id : activity.features) {
    const auto& dist = table.cell(feature_id, profile);
    const double draw = rng.uniform01();
    double cumulative = 0.0;
    std::size_t chosen = dist.size() - 1;
    for (std::size_t v = 0; v < dist.size(); ++v) {
      cumulative += dist[v];
      if (draw < cumulative && dist[v] > 0.0) {
        chosen = v;
        break;
      }
    }
    // Rounding can leave draw above the final cumulative sum; fall back to
    // the largest value that carries mass.
    while (chosen > 0 && dist[chosen] <= 0.0) --chosen;
    values[feature_id] = static_cast<int>(chosen);
  }
  return values;
}

std::vector<NeedSignalKind> behavior_signals(const Behavior& behavior) {
  if (behavior.signals) return *behavior.signals;
  std::vector<NeedSignalKind> out;
  if (behavior.channels[Channel::kGaze] == ChannelValue::kNegative) out.push_back(NeedSignalKind::kGazeAtRobot);
  if (behavior.channels[Channel::kSpeech] == ChannelValue::kNegative) out.push_back(NeedSignalKind::kHesitation);
  return out;
}

double normalized_severity(const BehaviorCatalog& catalog, const std::vector<std::string>& behavior_ids) {
  if (behavior_ids.empty()) return 0.0;
  double total = 0.0;
  for (const auto& id : behavior_ids) {
    const auto& b = catalog.behavior(id);
    const int max_value = catalog.feature(b.feature_id).max_value;
    total += max_value > 0 ? static_cast<double>(b.feature_value) / max_value : 0.0;
  }
  return total / static_cast<double>(behavior_ids.size());
}

double engagement_from(double normalized, std::optional<double> intensity, double noise) {
  const double level = intensity.value_or(0.5);
  const double base = 1.0 - normalized * (1.5 - level);
  return std::clamp(base + noise, 0.0, 1.0);
}

ChildResponse respond(const ChildProfile& profile, const StimulusEvent& stimulus, const BehaviorCatalog& catalog,
                      const InstantiationTable& table, Rng& rng, const ResponseOptions& options) {
  if (stimulus.intensity && !(*stimulus.intensity >= 0.0 && *stimulus.intensity <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "stimulus intensity must lie in [0, 1]");
  }
  ChildResponse response;
  response.instantiation = instantiate_features(profile, stimulus.activity_id, catalog, table, rng);
  const auto graph = build_graph(catalog, stimulus.activity_id, response.instantiation);
  response.behaviors = select_compatible_set(graph, rng.split());

  double value_sum = 0.0;
  for (const auto& id : response.behaviors) {
    const auto& b = catalog.behavior(id);
    value_sum += b.feature_value;
    for (auto s : behavior_signals(b)) response.signals.push_back(s);
  }
  std::sort(response.signals.begin(), response.signals.end());
  response.signals.erase(std::unique(response.signals.begin(), response.signals.end()), response.signals.end());
  if (!response.behaviors.empty()) response.mean_feature_value = value_sum / response.behaviors.size();

  const double half_width = options.engagement_noise_sigma * std::sqrt(3.0);
  const double noise = (2.0 * rng.uniform01() - 1.0) * half_width;
  response.engagement =
      engagement_from(normalized_severity(catalog, response.behaviors), stimulus.intensity, noise);
  return response;
}

}  // namespace therasim
