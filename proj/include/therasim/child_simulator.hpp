#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "therasim/behavior_model.hpp"
#include "therasim/rng.hpp"
#include "therasim/signal.hpp"

namespace therasim {

struct ChildProfile {
  std::string age_band;
  std::string language_ability;
  std::string severity;

  friend bool operator==(const ChildProfile&, const ChildProfile&) = default;
};

// Probability distributions over feature values, one per
// (feature, severity, language ability, age band) cell.
//
// Cell keys are "severity/language/age"; any component may be "*". Lookup
// tries the candidates below in order and takes the first present:
//   s/l/a, s/l/*, s/*/a, s/*/*, */l/a, */l/*, */*/a, */*/*
class InstantiationTable {
 public:
  struct Categories {
    std::vector<std::string> age_bands;
    std::vector<std::string> language_abilities;
    std::vector<std::string> severities;  // ordinal, least severe first
  };

  using Distribution = std::vector<double>;

  InstantiationTable() = default;
  InstantiationTable(Categories categories, std::map<std::string, std::map<std::string, Distribution>> cells);

  static InstantiationTable from_json(const nlohmann::json& doc);
  static InstantiationTable load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const Categories& categories() const { return categories_; }
  const std::map<std::string, std::map<std::string, Distribution>>& cells() const { return cells_; }

  // Throws Error(kInvalidArgument) naming the first category not declared.
  void validate_profile(const ChildProfile& profile) const;

  const Distribution* find_cell(const std::string& feature_id, const ChildProfile& profile) const;
  // Throws Error(kNotFound) naming (feature, severity/language/age).
  const Distribution& cell(const std::string& feature_id, const ChildProfile& profile) const;

  // Problems with using this table for the catalog: missing cells, values
  // beyond a feature's max, mass on values that have no behavior.
  std::vector<std::string> check_against(const BehaviorCatalog& catalog) const;

 private:
  Categories categories_;
  std::map<std::string, std::map<std::string, Distribution>> cells_;
};

std::string cell_key(const ChildProfile& profile);

struct StimulusEvent {
  std::string activity_id;
  std::size_t step_index = 0;
  std::optional<double> intensity;
};

struct ChildResponse {
  FeatureInstantiation instantiation;
  std::vector<std::string> behaviors;
  double mean_feature_value = 0.0;
  double engagement = 1.0;
  std::vector<NeedSignalKind> signals;  // sorted, unique
};

struct ResponseOptions {
  // Standard deviation of the bounded (uniform) engagement noise.
  double engagement_noise_sigma = 0.05;
};

FeatureInstantiation instantiate_features(const ChildProfile& profile, const std::string& activity_id,
                                          const BehaviorCatalog& catalog, const InstantiationTable& table,
                                          Rng& rng);

// Catalog-declared signals, or the channel heuristic: negative gaze yields
// gaze_at_robot, negative speech yields hesitation.
std::vector<NeedSignalKind> behavior_signals(const Behavior& behavior);

// Mean of value/max_value over behaviors, in [0, 1].
double normalized_severity(const BehaviorCatalog& catalog, const std::vector<std::string>& behavior_ids);

// 1 - m * (1.5 - intensity) with intensity defaulting to 0.5, where m is the
// normalized severity; `noise` is added before clamping to [0, 1].
double engagement_from(double normalized, std::optional<double> intensity, double noise);

ChildResponse respond(const ChildProfile& profile, const StimulusEvent& stimulus, const BehaviorCatalog& catalog,
                      const InstantiationTable& table, Rng& rng, const ResponseOptions& options = {});

}  // namespace therasim
