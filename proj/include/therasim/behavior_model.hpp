#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "therasim/rng.hpp"
#include "therasim/signal.hpp"

namespace therasim {

// Annotation of one behavioral channel.
enum class ChannelValue : char {
  kNoMention = 'x',
  kAbsent = 'a',
  kPositive = 'p',
  kNegative = 'n',
};

enum class Channel : std::size_t { kBodyMotion = 0, kGaze = 1, kSpeech = 2, kEmotionFace = 3 };
inline constexpr std::size_t kChannelCount = 4;

// Throws Error(kInvalidArgument) for anything outside {x, a, p, n}.
ChannelValue parse_channel_value(char symbol);
constexpr char to_char(ChannelValue value) { return static_cast<char>(value); }

// x conflicts with nothing; two specified values conflict iff they differ.
constexpr bool channel_conflict(ChannelValue lhs, ChannelValue rhs) {
  if (lhs == ChannelValue::kNoMention || rhs == ChannelValue::kNoMention) return false;
  return lhs != rhs;
}

// Channel annotations in canonical order: body motion, gaze, speech, emotion/face.
struct ChannelVector {
  std::array<ChannelValue, kChannelCount> values{ChannelValue::kNoMention, ChannelValue::kNoMention,
                                                 ChannelValue::kNoMention, ChannelValue::kNoMention};

  ChannelValue operator[](Channel channel) const { return values[static_cast<std::size_t>(channel)]; }

  // Four characters over {x, a, p, n}, e.g. "xnpx".
  static ChannelVector parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const ChannelVector&, const ChannelVector&) = default;
};

struct Feature {
  std::string id;
  std::string name;
  std::set<std::string> relevant_activities;
  int max_value = 3;
  // Motor-relevant features drive physical error cues in sessions.
  bool motor = false;
};

struct Behavior {
  std::string id;
  std::string feature_id;
  int feature_value = 0;
  std::string description;
  ChannelVector channels;
  // When absent, signals are derived from the channel vector.
  std::optional<std::vector<NeedSignalKind>> signals;
};

struct Activity {
  std::string id;
  std::string name;
  std::vector<std::string> features;
};

class BehaviorCatalog {
 public:
  BehaviorCatalog() = default;

  // Validates every invariant; throws Error listing all problems found.
  BehaviorCatalog(std::vector<Feature> features, std::vector<Behavior> behaviors,
                  std::vector<Activity> activities);

  // Strict: unknown keys, dangling references and duplicate ids are rejected.
  static BehaviorCatalog from_json(const nlohmann::json& doc);
  static BehaviorCatalog load(const std::filesystem::path& path);

  // Non-throwing counterpart used by `validate-catalog`. Empty means valid.
  static std::vector<std::string> diagnose(const nlohmann::json& doc);

  nlohmann::json to_json() const;

  const std::map<std::string, Feature>& features() const { return features_; }
  const std::map<std::string, Behavior>& behaviors() const { return behaviors_; }
  const std::map<std::string, Activity>& activities() const { return activities_; }

  const Feature* find_feature(const std::string& id) const;
  const Behavior* find_behavior(const std::string& id) const;
  const Activity* find_activity(const std::string& id) const;

  // Throwing lookups (Error kNotFound naming the id).
  const Feature& feature(const std::string& id) const;
  const Behavior& behavior(const std::string& id) const;
  const Activity& activity(const std::string& id) const;

  // Behaviors with the given (feature, value), in id order.
  std::vector<const Behavior*> behaviors_for(const std::string& feature_id, int value) const;

 private:
  std::map<std::string, Feature> features_;
  std::map<std::string, Behavior> behaviors_;
  std::map<std::string, Activity> activities_;
};

bool behaviors_compatible(const Behavior& lhs, const Behavior& rhs);

// Nodes are behaviors for one instantiated activity; edges join compatible
// behaviors of different features. Immutable after construction.
class CompatibilityGraph {
 public:
  CompatibilityGraph() = default;
  explicit CompatibilityGraph(std::vector<Behavior> nodes);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  const Behavior& node(std::size_t i) const { return nodes_[i]; }
  const std::vector<Behavior>& nodes() const { return nodes_; }
  bool adjacent(std::size_t i, std::size_t j) const { return adjacency_[i * nodes_.size() + j] != 0; }

  std::size_t edge_count() const;
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  // Distinct feature ids in first-appearance order.
  std::vector<std::string> features() const;

 private:
  std::vector<Behavior> nodes_;
  std::vector<unsigned char> adjacency_;
};

using FeatureInstantiation = std::map<std::string, int>;

CompatibilityGraph build_graph(const BehaviorCatalog& catalog, const std::string& activity_id,
                               const FeatureInstantiation& instantiation);

// Node indices of a maximum pairwise-compatible set with at most one node per
// feature, sorted ascending. Among all maximum sets one is chosen uniformly.
std::vector<std::size_t> select_compatible_indices(const CompatibilityGraph& graph, Rng rng);

// Behavior ids for select_compatible_indices, in graph node order.
std::vector<std::string> select_compatible_set(const CompatibilityGraph& graph, Rng rng);

}  // namespace therasim
