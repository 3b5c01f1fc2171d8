// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "therasim/assistance_policy.hpp"
#include "therasim/batch.hpp"
#include "therasim/role_fsm.hpp"
#include "therasim/stats.hpp"

#ifndef THERASIM_CLI_PATH
#define THERASIM_CLI_PATH "therasim"
#endif

namespace {

using namespace therasim;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks still run.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && outcome_.pass) {
      outcome_.pass = false;
      outcome_.detail = what;
    }
  }
  void note(const std::string& detail) {
    if (outcome_.pass) outcome_.detail = detail;
  }
  Outcome result() const { return outcome_; }

 private:
  Outcome outcome_;
};

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

Outcome chi_square_reproduction() {
  Check c;
  double best_ms = 1e9;
  stats::ChiSquareResult r;
  for (int i = 0; i < 20; ++i) {
    const auto start = Clock::now();
    r = stats::chi_square_2x2({19, 20, 9, 38});
    best_ms = std::min(best_ms, elapsed_ms(start));
  }
  c.expect(std::abs(r.statistic - 8.49) <= 0.01, "statistic " + fmt(r.statistic));
  c.expect(std::abs(r.p_value - 0.004) <= 0.001, "p " + fmt(r.p_value, 6));
  c.expect(best_ms < 1.0, "runtime " + fmt(best_ms) + " ms");
  c.note("chi2=" + fmt(r.statistic) + " p=" + fmt(r.p_value, 6) + " in " + fmt(best_ms * 1000.0, 1) + " us");
  return c.result();
}

Outcome dignity_trace() {
  Check c;
  const auto start = Clock::now();
  const auto ladder = default_ladder();
  NeedState s;
  const NeedSignal first[] = {{NeedSignalKind::kMistake, 0}};
  s = update_need(s, first, NeedWeights{});
  const int level1 = select_action(s.need, ladder).level.value();
  const double need1 = s.need;
  const NeedSignal second[] = {{NeedSignalKind::kHesitation, 1}, {NeedSignalKind::kGazeAtRobot, 1}};
  s = update_need(s, second, NeedWeights{});
  const int level2 = select_action(s.need, ladder).level.value();
  const double ms = elapsed_ms(start);
  c.expect(need1 == 2.0 && level1 == 2, "first step need " + fmt(need1) + " level " + std::to_string(level1));
  c.expect(s.need == 3.0 && level2 == 3, "second step need " + fmt(s.need) + " level " + std::to_string(level2));
  c.expect(ms < 1.0, "runtime " + fmt(ms) + " ms");
  c.note("need 2.0 -> level 2, need 3.0 -> level 3");
  return c.result();
}

// Seeded random catalog with one activity covering every feature.
BehaviorCatalog random_catalog(std::mt19937_64& gen) {
  const auto nodes = testing_support::random_nodes(gen, 6, 5);
  nlohmann::json doc;
  doc["features"] = nlohmann::json::array();
  doc["behaviors"] = nlohmann::json::array();
  std::vector<std::string> feature_ids;
  for (const auto& b : nodes) {
    if (feature_ids.empty() || feature_ids.back() != b.feature_id) feature_ids.push_back(b.feature_id);
    doc["behaviors"].push_back({{"id", b.id}, {"feature", b.feature_id}, {"value", 0}, {"description", b.id},
                                {"channels", b.channels.to_string()}});
  }
  for (const auto& f : feature_ids) {
    doc["features"].push_back({{"id", f}, {"name", f}, {"relevant_activities", {"act"}}});
  }
  doc["activities"] = {{{"id", "act"}, {"name", "random"}, {"features", feature_ids}}};
  return BehaviorCatalog::from_json(doc);
}

Outcome selection_oracle() {
  Check c;
  const auto start = Clock::now();
  std::mt19937_64 gen(20240601);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto catalog = random_catalog(gen);
    FeatureInstantiation inst;
    for (const auto& [id, f] : catalog.features()) inst[id] = 0;
    const auto graph = build_graph(catalog, "act", inst);
    const auto chosen = select_compatible_set(graph, Rng(static_cast<std::uint64_t>(trial)));
    std::map<std::string, int> per_feature;
    bool sound = true;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto& bi = catalog.behavior(chosen[i]);
      sound = sound && ++per_feature[bi.feature_id] == 1;
      for (std::size_t j = i + 1; j < chosen.size(); ++j) {
        sound = sound && testing_support::oracle_compatible(bi, catalog.behavior(chosen[j]));
      }
    }
    c.expect(sound, "trial " + std::to_string(trial) + " returned a conflicting set");
    const auto best = testing_support::brute_force_maximum(graph.nodes());
    c.expect(chosen.size() == best, "trial " + std::to_string(trial) + ": size " + std::to_string(chosen.size()) +
                                        " vs maximum " + std::to_string(best));
    ++checked;
  }
  const double ms = elapsed_ms(start);
  c.expect(ms < 30000.0, "runtime " + fmt(ms, 0) + " ms");
  c.note(std::to_string(checked) + " catalogs in " + fmt(ms, 0) + " ms");
  return c.result();
}

Outcome autonomy_properties() {
  Check c;
  auto at = [](int level) {
    return AssistanceAction{"l" + std::to_string(level), AssistanceLevel(level),
                            level == 0 ? ActionKind::kNone : ActionKind::kCorrect, std::nullopt};
  };
  for (int l = 0; l <= 9; ++l) c.expect(autonomy(l, at(l)) == 1.0, "autonomy(need == level) != 1 at " + std::to_string(l));
  for (int l = 0; l <= 9; ++l) {
    for (int n = 0; n <= 90; ++n) {
      for (int m = 0; m <= 90; ++m) {
        const double dn = std::abs(n * 0.1 - l);
        const double dm = std::abs(m * 0.1 - l);
        if (dn < dm) {
          c.expect(autonomy(n * 0.1, at(l)) >= autonomy(m * 0.1, at(l)),
                   "not monotone at level " + std::to_string(l));
        }
      }
    }
  }
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> need(0.0, 9.0);
  std::uniform_int_distribution<int> level(0, 9);
  std::uniform_int_distribution<int> size(1, 10);
  for (int i = 0; i < 10000; ++i) {
    std::vector<AssistanceAction> ladder;
    for (int k = size(gen); k > 0; --k) ladder.push_back(at(level(gen)));
    const double x = need(gen);
    const auto& chosen = select_action(x, ladder);
    for (const auto& a : ladder) {
      c.expect(std::abs(x - chosen.level.value()) <= std::abs(x - a.level.value()), "argmin violated at draw " +
                                                                                         std::to_string(i));
    }
  }
  c.note("grid 91x91x10 monotone, 10000 argmin draws");
  return c.result();
}

Outcome fsm_contract() {
  Check c;
  using D = DyadState;
  using K = CueKind;
  const double theta = 3.0;
  int cases = 0;
  for (auto state : kAllDyadStates) {
    for (auto kind : kAllCueKinds) {
      for (bool above : {false, true}) {
        const double need = above ? theta + 1.0 : theta - 1.0;
        D expected = state;
        if (state == D::kObserve && (kind == K::kDoesNotReach || kind == K::kDoesNotLift)) {
          expected = above ? D::kHelp : D::kDemonstrate;
        }
        if (state == D::kHelp && kind == K::kPatientResumesProgress) expected = D::kObserve;
        const auto next = transition({state, false}, Cue::make(kind, CueActor::kPatient), need, theta);
        c.expect(next.dyad == expected,
                 std::string(to_string(state)) + " + " + std::string(to_string(kind)) + " mismatched");
        ++cases;
      }
    }
    // The compound guard out of DEMONSTRATE.
  }
  FsmState s;
  s = transition(s, Cue::make(K::kEndOfTask, CueActor::kTherapistRobot), 0, theta);
  s = transition(s, Cue::make(K::kPatientBegins, CueActor::kPatient), 0, theta);
  c.expect(s.dyad == D::kObserve, "end_of_task then patient_begins did not reach OBSERVE");
  s = transition(s, Cue::make(K::kDoesNotReach, CueActor::kPatient), 5, theta);
  c.expect(s.dyad == D::kHelp, "HELP not reachable");

  const auto config = load_session_config(testing_support::data_path("configs/high_severity.json"));
  const auto batch = run_batch_serial(config, testing_support::default_catalog(), testing_support::default_table(),
                                      seed_range(1, 20));
  for (const auto& r : batch.runs) {
    c.expect(std::abs(r.occupancy[0] + r.occupancy[1] + r.occupancy[2] - 1.0) < 1e-12, "occupancy does not sum to 1");
  }
  c.note(std::to_string(cases) + " table cases, 3 states reached, occupancy sums to 1");
  return c.result();
}

Outcome occupancy_echo() {
  Check c;
  const auto start = Clock::now();
  const auto config = load_session_config(testing_support::data_path("configs/high_severity.json"));
  const auto seeds = seed_range(1, 200);
  const auto batch =
      run_batch_parallel(config, testing_support::default_catalog(), testing_support::default_table(), seeds);
  const double help = batch.mean_occupancy[static_cast<std::size_t>(DyadState::kHelp)];
  const double observe = batch.mean_occupancy[static_cast<std::size_t>(DyadState::kObserve)];
  const double ms = elapsed_ms(start);
  c.expect(help > observe, "HELP " + fmt(help) + " <= OBSERVE " + fmt(observe));
  c.expect(ms < 60000.0, "runtime " + fmt(ms, 0) + " ms");
  c.note("200 seeds: HELP " + fmt(help) + " > OBSERVE " + fmt(observe) + " in " + fmt(ms, 0) + " ms");
  return c.result();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome determinism() {
  Check c;
  const auto dir = std::filesystem::temp_directory_path() / ("therasim_accept_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const std::string cli = THERASIM_CLI_PATH;
  const std::string config = testing_support::data_path("configs/high_severity.json");
  auto run = [&](const std::string& args) { return std::system(("\"" + cli + "\" " + args + " >/dev/null 2>&1").c_str()); };
  const auto a = dir / "a.jsonl";
  const auto b = dir / "b.jsonl";
  c.expect(run("simulate --config \"" + config + "\" --seed 17 --out \"" + a.string() + "\"") == 0, "simulate a failed");
  c.expect(run("simulate --config \"" + config + "\" --seed 17 --out \"" + b.string() + "\"") == 0, "simulate b failed");
  const auto ta = slurp(a);
  const auto tb = slurp(b);
  c.expect(!ta.empty() && ta == tb, "traces differ");
  c.expect(run("replay --trace \"" + a.string() + "\"") == 0, "replay did not exit 0");
  std::filesystem::remove_all(dir);
  c.note("two runs byte-identical (" + std::to_string(ta.size()) + " bytes), replay exit 0");
  return c.result();
}

Outcome mann_whitney_oracle() {
  Check c;
  std::mt19937_64 gen(314159);
  std::uniform_int_distribution<int> size(1, 9);
  std::uniform_int_distribution<int> value(0, 8);
  int draws = 0;
  while (draws < 200) {
    const int n1 = size(gen);
    const int n2 = size(gen);
    if (n1 + n2 > 10) continue;
    std::vector<double> x(n1);
    std::vector<double> y(n2);
    for (auto& v : x) v = value(gen);
    for (auto& v : y) v = value(gen);
    const auto r = stats::mann_whitney_u(x, y);
    const double ux = testing_support::brute_force_u(x, y);
    const double expected_u = std::min(ux, n1 * n2 - ux);
    c.expect(r.u == expected_u, "U mismatch on draw " + std::to_string(draws));
    c.expect(std::abs(r.p_value - testing_support::brute_force_mwu_p(x, y)) < 1e-12,
             "p mismatch on draw " + std::to_string(draws));
    ++draws;
  }
  c.note("200 draws with n1+n2 <= 10");
  return c.result();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"chi-square reproduction", chi_square_reproduction},
      {"dignity-trace calibration", dignity_trace},
      {"selection oracle equivalence", selection_oracle},
      {"autonomy properties", autonomy_properties},
      {"fsm contract", fsm_contract},
      {"qualitative occupancy echo", occupancy_echo},
      {"determinism", determinism},
      {"mann-whitney oracle", mann_whitney_oracle},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
