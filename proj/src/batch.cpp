#include "therasim/batch.hpp"

#include <exception>
#include <numeric>

#include <omp.h>

namespace therasim {

namespace {

BatchSummary aggregate(std::vector<SeedResult> runs) {
  BatchSummary out;
  out.runs = std::move(runs);
  if (out.runs.empty()) return out;
  const double n = static_cast<double>(out.runs.size());
  // Fixed summation order keeps serial and parallel sums identical.
  for (const auto& r : out.runs) {
    for (std::size_t s = 0; s < 3; ++s) out.mean_occupancy[s] += r.occupancy[s];
    out.mean_autonomy += r.mean_autonomy;
  }
  for (auto& m : out.mean_occupancy) m /= n;
  out.mean_autonomy /= n;
  return out;
}

}  // namespace

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  std::iota(seeds.begin(), seeds.end(), first);
  return seeds;
}

SeedResult run_seed(const SessionConfig& config, const BehaviorCatalog& catalog, const InstantiationTable& table,
                    std::uint64_t seed) {
  SessionConfig c = config;
  c.seed = seed;
  c.caregiver_gate = GateMode::kAutoApprove;
  Session session(std::move(c), catalog, table);
  session.run_to_completion();
  const auto summary = session.summary();
  SeedResult r;
  r.seed = seed;
  r.steps = summary.steps;
  r.mean_autonomy = summary.mean_autonomy;
  r.min_autonomy = summary.min_autonomy;
  for (auto s : kAllDyadStates) r.occupancy[static_cast<std::size_t>(s)] = summary.occupancy.fraction(s);
  for (const auto& t : summary.tasks) r.tasks_completed += t.outcome == TaskOutcomeKind::kCompleted ? 1 : 0;
  return r;
}

BatchSummary run_batch_serial(const SessionConfig& config, const BehaviorCatalog& catalog,
                              const InstantiationTable& table, std::span<const std::uint64_t> seeds) {
  std::vector<SeedResult> runs;
  runs.reserve(seeds.size());
  for (auto seed : seeds) runs.push_back(run_seed(config, catalog, table, seed));
  return aggregate(std::move(runs));
}

BatchSummary run_batch_parallel(const SessionConfig& config, const BehaviorCatalog& catalog,
                                const InstantiationTable& table, std::span<const std::uint64_t> seeds,
                                int threads) {
  // Validate once up front so a bad config fails before the team starts.
  validate_session_config(config, catalog, table);
  std::vector<SeedResult> runs(seeds.size());
  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(seeds.size());
  if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      runs[static_cast<std::size_t>(i)] = run_seed(config, catalog, table, seeds[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(therasim_batch_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return aggregate(std::move(runs));
}

}  // namespace therasim
