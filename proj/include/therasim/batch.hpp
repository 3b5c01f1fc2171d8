#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "therasim/session.hpp"

namespace therasim {

// Outcome of one auto-approved session.
struct SeedResult {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  double mean_autonomy = 0.0;
  double min_autonomy = 0.0;
  std::array<double, 3> occupancy{};  // indexed by DyadState
  std::size_t tasks_completed = 0;

  friend bool operator==(const SeedResult&, const SeedResult&) = default;
};

struct BatchSummary {
  std::vector<SeedResult> runs;  // in seed order
  std::array<double, 3> mean_occupancy{};
  double mean_autonomy = 0.0;
};

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

// Runs `config` once per seed with the gate forced to auto_approve. The
// serial version is the reference; the parallel one must match it exactly.
BatchSummary run_batch_serial(const SessionConfig& config, const BehaviorCatalog& catalog,
                              const InstantiationTable& table, std::span<const std::uint64_t> seeds);

// threads <= 0 leaves the OpenMP default.
BatchSummary run_batch_parallel(const SessionConfig& config, const BehaviorCatalog& catalog,
                                const InstantiationTable& table, std::span<const std::uint64_t> seeds,
                                int threads = 0);

SeedResult run_seed(const SessionConfig& config, const BehaviorCatalog& catalog, const InstantiationTable& table,
                    std::uint64_t seed);

}  // namespace therasim
