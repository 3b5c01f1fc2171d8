#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "therasim/session.hpp"

namespace therasim {

// JSON-lines trace: a config echo line, one line per step, then a summary
// line. Keys are written in a fixed order so equal traces are equal bytes.
std::string serialize_trace(const SessionTrace& trace);

nlohmann::ordered_json step_to_json(const SessionStep& step);
nlohmann::ordered_json summary_to_json(const SessionSummary& summary);

// Parses a serialized trace. A trace without its summary line is returned
// with finalized = false; the summary is then recomputed from the steps.
SessionTrace parse_trace(std::string_view text);

SessionStep step_from_json(const nlohmann::json& j);

// One row per step; see docs/file_formats.md for the column order.
std::string trace_to_csv(const SessionTrace& trace);

struct ReplayResult {
  bool identical = false;
  std::size_t first_mismatch_line = 0;  // 1-based; 0 when identical
  std::string regenerated;
};

// Re-runs the trace's config, feeding each recorded gate decision back in,
// and compares the regenerated serialization byte for byte.
ReplayResult replay_trace(std::string_view text, const BehaviorCatalog& catalog, const InstantiationTable& table);

}  // namespace therasim
