#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "therasim/batch.hpp"
#include "therasim/behavior_model.hpp"
#include "therasim/child_simulator.hpp"
#include "therasim/error.hpp"
#include "therasim/service.hpp"
#include "therasim/session.hpp"
#include "therasim/stats.hpp"
#include "therasim/trace_io.hpp"

#ifndef THERASIM_DATA_DIR
#define THERASIM_DATA_DIR "data"
#endif

namespace {

using namespace therasim;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

std::vector<double> parse_list(const std::string& text, const std::string& name) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) fail(ErrorCode::kInvalidArgument, name + ": bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(ErrorCode::kInvalidArgument, name + ": empty list");
  return out;
}

struct DataPaths {
  std::string catalog = std::string(THERASIM_DATA_DIR) + "/default_catalog.json";
  std::string table = std::string(THERASIM_DATA_DIR) + "/default_table.json";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--catalog", catalog, "Behavior catalog JSON")->capture_default_str();
    cmd->add_option("--table", table, "Instantiation table JSON")->capture_default_str();
  }
};

int run_simulate(const DataPaths& data, const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path, const std::string& csv_path, bool report) {
  const auto catalog = BehaviorCatalog::load(data.catalog);
  const auto table = InstantiationTable::load(data.table);
  auto config = load_session_config(config_path);
  if (seed) config.seed = *seed;
  config.caregiver_gate = GateMode::kAutoApprove;
  Session session(config, catalog, table);
  const auto trace = session.run_to_completion();
  write_file(out_path, serialize_trace(trace));
  if (!csv_path.empty()) write_file(csv_path, trace_to_csv(trace));
  if (report) std::cout << stats::format_report(stats::trace_report(trace));
  return 0;
}

int run_batch(const DataPaths& data, const std::string& config_path, std::uint64_t first, std::size_t count,
              int threads, bool serial) {
  const auto catalog = BehaviorCatalog::load(data.catalog);
  const auto table = InstantiationTable::load(data.table);
  const auto config = load_session_config(config_path);
  const auto seeds = seed_range(first, count);
  const auto result = serial ? run_batch_serial(config, catalog, table, seeds)
                             : run_batch_parallel(config, catalog, table, seeds, threads);
  std::cout << std::fixed << std::setprecision(6);
  std::cout << "seeds          " << count << '\n';
  std::cout << "mean autonomy  " << result.mean_autonomy << '\n';
  for (auto s : kAllDyadStates) {
    std::cout << std::left << std::setw(15) << to_string(s) << result.mean_occupancy[static_cast<std::size_t>(s)]
              << '\n';
  }
  return 0;
}

int run_validate(const DataPaths& data, bool check_table) {
  std::ifstream in(data.catalog);
  if (!in) fail(ErrorCode::kIo, "cannot read " + data.catalog);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << data.catalog << ": " << e.what() << '\n';
    return 1;
  }
  const auto problems = BehaviorCatalog::diagnose(doc);
  for (const auto& p : problems) std::cerr << data.catalog << ": " << p << '\n';
  if (!problems.empty()) return 1;
  if (check_table) {
    const auto catalog = BehaviorCatalog::from_json(doc);
    const auto table_problems = InstantiationTable::load(data.table).check_against(catalog);
    for (const auto& p : table_problems) std::cerr << data.table << ": " << p << '\n';
    if (!table_problems.empty()) return 1;
  }
  std::cout << "ok\n";
  return 0;
}

int run_stats(const std::string& counts, bool yates, const std::string& trace_path, bool as_json,
              const std::string& xs, const std::string& ys, const std::string& test) {
  const int modes = (!counts.empty() ? 1 : 0) + (!trace_path.empty() ? 1 : 0) + (!xs.empty() || !ys.empty() ? 1 : 0);
  if (modes != 1) fail(ErrorCode::kInvalidArgument, "stats: give exactly one of --counts, --trace, or --x/--y");
  std::cout << std::setprecision(12);
  if (!counts.empty()) {
    const auto v = parse_list(counts, "--counts");
    if (v.size() != 4) fail(ErrorCode::kInvalidArgument, "--counts: expected a,b,c,d");
    stats::ContingencyTable2x2 t;
    std::uint64_t* cells[] = {&t.a, &t.b, &t.c, &t.d};
    for (std::size_t i = 0; i < 4; ++i) {
      if (v[i] < 0 || v[i] != std::floor(v[i])) fail(ErrorCode::kInvalidArgument, "--counts: cells must be counts");
      *cells[i] = static_cast<std::uint64_t>(v[i]);
    }
    const auto r = stats::chi_square_2x2(t, yates);
    if (as_json) {
      std::cout << nlohmann::ordered_json{{"statistic", r.statistic}, {"df", r.df}, {"p_value", r.p_value},
                                          {"yates", yates}}.dump()
                << '\n';
    } else {
      std::cout << stats::format_chi_square(t, yates, r);
    }
    return 0;
  }
  if (!trace_path.empty()) {
    const auto report = stats::trace_report(parse_trace(read_file(trace_path)));
    if (as_json) {
      std::cout << stats::report_to_json(report).dump(2) << '\n';
    } else {
      std::cout << stats::format_report(report);
    }
    return 0;
  }
  const auto x = parse_list(xs, "--x");
  const auto y = parse_list(ys, "--y");
  if (test == "mwu") {
    const auto r = stats::mann_whitney_u(x, y);
    std::cout << "U " << r.u << "\nU_x " << r.u_x << "\nU_y " << r.u_y << "\np-value " << r.p_value << "\nmethod "
              << (r.exact ? "exact" : "normal") << '\n';
  } else {
    std::cout << "r " << stats::pearson_r(x, y) << '\n';
  }
  return 0;
}

int run_replay(const DataPaths& data, const std::string& trace_path) {
  const auto catalog = BehaviorCatalog::load(data.catalog);
  const auto table = InstantiationTable::load(data.table);
  const auto result = replay_trace(read_file(trace_path), catalog, table);
  if (result.identical) {
    std::cout << "replay identical\n";
    return 0;
  }
  std::cerr << trace_path << ": replay diverges at line " << result.first_mismatch_line << '\n';
  return 1;
}

int run_serve(const DataPaths& data, std::optional<int> port, const std::string& host, const std::string& static_dir,
              const std::string& trace_dir) {
  int resolved = 8080;
  if (port) {
    resolved = *port;
  } else if (const char* env = std::getenv("THERASIM_PORT")) {
    try {
      resolved = std::stoi(env);
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, std::string("THERASIM_PORT: not a port '") + env + "'");
    }
  }
  if (resolved <= 0 || resolved > 65535) fail(ErrorCode::kInvalidArgument, "port out of range");
  SessionService service(BehaviorCatalog::load(data.catalog), InstantiationTable::load(data.table),
                         trace_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(trace_dir));
  std::cerr << "listening on " << host << ":" << resolved << '\n';
  serve_http(service, host, resolved,
             static_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(static_dir));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop assistive-robot therapy simulator"};
  app.require_subcommand(1);
  DataPaths data;

  auto* simulate = app.add_subcommand("simulate", "Run one auto-approved session and write its trace");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string csv_path;
  bool report = false;
  simulate->add_option("--config", config_path, "Session config JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", seed, "Override the config seed");
  simulate->add_option("--out", out_path, "Trace output (JSON lines)")->required();
  simulate->add_option("--csv", csv_path, "Also write a CSV export");
  simulate->add_flag("--report", report, "Print a summary table");
  data.add_to(simulate);

  auto* batch = app.add_subcommand("batch", "Run a config over a range of seeds");
  std::uint64_t first_seed = 1;
  std::size_t seed_count = 100;
  int threads = 0;
  bool serial = false;
  batch->add_option("--config", config_path, "Session config JSON")->required()->check(CLI::ExistingFile);
  batch->add_option("--first-seed", first_seed)->capture_default_str();
  batch->add_option("--seeds", seed_count, "Number of seeds")->capture_default_str();
  batch->add_option("--threads", threads, "OpenMP threads (0 = default)");
  batch->add_flag("--serial", serial, "Use the serial reference runner");
  data.add_to(batch);

  auto* validate = app.add_subcommand("validate-catalog", "Check a catalog file");
  bool check_table = false;
  data.add_to(validate);
  validate->add_flag("--with-table", check_table, "Also check the table covers the catalog");

  auto* stats_cmd = app.add_subcommand("stats", "Statistics on counts, traces, or samples");
  std::string counts;
  bool yates = false;
  std::string trace_path;
  bool as_json = false;
  std::string xs;
  std::string ys;
  std::string test = "mwu";
  stats_cmd->add_option("--counts", counts, "2x2 table a,b,c,d (row major)");
  stats_cmd->add_flag("--yates", yates, "Yates continuity correction");
  stats_cmd->add_option("--trace", trace_path, "Session trace to summarize");
  stats_cmd->add_flag("--json", as_json, "JSON output");
  stats_cmd->add_option("--x", xs, "Comma-separated sample");
  stats_cmd->add_option("--y", ys, "Comma-separated sample");
  stats_cmd->add_option("--test", test, "mwu or pearson")->check(CLI::IsMember({"mwu", "pearson"}));

  auto* replay = app.add_subcommand("replay", "Re-run a trace and compare byte for byte");
  replay->add_option("--trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  data.add_to(replay);

  auto* serve = app.add_subcommand("serve", "Serve the session API over HTTP");
  std::optional<int> port;
  std::string host = "127.0.0.1";
  std::string static_dir;
  std::string trace_dir;
  serve->add_option("--port", port, "Port (default THERASIM_PORT or 8080)");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--static-dir", static_dir, "Directory served at /");
  serve->add_option("--trace-dir", trace_dir, "Write finished session traces here");
  data.add_to(serve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(data, config_path, seed, out_path, csv_path, report);
    if (*batch) return run_batch(data, config_path, first_seed, seed_count, threads, serial);
    if (*validate) return run_validate(data, check_table);
    if (*stats_cmd) return run_stats(counts, yates, trace_path, as_json, xs, ys, test);
    if (*replay) return run_replay(data, trace_path);
    if (*serve) return run_serve(data, port, host, static_dir, trace_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
