#include "therasim/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "therasim/error.hpp"

namespace therasim::stats {

namespace {

constexpr double kEpsilon = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10000;

double log_prefactor(double a, double x) { return -x + a * std::log(x) - std::lgamma(a); }

double gamma_p_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int i = 0; i < kMaxIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEpsilon) break;
  }
  return sum * std::exp(log_prefactor(a, x));
}

double gamma_q_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEpsilon) break;
  }
  return std::exp(log_prefactor(a, x)) * h;
}

// Pooled midranks, doubled so they stay integral.
std::vector<std::int64_t> doubled_midranks(std::span<const double> pooled) {
  const std::size_t n = pooled.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  std::vector<std::int64_t> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    // Positions i..j (0-based) share the mean of ranks i+1..j+1.
    const auto doubled = static_cast<std::int64_t>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) fail(ErrorCode::kInvalidArgument, "regularized_gamma_q: need a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::clamp(1.0 - gamma_p_series(a, x), 0.0, 1.0);
  return std::clamp(gamma_q_continued_fraction(a, x), 0.0, 1.0);
}

double chi_square_sf(double statistic, double df) {
  if (!(df > 0.0)) fail(ErrorCode::kInvalidArgument, "chi_square_sf: df must be positive");
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(df / 2.0, statistic / 2.0);
}

double normal_sf(double z) {
  const double half_tail = 0.5 * regularized_gamma_q(0.5, z * z / 2.0);
  return z >= 0.0 ? half_tail : 1.0 - half_tail;
}

ChiSquareResult chi_square_2x2(const ContingencyTable2x2& t, bool yates) {
  const double a = static_cast<double>(t.a);
  const double b = static_cast<double>(t.b);
  const double c = static_cast<double>(t.c);
  const double d = static_cast<double>(t.d);
  const double row1 = a + b;
  const double row2 = c + d;
  const double col1 = a + c;
  const double col2 = b + d;
  if (row1 == 0.0 || row2 == 0.0 || col1 == 0.0 || col2 == 0.0) {
    fail(ErrorCode::kInvalidArgument, "chi_square_2x2: every row and column total must be positive");
  }
  const double n = row1 + row2;
  double cross = std::abs(a * d - b * c);
  if (yates) cross = std::max(0.0, cross - n / 2.0);
  ChiSquareResult result;
  result.statistic = n * cross * cross / (row1 * row2 * col1 * col2);
  result.p_value = chi_square_sf(result.statistic, 1.0);
  return result;
}

MannWhitneyResult mann_whitney_u(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) fail(ErrorCode::kInvalidArgument, "mann_whitney_u: samples must be non-empty");
  const std::size_t n1 = x.size();
  const std::size_t n2 = y.size();
  const std::size_t n = n1 + n2;
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  const auto ranks = doubled_midranks(pooled);

  const auto offset = static_cast<std::int64_t>(n1 * (n1 + 1));  // doubled n1(n1+1)/2
  const std::int64_t rank_sum_x = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(n1),
                                                  std::int64_t{0});
  const std::int64_t doubled_ux = rank_sum_x - offset;
  const auto doubled_total = static_cast<std::int64_t>(2 * n1 * n2);
  const std::int64_t doubled_uy = doubled_total - doubled_ux;

  MannWhitneyResult result;
  result.u_x = static_cast<double>(doubled_ux) / 2.0;
  result.u_y = static_cast<double>(doubled_uy) / 2.0;
  result.u = std::min(result.u_x, result.u_y);
  if (result.u_x + result.u_y != static_cast<double>(n1 * n2) || doubled_ux < 0 || doubled_uy < 0) {
    fail(ErrorCode::kInvalidArgument, "mann_whitney_u: inconsistent rank sums");
  }
  const std::int64_t doubled_u = std::min(doubled_ux, doubled_uy);

  if (n <= kMannWhitneyExactLimit) {
    std::uint64_t extreme = 0;
    std::uint64_t total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != n1) continue;
      std::int64_t sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) sum += ranks[i];
      }
      const std::int64_t ux = sum - offset;
      ++total;
      if (std::min(ux, doubled_total - ux) <= doubled_u) ++extreme;
    }
    result.exact = true;
    result.p_value = static_cast<double>(extreme) / static_cast<double>(total);
    return result;
  }

  std::map<double, std::size_t> tie_counts;
  for (double v : pooled) ++tie_counts[v];
  double tie_term = 0.0;
  for (const auto& [value, count] : tie_counts) {
    const double t = static_cast<double>(count);
    tie_term += t * t * t - t;
  }
  const double dn = static_cast<double>(n);
  const double variance = static_cast<double>(n1 * n2) / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(variance > 0.0)) {
    result.p_value = 1.0;
    return result;
  }
  const double mean = static_cast<double>(n1 * n2) / 2.0;
  const double z = std::max(0.0, std::abs(result.u_x - mean) - 0.5) / std::sqrt(variance);
  result.p_value = std::min(1.0, 2.0 * normal_sf(z));
  return result;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::kInvalidArgument, "pearson_r: samples differ in length");
  if (x.size() < 2) fail(ErrorCode::kInvalidArgument, "pearson_r: need at least two observations");
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorCode::kInvalidArgument, "pearson_r: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

TraceReport trace_report(const SessionTrace& trace) {
  if (!trace.finalized) fail(ErrorCode::kInvalidArgument, "trace_report: trace is not finalized");
  TraceReport report;
  const auto& summary = trace.summary;
  report.steps = summary.steps;
  report.mean_autonomy = summary.mean_autonomy;
  report.min_autonomy = summary.min_autonomy;
  for (auto s : kAllDyadStates) {
    report.occupancy[static_cast<std::size_t>(s)] = summary.occupancy.fraction(s);
    report.occupancy_steps[static_cast<std::size_t>(s)] = summary.occupancy.steps(s);
  }
  double need_total = 0.0;
  for (const auto& step : trace.steps) need_total += step.need_after;
  report.mean_need = trace.steps.empty() ? 0.0 : need_total / static_cast<double>(trace.steps.size());
  report.tasks = summary.tasks;
  report.approved = summary.approved;
  report.overridden = summary.overridden;
  report.halted = summary.halted;
  return report;
}

nlohmann::ordered_json report_to_json(const TraceReport& report) {
  nlohmann::ordered_json j;
  j["steps"] = report.steps;
  j["mean_autonomy"] = report.mean_autonomy;
  j["min_autonomy"] = report.min_autonomy;
  j["mean_need"] = report.mean_need;
  nlohmann::ordered_json occupancy;
  for (auto s : kAllDyadStates) {
    const auto i = static_cast<std::size_t>(s);
    occupancy[std::string(to_string(s))] = {{"steps", report.occupancy_steps[i]}, {"fraction", report.occupancy[i]}};
  }
  j["occupancy"] = std::move(occupancy);
  nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
  for (const auto& t : report.tasks) {
    nlohmann::ordered_json entry;
    entry["activity"] = t.activity_id;
    entry["outcome"] = std::string(to_string(t.outcome));
    entry["steps"] = t.steps;
    entry["progress"] = t.progress;
    tasks.push_back(std::move(entry));
  }
  j["tasks"] = std::move(tasks);
  j["gate"] = {{"approved", report.approved}, {"overridden", report.overridden}, {"halted", report.halted}};
  return j;
}

std::string format_report(const TraceReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << "session report\n";
  out << std::left << std::setw(18) << "steps" << report.steps << '\n';
  out << std::left << std::setw(18) << "mean autonomy" << report.mean_autonomy << '\n';
  out << std::left << std::setw(18) << "min autonomy" << report.min_autonomy << '\n';
  out << std::left << std::setw(18) << "mean need" << report.mean_need << '\n';
  out << "occupancy\n";
  for (auto s : kAllDyadStates) {
    const auto i = static_cast<std::size_t>(s);
    out << "  " << std::left << std::setw(14) << to_string(s) << std::right << std::setw(6)
        << report.occupancy_steps[i] << "  " << report.occupancy[i] << '\n';
  }
  out << "tasks\n";
  for (std::size_t i = 0; i < report.tasks.size(); ++i) {
    const auto& t = report.tasks[i];
    out << "  " << std::right << std::setw(2) << i << "  " << std::left << std::setw(24) << t.activity_id
        << std::setw(10) << to_string(t.outcome) << " steps " << std::right << std::setw(3) << t.steps
        << "  progress " << std::setw(3) << t.progress << '\n';
  }
  out << "gate  approved " << report.approved << "  overridden " << report.overridden << "  halted "
      << report.halted << '\n';
  return out.str();
}

std::string format_chi_square(const ContingencyTable2x2& table, bool yates, const ChiSquareResult& result) {
  std::ostringstream out;
  out << "table        [[" << table.a << ", " << table.b << "], [" << table.c << ", " << table.d << "]]\n";
  out << "n            " << table.total() << '\n';
  out << "yates        " << (yates ? "on" : "off") << '\n';
  out << std::fixed << std::setprecision(2) << "chi-square(" << result.df << ") = " << result.statistic << '\n';
  out << std::setprecision(4) << "statistic    " << result.statistic << '\n';
  out << std::setprecision(6) << "p-value      " << result.p_value << '\n';
  return out.str();
}

}  // namespace therasim::stats
