#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "therasim/session.hpp"

namespace therasim::stats {

// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0. Series for
// x < a + 1, Lentz continued fraction otherwise; relative error ~1e-14.
double regularized_gamma_q(double a, double x);

// Survival function of the chi-square distribution with `df` degrees of freedom.
double chi_square_sf(double statistic, double df);

// Upper tail P(Z > z) of the standard normal.
double normal_sf(double z);

// Rows are groups, columns are outcome yes/no:  | a b |
//                                               | c d |
struct ContingencyTable2x2 {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;
  std::uint64_t d = 0;

  std::uint64_t total() const { return a + b + c + d; }
};

struct ChiSquareResult {
  double statistic = 0.0;
  int df = 1;
  double p_value = 1.0;
};

// Pearson chi-square on a 2x2 table. With `yates`, |ad - bc| is reduced by
// n/2 (not below zero) before squaring. Throws when any marginal is zero.
ChiSquareResult chi_square_2x2(const ContingencyTable2x2& table, bool yates = false);

struct MannWhitneyResult {
  double u = 0.0;    // min(u_x, u_y)
  double u_x = 0.0;  // pairs with x > y, ties count 1/2
  double u_y = 0.0;
  double p_value = 1.0;  // two-sided
  bool exact = false;
};

// Largest pooled size for which the p-value is computed by full enumeration.
inline constexpr std::size_t kMannWhitneyExactLimit = 12;

// Two-sided test. For n1 + n2 <= 12 the p-value enumerates every split of
// the pooled midranks; larger samples use the normal approximation with tie
// correction and a 0.5 continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> x, std::span<const double> y);

// Product-moment correlation. Throws on length mismatch, n < 2, or zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

struct TraceReport {
  std::size_t steps = 0;
  double mean_autonomy = 0.0;
  double min_autonomy = 0.0;
  double mean_need = 0.0;
  std::array<double, 3> occupancy{};  // indexed by DyadState
  std::array<std::uint64_t, 3> occupancy_steps{};
  std::vector<TaskOutcome> tasks;
  std::size_t approved = 0;
  std::size_t overridden = 0;
  std::size_t halted = 0;
};

// Throws Error(kInvalidArgument) for an unfinalized trace.
TraceReport trace_report(const SessionTrace& trace);

nlohmann::ordered_json report_to_json(const TraceReport& report);

// Fixed-format table, stable across runs (golden-tested).
std::string format_report(const TraceReport& report);
std::string format_chi_square(const ContingencyTable2x2& table, bool yates, const ChiSquareResult& result);

}  // namespace therasim::stats
