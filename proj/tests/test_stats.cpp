#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "therasim/error.hpp"
#include "therasim/stats.hpp"

namespace {

using namespace therasim;
using namespace therasim::stats;

// Chi-square from expected counts, cell by cell.
double chi_square_by_cells(double a, double b, double c, double d, bool yates) {
  const double n = a + b + c + d;
  const double obs[2][2] = {{a, b}, {c, d}};
  const double rows[2] = {a + b, c + d};
  const double cols[2] = {a + c, b + d};
  double x = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double e = rows[i] * cols[j] / n;
      double diff = std::abs(obs[i][j] - e);
      if (yates) diff = std::max(0.0, diff - 0.5);
      x += diff * diff / e;
    }
  }
  return x;
}

// Closed form for even degrees of freedom.
double chi_square_sf_even(double x, int df) {
  double term = 1.0;
  double sum = 1.0;
  for (int i = 1; i < df / 2; ++i) {
    term *= (x / 2.0) / i;
    sum += term;
  }
  return std::exp(-x / 2.0) * sum;
}

TEST(ChiSquare, PublishedCountsUncorrected) {
  const auto r = chi_square_2x2({19, 20, 9, 38});
  EXPECT_NEAR(r.statistic, 8.49, 0.01);
  EXPECT_NEAR(r.p_value, 0.004, 0.001);
  EXPECT_EQ(r.df, 1);
  // frozen from an external reference implementation
  EXPECT_NEAR(r.statistic, 8.486889241841553, 1e-12);
  EXPECT_NEAR(r.p_value, 0.003577149174892911, 1e-12);
}

TEST(ChiSquare, PublishedCountsYates) {
  const auto r = chi_square_2x2({19, 20, 9, 38}, true);
  EXPECT_NEAR(r.statistic, 7.19367896715659, 1e-12);
  EXPECT_NEAR(r.p_value, 0.00731608298640084, 1e-12);
  EXPECT_NEAR(r.statistic, 499.0 * 499.0 * 86.0 / 2976792.0, 1e-12);
}

TEST(ChiSquare, MatchesCellwiseFormulaOnRandomTables) {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<std::uint64_t> cell(1, 60);
  for (int i = 0; i < 500; ++i) {
    ContingencyTable2x2 t{cell(gen), cell(gen), cell(gen), cell(gen)};
    for (bool yates : {false, true}) {
      const auto r = chi_square_2x2(t, yates);
      const double expected = chi_square_by_cells(static_cast<double>(t.a), static_cast<double>(t.b),
                                                  static_cast<double>(t.c), static_cast<double>(t.d), yates);
      // The per-cell form only coincides with the shortcut when all |O-E| exceed 1/2.
      if (!yates) {
        EXPECT_NEAR(r.statistic, expected, 1e-9 * std::max(1.0, expected));
      }
      EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(r.statistic / 2.0)), 1e-12);
    }
  }
}

TEST(ChiSquare, ZeroMarginalThrows) {
  EXPECT_THROW(chi_square_2x2({0, 0, 3, 4}), Error);
  EXPECT_THROW(chi_square_2x2({1, 0, 3, 0}), Error);
}

TEST(ChiSquare, FormatIsStable) {
  const ContingencyTable2x2 t{19, 20, 9, 38};
  EXPECT_EQ(format_chi_square(t, false, chi_square_2x2(t)),
            "table        [[19, 20], [9, 38]]\n"
            "n            86\n"
            "yates        off\n"
            "chi-square(1) = 8.49\n"
            "statistic    8.4869\n"
            "p-value      0.003577\n");
}

TEST(Gamma, DfOneAgainstErfc) {
  for (double x = 0.0; x <= 60.0; x += 0.37) {
    EXPECT_NEAR(chi_square_sf(x, 1.0), std::erfc(std::sqrt(x / 2.0)), 1e-13) << x;
  }
}

TEST(Gamma, EvenDfAgainstClosedForm) {
  for (int df : {2, 4, 6, 10, 20}) {
    for (double x = 0.05; x <= 80.0; x *= 1.4) {
      const double expected = chi_square_sf_even(x, df);
      EXPECT_NEAR(chi_square_sf(x, df), expected, 1e-12 + 1e-10 * expected) << df << " " << x;
    }
  }
}

TEST(Gamma, OddDfReferenceValues) {
  EXPECT_NEAR(chi_square_sf(3.5, 5), 0.6233876277495822, 1e-12);
  EXPECT_NEAR(chi_square_sf(20.0, 7), 0.005569683072945574, 1e-12);
  EXPECT_NEAR(chi_square_sf(0.1, 3), 0.9918374237318764, 1e-12);
}

TEST(Gamma, Edges) {
  EXPECT_EQ(regularized_gamma_q(2.0, 0.0), 1.0);
  EXPECT_EQ(chi_square_sf(-1.0, 1.0), 1.0);
  EXPECT_THROW(regularized_gamma_q(0.0, 1.0), Error);
  EXPECT_THROW(regularized_gamma_q(1.0, -1.0), Error);
  EXPECT_THROW(chi_square_sf(1.0, 0.0), Error);
  EXPECT_NEAR(normal_sf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_sf(1.959963984540054), 0.025, 1e-12);
  EXPECT_NEAR(normal_sf(-1.0) + normal_sf(1.0), 1.0, 1e-15);
}

TEST(MannWhitney, ExactMatchesEnumerationOracle) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> size(1, 9);
  std::uniform_int_distribution<int> value(0, 6);  // small range forces ties
  int checked = 0;
  while (checked < 300) {
    const int n1 = size(gen);
    const int n2 = size(gen);
    if (n1 + n2 > 12) continue;
    std::vector<double> x(n1);
    std::vector<double> y(n2);
    for (auto& v : x) v = value(gen);
    for (auto& v : y) v = value(gen);
    const auto r = mann_whitney_u(x, y);
    EXPECT_TRUE(r.exact);
    EXPECT_DOUBLE_EQ(r.u_x, testing_support::brute_force_u(x, y));
    EXPECT_DOUBLE_EQ(r.u_y, testing_support::brute_force_u(y, x));
    EXPECT_NEAR(r.p_value, testing_support::brute_force_mwu_p(x, y), 1e-12);
    ++checked;
  }
}

TEST(MannWhitney, KnownSmallCase) {
  // Complete separation, 3 vs 3: only 2 of 20 splits are as extreme.
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> y{4, 5, 6};
  const auto r = mann_whitney_u(x, y);
  EXPECT_EQ(r.u, 0.0);
  EXPECT_EQ(r.u_y, 9.0);
  EXPECT_NEAR(r.p_value, 0.1, 1e-15);
}

TEST(MannWhitney, NormalApproximationReference) {
  const std::vector<double> x{1.2, 3.4, 2.2, 5.0, 0.1, 7.7, 3.3, 2.8, 9.1, 4.4, 6.0, 1.1, 8.8};
  const std::vector<double> y{2.5, 6.6, 0.3, 1.9, 5.5, 4.1, 7.2, 3.9, 0.7, 2.0, 6.1, 5.9};
  const auto r = mann_whitney_u(x, y);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.u_x, 82.0);
  EXPECT_NEAR(r.p_value, 0.8490153628243157, 1e-12);
}

TEST(MannWhitney, AllTiedIsOne) {
  const std::vector<double> x(8, 2.0);
  const std::vector<double> y(9, 2.0);
  const auto r = mann_whitney_u(x, y);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_EQ(r.u, 36.0);
}

TEST(MannWhitney, EmptyThrows) {
  const std::vector<double> x;
  const std::vector<double> y{1.0};
  EXPECT_THROW(mann_whitney_u(x, y), Error);
}

TEST(Pearson, MatchesDefinition) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + trial % 20;
    std::vector<double> x(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = noise(gen);
      y[i] = 0.5 * x[i] + noise(gen);
    }
    // Textbook single-pass sums.
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      syy += y[i] * y[i];
      sxy += x[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double expected = (dn * sxy - sx * sy) / std::sqrt((dn * sxx - sx * sx) * (dn * syy - sy * sy));
    EXPECT_NEAR(pearson_r(x, y), expected, 1e-10);
  }
}

TEST(Pearson, PerfectAndErrors) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{2, 4, 6, 8};
  const std::vector<double> z{8, 6, 4, 2};
  const std::vector<double> flat{1, 1, 1, 1};
  EXPECT_NEAR(pearson_r(x, y), 1.0, 1e-15);
  EXPECT_NEAR(pearson_r(x, z), -1.0, 1e-15);
  EXPECT_THROW(pearson_r(x, flat), Error);
  EXPECT_THROW(pearson_r(std::span<const double>(x).first(1), std::span<const double>(y).first(1)), Error);
  EXPECT_THROW(pearson_r(x, std::span<const double>(y).first(3)), Error);
}

}  // namespace
