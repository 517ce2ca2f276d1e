#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "negograph/price.hpp"
#include "negograph/rng.hpp"

using namespace negograph;

TEST(Placeholder, ListedFractionExamples) {
  EXPECT_EQ(price_to_placeholder(35, 40), "<price-0.875>");
  EXPECT_EQ(price_to_placeholder(40, 40), "<price-1.000>");
  EXPECT_EQ(price_to_placeholder(12.5, 50), "<price-0.250>");
}

TEST(Placeholder, ClampsToTwiceListed) {
  EXPECT_EQ(price_to_placeholder(500, 40), "<price-2.000>");
  EXPECT_EQ(price_to_placeholder(0, 40), "<price-0.000>");
}

TEST(Placeholder, NonPositiveListedIsDomainError) {
  EXPECT_THROW(price_to_placeholder(10, 0), DomainError);
  EXPECT_THROW(price_to_placeholder(10, -5), DomainError);
}

TEST(Placeholder, BackToPrice) {
  EXPECT_DOUBLE_EQ(placeholder_to_price("<price-0.875>", 40), 35.0);
  EXPECT_DOUBLE_EQ(placeholder_to_price("<price-1.000>", 40), 40.0);
}

TEST(Placeholder, MalformedTokensAreRejected) {
  for (const char* bad : {"<price->", "<price-abc>", "price-0.5", "<price-0.5", "<cost-0.500>", ""}) {
    EXPECT_FALSE(is_placeholder(bad)) << bad;
    EXPECT_THROW(placeholder_to_price(bad, 40), PlaceholderParseError) << bad;
  }
}

TEST(Placeholder, RoundTripWithinOneUnit) {
  nd::Xoshiro256 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const double listed = 1.0 + 5000.0 * rng.uniform();
    const double price = 2.0 * listed * rng.uniform();
    const std::string token = price_to_placeholder(price, listed);
    // independent formatting oracle
    char expected[32];
    std::snprintf(expected, sizeof expected, "<price-%.3f>", price / listed);
    EXPECT_EQ(token, expected);
    const double back = placeholder_to_price(token, listed);
    EXPECT_LE(std::abs(back - price), kPlaceholderUnit * listed * (1 + 1e-9)) << token;
  }
}

TEST(Grid, FortyOneEvenlySpacedTokens) {
  const auto grid = grid_placeholders();
  ASSERT_EQ(grid.size(), 41u);
  EXPECT_EQ(grid.front(), "<price-0.000>");
  EXPECT_EQ(grid[20], "<price-1.000>");
  EXPECT_EQ(grid.back(), "<price-2.000>");
  EXPECT_EQ(grid_placeholder(0.876), "<price-0.900>");
  EXPECT_EQ(grid_placeholder(0.87), "<price-0.850>");
  EXPECT_EQ(grid_placeholder(-1.0), "<price-0.000>");
  EXPECT_EQ(grid_placeholder(7.0), "<price-2.000>");
}

TEST(FormatPrice, TwoDecimals) {
  EXPECT_EQ(format_price(35), "$35.00");
  EXPECT_EQ(format_price(12.346), "$12.35");
}

TEST(Ratio, Examples) {
  EXPECT_DOUBLE_EQ(compute_ratio(40, 36, 40), 1.0);
  EXPECT_DOUBLE_EQ(compute_ratio(36, 36, 40), 0.0);
  EXPECT_DOUBLE_EQ(compute_ratio(35, 36, 40), -0.25);
  EXPECT_THROW(compute_ratio(35, 40, 40), DomainError);
}

TEST(Boundaries, TenEvenRatiosGiveClassesOfTwo) {
  std::vector<double> r;
  for (int i = 1; i <= 10; ++i) r.push_back(i / 10.0);
  const auto b = fit_class_boundaries(r);
  EXPECT_FALSE(b.degenerate);
  // oracle: sort and slice into five chunks of two
  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    EXPECT_EQ(ratio_to_class(sorted[i], b), static_cast<int>(i / 2) + 1) << sorted[i];
  }
}

TEST(Boundaries, OutOfRangeRatiosClamp) {
  std::vector<double> r = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  const auto b = fit_class_boundaries(r);
  EXPECT_EQ(ratio_to_class(-3.0, b), 1);
  EXPECT_EQ(ratio_to_class(7.0, b), 5);
}

TEST(Boundaries, AllEqualRatiosAreDegenerate) {
  std::vector<double> r(8, 0.5);
  const auto b = fit_class_boundaries(r);
  EXPECT_TRUE(b.degenerate);
  for (double x : r) EXPECT_EQ(ratio_to_class(x, b), 1);
}

TEST(Boundaries, NeedFiveValues) {
  std::vector<double> r = {0.1, 0.2, 0.3, 0.4};
  EXPECT_THROW(fit_class_boundaries(r), std::invalid_argument);
}

TEST(Boundaries, DistinctRatiosGiveBalancedClasses) {
  nd::Xoshiro256 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + rng.below(400);
    std::vector<double> r(n);
    for (auto& x : r) x = -0.5 + 2.0 * rng.uniform();
    const auto b = fit_class_boundaries(r);
    std::map<int, std::size_t> sizes;
    for (double x : r) ++sizes[ratio_to_class(x, b)];
    ASSERT_EQ(sizes.size(), 5u) << "n=" << n;
    std::size_t lo = n, hi = 0;
    for (auto& [cls, size] : sizes) {
      lo = std::min(lo, size);
      hi = std::max(hi, size);
    }
    EXPECT_LE(hi - lo, 1u) << "n=" << n;
  }
}
