#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace negograph {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PlaceholderParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fractions are written with this many decimals.
inline constexpr int kPlaceholderDecimals = 3;
inline constexpr double kPlaceholderUnit = 1e-3;
inline constexpr double kMaxPlaceholderFraction = 2.0;
/// Spacing of the generation grid over [0, 2] (41 tokens).
inline constexpr double kGridStep = 0.05;

/// "<price-0.875>" for (35, 40). The fraction is clamped to [0, 2].
std::string price_to_placeholder(double price, double listed);
double placeholder_to_price(std::string_view token, double listed);
std::optional<double> parse_placeholder(std::string_view token);
bool is_placeholder(std::string_view token);

/// Token for the grid point nearest to `fraction` (clamped to [0, 2]).
std::string grid_placeholder(double fraction);
std::vector<std::string> grid_placeholders();

/// "$35.00"
std::string format_price(double amount);

/// (sale - buyer_target) / (listed - buyer_target)
double compute_ratio(double sale, double buyer_target, double listed);

/// Four cut points splitting training ratios into five outcome classes.
struct RatioBoundaries {
  std::array<double, 4> cuts{};
  /// True when the cuts are not strictly ascending (heavy ties).
  bool degenerate = false;
};

/// Lower-interpolation 20/40/60/80 quantiles. Requires at least 5 values.
RatioBoundaries fit_class_boundaries(std::span<const double> train_ratios);
/// Class in 1..5; a ratio equal to a cut falls into the lower class.
int ratio_to_class(double ratio, const RatioBoundaries& boundaries);

}  // namespace negograph
