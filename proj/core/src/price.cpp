#include "negograph/price.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include <spdlog/spdlog.h>

namespace negograph {

namespace {

constexpr std::string_view kPrefix = "<price-";
constexpr std::string_view kSuffix = ">";

std::string format_fraction(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "<price-%.*f>", kPlaceholderDecimals, fraction);
  return buf;
}

}  // namespace

std::string price_to_placeholder(double price, double listed) {
  if (!(listed > 0.0)) throw DomainError("price_to_placeholder: listed price must be positive");
  const double fraction = std::clamp(price / listed, 0.0, kMaxPlaceholderFraction);
  const double rounded = std::round(fraction / kPlaceholderUnit) * kPlaceholderUnit;
  return format_fraction(rounded);
}

std::optional<double> parse_placeholder(std::string_view token) {
  if (token.size() <= kPrefix.size() + kSuffix.size()) return std::nullopt;
  if (token.substr(0, kPrefix.size()) != kPrefix) return std::nullopt;
  if (token.substr(token.size() - kSuffix.size()) != kSuffix) return std::nullopt;
  const std::string_view body = token.substr(kPrefix.size(), token.size() - kPrefix.size() - 1);
  // digits, optionally followed by '.' and digits
  std::size_t i = 0;
  while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) ++i;
  if (i == 0) return std::nullopt;
  if (i < body.size()) {
    if (body[i] != '.' || i + 1 == body.size()) return std::nullopt;
    for (std::size_t j = i + 1; j < body.size(); ++j) {
      if (!std::isdigit(static_cast<unsigned char>(body[j]))) return std::nullopt;
    }
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc() || ptr != body.data() + body.size()) return std::nullopt;
  return value;
}

bool is_placeholder(std::string_view token) { return parse_placeholder(token).has_value(); }

double placeholder_to_price(std::string_view token, double listed) {
  const auto fraction = parse_placeholder(token);
  if (!fraction) throw PlaceholderParseError("malformed price placeholder: " + std::string(token));
  return *fraction * listed;
}

std::string grid_placeholder(double fraction) {
  const double clamped = std::clamp(fraction, 0.0, kMaxPlaceholderFraction);
  const double index = std::round(clamped / kGridStep);
  return format_fraction(index * kGridStep);
}

std::vector<std::string> grid_placeholders() {
  std::vector<std::string> out;
  const int n = static_cast<int>(std::lround(kMaxPlaceholderFraction / kGridStep));
  for (int i = 0; i <= n; ++i) out.push_back(format_fraction(i * kGridStep));
  return out;
}

std::string format_price(double amount) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "$%.2f", amount);
  return buf;
}

double compute_ratio(double sale, double buyer_target, double listed) {
  const double denom = listed - buyer_target;
  if (denom == 0.0) throw DomainError("compute_ratio: listed price equals buyer target");
  return (sale - buyer_target) / denom;
}

RatioBoundaries fit_class_boundaries(std::span<const double> train_ratios) {
  if (train_ratios.size() < 5) {
    throw std::invalid_argument("fit_class_boundaries: need at least 5 ratios, got " +
                                std::to_string(train_ratios.size()));
  }
  std::vector<double> sorted(train_ratios.begin(), train_ratios.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t last = sorted.size() - 1;
  RatioBoundaries b;
  for (std::size_t k = 0; k < 4; ++k) {
    // lower interpolation: floor(q * (n - 1)) with q = (k + 1) / 5
    const std::size_t idx = ((k + 1) * last) / 5;
    b.cuts[k] = sorted[idx];
  }
  for (std::size_t k = 1; k < 4; ++k) {
    if (!(b.cuts[k] > b.cuts[k - 1])) b.degenerate = true;
  }
  if (b.degenerate) {
    spdlog::warn("ratio class boundaries are degenerate ({}, {}, {}, {}); classes will be unbalanced",
                 b.cuts[0], b.cuts[1], b.cuts[2], b.cuts[3]);
  }
  return b;
}

int ratio_to_class(double ratio, const RatioBoundaries& boundaries) {
  int cls = 1;
  for (double cut : boundaries.cuts) {
    if (ratio > cut) ++cls;
  }
  return cls;
}

}  // namespace negograph
