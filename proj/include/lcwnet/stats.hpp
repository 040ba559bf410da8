#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace lcw {

/// Mean, population variance, and the {1, 25, 50, 75, 99}% quantiles of a sample.
struct SummaryStats {
  double mean = 0.0;
  double variance = 0.0;  // population (divide by n)
  double q01 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q99 = 0.0;

  std::array<double, 5> quantiles() const { return {q01, q25, q50, q75, q99}; }
};

/// Summarizes a non-empty sample. Quantiles use linear interpolation between
/// order statistics at position q * (n - 1).
SummaryStats summarize(std::span<const double> samples);

double mean_of(std::span<const double> samples);

/// Population variance (divide by n).
double variance_of(std::span<const double> samples);

}  // namespace lcw
