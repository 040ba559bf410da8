#include "lcwnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lcw {

namespace {

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double mean_of(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("mean_of: empty sample");
  double s = 0.0;
  for (double v : samples) s += v;
  return s / static_cast<double>(samples.size());
}

double variance_of(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("variance_of: empty sample");
  const double m = mean_of(samples);
  double s = 0.0;
  for (double v : samples) s += (v - m) * (v - m);
  return s / static_cast<double>(samples.size());
}

SummaryStats summarize(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("summarize: empty sample");
  SummaryStats st;
  st.mean = mean_of(samples);
  double s = 0.0;
  for (double v : samples) s += (v - st.mean) * (v - st.mean);
  st.variance = s / static_cast<double>(samples.size());

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  st.q01 = interpolated_quantile(sorted, 0.01);
  st.q25 = interpolated_quantile(sorted, 0.25);
  st.q50 = interpolated_quantile(sorted, 0.50);
  st.q75 = interpolated_quantile(sorted, 0.75);
  st.q99 = interpolated_quantile(sorted, 0.99);
  return st;
}

}  // namespace lcw
