#include "corrsim/estimate.hpp"

#include <algorithm>
#include <cmath>

namespace corrsim {

EstimateReport exact_estimate(double value) {
  return {value, value, value, 0, 0, EvalMode::exact};
}

namespace {

std::pair<double, double> wilson(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (phat + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace

EstimateReport wilson_estimate(std::size_t successes, std::size_t trials, std::uint64_t seed,
                               double z) {
  EstimateReport r;
  r.trials = trials;
  r.seed = seed;
  r.mode = EvalMode::monte_carlo;
  r.value = trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
  auto [lo, hi] = wilson(successes, trials, z);
  r.ci_low = std::min(lo, r.value);
  r.ci_high = std::max(hi, r.value);
  return r;
}

EstimateReport mean_estimate(double sum, double sum_sq, std::size_t trials, std::uint64_t seed,
                             double z) {
  EstimateReport r;
  r.trials = trials;
  r.seed = seed;
  r.mode = EvalMode::monte_carlo;
  if (trials == 0) return r;
  const double n = static_cast<double>(trials);
  r.value = sum / n;
  const double var = trials > 1 ? std::max(0.0, (sum_sq - n * r.value * r.value) / (n - 1.0)) : 0.0;
  const double half = z * std::sqrt(var / n);
  r.ci_low = r.value - half;
  r.ci_high = r.value + half;
  return r;
}

double wilson_lower(std::size_t successes, std::size_t trials, double z) {
  return wilson(successes, trials, z).first;
}

double wilson_upper(std::size_t successes, std::size_t trials, double z) {
  return wilson(successes, trials, z).second;
}

const char* to_string(EvalMode mode) {
  return mode == EvalMode::exact ? "exact" : "monte_carlo";
}

}  // namespace corrsim
