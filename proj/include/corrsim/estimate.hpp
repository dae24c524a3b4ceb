#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace corrsim {

enum class EvalMode { exact, monte_carlo };

/// Point estimate with a 95% two-sided interval.
struct EstimateReport {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  EvalMode mode = EvalMode::exact;
};

inline constexpr double kZ95TwoSided = 1.959963984540054;
inline constexpr double kZ95OneSided = 1.6448536269514722;

EstimateReport exact_estimate(double value);

/// Wilson score interval for a binomial proportion.
EstimateReport wilson_estimate(std::size_t successes, std::size_t trials, std::uint64_t seed,
                               double z = kZ95TwoSided);

/// Normal-approximation interval for the mean of a bounded variable.
EstimateReport mean_estimate(double sum, double sum_sq, std::size_t trials, std::uint64_t seed,
                             double z = kZ95TwoSided);

/// One-sided 95% Wilson bounds.
double wilson_lower(std::size_t successes, std::size_t trials, double z = kZ95OneSided);
double wilson_upper(std::size_t successes, std::size_t trials, double z = kZ95OneSided);

const char* to_string(EvalMode mode);

}  // namespace corrsim
