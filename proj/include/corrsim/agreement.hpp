#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "corrsim/estimate.hpp"
#include "corrsim/source.hpp"

namespace corrsim {

using SampleView = std::span<const std::uint64_t>;

/// Default cap on enumerated (weighted) terms in exact evaluation.
inline constexpr std::size_t kExactBudget = 10'000'000;

struct ExactMode {
  std::size_t budget = kExactBudget;
};
struct McMode {
  std::size_t trials = 100'000;
  std::uint64_t seed = 0;
};
using EvalSpec = std::variant<ExactMode, McMode>;

/// Index of an l-tuple over an alphabet of `base` symbols; first coordinate is most significant.
std::uint64_t tuple_index(SampleView tuple, std::uint64_t base);

/// (l, f, g) with f: U^l -> [0,1] and g: V^l -> [0,1] giving the probability that
/// each player outputs 1. l = 0 is allowed (constant functions).
struct AgreementProtocol {
  std::string name;
  unsigned ell = 0;
  std::function<double(SampleView)> f;
  std::function<double(SampleView)> g;
  /// Present in table mode: f_table[tuple_index(u, u_size)].
  std::optional<std::vector<double>> f_table;
  std::optional<std::vector<double>> g_table;
  std::size_t u_size = 0;
  std::size_t v_size = 0;

  bool table_mode() const noexcept { return f_table.has_value() && g_table.has_value(); }
};

AgreementProtocol agreement_from_tables(unsigned ell, std::size_t u_size, std::size_t v_size,
                                        std::vector<double> f, std::vector<double> g,
                                        std::string name = "table");

/// Constant protocol f = a, g = b (l = 0).
AgreementProtocol constant_agreement(double a, double b);

struct AgreementEval {
  EstimateReport cost;     // E f + E g
  EstimateReport success;  // E f g
};

/// Exact mode enumerates support tuples of rho^{(x) l} (CapacityError past the
/// budget); Monte Carlo mode lets each player output Bernoulli(f), Bernoulli(g).
AgreementEval eval_agreement(const BipartiteSource& s, const AgreementProtocol& pr,
                             const EvalSpec& mode);

/// A constructed protocol together with its closed-form cost and success.
struct AgreementConstruction {
  AgreementProtocol protocol;
  double cost = 0.0;
  double success = 0.0;
};

/// disj: l = floor(log6(1/p)), f = [all u_i = 1], g = 2^-l [all v_i = 0].
/// Success 6^-l >= p and cost 2 / 3^l.
AgreementConstruction disj_agreement(double p);

/// perf: l = floor(log2(1/p)) shared bits, f = g = [all zero]. Success 2^-l, cost 2^(1-l).
AgreementConstruction perf_agreement(double p);

/// f = s_a [all u_i in la], g = s_b [all v_i in lb] with l and the scalings chosen
/// to minimize cost at success exactly max(p, .) over all l with gamma^l >= p.
AgreementConstruction witness_power_agreement(const BipartiteSource& s,
                                              const std::vector<bool>& la,
                                              const std::vector<bool>& lb, double p);

/// Cheapest closed-form construction known for s at success p: recognised
/// perf/disj constructions, and witness_power_agreement over witness-set pairs
/// (exhaustive when |U|, |V| <= 12, singletons otherwise).
AgreementConstruction best_agreement(const BipartiteSource& s, double p);

/// Numerical search at fixed l. Alternating fractional-knapsack steps (each is an
/// exact LP solve for one side with the other fixed) inside a bisection on the
/// total cost; returns the best feasible table protocol found. Not globally optimal.
AgreementConstruction optimize_agreement(const BipartiteSource& s, unsigned ell, double p,
                                         std::size_t iters, std::uint64_t seed);

}  // namespace corrsim
