#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "corrsim/agreement.hpp"
#include "corrsim/estimate.hpp"
#include "corrsim/rng.hpp"
#include "corrsim/source.hpp"

namespace corrsim {

/// Sorted, duplicate-free indices in [0, n).
using Subset = std::vector<std::uint32_t>;

/// (l, n, A, B). A and B may use auxiliary (private) randomness through the
/// generator they are handed; it is never derived from the shared samples.
/// Coordinates are 0-based.
struct CollisionProtocol {
  std::string name;
  unsigned ell = 0;
  std::uint32_t n = 1;
  std::size_t max_out = 0;
  std::function<Subset(SampleView, SplitMix64&)> alice;
  std::function<Subset(SampleView, SplitMix64&)> bob;
  /// Optional Pr[i in A(u)] for every i; required for exact evaluation.
  std::function<std::vector<double>(SampleView)> alice_membership;
  std::function<std::vector<double>(SampleView)> bob_membership;

  bool has_membership() const noexcept {
    return static_cast<bool>(alice_membership) && static_cast<bool>(bob_membership);
  }
};

/// Deterministic protocol from per-tuple output tables (index = tuple_index).
CollisionProtocol collision_from_tables(unsigned ell, std::uint32_t n, std::size_t u_size,
                                        std::size_t v_size, std::vector<Subset> a,
                                        std::vector<Subset> b, std::string name = "table");

struct CollisionEval {
  std::vector<EstimateReport> per_i;       // Pr[i in A and i in B]
  std::vector<EstimateReport> alice_rate;  // Pr[i in A]
  std::vector<EstimateReport> bob_rate;    // Pr[i in B]
  double min_prob = 0.0;
  std::size_t max_out_seen = 0;
  EvalMode mode = EvalMode::exact;
};

/// Throws ContractViolation if any evaluated output exceeds max_out or leaves [0, n).
CollisionEval eval_collision(const BipartiteSource& s, const CollisionProtocol& pr,
                             const EvalSpec& mode = McMode{});

/// Monte Carlo statistics of the intersection A cap B.
struct IntersectionStats {
  std::size_t trials = 0;
  std::size_t empty = 0;
  std::vector<std::size_t> picks;  // counts of a uniformly chosen element of A cap B
  std::size_t max_out_seen = 0;
};
IntersectionStats intersection_stats(const BipartiteSource& s, const CollisionProtocol& pr,
                                     std::size_t trials, std::uint64_t seed);

/// Each side outputs k indices uniformly without replacement, using private coins.
/// Requires a non-degenerate source. Per-coordinate collision probability (k/n)^2.
CollisionProtocol birthday_collision(const BipartiteSource& s, std::uint32_t n, std::uint32_t k,
                                     std::uint64_t salt = 0);

/// Threshold used by collision_from_agreement: ceil(3 n K) + 16.
std::size_t collision_threshold(std::uint32_t n, double cost_bound);

/// n parallel copies of the agreement protocol; i joins A with probability f(u_i)
/// and the set is dropped when it exceeds the threshold. cost_bound must be strictly
/// above the agreement cost; collision probability then exceeds success / 2.
CollisionProtocol collision_from_agreement(const AgreementProtocol& ag, std::uint32_t n,
                                           double cost_bound);

struct ExtractedAgreement {
  std::uint32_t i_star = 0;
  AgreementProtocol protocol;
  EstimateReport cost;
  EstimateReport success;
};

/// Picks the coordinate with the smallest Pr[i in A] + Pr[i in B] among those whose
/// collision probability reaches p_floor, and wraps its membership indicators.
/// Requires membership functions.
ExtractedAgreement agreement_from_collision(const BipartiteSource& s, const CollisionProtocol& pr,
                                            double p_floor, const EvalSpec& mode = ExactMode{});

/// m independent repetitions, outputs unioned.
CollisionProtocol amplify_collision(const CollisionProtocol& pr, unsigned m);

/// m independent repetitions placed in disjoint blocks of a domain of size m n.
CollisionProtocol scale_domain(const CollisionProtocol& pr, unsigned m);

/// Runs pr on a tensor source whose left factor it was built for, reading only the
/// left component of each sample (index / right_size).
CollisionProtocol lift_left(const CollisionProtocol& pr, std::uint64_t right_u_size,
                            std::uint64_t right_v_size);

/// ceil(log s / log(1/e + 1/2)), at least 1.
unsigned symmetrize_repetitions(double failure);

struct SymmetrizedProtocol {
  CollisionProtocol protocol;
  AgreementConstruction agreement;
  unsigned repetitions = 1;
  std::size_t base_max_out = 0;
};

/// Collision protocol with all coordinates treated alike and
/// Pr[A cap B empty] <= failure: collision_from_agreement at p = 1/n,
/// amplified symmetrize_repetitions(failure) times.
SymmetrizedProtocol symmetrize(const BipartiteSource& s, std::uint32_t n, double failure);

}  // namespace corrsim
