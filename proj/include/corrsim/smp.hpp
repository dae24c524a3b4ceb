#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "corrsim/collision.hpp"
#include "corrsim/estimate.hpp"
#include "corrsim/rng.hpp"
#include "corrsim/source.hpp"

namespace corrsim {

using Answer = int;
inline constexpr Answer kBottom = -1;

/// Player input as 64-bit words; the meaning is protocol specific
/// (equality: one word holding x; GAPIP: one word per m-bit block).
using Input = std::vector<std::uint64_t>;

/// Append-only bit string with fixed-width field access.
class BitString {
 public:
  void push_bit(bool bit) { bits_.push_back(bit); }
  void push(std::uint64_t value, unsigned width) {
    for (unsigned k = 0; k < width; ++k) bits_.push_back((value >> k) & 1u);
  }
  void append(const BitString& other) { bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end()); }
  std::uint64_t read(std::size_t pos, unsigned width) const {
    std::uint64_t v = 0;
    for (unsigned k = 0; k < width; ++k) v |= static_cast<std::uint64_t>(bits_.at(pos + k)) << k;
    return v;
  }
  BitString slice(std::size_t pos, std::size_t len) const {
    BitString out;
    out.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(pos),
                     bits_.begin() + static_cast<std::ptrdiff_t>(pos + len));
    return out;
  }
  bool operator[](std::size_t i) const { return bits_[i]; }
  std::size_t size() const noexcept { return bits_.size(); }
  bool operator==(const BitString&) const = default;

 private:
  std::vector<bool> bits_;
};

/// Lazily materialized i.i.d. shared samples: register k of a run keyed by
/// `key` is sampler.at(derive(key, k)). Both players read the same registers.
class SharedTape {
 public:
  SharedTape(const PairSampler& sampler, std::uint64_t key, std::uint64_t offset = 0)
      : sampler_(&sampler), key_(key), offset_(offset) {}
  std::pair<std::uint64_t, std::uint64_t> pair(std::uint64_t k) const {
    return sampler_->at(derive(key_, offset_ + k));
  }
  SharedTape shifted(std::uint64_t by) const { return {*sampler_, key_, offset_ + by}; }

 private:
  const PairSampler* sampler_;
  std::uint64_t key_;
  std::uint64_t offset_;
};

/// Alice's half of the shared samples.
class AliceTape {
 public:
  explicit AliceTape(SharedTape t) : tape_(t) {}
  std::uint64_t operator[](std::uint64_t k) const { return tape_.pair(k).first; }
  std::vector<std::uint64_t> range(std::uint64_t first, std::size_t count) const;
  AliceTape shifted(std::uint64_t by) const { return AliceTape(tape_.shifted(by)); }

 private:
  SharedTape tape_;
};

/// Bob's half of the shared samples.
class BobTape {
 public:
  explicit BobTape(SharedTape t) : tape_(t) {}
  std::uint64_t operator[](std::uint64_t k) const { return tape_.pair(k).second; }
  std::vector<std::uint64_t> range(std::uint64_t first, std::size_t count) const;
  BobTape shifted(std::uint64_t by) const { return BobTape(tape_.shifted(by)); }

 private:
  SharedTape tape_;
};

/// Simultaneous-message protocol over a shared source. A standard protocol's
/// referee sees only the two messages; a pseudo-SMP protocol's referee also
/// sees both halves of the shared randomness.
struct SmpProtocol {
  std::string name;
  std::uint64_t sample_count = 0;  // shared samples consumed per run
  std::size_t bits_alice = 0;      // cap on Alice's message length
  std::size_t bits_bob = 0;
  bool pseudo = false;
  std::function<BitString(const Input&, const AliceTape&, SplitMix64&)> alice;
  std::function<BitString(const Input&, const BobTape&, SplitMix64&)> bob;
  std::function<Answer(const BitString&, const BitString&, SplitMix64&)> referee;
  std::function<Answer(const BitString&, const BitString&, const AliceTape&, const BobTape&,
                       SplitMix64&)>
      pseudo_referee;

  std::size_t cost() const noexcept { return bits_alice + bits_bob; }
};

/// A (possibly partial) function; eval returns kBottom outside the promise.
struct SmpProblem {
  std::string name;
  std::function<Answer(const Input&, const Input&)> eval;
};

struct SmpOutcome {
  Answer answer = kBottom;
  std::size_t bits_alice = 0;
  std::size_t bits_bob = 0;
};

/// One execution with shared randomness keyed by run_key. Throws
/// ContractViolation if a message exceeds its declared length or the referee
/// wiring does not match the pseudo flag.
SmpOutcome run_once(const PairSampler& sampler, const SmpProtocol& pr, const Input& x,
                    const Input& y, std::uint64_t run_key);

/// Success probability over fresh shared randomness. Throws DomainError when
/// (x, y) is outside the problem's promise.
EstimateReport run_smp(const PairSampler& sampler, const SmpProtocol& pr, const SmpProblem& problem,
                       const Input& x, const Input& y, std::size_t trials, std::uint64_t seed);
EstimateReport run_smp(const BipartiteSource& s, const SmpProtocol& pr, const SmpProblem& problem,
                       const Input& x, const Input& y, std::size_t trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Public-coin protocols (perfect shared randomness)

/// Protocol that reads an R-bit public string r (R <= 64). Messages have
/// exactly bits_alice / bits_bob bits.
struct PublicCoinProtocol {
  std::string name;
  unsigned random_bits = 0;
  std::size_t bits_alice = 0;
  std::size_t bits_bob = 0;
  std::function<BitString(const Input&, std::uint64_t)> alice;
  std::function<BitString(const Input&, std::uint64_t)> bob;
  std::function<Answer(const BitString&, const BitString&)> referee;
};

/// Runs a public-coin protocol over perf: r is assembled from R perf samples.
SmpProtocol over_perfect_randomness(const PublicCoinProtocol& base);

/// Equality by `hashes` independent GF(2) inner-product hashes of n-bit inputs.
/// R = hashes * n; one-sided error 2^-hashes.
PublicCoinProtocol inner_product_equality(unsigned n, unsigned hashes);

/// Default table size for reduce_randomness: 64 n.
std::size_t default_table_size(unsigned n);

/// Newman-style reduction: pre-samples a table of public strings and lets the
/// players index it with ceil(log2 T) public bits. T is rounded up to a power of
/// two so the index is uniform. Error growth is measured, not proven.
PublicCoinProtocol reduce_randomness(const PublicCoinProtocol& base, std::size_t table_size,
                                     std::uint64_t seed);

// ---------------------------------------------------------------------------
// Equality with an arbitrary non-product source

struct WitnessSets {
  std::vector<bool> alice;  // Lambda_a as a mask over U
  std::vector<bool> bob;    // Lambda_b as a mask over V
  double gamma = 0.0;       // Pr[u in La and v in Lb]
  double gamma_prime = 0.0; // Pr[u in La] Pr[v in Lb]
  double delta() const noexcept { return gamma > gamma_prime ? gamma - gamma_prime : gamma_prime - gamma; }
};

WitnessSets witness_gap(const BipartiteSource& s, std::vector<bool> la, std::vector<bool> lb);

/// Maximizes |gamma - gamma'|: exhaustive when |U|, |V| <= 12, otherwise per-row
/// thresholding. Throws DomainError for product sources.
WitnessSets find_witness_sets(const BipartiteSource& s);

/// ceil(4 ln(1/error) / delta^2).
std::size_t equality_rounds(double delta, double error_target);

struct EqualityProtocol {
  SmpProtocol protocol;
  WitnessSets witness;
  unsigned n = 0;
  std::size_t rounds = 0;
  double threshold = 0.0;  // t (gamma + gamma') / 2; ties count as equal
};

/// Each round j uses register j 2^n + x on Alice's side and j 2^n + y on Bob's;
/// registers are lazy so n <= 30 is supported.
EqualityProtocol equality_protocol(const BipartiteSource& s, unsigned n, double error_target);

SmpProblem equality_problem();

/// gamma if same, gamma' otherwise.
double equality_round_accept_exact(const WitnessSets& w, bool same);

/// Fraction of rounds with alpha = beta = 1 over `trials` runs.
EstimateReport equality_round_rate(const BipartiteSource& s, const EqualityProtocol& eq,
                                   const Input& x, const Input& y, std::size_t trials,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// GAPIP

struct GapipInstance {
  unsigned n = 0;
  unsigned m = 0;
  Input x;
  Input y;
  Answer truth = kBottom;
};

/// 0 if at least 2n/3 block inner products are 0, 1 if at least 2n/3 are 1, else kBottom.
Answer gapip_eval(const Input& x, const Input& y);

/// ceil(2n/3) random blocks drawn from sigma(m, b), the rest uniform.
GapipInstance sample_gapip_instance(unsigned n, unsigned m, unsigned b, std::uint64_t seed);

/// 8 log2 n (rounded up), at least 2.
unsigned gapip_default_m(unsigned n);

SmpProblem gapip_problem();

/// Public index i, Alice sends x_i, Bob sends y_i, referee answers x_i . y_i.
/// Uses ceil(log2 n) public bits, plus 8 when n is not a power of two to keep
/// the index bias below 2^-8.
PublicCoinProtocol gapip_naive_protocol(unsigned n, unsigned m);

// ---------------------------------------------------------------------------
// Simulating perfect-randomness protocols over an arbitrary source

struct SimulatedProtocol {
  SmpProtocol single;     // one copy, error < 1/2
  SmpProtocol protocol;   // majority of `copies` independent copies
  SymmetrizedProtocol collision;
  double failure = 0.0;   // (1 - 2 eps) / (4 - 4 eps)
  unsigned copies = 3;
  unsigned random_bits = 0;
  std::size_t payload_alice = 0;  // max_out * (R + base.bits_alice)
  std::size_t payload_bob = 0;    // max_out * (R + base.bits_bob)
  std::size_t header_bits = 0;    // per-copy length prefix in the amplified protocol
};

inline double simulation_failure(double eps) { return (1.0 - 2.0 * eps) / (4.0 - 4.0 * eps); }

/// Players run a symmetrized collision protocol over [2^R], send (r, message(r))
/// for each r in their set, and the referee answers from a uniform common r.
/// Requires R <= 20 (CapacityError) and 0 <= eps < 1/2.
SimulatedProtocol simulate_with_collision(const BipartiteSource& s, const PublicCoinProtocol& base,
                                          double eps);

// ---------------------------------------------------------------------------
// Influence sets of pseudo-SMP protocols

struct InfluenceRun {
  std::vector<unsigned> la;
  std::vector<unsigned> lb;
};

struct InfluenceSummary {
  std::vector<InfluenceRun> runs;
  std::vector<double> pr_in_a;
  std::vector<double> pr_in_b;
  std::vector<double> pr_in_both;
  std::size_t threshold = 0;
  double pr_la_at_least_threshold = 0.0;
  std::size_t max_la = 0;
  std::size_t max_lb = 0;
};

/// For X, Y uniform on {0,1}^n (n <= 12): L_A = {i : H(X_i | R_A, M_A) < 1/2},
/// computed exactly by enumerating every x consistent with Alice's observed
/// message and randomness (her private coins are held fixed per run). Same for Bob.
InfluenceSummary influence_sets(const BipartiteSource& s, const SmpProtocol& pr, unsigned n,
                                std::size_t trials, std::uint64_t seed,
                                std::size_t threshold = 1);

enum class ToyKind { verbatim_first_bit, constant, parity_first_two };

/// Pseudo-SMP toys on n-bit inputs; both players use the same rule.
SmpProtocol influence_toy(ToyKind kind);

}  // namespace corrsim
