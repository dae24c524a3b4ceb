#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "corrsim/rng.hpp"

namespace corrsim {

/// Default cap on dense u_size * v_size.
inline constexpr std::size_t kDefaultDenseBudget = std::size_t{1} << 22;

/// A finite joint distribution rho on U x V, U = {0..u_size-1}, V = {0..v_size-1}.
/// Immutable after construction. Entries are stored row-major: (u, v) -> u * v_size + v.
class BipartiteSource {
 public:
  /// Validates shape, nonnegativity and normalization (|sum - 1| <= 1e-12).
  BipartiteSource(std::size_t u_size, std::size_t v_size, std::vector<double> probs,
                  std::string label = {});

  std::size_t u_size() const noexcept { return u_size_; }
  std::size_t v_size() const noexcept { return v_size_; }
  const std::string& label() const noexcept { return label_; }
  const std::vector<double>& probs() const noexcept { return probs_; }

  double operator()(std::size_t u, std::size_t v) const noexcept { return probs_[u * v_size_ + v]; }

  /// Support pairs in row-major order (u first, then v).
  std::vector<std::pair<std::uint32_t, std::uint32_t>> support() const;

 private:
  std::size_t u_size_;
  std::size_t v_size_;
  std::vector<double> probs_;
  std::string label_;
};

struct Marginals {
  std::vector<double> u;
  std::vector<double> v;
};

enum class StandardKind { perf, priv, disj, bsc, sigma };

struct StandardSpec {
  StandardKind kind = StandardKind::perf;
  double p = 0.0;      // bsc crossover
  unsigned m = 0;      // sigma dimension
  unsigned b = 0;      // sigma inner-product bit
};

/// perf, priv, disj, bsc(p), sigma(m, b). sigma is dense 2^m x 2^m with vectors
/// indexed by their integer value; errors with CapacityError past `budget`.
BipartiteSource make_standard(const StandardSpec& spec,
                              std::size_t budget = kDefaultDenseBudget);
BipartiteSource make_perf();
BipartiteSource make_priv();
BipartiteSource make_disj();
BipartiteSource make_bsc(double p);
BipartiteSource make_sigma(unsigned m, unsigned b, std::size_t budget = kDefaultDenseBudget);

/// Product rho1 (x) rho2 with pairing (u, u') -> u * |U2| + u' and likewise on V.
BipartiteSource tensor(const BipartiteSource& a, const BipartiteSource& b,
                       std::size_t budget = kDefaultDenseBudget);

/// rho^{(x) t}.
BipartiteSource tensor_power(const BipartiteSource& s, unsigned t,
                             std::size_t budget = kDefaultDenseBudget);

/// Outer product of two distributions as a source.
BipartiteSource product_source(const std::vector<double>& pu, const std::vector<double>& pv,
                               std::string label = "product");

Marginals marginals(const BipartiteSource& s);

bool is_product(const BipartiteSource& s, double tol);

/// True iff one of the marginals is a point mass.
bool is_degenerate(const BipartiteSource& s);

/// Exact entry-wise comparison up to tol (same shape required).
bool same_distribution(const BipartiteSource& a, const BipartiteSource& b, double tol = 1e-12);

/// Draws i.i.d. pairs (u, v). Dense sources use inverse-CDF over the row-major
/// support enumeration; sigma(m, b) for any m <= 64 has a closed-form sampler.
class PairSampler {
 public:
  explicit PairSampler(const BipartiteSource& s);
  static PairSampler sigma(unsigned m, unsigned b);

  std::pair<std::uint64_t, std::uint64_t> draw(SplitMix64& rng) const;

  /// Draw keyed by a 64-bit key: same key, same pair. Used for lazy registers.
  std::pair<std::uint64_t, std::uint64_t> at(std::uint64_t key) const {
    SplitMix64 rng(key);
    return draw(rng);
  }

  std::uint64_t u_size() const noexcept { return u_size_; }
  std::uint64_t v_size() const noexcept { return v_size_; }

 private:
  struct Dense {
    std::vector<double> cdf;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  };
  struct Sigma {
    unsigned m;
    unsigned b;
    double p_zero;  // Pr[u = 0]
  };
  PairSampler() = default;

  std::variant<Dense, Sigma> impl_;
  std::uint64_t u_size_ = 0;
  std::uint64_t v_size_ = 0;
};

struct SampleBatch {
  std::size_t count = 0;
  std::vector<std::uint64_t> u_values;
  std::vector<std::uint64_t> v_values;
  std::uint64_t seed = 0;
};

SampleBatch sample(const BipartiteSource& s, std::size_t count, std::uint64_t seed);
SampleBatch sample(const PairSampler& sampler, std::size_t count, std::uint64_t seed);

/// Mod-2 inner product of two bit vectors.
inline unsigned dot2(std::uint64_t x, std::uint64_t y) noexcept {
  return static_cast<unsigned>(__builtin_popcountll(x & y) & 1);
}

}  // namespace corrsim
