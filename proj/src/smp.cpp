#include "corrsim/smp.hpp"

#include <algorithm>
#include <bit>
#include <memory>
#include <numeric>

#include "corrsim/errors.hpp"
#include "corrsim/parallel.hpp"

namespace corrsim {

std::vector<std::uint64_t> AliceTape::range(std::uint64_t first, std::size_t count) const {
  std::vector<std::uint64_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = tape_.pair(first + k).first;
  return out;
}

std::vector<std::uint64_t> BobTape::range(std::uint64_t first, std::size_t count) const {
  std::vector<std::uint64_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = tape_.pair(first + k).second;
  return out;
}

SmpOutcome run_once(const PairSampler& sampler, const SmpProtocol& pr, const Input& x,
                    const Input& y, std::uint64_t run_key) {
  const SharedTape tape(sampler, derive(run_key, 0));
  const AliceTape ta(tape);
  const BobTape tb(tape);
  SplitMix64 ra(derive(run_key, 1));
  SplitMix64 rb(derive(run_key, 2));
  SplitMix64 rr(derive(run_key, 3));

  const BitString ma = pr.alice(x, ta, ra);
  const BitString mb = pr.bob(y, tb, rb);
  if (ma.size() > pr.bits_alice || mb.size() > pr.bits_bob)
    throw ContractViolation(pr.name + ": message longer than declared cost");

  SmpOutcome out{kBottom, ma.size(), mb.size()};
  if (pr.pseudo) {
    if (!pr.pseudo_referee) throw ContractViolation(pr.name + ": pseudo-SMP protocol without pseudo referee");
    out.answer = pr.pseudo_referee(ma, mb, ta, tb, rr);
  } else {
    // A standard referee has no access to the tapes at all.
    if (pr.pseudo_referee || !pr.referee)
      throw ContractViolation(pr.name + ": standard SMP protocol must use a message-only referee");
    out.answer = pr.referee(ma, mb, rr);
  }
  return out;
}

EstimateReport run_smp(const PairSampler& sampler, const SmpProtocol& pr, const SmpProblem& problem,
                       const Input& x, const Input& y, std::size_t trials, std::uint64_t seed) {
  const Answer truth = problem.eval(x, y);
  if (truth == kBottom) throw DomainError(problem.name + ": input outside the promise");
  if (trials == 0) throw DomainError("run_smp: trials must be positive");
  std::vector<std::size_t> hits(worker_count(), 0);
  parallel_chunks(trials, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::size_t local = 0;
    for (std::size_t t = begin; t < end; ++t)
      if (run_once(sampler, pr, x, y, derive(seed, t)).answer == truth) ++local;
    hits[w] += local;
  });
  return wilson_estimate(std::accumulate(hits.begin(), hits.end(), std::size_t{0}), trials, seed);
}

EstimateReport run_smp(const BipartiteSource& s, const SmpProtocol& pr, const SmpProblem& problem,
                       const Input& x, const Input& y, std::size_t trials, std::uint64_t seed) {
  return run_smp(PairSampler(s), pr, problem, x, y, trials, seed);
}

SmpProtocol over_perfect_randomness(const PublicCoinProtocol& base) {
  if (base.random_bits > 64) throw CapacityError(base.name + ": more than 64 public bits");
  SmpProtocol pr;
  pr.name = base.name + "@perf";
  pr.sample_count = base.random_bits;
  pr.bits_alice = base.bits_alice;
  pr.bits_bob = base.bits_bob;
  const unsigned r_bits = base.random_bits;
  auto assemble = [r_bits](auto&& bit_at) {
    std::uint64_t r = 0;
    for (unsigned k = 0; k < r_bits; ++k) r |= (bit_at(k) & 1u) << k;
    return r;
  };
  pr.alice = [base, assemble](const Input& x, const AliceTape& t, SplitMix64&) {
    return base.alice(x, assemble([&](unsigned k) { return t[k]; }));
  };
  pr.bob = [base, assemble](const Input& y, const BobTape& t, SplitMix64&) {
    return base.bob(y, assemble([&](unsigned k) { return t[k]; }));
  };
  pr.referee = [base](const BitString& a, const BitString& b, SplitMix64&) { return base.referee(a, b); };
  return pr;
}

PublicCoinProtocol inner_product_equality(unsigned n, unsigned hashes) {
  if (n == 0 || hashes == 0) throw DomainError("inner_product_equality: n and hashes must be positive");
  if (static_cast<std::uint64_t>(n) * hashes > 64)
    throw CapacityError("inner_product_equality: hashes * n exceeds 64 public bits");
  PublicCoinProtocol pr;
  pr.name = "ip-eq(n=" + std::to_string(n) + ",k=" + std::to_string(hashes) + ")";
  pr.random_bits = n * hashes;
  pr.bits_alice = pr.bits_bob = hashes;
  const std::uint64_t mask = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  auto hash = [n, hashes, mask](const Input& x, std::uint64_t r) {
    BitString out;
    for (unsigned j = 0; j < hashes; ++j) out.push_bit(dot2(x.at(0) & mask, (r >> (j * n)) & mask));
    return out;
  };
  pr.alice = hash;
  pr.bob = hash;
  pr.referee = [](const BitString& a, const BitString& b) { return a == b ? 1 : 0; };
  return pr;
}

std::size_t default_table_size(unsigned n) { return std::size_t{64} * n; }

PublicCoinProtocol reduce_randomness(const PublicCoinProtocol& base, std::size_t table_size,
                                     std::uint64_t seed) {
  if (table_size == 0) throw DomainError("reduce_randomness: table size must be positive");
  const unsigned bits = table_size == 1 ? 0u : static_cast<unsigned>(std::bit_width(table_size - 1));
  const std::uint64_t mask =
      base.random_bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << base.random_bits) - 1;
  SplitMix64 rng(seed);
  auto table = std::make_shared<std::vector<std::uint64_t>>(std::size_t{1} << bits);
  for (auto& r : *table) r = rng() & mask;

  PublicCoinProtocol pr;
  pr.name = base.name + "/table" + std::to_string(table->size());
  pr.random_bits = bits;
  pr.bits_alice = base.bits_alice;
  pr.bits_bob = base.bits_bob;
  pr.alice = [base, table](const Input& x, std::uint64_t r) { return base.alice(x, (*table)[r]); };
  pr.bob = [base, table](const Input& y, std::uint64_t r) { return base.bob(y, (*table)[r]); };
  pr.referee = base.referee;
  return pr;
}

// ---------------------------------------------------------------------------

Answer gapip_eval(const Input& x, const Input& y) {
  if (x.size() != y.size()) throw DomainError("gapip_eval: x and y have different lengths");
  const std::size_t n = x.size();
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) ones += dot2(x[i], y[i]);
  const std::size_t zeros = n - ones;
  if (3 * zeros >= 2 * n) return 0;
  if (3 * ones >= 2 * n) return 1;
  return kBottom;
}

GapipInstance sample_gapip_instance(unsigned n, unsigned m, unsigned b, std::uint64_t seed) {
  if (m < 2 || m > 64) throw DomainError("sample_gapip_instance: need 2 <= m <= 64");
  if (b > 1) throw DomainError("sample_gapip_instance: b must be 0 or 1");
  const PairSampler sigma = PairSampler::sigma(m, b);
  const std::uint64_t mask = m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
  const std::size_t planted = (2 * static_cast<std::size_t>(n) + 2) / 3;
  SplitMix64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<unsigned> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (unsigned i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    GapipInstance inst{n, m, Input(n), Input(n), kBottom};
    for (unsigned i = 0; i < n; ++i) {
      inst.x[i] = rng() & mask;
      inst.y[i] = rng() & mask;
    }
    for (std::size_t k = 0; k < planted; ++k) {
      const auto [u, v] = sigma.draw(rng);
      inst.x[order[k]] = u;
      inst.y[order[k]] = v;
    }
    inst.truth = gapip_eval(inst.x, inst.y);
    if (inst.truth != kBottom) return inst;
  }
  throw NumericError("sample_gapip_instance: could not draw a promise instance", 0.0);
}

unsigned gapip_default_m(unsigned n) {
  const unsigned lg = n <= 1 ? 0u : static_cast<unsigned>(std::bit_width(n - 1));
  return std::max(2u, 8 * lg);
}

SmpProblem gapip_problem() { return {"gapip", [](const Input& x, const Input& y) { return gapip_eval(x, y); }}; }

PublicCoinProtocol gapip_naive_protocol(unsigned n, unsigned m) {
  if (n == 0) throw DomainError("gapip_naive_protocol: n must be positive");
  if (m == 0 || m > 64) throw DomainError("gapip_naive_protocol: need 1 <= m <= 64");
  const bool pow2 = std::has_single_bit(n);
  const unsigned lg = n == 1 ? 0u : static_cast<unsigned>(std::bit_width(n - 1));
  PublicCoinProtocol pr;
  pr.name = "gapip-naive(n=" + std::to_string(n) + ",m=" + std::to_string(m) + ")";
  pr.random_bits = lg + (pow2 ? 0u : 8u);
  pr.bits_alice = pr.bits_bob = m;
  auto send = [n, m](const Input& x, std::uint64_t r) {
    if (x.size() != n) throw DomainError("gapip_naive_protocol: input has wrong length");
    BitString out;
    out.push(x[r % n], m);
    return out;
  };
  pr.alice = send;
  pr.bob = send;
  pr.referee = [m](const BitString& a, const BitString& b) {
    return static_cast<Answer>(dot2(a.read(0, m), b.read(0, m)));
  };
  return pr;
}

}  // namespace corrsim
