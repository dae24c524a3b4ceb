#include <cmath>
#include <memory>
#include <numeric>

#include "corrsim/errors.hpp"
#include "corrsim/parallel.hpp"
#include "corrsim/smp.hpp"

namespace corrsim {

WitnessSets witness_gap(const BipartiteSource& s, std::vector<bool> la, std::vector<bool> lb) {
  if (la.size() != s.u_size() || lb.size() != s.v_size())
    throw DomainError("witness_gap: mask sizes do not match the source");
  const Marginals mg = marginals(s);
  WitnessSets w{std::move(la), std::move(lb), 0.0, 0.0};
  double pa = 0.0, pb = 0.0;
  for (std::size_t u = 0; u < s.u_size(); ++u) {
    if (!w.alice[u]) continue;
    pa += mg.u[u];
    for (std::size_t v = 0; v < s.v_size(); ++v)
      if (w.bob[v]) w.gamma += s(u, v);
  }
  for (std::size_t v = 0; v < s.v_size(); ++v)
    if (w.bob[v]) pb += mg.v[v];
  w.gamma_prime = pa * pb;
  return w;
}

namespace {

// Best Bob set for a fixed Alice set: all v where the row excess has one sign.
WitnessSets best_response(const BipartiteSource& s, const Marginals& mg, const std::vector<bool>& la) {
  double pa = 0.0;
  for (std::size_t u = 0; u < s.u_size(); ++u)
    if (la[u]) pa += mg.u[u];
  std::vector<bool> pos(s.v_size()), neg(s.v_size());
  double gain_pos = 0.0, gain_neg = 0.0;
  for (std::size_t v = 0; v < s.v_size(); ++v) {
    double row = 0.0;
    for (std::size_t u = 0; u < s.u_size(); ++u)
      if (la[u]) row += s(u, v);
    const double d = row - pa * mg.v[v];
    if (d > 0) {
      pos[v] = true;
      gain_pos += d;
    } else if (d < 0) {
      neg[v] = true;
      gain_neg -= d;
    }
  }
  return witness_gap(s, la, gain_pos >= gain_neg ? pos : neg);
}

}  // namespace

WitnessSets find_witness_sets(const BipartiteSource& s) {
  if (is_product(s, 1e-12)) throw DomainError("find_witness_sets: product source, no witness exists");
  const Marginals mg = marginals(s);
  const std::size_t nu = s.u_size();
  WitnessSets best = witness_gap(s, std::vector<bool>(nu, false), std::vector<bool>(s.v_size(), false));
  auto consider = [&](const std::vector<bool>& la) {
    WitnessSets w = best_response(s, mg, la);
    if (w.delta() > best.delta()) best = std::move(w);
  };
  if (nu <= 12 && s.v_size() <= 12) {
    for (std::uint32_t mask = 1; mask < (1u << nu); ++mask) {
      std::vector<bool> la(nu);
      for (std::size_t u = 0; u < nu; ++u) la[u] = (mask >> u) & 1u;
      consider(la);
    }
    return best;
  }
  // Greedy: seed with single rows, then keep adding the row that helps most.
  for (std::size_t seed = 0; seed < nu; ++seed) {
    std::vector<bool> la(nu, false);
    la[seed] = true;
    double current = best_response(s, mg, la).delta();
    consider(la);
    for (;;) {
      std::size_t pick = nu;
      double gain = current;
      for (std::size_t u = 0; u < nu; ++u) {
        if (la[u]) continue;
        la[u] = true;
        const double d = best_response(s, mg, la).delta();
        la[u] = false;
        if (d > gain + 1e-15) {
          gain = d;
          pick = u;
        }
      }
      if (pick == nu) break;
      la[pick] = true;
      current = gain;
      consider(la);
    }
  }
  return best;
}

std::size_t equality_rounds(double delta, double error_target) {
  if (!(delta > 0.0)) throw DomainError("equality_rounds: gap must be positive");
  if (!(error_target > 0.0 && error_target < 1.0)) throw DomainError("equality_rounds: error target must lie in (0, 1)");
  return static_cast<std::size_t>(std::ceil(4.0 * std::log(1.0 / error_target) / (delta * delta)));
}

EqualityProtocol equality_protocol(const BipartiteSource& s, unsigned n, double error_target) {
  if (n == 0 || n > 30) throw DomainError("equality_protocol: need 1 <= n <= 30");
  EqualityProtocol eq;
  eq.witness = find_witness_sets(s);
  eq.n = n;
  eq.rounds = equality_rounds(eq.witness.delta(), error_target);
  eq.threshold = static_cast<double>(eq.rounds) * (eq.witness.gamma + eq.witness.gamma_prime) / 2.0;

  const std::size_t t = eq.rounds;
  const auto la = std::make_shared<const std::vector<bool>>(eq.witness.alice);
  const auto lb = std::make_shared<const std::vector<bool>>(eq.witness.bob);
  SmpProtocol& pr = eq.protocol;
  pr.name = "equality(" + s.label() + ",n=" + std::to_string(n) + ",t=" + std::to_string(t) + ")";
  pr.sample_count = static_cast<std::uint64_t>(t) << n;
  pr.bits_alice = pr.bits_bob = t;
  const std::uint64_t limit = std::uint64_t{1} << n;
  pr.alice = [t, n, limit, la](const Input& x, const AliceTape& tape, SplitMix64&) {
    if (x.size() != 1 || x[0] >= limit) throw DomainError("equality: input is not an n-bit string");
    BitString out;
    for (std::size_t j = 0; j < t; ++j) out.push_bit((*la)[tape[(static_cast<std::uint64_t>(j) << n) | x[0]]]);
    return out;
  };
  pr.bob = [t, n, limit, lb](const Input& y, const BobTape& tape, SplitMix64&) {
    if (y.size() != 1 || y[0] >= limit) throw DomainError("equality: input is not an n-bit string");
    BitString out;
    for (std::size_t j = 0; j < t; ++j) out.push_bit((*lb)[tape[(static_cast<std::uint64_t>(j) << n) | y[0]]]);
    return out;
  };
  const bool above = eq.witness.gamma > eq.witness.gamma_prime;
  const double threshold = eq.threshold;
  pr.referee = [above, threshold](const BitString& a, const BitString& b, SplitMix64&) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < a.size(); ++j) count += a[j] && b[j];
    const double c = static_cast<double>(count);
    return (above ? c >= threshold : c <= threshold) ? 1 : 0;
  };
  return eq;
}

SmpProblem equality_problem() {
  return {"equality", [](const Input& x, const Input& y) { return x == y ? 1 : 0; }};
}

double equality_round_accept_exact(const WitnessSets& w, bool same) { return same ? w.gamma : w.gamma_prime; }

EstimateReport equality_round_rate(const BipartiteSource& s, const EqualityProtocol& eq,
                                   const Input& x, const Input& y, std::size_t trials,
                                   std::uint64_t seed) {
  if (trials == 0) throw DomainError("equality_round_rate: trials must be positive");
  const PairSampler sampler(s);
  std::vector<std::size_t> hits(worker_count(), 0);
  parallel_chunks(trials, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::size_t local = 0;
    for (std::size_t t = begin; t < end; ++t) {
      const std::uint64_t key = derive(seed, t);
      const SharedTape tape(sampler, derive(key, 0));
      SplitMix64 ra(derive(key, 1)), rb(derive(key, 2));
      const BitString a = eq.protocol.alice(x, AliceTape(tape), ra);
      const BitString b = eq.protocol.bob(y, BobTape(tape), rb);
      for (std::size_t j = 0; j < a.size(); ++j) local += a[j] && b[j];
    }
    hits[w] += local;
  });
  return wilson_estimate(std::accumulate(hits.begin(), hits.end(), std::size_t{0}), trials * eq.rounds, seed);
}

}  // namespace corrsim
