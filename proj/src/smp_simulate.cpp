#include <algorithm>
#include <array>
#include <bit>
#include <map>
#include <memory>

#include "corrsim/errors.hpp"
#include "corrsim/measures.hpp"
#include "corrsim/parallel.hpp"
#include "corrsim/smp.hpp"

namespace corrsim {

namespace {

struct CopyCodec {
  std::shared_ptr<const CollisionProtocol> collision;
  PublicCoinProtocol base;

  std::size_t width_alice() const { return base.random_bits + base.bits_alice; }
  std::size_t width_bob() const { return base.random_bits + base.bits_bob; }

  template <class Tape, class Pick, class Encode>
  BitString encode(const Input& x, const Tape& tape, SplitMix64& rng, Pick pick, Encode msg,
                   std::size_t expected) const {
    const auto samples = tape.range(0, collision->ell);
    const Subset set = pick(samples, rng);
    if (set.size() > collision->max_out) throw ContractViolation("simulate: collision output exceeds max_out");
    BitString out;
    for (const auto r : set) {
      out.push(r, base.random_bits);
      const BitString m = msg(x, r);
      if (m.size() != expected) throw ContractViolation(base.name + ": message length differs from declared cost");
      out.append(m);
    }
    return out;
  }

  static std::map<std::uint64_t, BitString> decode(const BitString& msg, unsigned r_bits, std::size_t width) {
    std::map<std::uint64_t, BitString> out;
    for (std::size_t pos = 0; pos + width <= msg.size(); pos += width)
      out.emplace(msg.read(pos, r_bits), msg.slice(pos + r_bits, width - r_bits));
    return out;
  }

  Answer decide(const BitString& a, const BitString& b, SplitMix64& rng) const {
    const auto da = decode(a, base.random_bits, width_alice());
    const auto db = decode(b, base.random_bits, width_bob());
    std::vector<std::uint64_t> common;
    for (const auto& [r, m] : da)
      if (db.count(r)) common.push_back(r);
    // No common string: the referee falls back to a fixed answer.
    if (common.empty()) return 0;
    const std::uint64_t r = common[rng.below(common.size())];
    return base.referee(da.at(r), db.at(r));
  }
};

}  // namespace

SimulatedProtocol simulate_with_collision(const BipartiteSource& s, const PublicCoinProtocol& base,
                                          double eps) {
  if (!(eps >= 0.0 && eps < 0.5)) throw DomainError("simulate_with_collision: need 0 <= eps < 1/2");
  if (base.random_bits > 20)
    throw CapacityError("simulate_with_collision: base uses " + std::to_string(base.random_bits) +
                        " public bits, limit is 20");
  SimulatedProtocol out;
  out.failure = simulation_failure(eps);
  out.random_bits = base.random_bits;
  out.collision = symmetrize(s, std::uint32_t{1} << base.random_bits, out.failure);

  auto codec = std::make_shared<CopyCodec>(
      CopyCodec{std::make_shared<const CollisionProtocol>(out.collision.protocol), base});
  const std::size_t max_out = out.collision.protocol.max_out;
  const std::uint64_t ell = out.collision.protocol.ell;
  out.payload_alice = max_out * codec->width_alice();
  out.payload_bob = max_out * codec->width_bob();
  out.header_bits = static_cast<std::size_t>(std::bit_width(max_out));

  auto alice_copy = [codec](const Input& x, const AliceTape& t, SplitMix64& rng) {
    return codec->encode(
        x, t, rng, [&](SampleView u, SplitMix64& g) { return codec->collision->alice(u, g); },
        [&](const Input& in, std::uint64_t r) { return codec->base.alice(in, r); }, codec->base.bits_alice);
  };
  auto bob_copy = [codec](const Input& y, const BobTape& t, SplitMix64& rng) {
    return codec->encode(
        y, t, rng, [&](SampleView v, SplitMix64& g) { return codec->collision->bob(v, g); },
        [&](const Input& in, std::uint64_t r) { return codec->base.bob(in, r); }, codec->base.bits_bob);
  };

  SmpProtocol& one = out.single;
  one.name = "simulated(" + base.name + " over " + s.label() + ")";
  one.sample_count = ell;
  one.bits_alice = out.payload_alice;
  one.bits_bob = out.payload_bob;
  one.alice = alice_copy;
  one.bob = bob_copy;
  one.referee = [codec](const BitString& a, const BitString& b, SplitMix64& rng) { return codec->decide(a, b, rng); };

  // Amplified: each copy is prefixed by its entry count and reads its own block of samples.
  const unsigned copies = out.copies;
  const std::size_t header = out.header_bits;
  SmpProtocol& amp = out.protocol;
  amp.name = one.name + "x" + std::to_string(copies);
  amp.sample_count = ell * copies;
  amp.bits_alice = copies * (out.payload_alice + header);
  amp.bits_bob = copies * (out.payload_bob + header);
  auto concat = [copies, ell, header](auto copy_fn, std::size_t width) {
    return [=](const Input& x, const auto& tape, SplitMix64& rng) {
      BitString msg;
      for (unsigned c = 0; c < copies; ++c) {
        SplitMix64 local = rng.split();
        const BitString part = copy_fn(x, tape.shifted(c * ell), local);
        msg.push(part.size() / width, static_cast<unsigned>(header));
        msg.append(part);
      }
      return msg;
    };
  };
  amp.alice = concat(alice_copy, codec->width_alice());
  amp.bob = concat(bob_copy, codec->width_bob());
  amp.referee = [codec, copies, header](const BitString& a, const BitString& b, SplitMix64& rng) {
    std::size_t pa = 0, pb = 0;
    std::vector<Answer> answers;
    for (unsigned c = 0; c < copies; ++c) {
      const std::size_t na = a.read(pa, static_cast<unsigned>(header)) * codec->width_alice();
      const std::size_t nb = b.read(pb, static_cast<unsigned>(header)) * codec->width_bob();
      pa += header;
      pb += header;
      answers.push_back(codec->decide(a.slice(pa, na), b.slice(pb, nb), rng));
      pa += na;
      pb += nb;
    }
    for (const Answer cand : answers)
      if (2 * static_cast<std::size_t>(std::count(answers.begin(), answers.end(), cand)) > answers.size())
        return cand;
    return answers.front();
  };
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double binary_entropy(double q) {
  const std::array<double, 2> d{q, 1.0 - q};
  return entropy(d);
}

// Coordinates i with H(X_i | observed message, fixed randomness) < 1/2, X uniform.
template <class Fn>
std::vector<unsigned> low_entropy_coords(unsigned n, const BitString& observed, Fn message_of) {
  const std::uint64_t domain = std::uint64_t{1} << n;
  std::vector<std::size_t> ones(n, 0);
  std::size_t consistent = 0;
  for (std::uint64_t x = 0; x < domain; ++x) {
    if (message_of(x) != observed) continue;
    ++consistent;
    for (unsigned i = 0; i < n; ++i) ones[i] += (x >> i) & 1u;
  }
  std::vector<unsigned> out;
  for (unsigned i = 0; i < n; ++i)
    if (binary_entropy(static_cast<double>(ones[i]) / static_cast<double>(consistent)) < 0.5) out.push_back(i);
  return out;
}

}  // namespace

InfluenceSummary influence_sets(const BipartiteSource& s, const SmpProtocol& pr, unsigned n,
                                std::size_t trials, std::uint64_t seed, std::size_t threshold) {
  if (n == 0) throw DomainError("influence_sets: n must be positive");
  if (n > 12) throw CapacityError("influence_sets: n > 12 is over the enumeration budget");
  if (static_cast<double>(trials) * 2.0 * static_cast<double>(std::uint64_t{1} << n) > 1e8)
    throw CapacityError("influence_sets: trials * 2^(n+1) message evaluations exceed 1e8");
  const PairSampler sampler(s);
  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;

  InfluenceSummary out;
  out.threshold = threshold;
  out.runs.resize(trials);
  parallel_chunks(trials, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const std::uint64_t key = derive(seed, t);
      const SharedTape tape(sampler, derive(key, 0));
      const AliceTape ta(tape);
      const BobTape tb(tape);
      SplitMix64 inputs(derive(key, 4));
      const std::uint64_t x = inputs() & mask;
      const std::uint64_t y = inputs() & mask;
      // Private coins are part of the conditioning, so every replay reuses them.
      const std::uint64_t ka = derive(key, 1), kb = derive(key, 2);
      auto alice_msg = [&](std::uint64_t xx) {
        SplitMix64 r(ka);
        return pr.alice(Input{xx}, ta, r);
      };
      auto bob_msg = [&](std::uint64_t yy) {
        SplitMix64 r(kb);
        return pr.bob(Input{yy}, tb, r);
      };
      out.runs[t].la = low_entropy_coords(n, alice_msg(x), alice_msg);
      out.runs[t].lb = low_entropy_coords(n, bob_msg(y), bob_msg);
    }
  });

  out.pr_in_a.assign(n, 0.0);
  out.pr_in_b.assign(n, 0.0);
  out.pr_in_both.assign(n, 0.0);
  std::size_t big = 0;
  for (const auto& run : out.runs) {
    std::vector<int> seen(n, 0);
    for (auto i : run.la) {
      out.pr_in_a[i] += 1.0;
      seen[i] |= 1;
    }
    for (auto i : run.lb) {
      out.pr_in_b[i] += 1.0;
      seen[i] |= 2;
    }
    for (unsigned i = 0; i < n; ++i)
      if (seen[i] == 3) out.pr_in_both[i] += 1.0;
    if (run.la.size() >= threshold) ++big;
    out.max_la = std::max(out.max_la, run.la.size());
    out.max_lb = std::max(out.max_lb, run.lb.size());
  }
  const double denom = trials == 0 ? 1.0 : static_cast<double>(trials);
  for (unsigned i = 0; i < n; ++i) {
    out.pr_in_a[i] /= denom;
    out.pr_in_b[i] /= denom;
    out.pr_in_both[i] /= denom;
  }
  out.pr_la_at_least_threshold = static_cast<double>(big) / denom;
  return out;
}

SmpProtocol influence_toy(ToyKind kind) {
  SmpProtocol pr;
  pr.pseudo = true;
  pr.bits_alice = pr.bits_bob = 1;
  std::function<bool(std::uint64_t)> rule;
  switch (kind) {
    case ToyKind::verbatim_first_bit:
      pr.name = "toy-verbatim";
      rule = [](std::uint64_t x) { return (x & 1u) != 0; };
      break;
    case ToyKind::constant:
      pr.name = "toy-constant";
      rule = [](std::uint64_t) { return false; };
      break;
    case ToyKind::parity_first_two:
      pr.name = "toy-parity";
      rule = [](std::uint64_t x) { return ((x ^ (x >> 1)) & 1u) != 0; };
      break;
  }
  pr.alice = [rule](const Input& x, const AliceTape&, SplitMix64&) {
    BitString m;
    m.push_bit(rule(x.at(0)));
    return m;
  };
  pr.bob = [rule](const Input& y, const BobTape&, SplitMix64&) {
    BitString m;
    m.push_bit(rule(y.at(0)));
    return m;
  };
  pr.pseudo_referee = [](const BitString& a, const BitString& b, const AliceTape& ta, const BobTape& tb,
                         SplitMix64&) {
    return static_cast<Answer>((a[0] ^ b[0] ^ (ta[0] & 1u) ^ (tb[0] & 1u)) & 1u);
  };
  return pr;
}

}  // namespace corrsim
