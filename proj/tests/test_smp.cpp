#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "corrsim/errors.hpp"
#include "corrsim/smp.hpp"

using namespace corrsim;

namespace {

SmpProtocol constant_protocol(Answer a) {
  SmpProtocol pr;
  pr.name = "const";
  pr.alice = [](const Input&, const AliceTape&, SplitMix64&) { return BitString{}; };
  pr.bob = [](const Input&, const BobTape&, SplitMix64&) { return BitString{}; };
  pr.referee = [a](const BitString&, const BitString&, SplitMix64&) { return a; };
  return pr;
}

}  // namespace

TEST_CASE("bit strings") {
  BitString b;
  b.push(0b1011, 4);
  b.push_bit(true);
  CHECK(b.size() == 5);
  CHECK(b.read(0, 4) == 0b1011);
  CHECK(b.read(1, 3) == 0b101);
  CHECK(b.slice(3, 2).read(0, 2) == 0b11);
}

TEST_CASE("run_smp trivial referees") {
  const PairSampler perf(make_perf());
  const auto eq = equality_problem();
  CHECK(run_smp(perf, constant_protocol(1), eq, {3}, {3}, 500, 1).value == 1.0);
  SmpProtocol coin = constant_protocol(0);
  coin.referee = [](const BitString&, const BitString&, SplitMix64& r) { return static_cast<Answer>(r() & 1); };
  const auto half = run_smp(perf, coin, eq, {3}, {3}, 20000, 2);
  CHECK(half.ci_low < 0.5);
  CHECK(half.ci_high > 0.5);
  SmpProtocol partial = constant_protocol(0);
  const SmpProblem never{"never", [](const Input&, const Input&) { return kBottom; }};
  CHECK_THROWS_AS(run_smp(perf, partial, never, {0}, {0}, 10, 1), DomainError);
}

TEST_CASE("message length and referee wiring are enforced") {
  const PairSampler perf(make_perf());
  SmpProtocol pr = constant_protocol(1);
  pr.alice = [](const Input&, const AliceTape&, SplitMix64&) {
    BitString b;
    b.push(3, 2);
    return b;
  };
  pr.bits_alice = 1;
  CHECK_THROWS_AS(run_once(perf, pr, {0}, {0}, 1), ContractViolation);
  pr.bits_alice = 2;
  CHECK_NOTHROW(run_once(perf, pr, {0}, {0}, 1));
  pr.pseudo_referee = [](const BitString&, const BitString&, const AliceTape&, const BobTape&, SplitMix64&) {
    return 0;
  };
  CHECK_THROWS_AS(run_once(perf, pr, {0}, {0}, 1), ContractViolation);
}

TEST_CASE("witness sets") {
  const auto d = witness_gap(make_disj(), {false, true}, {false, true});
  CHECK(d.gamma == 0.0);
  CHECK(d.gamma_prime == doctest::Approx(1.0 / 9));
  const auto b = witness_gap(make_bsc(0.1), {false, true}, {false, true});
  CHECK(b.gamma == doctest::Approx(0.45));
  CHECK(b.gamma_prime == doctest::Approx(0.25));
  CHECK(find_witness_sets(make_disj()).delta() == doctest::Approx(1.0 / 9));
  CHECK(find_witness_sets(make_bsc(0.1)).delta() == doctest::Approx(0.2));
  CHECK(find_witness_sets(make_perf()).delta() == doctest::Approx(0.25));
  CHECK_THROWS_AS(find_witness_sets(make_priv()), DomainError);
}

TEST_CASE("greedy witness search on a large alphabet") {
  // 13 x 13 perfect correlation forces the greedy branch; a single row gives
  // gamma = 1/13, gamma' = 1/169.
  std::vector<double> p(169, 0.0);
  for (int i = 0; i < 13; ++i) p[i * 13 + i] = 1.0 / 13;
  const BipartiteSource s(13, 13, p);
  CHECK(find_witness_sets(s).delta() >= 1.0 / 13 - 1.0 / 169 - 1e-12);
}

TEST_CASE("equality round count") {
  CHECK(equality_rounds(1.0 / 9, 1.0 / 3) == 356);
  CHECK_THROWS_AS(equality_rounds(0.0, 0.1), DomainError);
}

TEST_CASE("equality protocol on disj") {
  const auto eq = equality_protocol(make_disj(), 8, 1.0 / 3);
  CHECK(eq.rounds == 356);
  CHECK(eq.protocol.bits_alice == 356);
  const PairSampler disj(make_disj());
  const auto same = run_smp(disj, eq.protocol, equality_problem(), {77}, {77}, 2000, 4);
  const auto diff = run_smp(disj, eq.protocol, equality_problem(), {77}, {78}, 2000, 5);
  CHECK(same.value >= 2.0 / 3);
  CHECK(diff.value >= 2.0 / 3);
  CHECK_THROWS_AS(run_once(disj, eq.protocol, {300}, {3}, 1), DomainError);
  CHECK_THROWS_AS(equality_protocol(make_priv(), 8, 0.3), DomainError);
  CHECK_THROWS_AS(equality_protocol(make_disj(), 31, 0.3), DomainError);
}

TEST_CASE("equality round rates match gamma and gamma'") {
  const auto perf = equality_protocol(make_perf(), 4, 0.1);
  const auto same = equality_round_rate(make_perf(), perf, {5}, {5}, 400, 1);
  const auto diff = equality_round_rate(make_perf(), perf, {5}, {6}, 400, 2);
  CHECK(equality_round_accept_exact(perf.witness, true) == doctest::Approx(0.5));
  CHECK(equality_round_accept_exact(perf.witness, false) == doctest::Approx(0.25));
  CHECK(same.ci_low <= 0.5);
  CHECK(same.ci_high >= 0.5);
  CHECK(diff.ci_low <= 0.25);
  CHECK(diff.ci_high >= 0.25);
}

TEST_CASE("equality works with n = 30 through lazy registers") {
  const auto eq = equality_protocol(make_perf(), 30, 0.2);
  const PairSampler perf(make_perf());
  const Input x{(1u << 29) + 12345}, y{(1u << 29) + 12346};
  CHECK(run_smp(perf, eq.protocol, equality_problem(), x, x, 200, 3).value >= 0.75);
  CHECK(run_smp(perf, eq.protocol, equality_problem(), x, y, 200, 3).value >= 0.75);
}

TEST_CASE("gapip evaluation") {
  CHECK(gapip_eval({0, 0, 0}, {5, 6, 7}) == 0);
  CHECK(gapip_eval({1, 1, 0}, {1, 0, 0}) == 0);
  CHECK(gapip_eval({1, 1, 0}, {1, 1, 0}) == 1);
  CHECK(gapip_eval({1, 1, 1}, {1, 1, 0}) == 1);
  CHECK(gapip_eval({1, 1, 1, 1}, {1, 1, 0, 0}) == kBottom);
  CHECK(gapip_eval({1}, {1}) == 1);
  CHECK_THROWS_AS(gapip_eval({1}, {1, 2}), DomainError);
}

TEST_CASE("gapip instances carry their planted answer") {
  for (unsigned b : {0u, 1u}) {
    const auto inst = sample_gapip_instance(9, 8, b, 10 + b);
    CHECK(inst.truth == static_cast<Answer>(b));
    CHECK(gapip_eval(inst.x, inst.y) == inst.truth);
    CHECK(sample_gapip_instance(1, 4, b, 3).truth == static_cast<Answer>(b));
  }
  CHECK_THROWS_AS(sample_gapip_instance(4, 1, 0, 1), DomainError);
  CHECK(gapip_default_m(64) == 48);
}

TEST_CASE("gapip naive protocol") {
  const auto base = gapip_naive_protocol(27, 8);
  CHECK(base.random_bits == 5 + 8);
  CHECK(gapip_naive_protocol(64, 48).random_bits == 6);
  const auto pr = over_perfect_randomness(base);
  const PairSampler perf(make_perf());
  const auto inst = sample_gapip_instance(27, 8, 1, 4);
  CHECK(run_smp(perf, pr, gapip_problem(), inst.x, inst.y, 3000, 1).value >= 2.0 / 3 - 0.03);
}

TEST_CASE("inner product equality and table reduction") {
  const auto base = inner_product_equality(8, 2);
  CHECK(base.random_bits == 16);
  const PairSampler perf(make_perf());
  const auto pr = over_perfect_randomness(base);
  CHECK(run_smp(perf, pr, equality_problem(), {9}, {9}, 500, 1).value == 1.0);
  const auto diff = run_smp(perf, pr, equality_problem(), {9}, {10}, 20000, 2);
  CHECK(diff.ci_low <= 0.75);
  CHECK(diff.ci_high >= 0.75);
  const auto reduced = reduce_randomness(base, 64, 7);
  CHECK(reduced.random_bits == 6);
  CHECK(reduce_randomness(base, 100, 7).random_bits == 7);
  CHECK(reduce_randomness(base, 1, 7).random_bits == 0);
  CHECK(run_smp(perf, over_perfect_randomness(reduced), equality_problem(), {9}, {10}, 5000, 3).value >= 2.0 / 3);
}

TEST_CASE("simulation failure parameter") {
  CHECK(simulation_failure(1.0 / 3) == doctest::Approx(1.0 / 8));
  CHECK_THROWS_AS(simulate_with_collision(make_disj(), inner_product_equality(21, 1), 0.25), CapacityError);
  CHECK_THROWS_AS(simulate_with_collision(make_disj(), inner_product_equality(4, 1), 0.5), DomainError);
}

TEST_CASE("simulated equality over perf and disj") {
  const auto base = inner_product_equality(4, 2);
  for (const auto& s : {make_perf(), make_disj()}) {
    const auto sim = simulate_with_collision(s, base, 1.0 / 3);
    const std::size_t w = base.random_bits + base.bits_alice;
    CHECK(sim.single.bits_alice == sim.collision.protocol.max_out * w);
    CHECK(sim.protocol.bits_alice == 3 * (sim.single.bits_alice + sim.header_bits));
    const PairSampler sampler(s);
    const auto single = run_smp(sampler, sim.single, equality_problem(), {5}, {5}, 400, 1);
    CHECK(single.value > 0.5);
    const auto same = run_smp(sampler, sim.protocol, equality_problem(), {5}, {5}, 400, 2);
    const auto diff = run_smp(sampler, sim.protocol, equality_problem(), {5}, {6}, 400, 3);
    CHECK(same.value >= 2.0 / 3);
    CHECK(diff.value >= 2.0 / 3);
  }
}

TEST_CASE("influence sets of the toy protocols") {
  const auto src = make_disj();
  const auto verb = influence_sets(src, influence_toy(ToyKind::verbatim_first_bit), 6, 50, 1);
  CHECK(verb.pr_in_a[0] == 1.0);
  CHECK(verb.pr_in_b[0] == 1.0);
  CHECK(verb.pr_in_both[0] == 1.0);
  for (unsigned i = 1; i < 6; ++i) CHECK(verb.pr_in_a[i] == 0.0);
  for (const auto& r : verb.runs) CHECK(r.la == std::vector<unsigned>{0});
  CHECK(verb.pr_la_at_least_threshold == 1.0);
  for (auto kind : {ToyKind::constant, ToyKind::parity_first_two}) {
    const auto sum = influence_sets(src, influence_toy(kind), 6, 50, 2);
    CHECK(sum.max_la == 0);
    CHECK(sum.max_lb == 0);
  }
  CHECK_THROWS_AS(influence_sets(src, influence_toy(ToyKind::constant), 13, 1, 1), CapacityError);
  CHECK_THROWS_AS(influence_sets(src, influence_toy(ToyKind::constant), 12, 20000, 1), CapacityError);
}

TEST_CASE("pseudo referee sees the tapes") {
  const PairSampler perf(make_perf());
  const auto pr = influence_toy(ToyKind::constant);
  // Both tape bits agree under perf, so the referee's output is always 0.
  for (std::uint64_t k = 0; k < 50; ++k) CHECK(run_once(perf, pr, {1}, {2}, k).answer == 0);
}
