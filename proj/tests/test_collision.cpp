#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "corrsim/collision.hpp"
#include "corrsim/errors.hpp"

using namespace corrsim;

TEST_CASE("table protocol evaluates exactly") {
  // perf, n = 2, A(u) = B(u) = {u}: each coordinate collides with probability 1/2.
  const auto pr = collision_from_tables(1, 2, 2, 2, {{0}, {1}}, {{0}, {1}});
  const auto ev = eval_collision(make_perf(), pr, ExactMode{});
  CHECK(ev.min_prob == doctest::Approx(0.5));
  CHECK(ev.max_out_seen == 1);
  const auto on_priv = eval_collision(make_priv(), pr, ExactMode{});
  CHECK(on_priv.min_prob == doctest::Approx(0.25));
  CHECK_THROWS_AS(collision_from_tables(1, 2, 2, 2, {{0}, {3}}, {{0}, {1}}), DomainError);
}

TEST_CASE("max_out is enforced") {
  auto pr = collision_from_tables(1, 2, 2, 2, {{0, 1}, {1}}, {{0}, {1}});
  pr.max_out = 1;
  CHECK_THROWS_AS(eval_collision(make_perf(), pr, McMode{100, 1}), ContractViolation);
}

TEST_CASE("birthday protocol") {
  const auto pr = birthday_collision(make_priv(), 16, 4);
  CHECK(pr.max_out == 4);
  const auto ex = eval_collision(make_priv(), pr, ExactMode{});
  CHECK(ex.min_prob == doctest::Approx(1.0 / 16));
  const auto mc = eval_collision(make_priv(), pr, McMode{40000, 2});
  for (const auto& r : mc.per_i) {
    CHECK(r.ci_low <= 1.0 / 16 + 0.01);
    CHECK(r.ci_high >= 1.0 / 16 - 0.01);
  }
  CHECK_THROWS_AS(birthday_collision(BipartiteSource(1, 1, {1.0}), 4, 2), DomainError);
}

TEST_CASE("threshold formula") {
  CHECK(collision_threshold(16, 0.125) == 6 + 16);
  CHECK(collision_threshold(10, 0.1) == 3 + 16);
}

TEST_CASE("collision from agreement keeps half the success") {
  for (std::uint32_t n : {8u, 32u}) {
    const auto ag = perf_agreement(1.0 / n);
    const auto pr = collision_from_agreement(ag.protocol, n, ag.cost * 1.01);
    CHECK(pr.max_out <= static_cast<std::size_t>(3 * n * ag.cost * 1.01) + 17);
    const auto mc = eval_collision(make_perf(), pr, McMode{50000, 3});
    CHECK(mc.min_prob > 0.5 / n);
  }
}

TEST_CASE("agreement from collision") {
  const auto bday = birthday_collision(make_priv(), 16, 4);
  const auto ex = agreement_from_collision(make_priv(), bday, 1.0 / 16);
  CHECK(ex.cost.value <= 2.0 * 4 / 16 + 1e-12);
  CHECK(ex.success.value >= 1.0 / 16 - 1e-12);
  CHECK_THROWS_AS(agreement_from_collision(make_priv(), bday, 0.5), DomainError);
}

TEST_CASE("amplify and scale") {
  const auto base = collision_from_tables(1, 2, 2, 2, {{0}, {1}}, {{0}, {1}});
  const auto amp = amplify_collision(base, 3);
  CHECK(amp.ell == 3);
  CHECK(amp.max_out == 3);
  // Pr[i in A cap B] = 1 - (1/2)^3 for perf.
  CHECK(eval_collision(make_perf(), amp, ExactMode{}).min_prob == doctest::Approx(0.875));
  const auto sc = scale_domain(base, 3);
  CHECK(sc.n == 6);
  CHECK(eval_collision(make_perf(), sc, ExactMode{}).min_prob == doctest::Approx(0.5));
}

TEST_CASE("lifting to a tensor keeps statistics") {
  const auto base = collision_from_tables(1, 2, 2, 2, {{0}, {1}}, {{0}, {1}});
  const auto lifted = lift_left(base, 2, 2);
  const auto t = tensor(make_perf(), make_disj());
  const auto a = eval_collision(make_perf(), base, ExactMode{});
  const auto b = eval_collision(t, lifted, ExactMode{});
  for (std::size_t i = 0; i < 2; ++i) CHECK(a.per_i[i].value == doctest::Approx(b.per_i[i].value).epsilon(1e-12));
}

TEST_CASE("symmetrization repetitions") {
  CHECK(symmetrize_repetitions(0.5) == 5);
  CHECK(symmetrize_repetitions(0.125) == 15);
  CHECK(symmetrize_repetitions(0.9) == 1);
}

TEST_CASE("symmetrized protocol rarely misses") {
  const auto sym = symmetrize(make_disj(), 16, 0.25);
  CHECK(sym.repetitions == symmetrize_repetitions(0.25));
  const auto st = intersection_stats(make_disj(), sym.protocol, 4000, 8);
  CHECK(st.picks.size() == 16);
  CHECK(static_cast<double>(st.empty) / st.trials < 0.25);
}
