#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "corrsim/agreement.hpp"
#include "corrsim/errors.hpp"

using namespace corrsim;

TEST_CASE("tuple index is big-endian over the alphabet") {
  const std::vector<std::uint64_t> t{1, 0, 2};
  CHECK(tuple_index(t, 3) == 1 * 9 + 0 * 3 + 2);
}

TEST_CASE("constant protocol") {
  const auto ev = eval_agreement(make_priv(), constant_agreement(0.5, 0.5), ExactMode{});
  CHECK(ev.cost.value == doctest::Approx(1.0));
  CHECK(ev.success.value == doctest::Approx(0.25));
  CHECK_THROWS_AS(constant_agreement(1.5, 0.0), DomainError);
}

TEST_CASE("disj construction closed form matches exact evaluation") {
  for (unsigned ell = 1; ell <= 4; ++ell) {
    const double p = std::pow(6.0, -static_cast<double>(ell));
    const auto c = disj_agreement(p);
    CHECK(c.protocol.ell == ell);
    CHECK(c.cost == doctest::Approx(2.0 * std::pow(3.0, -static_cast<double>(ell))).epsilon(1e-12));
    CHECK(c.success == doctest::Approx(p).epsilon(1e-12));
    const auto ev = eval_agreement(make_disj(), c.protocol, ExactMode{});
    CHECK(ev.cost.value == doctest::Approx(c.cost).epsilon(1e-12));
    CHECK(ev.success.value == doctest::Approx(c.success).epsilon(1e-12));
  }
  // Between powers of six, l rounds down so success stays above p.
  CHECK(disj_agreement(0.1).protocol.ell == 1);
}

TEST_CASE("perf construction") {
  const auto c = perf_agreement(1.0 / 16);
  CHECK(c.protocol.ell == 4);
  CHECK(c.cost == doctest::Approx(0.125));
  const auto ev = eval_agreement(make_perf(), c.protocol, ExactMode{});
  CHECK(ev.success.value == doctest::Approx(1.0 / 16));
}

TEST_CASE("monte carlo evaluation brackets the exact value") {
  const auto c = disj_agreement(1.0 / 6);
  const auto mc = eval_agreement(make_disj(), c.protocol, McMode{200000, 5});
  CHECK(mc.success.ci_low <= 1.0 / 6);
  CHECK(mc.success.ci_high >= 1.0 / 6);
  CHECK(mc.cost.ci_low <= 2.0 / 3);
  CHECK(mc.cost.ci_high >= 2.0 / 3);
  const auto again = eval_agreement(make_disj(), c.protocol, McMode{200000, 5});
  CHECK(again.success.value == mc.success.value);
}

TEST_CASE("exact evaluation respects the budget") {
  const auto c = disj_agreement(std::pow(6.0, -8));
  CHECK_THROWS_AS(eval_agreement(make_disj(), c.protocol, ExactMode{1000}), CapacityError);
}

TEST_CASE("witness power construction") {
  // bsc(0.1) with la = lb = {0}: gamma = 0.45
  const auto c = witness_power_agreement(make_bsc(0.1), {true, false}, {true, false}, 0.2);
  CHECK(c.success >= 0.2 - 1e-12);
  const auto ev = eval_agreement(make_bsc(0.1), c.protocol, ExactMode{});
  CHECK(ev.success.value == doctest::Approx(c.success).epsilon(1e-12));
  CHECK(ev.cost.value == doctest::Approx(c.cost).epsilon(1e-12));
}

TEST_CASE("best agreement is never worse than the named constructions") {
  for (double p : {0.5, 1.0 / 6, 0.01}) {
    CHECK(best_agreement(make_disj(), p).cost <= disj_agreement(p).cost + 1e-12);
    CHECK(best_agreement(make_perf(), p).cost <= perf_agreement(p).cost + 1e-12);
  }
  const auto priv = best_agreement(make_priv(), 0.25);
  CHECK(priv.success >= 0.25 - 1e-12);
  CHECK(priv.cost == doctest::Approx(1.0));
}

TEST_CASE("optimizer finds feasible protocols near the grid optimum") {
  // Grid + knapsack oracle at l = 1: disj p = 1/6 -> 2/3, p = 0.1 -> 0.5164, priv p = 1/4 -> 1.
  const auto a = optimize_agreement(make_disj(), 1, 1.0 / 6, 8, 1);
  auto ev = eval_agreement(make_disj(), a.protocol, ExactMode{});
  CHECK(ev.success.value >= 1.0 / 6 - 1e-12);
  CHECK(ev.cost.value <= 2.0 / 3 + 1e-6);
  const auto b = optimize_agreement(make_disj(), 1, 0.1, 8, 1);
  ev = eval_agreement(make_disj(), b.protocol, ExactMode{});
  CHECK(ev.success.value >= 0.1 - 1e-12);
  CHECK(ev.cost.value <= 0.5164 + 1e-3);
  const auto c = optimize_agreement(make_priv(), 1, 0.25, 8, 1);
  ev = eval_agreement(make_priv(), c.protocol, ExactMode{});
  CHECK(ev.success.value >= 0.25 - 1e-12);
  CHECK(ev.cost.value == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_THROWS_AS(optimize_agreement(make_disj(), 1, 1.5, 4, 1), DomainError);
}
