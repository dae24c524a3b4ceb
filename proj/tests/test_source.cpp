#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "corrsim/errors.hpp"
#include "corrsim/source.hpp"

using namespace corrsim;

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(BipartiteSource(2, 2, {0.5, 0.5, 0.1, 0.0}), DomainError);
  CHECK_THROWS_AS(BipartiteSource(2, 2, {1.5, -0.5, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(BipartiteSource(2, 2, {1.0, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(BipartiteSource(0, 2, {}), DomainError);
  CHECK_NOTHROW(BipartiteSource(1, 1, {1.0}));
}

TEST_CASE("standard sources") {
  const auto perf = make_perf();
  CHECK(perf(0, 0) == 0.5);
  CHECK(perf(0, 1) == 0.0);
  const auto disj = make_disj();
  CHECK(disj(1, 1) == 0.0);
  CHECK(disj(0, 1) == doctest::Approx(1.0 / 3));
  const auto m = marginals(disj);
  CHECK(m.u[0] == doctest::Approx(2.0 / 3));
  CHECK(m.v[1] == doctest::Approx(1.0 / 3));
  const auto bsc = make_bsc(0.1);
  CHECK(bsc(0, 0) == doctest::Approx(0.45));
  CHECK(bsc(0, 1) == doctest::Approx(0.05));
  CHECK(bsc.label() == "bsc(0.1)");
  CHECK_THROWS_AS(make_bsc(1.5), DomainError);
  CHECK(is_product(make_priv(), 1e-12));
  CHECK_FALSE(is_product(disj, 1e-12));
}

TEST_CASE("sigma sources have the stated support") {
  // b = 0: 2^(2m-1) + 2^(m-1) pairs, b = 1: 2^(2m-1) - 2^(m-1)
  for (unsigned m : {2u, 3u, 5u}) {
    for (unsigned b : {0u, 1u}) {
      const auto s = make_sigma(m, b);
      const double count = std::ldexp(1.0, 2 * m - 1) + (b == 0 ? 1 : -1) * std::ldexp(1.0, m - 1);
      CHECK(s.support().size() == static_cast<std::size_t>(count));
      for (auto [u, v] : s.support()) CHECK(dot2(u, v) == b);
      if (b == 1) CHECK(marginals(s).u[0] == 0.0);
    }
  }
  CHECK_THROWS_AS(make_sigma(1, 0), DomainError);
  CHECK_THROWS_AS(make_sigma(12, 0), CapacityError);
  CHECK_THROWS_AS(make_sigma(40, 0), CapacityError);
}

TEST_CASE("tensor products multiply entries") {
  const auto t = tensor(make_disj(), make_perf());
  REQUIRE(t.u_size() == 4);
  // (u, u') -> u * 2 + u'
  CHECK(t(0 * 2 + 1, 1 * 2 + 1) == doctest::Approx(1.0 / 3 * 0.5));
  CHECK(t(1 * 2 + 0, 1 * 2 + 0) == 0.0);
  const auto p3 = tensor_power(make_perf(), 3);
  CHECK(p3.u_size() == 8);
  CHECK(p3(5, 5) == doctest::Approx(0.125));
  CHECK_THROWS_AS(tensor(make_sigma(10, 0), make_sigma(10, 1)), CapacityError);
}

TEST_CASE("product and degeneracy helpers") {
  const auto p = product_source({0.25, 0.75}, {0.5, 0.5});
  CHECK(is_product(p, 1e-12));
  CHECK_FALSE(is_degenerate(p));
  CHECK(is_degenerate(BipartiteSource(1, 2, {0.5, 0.5})));
  CHECK(same_distribution(make_priv(), p) == false);
  CHECK(same_distribution(make_priv(), product_source({0.5, 0.5}, {0.5, 0.5})));
}

TEST_CASE("dense sampler frequencies follow rho") {
  const auto disj = make_disj();
  const auto batch = sample(disj, 90000, 3);
  REQUIRE(batch.u_values.size() == 90000);
  std::map<std::pair<std::uint64_t, std::uint64_t>, int> counts;
  for (std::size_t i = 0; i < batch.count; ++i) counts[{batch.u_values[i], batch.v_values[i]}]++;
  CHECK(counts.count({1, 1}) == 0);
  for (auto [k, c] : counts) CHECK(std::abs(c / 90000.0 - 1.0 / 3) < 0.01);
  // Same seed, same batch.
  CHECK(sample(disj, 100, 3).u_values == std::vector<std::uint64_t>(batch.u_values.begin(), batch.u_values.begin() + 100));
}

TEST_CASE("closed-form sigma sampler matches the dense distribution") {
  for (unsigned b : {0u, 1u}) {
    const auto dense = make_sigma(3, b);
    const auto sampler = PairSampler::sigma(3, b);
    const std::size_t n = 200000;
    const auto batch = sample(sampler, n, 17 + b);
    std::vector<double> freq(64, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      REQUIRE(dot2(batch.u_values[i], batch.v_values[i]) == b);
      freq[batch.u_values[i] * 8 + batch.v_values[i]] += 1.0 / n;
    }
    for (std::size_t k = 0; k < 64; ++k) CHECK(std::abs(freq[k] - dense.probs()[k]) < 0.004);
  }
}

TEST_CASE("large sigma sampler respects the inner product") {
  const auto s = PairSampler::sigma(48, 1);
  SplitMix64 g(1);
  for (int i = 0; i < 1000; ++i) {
    const auto [u, v] = s.draw(g);
    REQUIRE(u < (std::uint64_t{1} << 48));
    REQUIRE(v < (std::uint64_t{1} << 48));
    REQUIRE(dot2(u, v) == 1);
  }
}

TEST_CASE("keyed draws are reproducible") {
  const PairSampler s(make_disj());
  CHECK(s.at(99) == s.at(99));
}
