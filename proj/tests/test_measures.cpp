#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "corrsim/errors.hpp"
#include "corrsim/measures.hpp"

#ifdef CORRSIM_HAVE_EIGEN
#include <Eigen/SVD>
#endif

using namespace corrsim;

TEST_CASE("maximum correlation of the standard sources") {
  CHECK(max_correlation(make_perf()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_correlation(make_priv()) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(max_correlation(make_disj()) == doctest::Approx(0.5).epsilon(1e-12));
  for (double p : {0.1, 0.25, 0.4}) CHECK(max_correlation(make_bsc(p)) == doctest::Approx(std::abs(1 - 2 * p)));
  const auto rep = max_correlation_report(make_disj());
  CHECK(rep.top_singular_value == doctest::Approx(1.0));
  CHECK_FALSE(rep.degenerate);
}

TEST_CASE("degenerate sources report zero with the flag") {
  const auto rep = max_correlation_report(BipartiteSource(1, 3, {0.2, 0.3, 0.5}));
  CHECK(rep.degenerate);
  CHECK(rep.value == 0.0);
}

TEST_CASE("sigma correlation values") {
  // numpy SVD oracle: Cor(sigma(m, b)) = 2^(-m/2)
  for (unsigned m : {2u, 4u, 6u, 8u})
    for (unsigned b : {0u, 1u})
      CHECK(max_correlation(make_sigma(m, b)) == doctest::Approx(std::ldexp(1.0, -static_cast<int>(m) / 2)).epsilon(1e-9));
}

#ifdef CORRSIM_HAVE_EIGEN
TEST_CASE("jacobi agrees with an independent SVD") {
  SplitMix64 g(3);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t r = 2 + g.below(6), c = 2 + g.below(6);
    std::vector<double> p(r * c);
    double total = 0;
    for (auto& x : p) total += (x = g.uniform() < 0.3 ? 0.0 : g.uniform());
    if (total == 0) continue;
    for (auto& x : p) x /= total;
    const BipartiteSource s(r, c, p);
    const auto cm = correlation_matrix(s);
    Eigen::MatrixXd e(cm.entries.rows, cm.entries.cols);
    for (std::size_t i = 0; i < cm.entries.rows; ++i)
      for (std::size_t j = 0; j < cm.entries.cols; ++j) e(i, j) = cm.entries.data[i * cm.entries.cols + j];
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(e).singularValues();
    const auto mine = singular_values(cm.entries);
    REQUIRE(mine.size() == static_cast<std::size_t>(sv.size()));
    for (Eigen::Index k = 0; k < sv.size(); ++k) CHECK(mine[k] == doctest::Approx(sv(k)).epsilon(1e-10));
  }
}
#endif

TEST_CASE("correlation bound gap is nonnegative") {
  SplitMix64 g(9);
  const auto s = make_disj();
  for (int i = 0; i < 200; ++i) {
    std::vector<double> f{g.uniform(), g.uniform()}, h{g.uniform(), g.uniform()};
    CHECK(correlation_bound_gap(s, f, h) >= -1e-9);
  }
}

TEST_CASE("lp norms") {
  const std::vector<double> mu{0.5, 0.5};
  const std::vector<double> f{1.0, 0.0};
  CHECK(lp_norm(std::span<const double>(f), mu, 1.0) == doctest::Approx(0.5));
  CHECK(lp_norm(std::span<const double>(f), mu, 2.0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(lp_norm(std::span<const double>(f), mu, kInf) == 1.0);
  const std::vector<cplx> z{{3, 4}, {0, 0}};
  CHECK(lp_norm(std::span<const cplx>(z), mu, 1.0) == doctest::Approx(2.5));
  CHECK_THROWS_AS(lp_norm(std::span<const double>(f), mu, 0.5), DomainError);
}

TEST_CASE("channel is a conditional expectation") {
  const auto s = make_disj();
  const std::vector<double> f{1.0, 0.0};
  const auto tf = apply_channel(s, std::span<const double>(f));
  CHECK(tf[0] == doctest::Approx(0.5));
  CHECK(tf[1] == doctest::Approx(1.0));
  const std::vector<double> one{1.0, 1.0};
  for (double x : apply_channel(s, std::span<const double>(one))) CHECK(x == doctest::Approx(1.0));
}

TEST_CASE("disj hypercontractivity gap closed form") {
  // numpy oracle values of ||f||_{3/2}^3 - ||T f||_3^3
  CHECK(disj_hc_gap(1, 0) == doctest::Approx(0.027777777777777776).epsilon(1e-12));
  CHECK(disj_hc_gap(2, 3) == doctest::Approx(0.004194869644031485).epsilon(1e-9));
  CHECK(disj_hc_gap(0.5, 7) == doctest::Approx(5.8789279674908315).epsilon(1e-12));
  CHECK(disj_hc_gap(10, 10) == doctest::Approx(0.0));
  for (double a : {0.0, 0.3, 1.0, 4.0})
    for (double b : {0.0, 0.7, 2.0, 9.5}) CHECK(std::abs(disj_hc_gap(a, b) - disj_hc_gap_by_norms(a, b)) < 1e-10);
}

TEST_CASE("hypercontractivity search") {
  const auto perf = check_hypercontractive(make_perf(), 3, 1.5, GridSearch{20});
  CHECK_FALSE(perf.holds);
  CHECK(perf.worst_gap < 0);
  REQUIRE(perf.witness.size() == 2);
  const auto disj = check_hypercontractive(make_disj(), 3, 1.5, GridSearch{60});
  CHECK(disj.holds);
  const auto priv = check_hypercontractive(make_priv(), 3, 1.5, RandomSearch{2000, 4});
  CHECK(priv.holds);
  CHECK(priv.candidates == 2002);
  CHECK_THROWS_AS(check_hypercontractive(make_perf(), 1, 2, GridSearch{}), DomainError);
}

TEST_CASE("generalized hoelder") {
  const auto s = make_bsc(0.2);
  SplitMix64 g(1);
  for (int i = 0; i < 100; ++i) {
    const std::vector<cplx> f{{g.uniform(), g.uniform()}, {g.uniform(), 0}};
    const std::vector<cplx> h{{g.uniform(), 0}, {0, g.uniform()}};
    CHECK(check_hoelder(s, 2, 2, f, h) >= -1e-12);
  }
}

TEST_CASE("entropy toolkit") {
  const std::vector<double> d{0.5, 0.25, 0.25};
  CHECK(entropy(d) == doctest::Approx(1.5));
  Matrix j(2, 2);
  j.data = {0.25, 0.25, 0.5, 0.0};
  CHECK(cond_entropy(j) == doctest::Approx(1.5 - 0.8112781244591328));
  CHECK(mutual_info(j) == doctest::Approx(1.0 + 0.8112781244591328 - 1.5));
  CHECK(entropy_given_event(8, 0.25) == doctest::Approx(1.0));
  CHECK(uniform_entropy_given_event({true, false, true, true}) == doctest::Approx(std::log2(3.0)));
}

TEST_CASE("chain rule for mutual information") {
  SplitMix64 g(21);
  for (int rep = 0; rep < 50; ++rep) {
    Joint3 j{2, 3, 2, std::vector<double>(12)};
    double t = 0;
    for (auto& x : j.p) t += (x = g.uniform());
    for (auto& x : j.p) x /= t;
    CHECK(mutual_info_x_yz(j) == doctest::Approx(mutual_info_x_y(j) + cond_mutual_info(j)).epsilon(1e-12));
    CHECK(cond_mutual_info(j) >= -1e-12);
  }
}

TEST_CASE("tensoring with a product source keeps the svd convergent") {
  // rank-deficient correlation matrices leave roundoff-sized columns behind
  const std::vector<BipartiteSource> set{make_perf(), make_priv(), make_disj(), make_bsc(0.2), make_sigma(4, 0)};
  for (const auto& a : set)
    for (const auto& b : set)
      CHECK(max_correlation(tensor(a, b)) ==
            doctest::Approx(std::max(max_correlation(a), max_correlation(b))).epsilon(1e-9));
}
