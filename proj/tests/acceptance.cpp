// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "corrsim/bounds.hpp"
#include "corrsim/experiment.hpp"

using namespace corrsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit_s > 0 && secs > time_limit_s) {
    out.pass = false;
    out.detail += fmt("; runtime %.2f s over limit %.0f s", secs, time_limit_s);
  }
  if (!out.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::size_t successes(const EstimateReport& r) { return static_cast<std::size_t>(std::llround(r.value * r.trials)); }

}  // namespace

int main() {
  criterion(1, "maximum-correlation table", 1.0, [] {
    struct Row {
      BipartiteSource s;
      double expected;
    };
    const std::vector<Row> rows{{make_perf(), 1.0},      {make_priv(), 0.0},      {make_bsc(0.1), 0.8},
                                {make_bsc(0.25), 0.5},   {make_bsc(0.4), 0.2},    {make_disj(), 0.5}};
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, std::abs(max_correlation(r.s) - r.expected));
    return Outcome{worst <= 1e-9, fmt("max |Cor - analytic| = %.3g over 6 sources", worst)};
  });

  criterion(2, "tensorization of maximum correlation", 5.0, [] {
    const std::vector<BipartiteSource> set{make_perf(), make_priv(), make_disj(), make_bsc(0.2), make_sigma(4, 0)};
    double worst = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j, ++pairs) {
        const double lhs = max_correlation(tensor(set[i], set[j]));
        worst = std::max(worst, std::abs(lhs - std::max(max_correlation(set[i]), max_correlation(set[j]))));
      }
    return Outcome{pairs == 10 && worst <= 1e-6, fmt("%d pairs, max deviation %.3g", pairs, worst)};
  });

  criterion(3, "disj agreement construction", 0, [] {
    bool ok = true;
    double worst = 0.0;
    for (unsigned ell = 1; ell <= 5; ++ell) {
      const double p = std::pow(6.0, -static_cast<double>(ell));
      const auto c = disj_agreement(p);
      const auto ex = eval_agreement(make_disj(), c.protocol, ExactMode{});
      const double want_cost = 2.0 / std::pow(3.0, ell);
      worst = std::max({worst, std::abs(ex.cost.value - want_cost), std::abs(ex.success.value - p)});
      ok = ok && c.protocol.ell == ell && std::abs(ex.cost.value - want_cost) <= 1e-12 &&
           std::abs(ex.success.value - p) <= 1e-12 && ex.cost.value < 6.0 * std::pow(p, std::log(3.0) / std::log(6.0));
    }
    return Outcome{ok, fmt("l = 1..5, max deviation %.3g, cost below 6 p^log6(3)", worst)};
  });

  criterion(4, "hypercontractivity of disj", 30.0, [] {
    double min_gap = kInf, worst_diff = 0.0;
    for (int i = 0; i <= 1000; ++i)
      for (int j = 0; j <= 1000; ++j) {
        const double a = i * 0.01, b = j * 0.01;
        const double g = disj_hc_gap(a, b);
        min_gap = std::min(min_gap, g);
        worst_diff = std::max(worst_diff, std::abs(g - disj_hc_gap_by_norms(a, b)));
      }
    const auto perf = check_hypercontractive(make_perf(), 3, 1.5, GridSearch{50});
    const bool ok = min_gap >= 0.0 && worst_diff <= 1e-10 && !perf.holds && !perf.witness.empty();
    return Outcome{ok, fmt("min gap %.3g on 1001^2 grid, norm agreement %.3g, perf witness gap %.3g", min_gap,
                           worst_diff, perf.worst_gap)};
  });

  criterion(5, "hypercontractive agreement floor", 0, [] {
    const double at_one = hyp_lower_bound(1.5, 3, 1.0);
    bool ok = std::abs(at_one - 2.0) <= 1e-9;
    double worst_margin = kInf;
    int checked = 0;
    const auto disj = make_disj();
    for (int k = 1; k <= 10; ++k) {
      const double z = std::ldexp(1.0, -k);
      const double floor = hyp_lower_bound(1.5, 3, z);
      std::vector<double> costs;
      const auto app = disj_agreement(z);
      costs.push_back(eval_agreement(disj, app.protocol, ExactMode{}).cost.value);
      costs.push_back(best_agreement(disj, z).cost);
      for (unsigned ell = 1; ell <= 3; ++ell) {
        const auto opt = optimize_agreement(disj, ell, z, 60, 1000 + 10 * k + ell);
        if (opt.success + 1e-12 >= z) costs.push_back(opt.cost);
      }
      for (double c : costs) {
        worst_margin = std::min(worst_margin, c - floor);
        ++checked;
      }
    }
    ok = ok && worst_margin >= -1e-9;
    return Outcome{ok, fmt("bound(3/2,3,1) = %.12g; %d achieved costs, min cost - floor = %.4g", at_one, checked,
                           worst_margin)};
  });

  criterion(6, "equality with imperfect randomness", 0, [] {
    const auto cfg = validate_config(
        R"cfg({"experiment":"equality","sources":["disj","bsc(0.2)","bsc(0.4)"],"n":8,"x":77,"y":78,"trials":10000,"seed":2024})cfg");
    const auto rep = run_experiment(cfg);
    std::string detail;
    for (const auto& item : rep.results)
      detail += fmt("%s err %.4f/%.4f; ", item["source"].get<std::string>().c_str(),
                    item["error_same"]["value"].get<double>(), item["error_diff"]["value"].get<double>());
    for (const auto& f : rep.failed_checks) detail += "failed: " + f + "; ";
    return Outcome{rep.ok() && rep.results.size() == 3, detail};
  });

  criterion(7, "collision/agreement conversions", 0, [] {
    bool ok = true;
    std::string detail;
    for (std::uint32_t n : {16u, 64u}) {
      const auto ag = perf_agreement(1.0 / n);
      const auto pr = collision_from_agreement(ag.protocol, n, ag.cost * (1 + 1e-9) + 1e-12);
      const auto ev = eval_collision(make_perf(), pr, McMode{100000, 70 + n});
      double min_lower = 1.0;
      for (const auto& r : ev.per_i) min_lower = std::min(min_lower, wilson_lower(successes(r), r.trials));
      const bool size_ok = static_cast<double>(pr.max_out) <= 3.0 * n * ag.cost + 17;
      ok = ok && min_lower >= 1.0 / (2 * n) && size_ok && ev.max_out_seen <= pr.max_out;
      detail += fmt("n=%u min per-i lower %.4f vs %.4f, max_out %zu <= %.1f; ", n, min_lower, 1.0 / (2 * n),
                    pr.max_out, 3.0 * n * ag.cost + 17);
    }
    const auto ex = agreement_from_collision(make_priv(), birthday_collision(make_priv(), 16, 4), 1.0 / 16);
    ok = ok && ex.cost.mode == EvalMode::exact && ex.cost.value <= 2.0 * 4 / 16 + 1e-12;
    detail += fmt("birthday(16,4) extracted cost %.6f", ex.cost.value);
    return Outcome{ok, detail};
  });

  criterion(8, "symmetrization", 0, [] {
    const double s_target = 0.25;
    const auto sym = symmetrize(make_disj(), 16, s_target);
    const auto st = intersection_stats(make_disj(), sym.protocol, 200000, 88);
    const std::size_t hits = st.trials - st.empty;
    double chi2 = 0.0;
    const double expected = static_cast<double>(hits) / 16;
    for (auto c : st.picks) chi2 += (c - expected) * (c - expected) / expected;
    // 0.99 quantile of chi-square with 15 degrees of freedom
    const double critical = 30.57791416689249;
    const double empty_upper = wilson_upper(st.empty, st.trials);
    const bool ok = chi2 <= critical && empty_upper <= s_target && st.max_out_seen <= sym.protocol.max_out;
    return Outcome{ok, fmt("disj n=16, %u repetitions: chi2 %.2f <= %.2f, empty rate %.4f (upper %.4f) <= %.2f",
                           sym.repetitions, chi2, critical, static_cast<double>(st.empty) / st.trials, empty_upper,
                           s_target)};
  });

  criterion(9, "SMP simulation over disj", 0, [] {
    const auto base = reduce_randomness(inner_product_equality(8, 2), default_table_size(8), 7);
    const auto sim = simulate_with_collision(make_disj(), base, 1.0 / 3);
    const PairSampler sampler(make_disj());
    const Input x{77}, y{78};
    const auto same = run_smp(sampler, sim.protocol, equality_problem(), x, x, 10000, 901);
    const auto diff = run_smp(sampler, sim.protocol, equality_problem(), x, y, 10000, 902);
    const double err_same = wilson_upper(same.trials - successes(same), same.trials);
    const double err_diff = wilson_upper(diff.trials - successes(diff), diff.trials);
    const std::size_t k = sim.collision.protocol.max_out;
    const bool cost_ok = sim.payload_alice == k * (sim.random_bits + base.bits_alice) &&
                         sim.payload_bob == k * (sim.random_bits + base.bits_bob);
    const bool ok = base.random_bits == 9 && err_same <= 1.0 / 3 && err_diff <= 1.0 / 3 && cost_ok;
    return Outcome{ok, fmt("R = %u, max_out %zu, payload %zu + %zu bits (+%zu header), error upper %.4f / %.4f",
                           sim.random_bits, k, sim.payload_alice, sim.payload_bob, sim.header_bits, err_same,
                           err_diff)};
  });

  criterion(10, "scaling exponents", 120.0, [] {
    const std::vector<std::uint32_t> ns{8, 16, 32, 64, 128, 256, 512};
    const auto perf = scaling_experiment(make_perf(), ns, 7);
    const auto priv = scaling_experiment(make_priv(), ns, 7);
    const auto disj = scaling_experiment(make_disj(), ns, 7);
    const bool ok = std::abs(perf.fitted_exponent) <= 0.1 && std::abs(priv.fitted_exponent - 0.5) <= 0.05 &&
                    disj.fitted_exponent >= 0.20 && disj.fitted_exponent <= 0.45 && perf.r_squared >= 0.9 &&
                    priv.r_squared >= 0.9;
    return Outcome{ok, fmt("perf %.4f (r2 %.3f), priv %.4f (r2 %.4f), disj %.4f (r2 %.4f)", perf.fitted_exponent,
                           perf.r_squared, priv.fitted_exponent, priv.r_squared, disj.fitted_exponent,
                           disj.r_squared)};
  });

  criterion(11, "sigma correlation", 0, [] {
    bool ok = true;
    double worst = -kInf;
    for (unsigned m : {4u, 6u, 8u, 10u})
      for (unsigned b : {0u, 1u}) {
        const auto r = verify_sigma_cor(m, b);
        worst = std::max(worst, r.measured - std::ldexp(1.0, 1) * std::pow(2.0, -0.5 * m));
        ok = ok && r.measured <= std::pow(2.0, 1.0 - 0.5 * m) + 1e-9;
      }
    return Outcome{ok, fmt("max (Cor - 2^(1-m/2)) = %.4g over m in {4,6,8,10}, b in {0,1}", worst)};
  });

  criterion(12, "brute-force oracle sanity", 0, [] {
    const auto perf = brute_force_col(make_perf(), 2, 0.5, 1, 1);
    bool ok = perf.feasible && perf.best_size == 1;
    int runs = 0, skipped = 0;
    const std::vector<BipartiteSource> sweep{make_perf(), make_priv(), make_disj(), make_bsc(0.1),
                                             make_bsc(0.25), make_bsc(0.4), make_sigma(2, 0), make_sigma(2, 1)};
    for (const auto& s : sweep) {
      const auto hc = certify_hypercontractivity(s);
      for (std::uint32_t n : {2u, 3u}) {
        const double floor = collision_floor(s, n, 1.0 / n, hc);
        for (unsigned ell : {1u, 2u}) {
          try {
            const auto r = brute_force_col(s, n, 1.0 / n, ell, n);
            ++runs;
            if (r.feasible) ok = ok && static_cast<double>(r.best_size) + 1e-9 >= floor;
          } catch (const CapacityError&) {
            ++skipped;
          }
        }
      }
    }
    return Outcome{ok && runs >= 16, fmt("perf(2,1/2,1,1) = %zu; %d oracle runs consistent with floors, %d over budget",
                                         perf.best_size, runs, skipped)};
  });

  criterion(13, "GAPIP", 0, [] {
    SplitMix64 rng(1313);
    bool eval_ok = true;
    for (int t = 0; t < 10000; ++t) {
      const unsigned n = 1 + static_cast<unsigned>(rng.below(40)), m = 1 + static_cast<unsigned>(rng.below(16));
      Input x(n), y(n);
      std::size_t ones = 0;
      for (unsigned i = 0; i < n; ++i) {
        x[i] = rng.below(std::uint64_t{1} << m);
        y[i] = rng.below(std::uint64_t{1} << m);
        ones += static_cast<std::size_t>(std::popcount(x[i] & y[i]) & 1);
      }
      const Answer want = 3 * (n - ones) >= 2 * n ? 0 : (3 * ones >= 2 * n ? 1 : kBottom);
      eval_ok = eval_ok && gapip_eval(x, y) == want;
    }
    const auto pr = over_perfect_randomness(gapip_naive_protocol(27, 8));
    const PairSampler perf(make_perf());
    double worst = 1.0;
    bool run_ok = true;
    for (unsigned b : {0u, 1u})
      for (unsigned k = 0; k < 5; ++k) {
        const auto inst = sample_gapip_instance(27, 8, b, 500 + 10 * b + k);
        const auto r = run_smp(perf, pr, gapip_problem(), inst.x, inst.y, 1000, 600 + 10 * b + k);
        worst = std::min(worst, r.value);
        run_ok = run_ok && wilson_upper(successes(r), r.trials) >= 2.0 / 3;
      }
    return Outcome{eval_ok && run_ok, fmt("10^4 recounts %s; worst success %.3f over 10 promise instances",
                                          eval_ok ? "agree" : "DISAGREE", worst)};
  });

  criterion(14, "influence sets of the toy protocols", 0, [] {
    struct Toy {
      ToyKind kind;
      std::vector<unsigned> expect;
      const char* name;
    };
    const std::vector<Toy> toys{{ToyKind::verbatim_first_bit, {0}, "verbatim"},
                                {ToyKind::constant, {}, "constant"},
                                {ToyKind::parity_first_two, {}, "parity"}};
    bool ok = true;
    std::string detail;
    for (const auto& t : toys) {
      const auto sum = influence_sets(make_disj(), influence_toy(t.kind), 6, 200, 1400);
      bool exact = !sum.runs.empty();
      for (const auto& r : sum.runs) exact = exact && r.la == t.expect && r.lb == t.expect;
      ok = ok && exact;
      detail += fmt("%s %s; ", t.name, exact ? "exact" : "MISMATCH");
    }
    return Outcome{ok, detail + "L_A = {1} for verbatim, empty otherwise, on every run"};
  });

  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
