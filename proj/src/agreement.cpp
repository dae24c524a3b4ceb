#include "corrsim/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "corrsim/detail/enumerate.hpp"
#include "corrsim/errors.hpp"
#include "corrsim/parallel.hpp"

namespace corrsim {

std::uint64_t tuple_index(SampleView tuple, std::uint64_t base) {
  std::uint64_t idx = 0;
  for (std::uint64_t x : tuple) idx = idx * base + x;
  return idx;
}

AgreementProtocol agreement_from_tables(unsigned ell, std::size_t u_size, std::size_t v_size,
                                        std::vector<double> f, std::vector<double> g,
                                        std::string name) {
  const double nu = std::pow(static_cast<double>(u_size), ell);
  const double nv = std::pow(static_cast<double>(v_size), ell);
  if (static_cast<double>(f.size()) != nu || static_cast<double>(g.size()) != nv)
    throw DomainError("agreement tables must have |U|^l and |V|^l entries");
  for (double x : f)
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("agreement table values must lie in [0, 1]");
  for (double x : g)
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("agreement table values must lie in [0, 1]");
  AgreementProtocol pr;
  pr.name = std::move(name);
  pr.ell = ell;
  pr.u_size = u_size;
  pr.v_size = v_size;
  pr.f_table = std::move(f);
  pr.g_table = std::move(g);
  pr.f = [tab = *pr.f_table, u_size](SampleView u) { return tab[tuple_index(u, u_size)]; };
  pr.g = [tab = *pr.g_table, v_size](SampleView v) { return tab[tuple_index(v, v_size)]; };
  return pr;
}

AgreementProtocol constant_agreement(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
    throw DomainError("constant_agreement: values must lie in [0, 1]");
  AgreementProtocol pr;
  pr.name = "constant";
  pr.ell = 0;
  pr.f = [a](SampleView) { return a; };
  pr.g = [b](SampleView) { return b; };
  return pr;
}

namespace {

void check_unit(double x, const char* who) {
  if (!(x >= 0.0 && x <= 1.0))
    throw ContractViolation(std::string(who) + ": player function left [0, 1]: " + std::to_string(x));
}

}  // namespace

AgreementEval eval_agreement(const BipartiteSource& s, const AgreementProtocol& pr,
                             const EvalSpec& mode) {
  if (const auto* ex = std::get_if<ExactMode>(&mode)) {
    double cost = 0.0, success = 0.0;
    detail::for_each_support_tuple(
        s, pr.ell, ex->budget,
        [&](SampleView u, SampleView v, double w) {
          const double a = pr.f(u);
          const double b = pr.g(v);
          check_unit(a, "eval_agreement");
          check_unit(b, "eval_agreement");
          cost += w * (a + b);
          success += w * a * b;
        },
        "eval_agreement");
    return {exact_estimate(cost), exact_estimate(success)};
  }

  const auto& mc = std::get<McMode>(mode);
  const PairSampler sampler(s);
  const unsigned workers = worker_count();
  std::vector<std::uint64_t> ones(workers, 0), ones_sq(workers, 0), hits(workers, 0);
  parallel_chunks(mc.trials, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::vector<std::uint64_t> u(pr.ell), v(pr.ell);
    for (std::size_t t = begin; t < end; ++t) {
      SplitMix64 rng(derive(mc.seed, t));
      for (unsigned i = 0; i < pr.ell; ++i) std::tie(u[i], v[i]) = sampler.draw(rng);
      const double fa = pr.f(u);
      const double gb = pr.g(v);
      check_unit(fa, "eval_agreement");
      check_unit(gb, "eval_agreement");
      const unsigned a = rng.bernoulli(fa) ? 1u : 0u;
      const unsigned b = rng.bernoulli(gb) ? 1u : 0u;
      ones[w] += a + b;
      ones_sq[w] += (a + b) * (a + b);
      hits[w] += a & b;
    }
  });
  const auto sum = [](const std::vector<std::uint64_t>& x) {
    return std::accumulate(x.begin(), x.end(), std::uint64_t{0});
  };
  return {mean_estimate(static_cast<double>(sum(ones)), static_cast<double>(sum(ones_sq)), mc.trials,
                        mc.seed),
          wilson_estimate(sum(hits), mc.trials, mc.seed)};
}

namespace {

// Largest l with base^-l >= p (relative slack 1e-12 so that p = base^-k yields k).
unsigned floor_log_inv(double base, double p) {
  unsigned ell = 0;
  double power = 1.0;
  while (ell < 200 && power * base * p <= 1.0 + 1e-12) {
    power *= base;
    ++ell;
  }
  return ell;
}

bool all_equal(SampleView x, std::uint64_t value) {
  return std::all_of(x.begin(), x.end(), [value](std::uint64_t y) { return y == value; });
}

}  // namespace

AgreementConstruction disj_agreement(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("disj_agreement: p must lie in (0, 1)");
  const unsigned ell = floor_log_inv(6.0, p);
  const double scale = std::ldexp(1.0, -static_cast<int>(ell));
  AgreementProtocol pr;
  pr.name = "disj(l=" + std::to_string(ell) + ")";
  pr.ell = ell;
  pr.u_size = 2;
  pr.v_size = 2;
  pr.f = [](SampleView u) { return all_equal(u, 1) ? 1.0 : 0.0; };
  pr.g = [scale](SampleView v) { return all_equal(v, 0) ? scale : 0.0; };
  const double third = std::pow(3.0, -static_cast<double>(ell));
  return {std::move(pr), 2.0 * third, third * scale};
}

AgreementConstruction perf_agreement(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("perf_agreement: p must lie in (0, 1]");
  const unsigned ell = floor_log_inv(2.0, p);
  AgreementProtocol pr;
  pr.name = "perf(l=" + std::to_string(ell) + ")";
  pr.ell = ell;
  pr.u_size = 2;
  pr.v_size = 2;
  pr.f = [](SampleView u) { return all_equal(u, 0) ? 1.0 : 0.0; };
  pr.g = [](SampleView v) { return all_equal(v, 0) ? 1.0 : 0.0; };
  const double half = std::ldexp(1.0, -static_cast<int>(ell));
  return {std::move(pr), 2.0 * half, half};
}

AgreementConstruction witness_power_agreement(const BipartiteSource& s, const std::vector<bool>& la,
                                              const std::vector<bool>& lb, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("witness_power_agreement: p must lie in (0, 1]");
  if (la.size() != s.u_size() || lb.size() != s.v_size())
    throw DomainError("witness_power_agreement: set masks must match U and V");
  const Marginals m = marginals(s);
  double a = 0.0, b = 0.0, gamma = 0.0;
  for (std::size_t u = 0; u < s.u_size(); ++u)
    if (la[u]) a += m.u[u];
  for (std::size_t v = 0; v < s.v_size(); ++v)
    if (lb[v]) b += m.v[v];
  for (std::size_t u = 0; u < s.u_size(); ++u)
    for (std::size_t v = 0; v < s.v_size(); ++v)
      if (la[u] && lb[v]) gamma += s(u, v);

  // Scan l = 0, 1, ... while gamma^l >= p; scale so that the success is exactly p.
  double best_cost = std::numeric_limits<double>::infinity();
  unsigned best_ell = 0;
  double best_sa = 1.0, best_sb = 1.0;
  double gl = 1.0, al = 1.0, bl = 1.0;
  for (unsigned ell = 0; ell <= 200; ++ell) {
    if (gl < p * (1.0 - 1e-12) || gl <= 0.0) break;
    const double r = std::min(1.0, p / gl);
    double sa = std::sqrt(r * bl / al);
    sa = std::clamp(sa, r, 1.0);
    const double sb = std::min(1.0, r / sa);
    const double cost = sa * al + sb * bl;
    if (cost < best_cost - 1e-15) {
      best_cost = cost;
      best_ell = ell;
      best_sa = sa;
      best_sb = sb;
    }
    if (gamma >= 1.0) break;
    gl *= gamma;
    al *= a;
    bl *= b;
  }

  AgreementProtocol pr;
  pr.name = "witness-power(l=" + std::to_string(best_ell) + ")";
  pr.ell = best_ell;
  pr.u_size = s.u_size();
  pr.v_size = s.v_size();
  pr.f = [la, sa = best_sa](SampleView u) {
    for (std::uint64_t x : u)
      if (!la[x]) return 0.0;
    return sa;
  };
  pr.g = [lb, sb = best_sb](SampleView v) {
    for (std::uint64_t y : v)
      if (!lb[y]) return 0.0;
    return sb;
  };
  const double success =
      best_sa * best_sb * std::pow(gamma, static_cast<double>(best_ell));
  return {std::move(pr), best_cost, success};
}

AgreementConstruction best_agreement(const BipartiteSource& s, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("best_agreement: p must lie in (0, 1]");
  std::optional<AgreementConstruction> best;
  auto offer = [&](AgreementConstruction c) {
    if (c.success < p * (1.0 - 1e-12)) return;
    if (!best || c.cost < best->cost - 1e-15) best = std::move(c);
  };
  if (same_distribution(s, make_perf())) offer(perf_agreement(p));
  if (p < 1.0 && same_distribution(s, make_disj())) offer(disj_agreement(p));

  const std::size_t nu = s.u_size(), nv = s.v_size();
  auto masks = [](std::size_t n) {
    std::vector<std::vector<bool>> out;
    if (n <= 12) {
      for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << n); ++bits) {
        std::vector<bool> m(n);
        for (std::size_t i = 0; i < n; ++i) m[i] = (bits >> i) & 1;
        out.push_back(std::move(m));
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<bool> m(n, false);
        m[i] = true;
        out.push_back(std::move(m));
      }
      out.emplace_back(n, true);
    }
    return out;
  };
  const auto ma = masks(nu);
  const auto mb = masks(nv);
  for (const auto& la : ma)
    for (const auto& lb : mb) offer(witness_power_agreement(s, la, lb, p));
  return std::move(*best);
}

// ---------------------------------------------------------------------------
// Numerical search

namespace {

struct TupleSpace {
  std::size_t nu = 0, nv = 0;              // |U|^l, |V|^l
  std::vector<double> pu, pv;              // marginal weights per tuple index
  std::vector<std::uint32_t> ju, jv;       // joint support tuples
  std::vector<double> jw;
};

TupleSpace build_space(const BipartiteSource& s, unsigned ell) {
  const double nu = std::pow(static_cast<double>(s.u_size()), ell);
  const double nv = std::pow(static_cast<double>(s.v_size()), ell);
  if (nu > 1e6 || nv > 1e6)
    throw CapacityError("optimize_agreement: table mode needs |U|^l, |V|^l <= 1e6");
  TupleSpace sp;
  sp.nu = static_cast<std::size_t>(nu);
  sp.nv = static_cast<std::size_t>(nv);
  sp.pu.assign(sp.nu, 0.0);
  sp.pv.assign(sp.nv, 0.0);
  detail::for_each_support_tuple(
      s, ell, kExactBudget,
      [&](SampleView u, SampleView v, double w) {
        const auto iu = static_cast<std::uint32_t>(tuple_index(u, s.u_size()));
        const auto iv = static_cast<std::uint32_t>(tuple_index(v, s.v_size()));
        sp.ju.push_back(iu);
        sp.jv.push_back(iv);
        sp.jw.push_back(w);
        sp.pu[iu] += w;
        sp.pv[iv] += w;
      },
      "optimize_agreement");
  return sp;
}

// w[u] = sum_v rho(u, v) g(v), or the transpose.
void weights(const TupleSpace& sp, const std::vector<double>& other, bool for_u,
             std::vector<double>& out) {
  out.assign(for_u ? sp.nu : sp.nv, 0.0);
  for (std::size_t k = 0; k < sp.jw.size(); ++k) {
    if (for_u) out[sp.ju[k]] += sp.jw[k] * other[sp.jv[k]];
    else out[sp.jv[k]] += sp.jw[k] * other[sp.ju[k]];
  }
}

// Items sorted by benefit/price, best first. Zero-price items with benefit come first.
std::vector<std::size_t> ratio_order(const std::vector<double>& price, const std::vector<double>& benefit) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < price.size(); ++i)
    if (benefit[i] > 0.0 && price[i] > 0.0) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return benefit[x] * price[y] > benefit[y] * price[x];
  });
  return idx;
}

// max sum x*benefit s.t. sum x*price <= budget, 0 <= x <= 1.
std::vector<double> knapsack_max(const std::vector<double>& price, const std::vector<double>& benefit,
                                 double budget) {
  std::vector<double> x(price.size(), 0.0);
  double left = budget;
  for (std::size_t i : ratio_order(price, benefit)) {
    if (left <= 0.0) break;
    const double take = std::min(1.0, left / price[i]);
    x[i] = take;
    left -= take * price[i];
  }
  return x;
}

// min sum x*price s.t. sum x*benefit >= target, 0 <= x <= 1. Empty if infeasible.
std::optional<std::vector<double>> knapsack_min(const std::vector<double>& price,
                                                const std::vector<double>& benefit, double target) {
  std::vector<double> x(price.size(), 0.0);
  double need = target;
  for (std::size_t i : ratio_order(price, benefit)) {
    if (need <= 0.0) break;
    const double take = std::min(1.0, need / benefit[i]);
    x[i] = take;
    need -= take * benefit[i];
  }
  if (need > 1e-15 * std::max(1.0, target)) return std::nullopt;
  return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double success_of(const TupleSpace& sp, const std::vector<double>& f, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t k = 0; k < sp.jw.size(); ++k) s += sp.jw[k] * f[sp.ju[k]] * g[sp.jv[k]];
  return s;
}

struct Candidate {
  std::vector<double> f, g;
  double cost = std::numeric_limits<double>::infinity();
  double success = 0.0;
};

}  // namespace

AgreementConstruction optimize_agreement(const BipartiteSource& s, unsigned ell, double p,
                                         std::size_t iters, std::uint64_t seed) {
  if (!(p > 0.0)) throw DomainError("optimize_agreement: p must be > 0");
  if (p > 1.0)
    throw DomainError("optimize_agreement: infeasible, maximum achievable success is 1 < p = " +
                      std::to_string(p));
  const TupleSpace sp = build_space(s, ell);
  const double target = std::min(1.0, p * (1.0 + 1e-12));
  SplitMix64 rng(seed);

  Candidate best;
  best.f.assign(sp.nu, 1.0);
  best.g.assign(sp.nv, 1.0);
  best.cost = dot(best.f, sp.pu) + dot(best.g, sp.pv);
  best.success = success_of(sp, best.f, best.g);

  std::vector<double> w;
  // Max success reachable with E f <= a, E g <= b by alternating exact LP steps.
  auto alternate = [&](std::vector<double> g, double a, double b) {
    Candidate c;
    double prev = -1.0;
    std::vector<double> f;
    for (int round = 0; round < 50; ++round) {
      weights(sp, g, true, w);
      f = knapsack_max(sp.pu, w, a);
      weights(sp, f, false, w);
      g = knapsack_max(sp.pv, w, b);
      const double succ = success_of(sp, f, g);
      if (succ <= prev * (1.0 + 1e-13)) break;
      prev = succ;
    }
    c.success = success_of(sp, f, g);
    c.cost = dot(f, sp.pu) + dot(g, sp.pv);
    c.f = std::move(f);
    c.g = std::move(g);
    return c;
  };

  const std::size_t restarts = std::max<std::size_t>(1, iters);
  std::vector<std::vector<double>> inits;
  for (std::size_t r = 0; r < restarts; ++r) {
    std::vector<double> g(sp.nv);
    for (double& x : g) x = r == 0 ? 1.0 : rng.uniform();
    inits.push_back(std::move(g));
  }

  auto feasible_at = [&](double total) -> std::optional<Candidate> {
    std::optional<Candidate> found;
    for (int k = 1; k < 20; ++k) {
      const double lambda = k / 20.0;
      const double a = std::min(1.0, lambda * total);
      const double b = std::min(1.0, (1.0 - lambda) * total);
      for (const auto& g0 : inits) {
        std::vector<double> g = g0;
        const double mean = dot(g, sp.pv);
        if (mean > 0.0)
          for (double& x : g) x = std::min(1.0, x * b / mean);
        Candidate c = alternate(std::move(g), a, b);
        if (c.success >= target && (!found || c.cost < found->cost)) found = std::move(c);
      }
      if (found) return found;
    }
    return found;
  };

  double lo = 0.0, hi = best.cost;
  for (int step = 0; step < 40 && hi - lo > 1e-10 * std::max(1.0, hi); ++step) {
    const double mid = 0.5 * (lo + hi);
    if (auto c = feasible_at(mid)) {
      if (c->cost < best.cost) best = std::move(*c);
      hi = std::min(mid, best.cost);
    } else {
      lo = mid;
    }
  }

  // Polish: minimize cost one side at a time at the success target.
  for (int round = 0; round < 50; ++round) {
    const double before = best.cost;
    weights(sp, best.g, true, w);
    if (auto f = knapsack_min(sp.pu, w, target)) {
      const double c = dot(*f, sp.pu) + dot(best.g, sp.pv);
      if (c < best.cost && success_of(sp, *f, best.g) >= p) {
        best.f = std::move(*f);
        best.cost = c;
      }
    }
    weights(sp, best.f, false, w);
    if (auto g = knapsack_min(sp.pv, w, target)) {
      const double c = dot(best.f, sp.pu) + dot(*g, sp.pv);
      if (c < best.cost && success_of(sp, best.f, *g) >= p) {
        best.g = std::move(*g);
        best.cost = c;
      }
    }
    if (best.cost >= before * (1.0 - 1e-14)) break;
  }
  best.success = success_of(sp, best.f, best.g);

  for (double& x : best.f) x = std::clamp(x, 0.0, 1.0);
  for (double& x : best.g) x = std::clamp(x, 0.0, 1.0);
  AgreementConstruction out{agreement_from_tables(ell, s.u_size(), s.v_size(), best.f, best.g,
                                                  "optimized(l=" + std::to_string(ell) + ")"),
                            dot(best.f, sp.pu) + dot(best.g, sp.pv), best.success};
  return out;
}

}  // namespace corrsim
