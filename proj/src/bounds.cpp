#include "corrsim/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <ostream>

#include "corrsim/agreement.hpp"
#include "corrsim/errors.hpp"
#include "corrsim/parallel.hpp"

namespace corrsim {

HcParams HcParams::from(double p, double q) {
  if (!(p >= 1.0 && q >= p)) throw DomainError("hypercontractivity exponents need 1 <= p <= q");
  HcParams h;
  h.p = p;
  h.q = q;
  const double inv_qp = std::isinf(q) ? 1.0 : 1.0 - 1.0 / q;  // 1/q'
  h.q_prime = inv_qp == 0.0 ? kInf : 1.0 / inv_qp;
  h.c = 1.0 / (1.0 / p + inv_qp);
  return h;
}

double hyp_lower_bound(double p, double q, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("hyp_lower_bound: z must lie in [0, 1]");
  const HcParams h = HcParams::from(p, q);
  // q'^(1/q') -> 1 as q' -> infinity
  const double qp_term = std::isinf(h.q_prime) ? 1.0 : std::pow(h.q_prime, 1.0 / h.q_prime);
  return std::pow(std::pow(p, 1.0 / p) * qp_term * z, h.c) / h.c;
}

double cor_lower_bound(double z, double cor) {
  if (!(cor >= 0.0 && cor <= 1.0)) throw DomainError("cor_lower_bound: cor must lie in [0, 1]");
  return std::sqrt(std::max(0.0, z - cor));
}

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::hypercontractive: return "hypercontractive";
    case BoundKind::correlation: return "correlation";
    case BoundKind::oracle: return "oracle";
  }
  return "?";
}

std::vector<HcCertificate> certify_hypercontractivity(const BipartiteSource& s, std::uint64_t seed) {
  const Marginals m = marginals(s);
  const auto support = static_cast<std::size_t>(std::count_if(m.u.begin(), m.u.end(), [](double x) { return x > 0; }));
  const HcSearch search = support <= 4 ? HcSearch{GridSearch{support <= 2 ? 400u : 40u}}
                                       : HcSearch{RandomSearch{20000, seed}};
  const bool is_disj = same_distribution(s, make_disj());
  std::vector<HcCertificate> out;
  for (const auto& [q, p] : {std::pair{kInf, 1.0}, {4.0, 4.0 / 3}, {3.0, 1.5}, {2.0, 2.0}}) {
    HcReport rep = check_hypercontractive(s, q, p, search);
    if (!rep.holds) continue;
    out.push_back({HcParams::from(p, q), std::move(rep), is_disj && q == 3.0 && p == 1.5});
  }
  return out;
}

std::vector<BoundCertificate> agreement_certificates(const BipartiteSource& s, double z,
                                                     const std::vector<HcCertificate>& hc) {
  std::vector<BoundCertificate> out;
  for (const auto& h : hc) {
    BoundCertificate c;
    c.kind = BoundKind::hypercontractive;
    c.source = s.label();
    c.target = "agr";
    c.z = z;
    c.value = hyp_lower_bound(h.params.p, h.params.q, z);
    c.params = h.params;
    c.report = h.report;
    c.note = h.analytic ? "closed-form gap" : "numerical search";
    out.push_back(std::move(c));
  }
  BoundCertificate c;
  c.kind = BoundKind::correlation;
  c.source = s.label();
  c.target = "agr";
  c.z = z;
  c.cor = max_correlation(s);
  c.value = cor_lower_bound(z, c.cor);
  if (z <= c.cor) c.note = "uninformative";
  out.push_back(std::move(c));
  return out;
}

std::vector<BoundCertificate> agreement_certificates(const BipartiteSource& s, double z) {
  return agreement_certificates(s, z, certify_hypercontractivity(s));
}

double agreement_floor(const BipartiteSource& s, double z, const std::vector<HcCertificate>& hc) {
  double best = 0.0;
  for (const auto& c : agreement_certificates(s, z, hc)) best = std::max(best, c.value);
  return best;
}

std::vector<BoundCertificate> collision_certificates(const BipartiteSource& s, std::uint32_t n,
                                                     double p, const std::vector<HcCertificate>& hc) {
  auto out = agreement_certificates(s, p, hc);
  for (auto& c : out) {
    c.target = "col";
    c.n = n;
    c.value *= static_cast<double>(n) / 2.0;
  }
  return out;
}

double collision_floor(const BipartiteSource& s, std::uint32_t n, double p,
                       const std::vector<HcCertificate>& hc) {
  return agreement_floor(s, p, hc) * static_cast<double>(n) / 2.0;
}

SigmaCorReport verify_sigma_cor(unsigned m, unsigned b) {
  if (m < 2) throw DomainError("verify_sigma_cor: m must be at least 2");
  if (m > 11) throw CapacityError("verify_sigma_cor: m > 11 is over the dense SVD budget");
  SigmaCorReport r{m, b, 0.0, 2.0 / std::pow(2.0, m / 2.0), false};
  r.measured = max_correlation(make_sigma(m, b));
  r.ok = r.measured <= r.bound + 1e-9;
  return r;
}

namespace {

AgreementProtocol lift_agreement(const AgreementProtocol& base, std::uint64_t right_u, std::uint64_t right_v) {
  AgreementProtocol pr;
  pr.name = base.name + "(lifted)";
  pr.ell = base.ell;
  auto left = [](SampleView t, std::uint64_t right) {
    std::vector<std::uint64_t> out(t.begin(), t.end());
    for (auto& x : out) x /= right;
    return out;
  };
  pr.f = [base, right_u, left](SampleView u) { return base.f(left(u, right_u)); };
  pr.g = [base, right_v, left](SampleView v) { return base.g(left(v, right_v)); };
  return pr;
}

}  // namespace

CorShiftReport verify_cor_to_agr_shift(const BipartiteSource& rho, const BipartiteSource& sigma,
                                       double z, std::size_t budget) {
  if (!(z > 0.0 && z <= 1.0)) throw DomainError("verify_cor_to_agr_shift: z must lie in (0, 1]");
  CorShiftReport r;
  r.z = z;
  r.cor_sigma = max_correlation(sigma);
  r.shifted_z = z - r.cor_sigma;
  r.informative = r.shifted_z > 0.0;
  const auto hc = certify_hypercontractivity(rho);
  r.rho_floor = r.informative ? agreement_floor(rho, r.shifted_z, hc) : 0.0;

  const BipartiteSource t = tensor(rho, sigma, budget);
  // Ignoring the sigma half is always available on the tensor.
  const AgreementConstruction base = best_agreement(rho, z);
  const AgreementProtocol lifted = lift_agreement(base.protocol, sigma.u_size(), sigma.v_size());
  r.achieved = base.cost;
  r.construction = lifted.name;
  try {
    const AgreementEval ev = eval_agreement(t, lifted, ExactMode{1'000'000});
    r.achieved = ev.cost.value;
  } catch (const CapacityError&) {
    r.construction += " (closed form)";
  }
  if (t.u_size() <= 64 && t.v_size() <= 64) {
    const AgreementConstruction direct = best_agreement(t, z);
    if (direct.cost < r.achieved) {
      r.achieved = direct.cost;
      r.construction = direct.protocol.name;
    }
  }
  r.ok = r.achieved >= r.rho_floor - 1e-9;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct TupleDomain {
  std::vector<std::vector<std::uint64_t>> tuples;  // over the marginal support
};

TupleDomain support_tuples(const std::vector<double>& marginal, unsigned ell) {
  std::vector<std::uint64_t> alphabet;
  for (std::size_t x = 0; x < marginal.size(); ++x)
    if (marginal[x] > 0.0) alphabet.push_back(x);
  TupleDomain d;
  std::vector<std::size_t> digit(ell, 0);
  for (;;) {
    std::vector<std::uint64_t> t(ell);
    for (unsigned j = 0; j < ell; ++j) t[j] = alphabet[digit[j]];
    d.tuples.push_back(std::move(t));
    int j = static_cast<int>(ell) - 1;
    while (j >= 0 && ++digit[j] == alphabet.size()) digit[j--] = 0;
    if (j < 0) break;
  }
  return d;
}

double binom(unsigned n, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

OracleResult brute_force_col(const BipartiteSource& s, std::uint32_t n, double p, unsigned ell,
                             std::size_t k_max, double budget) {
  if (n == 0 || n > 30) throw DomainError("brute_force_col: need 1 <= n <= 30");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("brute_force_col: p must lie in [0, 1]");
  k_max = std::min<std::size_t>(k_max, n);
  const Marginals mg = marginals(s);
  const TupleDomain du = support_tuples(mg.u, ell), dv = support_tuples(mg.v, ell);
  const std::size_t na = du.tuples.size(), nb = dv.tuples.size();

  double subsets = 0.0;
  for (unsigned j = 0; j <= k_max; ++j) subsets += binom(n, j);
  const double space = std::pow(subsets, static_cast<double>(na)) * std::pow(subsets, static_cast<double>(nb));
  if (space > budget)
    throw CapacityError("brute_force_col: search space " + std::to_string(space) + " exceeds budget " +
                        std::to_string(budget));

  // Joint weight of each (Alice tuple, Bob tuple) pair.
  std::vector<double> w(na * nb, 1.0);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b)
      for (unsigned j = 0; j < ell; ++j) w[a * nb + b] *= s(du.tuples[a][j], dv.tuples[b][j]);

  const double target = p - 1e-12;
  OracleResult result;
  std::atomic<std::size_t> checked{0};

  for (std::size_t k = 0; k <= k_max; ++k) {
    std::vector<std::uint32_t> subs;  // ascending masks = colex order
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask)
      if (static_cast<std::size_t>(std::popcount(mask)) <= k) subs.push_back(mask);
    const std::size_t S = subs.size();
    std::size_t alice_maps = 1;
    for (std::size_t a = 0; a < na; ++a) alice_maps *= S;

    std::atomic<std::size_t> best_alice{alice_maps};
    std::mutex mu;
    std::vector<std::uint32_t> best_a, best_b;

    parallel_chunks(alice_maps, [&](unsigned, std::size_t begin, std::size_t end) {
      std::vector<std::size_t> amap(na), bmap(nb);
      std::vector<double> c(nb * n), remaining(nb * n + n), acc(n);
      for (std::size_t idx = begin; idx < end && idx < best_alice.load(); ++idx) {
        std::size_t rest = idx;
        for (std::size_t a = na; a-- > 0;) {
          amap[a] = rest % S;
          rest /= S;
        }
        std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t a = 0; a < na; ++a) {
          const std::uint32_t mask = subs[amap[a]];
          if (mask == 0) continue;
          for (std::size_t b = 0; b < nb; ++b)
            for (std::uint32_t i = 0; i < n; ++i)
              if ((mask >> i) & 1u) c[b * n + i] += w[a * nb + b];
        }
        // remaining[b][i] = sum over b' >= b of c[b'][i]; row nb is zero.
        std::fill(remaining.end() - n, remaining.end(), 0.0);
        for (std::size_t b = nb; b-- > 0;)
          for (std::uint32_t i = 0; i < n; ++i) remaining[b * n + i] = remaining[(b + 1) * n + i] + c[b * n + i];
        std::fill(acc.begin(), acc.end(), 0.0);

        // Depth-first over Bob's choices in index order, pruning unreachable targets.
        bool found = false;
        auto dfs = [&](auto&& self, std::size_t b) -> void {
          ++checked;
          for (std::uint32_t i = 0; i < n; ++i)
            if (acc[i] + remaining[b * n + i] < target) return;
          if (b == nb) {
            found = true;
            return;
          }
          for (std::size_t d = 0; d < S && !found; ++d) {
            const std::uint32_t mask = subs[d];
            for (std::uint32_t i = 0; i < n; ++i)
              if ((mask >> i) & 1u) acc[i] += c[b * n + i];
            bmap[b] = d;
            self(self, b + 1);
            for (std::uint32_t i = 0; i < n; ++i)
              if ((mask >> i) & 1u) acc[i] -= c[b * n + i];
          }
        };
        dfs(dfs, 0);
        if (!found) continue;
        std::lock_guard lock(mu);
        if (idx < best_alice.load()) {
          best_alice = idx;
          best_a.assign(na, 0);
          best_b.assign(nb, 0);
          for (std::size_t a = 0; a < na; ++a) best_a[a] = subs[amap[a]];
          for (std::size_t b = 0; b < nb; ++b) best_b[b] = subs[bmap[b]];
        }
        break;
      }
    });

    if (best_alice.load() == alice_maps) continue;
    result.feasible = true;
    result.best_size = k;
    // Tables over the full alphabet; tuples outside the support output nothing.
    auto table = [&](const TupleDomain& d, const std::vector<std::uint32_t>& masks, std::size_t alphabet) {
      std::size_t size = 1;
      for (unsigned j = 0; j < ell; ++j) size *= alphabet;
      std::vector<Subset> out(size);
      for (std::size_t t = 0; t < d.tuples.size(); ++t) {
        Subset sub;
        for (std::uint32_t i = 0; i < n; ++i)
          if ((masks[t] >> i) & 1u) sub.push_back(i);
        out[tuple_index(d.tuples[t], alphabet)] = std::move(sub);
      }
      return out;
    };
    result.best_protocol = collision_from_tables(ell, n, s.u_size(), s.v_size(), table(du, best_a, s.u_size()),
                                                 table(dv, best_b, s.v_size()), "oracle");
    result.best_protocol->max_out = k;
    break;
  }
  result.maps_checked = checked.load();
  return result;
}

// ---------------------------------------------------------------------------

LogLogFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_log_log: need at least two points");
  const std::size_t k = x.size();
  double mx = 0, my = 0;
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw DomainError("fit_log_log: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0) throw DomainError("fit_log_log: x values must not all be equal");
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = ly[i] - (f.intercept + f.slope * lx[i]);
    ss_res += e * e;
  }
  f.r_squared = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
  return f;
}

ScalingResult scaling_experiment(const BipartiteSource& s, const std::vector<std::uint32_t>& n_values,
                                 std::uint64_t seed) {
  if (n_values.empty()) throw DomainError("scaling_experiment: no sizes given");
  ScalingResult r;
  r.source = s.label();
  const auto hc = certify_hypercontractivity(s, seed);
  // Smallest c gives the fastest-growing floor; each point still takes the max over all.
  for (const auto& h : hc)
    if (!r.floor_params || h.params.c < r.floor_params->c) r.floor_params = h.params;
  const double cor = max_correlation(s);
  const bool product = is_product(s, 1e-12);

  std::vector<double> xs, ys;
  for (const std::uint32_t n : n_values) {
    if (n < 2) throw DomainError("scaling_experiment: sizes must be at least 2");
    ScalingPoint pt;
    pt.n = n;
    pt.p = 1.0 / n;
    if (product) {
      const auto k = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(n)) - 1e-12));
      const CollisionProtocol pr = birthday_collision(s, n, k, seed);
      pt.achieved_max_out = pr.max_out;
      pt.construction = "birthday(k=" + std::to_string(k) + ")";
    } else {
      const AgreementConstruction ag = best_agreement(s, std::min(1.0, 2.0 / n));
      const CollisionProtocol pr = collision_from_agreement(ag.protocol, n, ag.cost * (1.0 + 1e-9));
      pt.achieved_max_out = pr.max_out;
      pt.construction = "from-agreement(" + ag.protocol.name + ")";
    }
    const double half_n = static_cast<double>(n) / 2.0;
    for (const auto& h : hc)
      pt.hyp_floor = std::max(pt.hyp_floor, half_n * hyp_lower_bound(h.params.p, h.params.q, pt.p));
    pt.cor_floor = half_n * cor_lower_bound(pt.p, cor);
    xs.push_back(n);
    ys.push_back(static_cast<double>(pt.achieved_max_out));
    r.points.push_back(std::move(pt));
  }
  if (xs.size() >= 2) {
    const LogLogFit f = fit_log_log(xs, ys);
    r.fitted_exponent = f.slope;
    r.intercept = f.intercept;
    r.r_squared = f.r_squared;
  }
  r.reliable = xs.size() >= 5 && r.r_squared >= 0.9;
  return r;
}

void write_scaling_csv(std::ostream& out, const ScalingResult& r) {
  out << "n,p,achieved_max_out,hyp_floor,cor_floor\n";
  const auto old = out.precision(17);
  for (const auto& pt : r.points)
    out << pt.n << ',' << pt.p << ',' << pt.achieved_max_out << ',' << pt.hyp_floor << ',' << pt.cor_floor << '\n';
  out.precision(old);
}

}  // namespace corrsim
