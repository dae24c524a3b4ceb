#include "corrsim/collision.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "corrsim/detail/enumerate.hpp"
#include "corrsim/errors.hpp"
#include "corrsim/parallel.hpp"

namespace corrsim {

namespace {

void validate_output(const Subset& out, const CollisionProtocol& pr, const char* side) {
  if (out.size() > pr.max_out)
    throw ContractViolation(pr.name + ": " + side + " output of size " + std::to_string(out.size()) +
                            " exceeds max_out " + std::to_string(pr.max_out));
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k] >= pr.n) throw ContractViolation(pr.name + ": output index outside [0, n)");
    if (k > 0 && out[k] <= out[k - 1]) throw ContractViolation(pr.name + ": output not sorted/unique");
  }
}

Subset intersect(const Subset& a, const Subset& b) {
  Subset out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

CollisionProtocol collision_from_tables(unsigned ell, std::uint32_t n, std::size_t u_size,
                                        std::size_t v_size, std::vector<Subset> a,
                                        std::vector<Subset> b, std::string name) {
  std::size_t max_out = 0;
  for (auto* tab : {&a, &b})
    for (auto& sub : *tab) {
      std::sort(sub.begin(), sub.end());
      sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
      if (!sub.empty() && sub.back() >= n) throw DomainError("collision table index outside [0, n)");
      max_out = std::max(max_out, sub.size());
    }
  CollisionProtocol pr;
  pr.name = std::move(name);
  pr.ell = ell;
  pr.n = n;
  pr.max_out = max_out;
  auto ta = std::make_shared<const std::vector<Subset>>(std::move(a));
  auto tb = std::make_shared<const std::vector<Subset>>(std::move(b));
  pr.alice = [ta, u_size](SampleView u, SplitMix64&) { return (*ta)[tuple_index(u, u_size)]; };
  pr.bob = [tb, v_size](SampleView v, SplitMix64&) { return (*tb)[tuple_index(v, v_size)]; };
  pr.alice_membership = [ta, u_size, n](SampleView u) {
    std::vector<double> m(n, 0.0);
    for (auto i : (*ta)[tuple_index(u, u_size)]) m[i] = 1.0;
    return m;
  };
  pr.bob_membership = [tb, v_size, n](SampleView v) {
    std::vector<double> m(n, 0.0);
    for (auto i : (*tb)[tuple_index(v, v_size)]) m[i] = 1.0;
    return m;
  };
  return pr;
}

CollisionEval eval_collision(const BipartiteSource& s, const CollisionProtocol& pr,
                             const EvalSpec& mode) {
  CollisionEval out;
  const std::uint32_t n = pr.n;
  if (const auto* ex = std::get_if<ExactMode>(&mode)) {
    if (!pr.has_membership())
      throw DomainError(pr.name + ": exact evaluation needs membership probabilities");
    std::vector<double> both(n, 0.0), ra(n, 0.0), rb(n, 0.0);
    SplitMix64 aux(0x5eed);
    detail::for_each_support_tuple(
        s, pr.ell, ex->budget,
        [&](SampleView u, SampleView v, double w) {
          const auto fa = pr.alice_membership(u);
          const auto gb = pr.bob_membership(v);
          for (std::uint32_t i = 0; i < n; ++i) {
            both[i] += w * fa[i] * gb[i];
            ra[i] += w * fa[i];
            rb[i] += w * gb[i];
          }
          const Subset a = pr.alice(u, aux);
          const Subset b = pr.bob(v, aux);
          validate_output(a, pr, "alice");
          validate_output(b, pr, "bob");
          out.max_out_seen = std::max({out.max_out_seen, a.size(), b.size()});
        },
        "eval_collision");
    for (std::uint32_t i = 0; i < n; ++i) {
      out.per_i.push_back(exact_estimate(both[i]));
      out.alice_rate.push_back(exact_estimate(ra[i]));
      out.bob_rate.push_back(exact_estimate(rb[i]));
    }
    out.mode = EvalMode::exact;
  } else {
    const auto& mc = std::get<McMode>(mode);
    const PairSampler sampler(s);
    const unsigned workers = worker_count();
    std::vector<std::vector<std::size_t>> both(workers, std::vector<std::size_t>(n, 0));
    auto ra = both, rb = both;
    std::vector<std::size_t> seen(workers, 0);
    parallel_chunks(mc.trials, [&](unsigned w, std::size_t begin, std::size_t end) {
      std::vector<std::uint64_t> u(pr.ell), v(pr.ell);
      for (std::size_t t = begin; t < end; ++t) {
        SplitMix64 rng(derive(mc.seed, t));
        for (unsigned k = 0; k < pr.ell; ++k) std::tie(u[k], v[k]) = sampler.draw(rng);
        SplitMix64 aux_a = rng.split();
        SplitMix64 aux_b = rng.split();
        const Subset a = pr.alice(u, aux_a);
        const Subset b = pr.bob(v, aux_b);
        validate_output(a, pr, "alice");
        validate_output(b, pr, "bob");
        seen[w] = std::max({seen[w], a.size(), b.size()});
        for (auto i : a) ++ra[w][i];
        for (auto i : b) ++rb[w][i];
        for (auto i : intersect(a, b)) ++both[w][i];
      }
    });
    for (std::uint32_t i = 0; i < n; ++i) {
      std::size_t cb = 0, ca = 0, cbb = 0;
      for (unsigned w = 0; w < workers; ++w) {
        cb += both[w][i];
        ca += ra[w][i];
        cbb += rb[w][i];
      }
      out.per_i.push_back(wilson_estimate(cb, mc.trials, mc.seed));
      out.alice_rate.push_back(wilson_estimate(ca, mc.trials, mc.seed));
      out.bob_rate.push_back(wilson_estimate(cbb, mc.trials, mc.seed));
    }
    out.max_out_seen = *std::max_element(seen.begin(), seen.end());
    out.mode = EvalMode::monte_carlo;
  }
  out.min_prob = 1.0;
  for (const auto& r : out.per_i) out.min_prob = std::min(out.min_prob, r.value);
  return out;
}

IntersectionStats intersection_stats(const BipartiteSource& s, const CollisionProtocol& pr,
                                     std::size_t trials, std::uint64_t seed) {
  const PairSampler sampler(s);
  const unsigned workers = worker_count();
  std::vector<std::vector<std::size_t>> picks(workers, std::vector<std::size_t>(pr.n, 0));
  std::vector<std::size_t> empty(workers, 0), seen(workers, 0);
  parallel_chunks(trials, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::vector<std::uint64_t> u(pr.ell), v(pr.ell);
    for (std::size_t t = begin; t < end; ++t) {
      SplitMix64 rng(derive(seed, t));
      for (unsigned k = 0; k < pr.ell; ++k) std::tie(u[k], v[k]) = sampler.draw(rng);
      SplitMix64 aux_a = rng.split();
      SplitMix64 aux_b = rng.split();
      const Subset a = pr.alice(u, aux_a);
      const Subset b = pr.bob(v, aux_b);
      validate_output(a, pr, "alice");
      validate_output(b, pr, "bob");
      seen[w] = std::max({seen[w], a.size(), b.size()});
      const Subset both = intersect(a, b);
      if (both.empty()) {
        ++empty[w];
      } else {
        ++picks[w][both[rng.below(both.size())]];
      }
    }
  });
  IntersectionStats st;
  st.trials = trials;
  st.picks.assign(pr.n, 0);
  for (unsigned w = 0; w < workers; ++w) {
    st.empty += empty[w];
    st.max_out_seen = std::max(st.max_out_seen, seen[w]);
    for (std::uint32_t i = 0; i < pr.n; ++i) st.picks[i] += picks[w][i];
  }
  return st;
}

namespace {

// Uniform k-subset of [0, n) (Floyd's algorithm), sorted.
Subset random_subset(std::uint32_t n, std::uint32_t k, SplitMix64& rng) {
  Subset out;
  out.reserve(k);
  for (std::uint32_t j = n - k; j < n; ++j) {
    const auto t = static_cast<std::uint32_t>(rng.below(std::uint64_t{j} + 1));
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    else out.push_back(j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

CollisionProtocol birthday_collision(const BipartiteSource& s, std::uint32_t n, std::uint32_t k,
                                     std::uint64_t salt) {
  if (k < 1 || k > n) throw DomainError("birthday_collision: need 1 <= k <= n");
  if (is_degenerate(s))
    throw DomainError("birthday_collision: degenerate source cannot emulate private coins");
  CollisionProtocol pr;
  pr.name = "birthday(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")";
  pr.ell = 0;
  pr.n = n;
  pr.max_out = k;
  auto draw = [n, k, salt](SampleView, SplitMix64& aux) {
    SplitMix64 coins(aux() ^ salt);
    return random_subset(n, k, coins);
  };
  pr.alice = draw;
  pr.bob = draw;
  const double rate = static_cast<double>(k) / n;
  auto member = [n, rate](SampleView) { return std::vector<double>(n, rate); };
  pr.alice_membership = member;
  pr.bob_membership = member;
  return pr;
}

std::size_t collision_threshold(std::uint32_t n, double cost_bound) {
  return static_cast<std::size_t>(std::ceil(3.0 * n * cost_bound)) + 16;
}

CollisionProtocol collision_from_agreement(const AgreementProtocol& ag, std::uint32_t n,
                                           double cost_bound) {
  if (n < 1) throw DomainError("collision_from_agreement: n must be >= 1");
  if (!(cost_bound > 0.0)) throw DomainError("collision_from_agreement: cost bound must be > 0");
  const std::size_t threshold = collision_threshold(n, cost_bound);
  CollisionProtocol pr;
  pr.name = "from-agreement[" + ag.name + "](n=" + std::to_string(n) + ")";
  pr.ell = n * ag.ell;
  pr.n = n;
  pr.max_out = threshold;
  const unsigned block = ag.ell;
  auto make_side = [n, block, threshold](std::function<double(SampleView)> fn) {
    return [n, block, threshold, fn = std::move(fn)](SampleView x, SplitMix64& aux) {
      Subset out;
      for (std::uint32_t i = 0; i < n; ++i)
        if (aux.bernoulli(fn(x.subspan(std::size_t{i} * block, block)))) out.push_back(i);
      if (out.size() > threshold) out.clear();
      return out;
    };
  };
  pr.alice = make_side(ag.f);
  pr.bob = make_side(ag.g);
  if (threshold >= n) {
    // Truncation can never trigger; membership is f on each block.
    auto member = [n, block](std::function<double(SampleView)> fn) {
      return [n, block, fn = std::move(fn)](SampleView x) {
        std::vector<double> m(n);
        for (std::uint32_t i = 0; i < n; ++i) m[i] = fn(x.subspan(std::size_t{i} * block, block));
        return m;
      };
    };
    pr.alice_membership = member(ag.f);
    pr.bob_membership = member(ag.g);
  }
  return pr;
}

ExtractedAgreement agreement_from_collision(const BipartiteSource& s, const CollisionProtocol& pr,
                                            double p_floor, const EvalSpec& mode) {
  if (!pr.has_membership())
    throw DomainError(pr.name + ": agreement extraction needs membership probabilities");
  const CollisionEval ev = eval_collision(s, pr, mode);
  const bool exact = ev.mode == EvalMode::exact;
  std::optional<std::uint32_t> pick;
  std::uint32_t best_any = 0;
  double best_any_success = -1.0;
  for (std::uint32_t i = 0; i < pr.n; ++i) {
    const double reach = exact ? ev.per_i[i].value * (1.0 + 1e-12) : ev.per_i[i].ci_high;
    if (ev.per_i[i].value > best_any_success) {
      best_any_success = ev.per_i[i].value;
      best_any = i;
    }
    if (reach < p_floor) continue;
    const double cost = ev.alice_rate[i].value + ev.bob_rate[i].value;
    if (!pick || cost < ev.alice_rate[*pick].value + ev.bob_rate[*pick].value) pick = i;
  }
  if (!pick)
    throw DomainError("agreement_from_collision: no coordinate reaches success " +
                      std::to_string(p_floor) + "; best is i=" + std::to_string(best_any) +
                      " with " + std::to_string(best_any_success));
  const std::uint32_t i = *pick;
  ExtractedAgreement out;
  out.i_star = i;
  out.protocol.name = pr.name + "[i=" + std::to_string(i) + "]";
  out.protocol.ell = pr.ell;
  out.protocol.u_size = s.u_size();
  out.protocol.v_size = s.v_size();
  out.protocol.f = [m = pr.alice_membership, i](SampleView u) { return m(u)[i]; };
  out.protocol.g = [m = pr.bob_membership, i](SampleView v) { return m(v)[i]; };
  const EstimateReport& a = ev.alice_rate[i];
  const EstimateReport& b = ev.bob_rate[i];
  if (exact) {
    out.cost = exact_estimate(a.value + b.value);
  } else {
    out.cost = a;
    out.cost.value = a.value + b.value;
    out.cost.ci_low = a.ci_low + b.ci_low;
    out.cost.ci_high = a.ci_high + b.ci_high;
  }
  out.success = ev.per_i[i];
  return out;
}

CollisionProtocol amplify_collision(const CollisionProtocol& pr, unsigned m) {
  if (m < 1) throw DomainError("amplify_collision: m must be >= 1");
  if (m == 1) return pr;
  CollisionProtocol out;
  out.name = "amplify[" + pr.name + "](m=" + std::to_string(m) + ")";
  out.ell = m * pr.ell;
  out.n = pr.n;
  out.max_out = m * pr.max_out;
  const unsigned block = pr.ell;
  auto side = [m, block](std::function<Subset(SampleView, SplitMix64&)> fn) {
    return [m, block, fn = std::move(fn)](SampleView x, SplitMix64& aux) {
      Subset acc;
      for (unsigned j = 0; j < m; ++j) {
        SplitMix64 rep = aux.split();
        const Subset part = fn(x.subspan(std::size_t{j} * block, block), rep);
        Subset merged;
        std::set_union(acc.begin(), acc.end(), part.begin(), part.end(), std::back_inserter(merged));
        acc = std::move(merged);
      }
      return acc;
    };
  };
  out.alice = side(pr.alice);
  out.bob = side(pr.bob);
  if (pr.has_membership()) {
    auto member = [m, block, n = pr.n](std::function<std::vector<double>(SampleView)> fn) {
      return [m, block, n, fn = std::move(fn)](SampleView x) {
        std::vector<double> miss(n, 1.0);
        for (unsigned j = 0; j < m; ++j) {
          const auto part = fn(x.subspan(std::size_t{j} * block, block));
          for (std::uint32_t i = 0; i < n; ++i) miss[i] *= 1.0 - part[i];
        }
        for (double& x : miss) x = 1.0 - x;
        return miss;
      };
    };
    out.alice_membership = member(pr.alice_membership);
    out.bob_membership = member(pr.bob_membership);
  }
  return out;
}

CollisionProtocol scale_domain(const CollisionProtocol& pr, unsigned m) {
  if (m < 1) throw DomainError("scale_domain: m must be >= 1");
  if (m == 1) return pr;
  CollisionProtocol out;
  out.name = "scale[" + pr.name + "](m=" + std::to_string(m) + ")";
  out.ell = m * pr.ell;
  out.n = m * pr.n;
  out.max_out = m * pr.max_out;
  const unsigned block = pr.ell;
  const std::uint32_t n = pr.n;
  auto side = [m, block, n](std::function<Subset(SampleView, SplitMix64&)> fn) {
    return [m, block, n, fn = std::move(fn)](SampleView x, SplitMix64& aux) {
      Subset acc;
      for (unsigned j = 0; j < m; ++j) {
        SplitMix64 rep = aux.split();
        for (auto i : fn(x.subspan(std::size_t{j} * block, block), rep)) acc.push_back(j * n + i);
      }
      return acc;
    };
  };
  out.alice = side(pr.alice);
  out.bob = side(pr.bob);
  if (pr.has_membership()) {
    auto member = [m, block, n](std::function<std::vector<double>(SampleView)> fn) {
      return [m, block, n, fn = std::move(fn)](SampleView x) {
        std::vector<double> all;
        all.reserve(std::size_t{m} * n);
        for (unsigned j = 0; j < m; ++j) {
          const auto part = fn(x.subspan(std::size_t{j} * block, block));
          all.insert(all.end(), part.begin(), part.end());
        }
        return all;
      };
    };
    out.alice_membership = member(pr.alice_membership);
    out.bob_membership = member(pr.bob_membership);
  }
  return out;
}

CollisionProtocol lift_left(const CollisionProtocol& pr, std::uint64_t right_u_size,
                            std::uint64_t right_v_size) {
  CollisionProtocol out = pr;
  out.name = "lift[" + pr.name + "]";
  auto project = [](std::uint64_t right, SampleView x) {
    std::vector<std::uint64_t> left(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) left[k] = x[k] / right;
    return left;
  };
  out.alice = [fn = pr.alice, right_u_size, project](SampleView x, SplitMix64& aux) {
    const auto left = project(right_u_size, x);
    return fn(left, aux);
  };
  out.bob = [fn = pr.bob, right_v_size, project](SampleView x, SplitMix64& aux) {
    const auto left = project(right_v_size, x);
    return fn(left, aux);
  };
  if (pr.has_membership()) {
    out.alice_membership = [fn = pr.alice_membership, right_u_size, project](SampleView x) {
      const auto left = project(right_u_size, x);
      return fn(left);
    };
    out.bob_membership = [fn = pr.bob_membership, right_v_size, project](SampleView x) {
      const auto left = project(right_v_size, x);
      return fn(left);
    };
  }
  return out;
}

unsigned symmetrize_repetitions(double failure) {
  if (!(failure > 0.0 && failure < 1.0)) throw DomainError("symmetrize: failure must lie in (0, 1)");
  const double base = 1.0 / std::exp(1.0) + 0.5;
  const double reps = std::ceil(std::log(failure) / std::log(base));
  return static_cast<unsigned>(std::max(1.0, reps));
}

SymmetrizedProtocol symmetrize(const BipartiteSource& s, std::uint32_t n, double failure) {
  if (n < 1) throw DomainError("symmetrize: n must be >= 1");
  SymmetrizedProtocol out;
  out.repetitions = symmetrize_repetitions(failure);
  out.agreement = best_agreement(s, 1.0 / n);
  const double bound = out.agreement.cost * (1.0 + 1e-9);
  const CollisionProtocol base = collision_from_agreement(out.agreement.protocol, n, bound);
  out.base_max_out = base.max_out;
  out.protocol = amplify_collision(base, out.repetitions);
  out.protocol.name = "symmetrized(n=" + std::to_string(n) + ",reps=" + std::to_string(out.repetitions) + ")";
  return out;
}

}  // namespace corrsim
