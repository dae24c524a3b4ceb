#include "corrsim/source.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "corrsim/errors.hpp"

namespace corrsim {

namespace {

constexpr double kNormTol = 1e-12;

void check_budget(std::size_t rows, std::size_t cols, std::size_t budget, const char* what) {
  if (rows != 0 && cols > budget / rows) {
    throw CapacityError(std::string(what) + ": dense matrix " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " exceeds budget of " + std::to_string(budget) +
                        " entries");
  }
}

}  // namespace

BipartiteSource::BipartiteSource(std::size_t u_size, std::size_t v_size, std::vector<double> probs,
                                 std::string label)
    : u_size_(u_size), v_size_(v_size), probs_(std::move(probs)), label_(std::move(label)) {
  if (u_size_ == 0 || v_size_ == 0) throw DomainError("source: u_size and v_size must be >= 1");
  if (probs_.size() != u_size_ * v_size_) {
    throw DomainError("source: expected " + std::to_string(u_size_ * v_size_) + " entries, got " +
                      std::to_string(probs_.size()));
  }
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("source: entries must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > kNormTol) {
    throw DomainError("source: normalization violated, entries sum to " + std::to_string(total));
  }
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> BipartiteSource::support() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  for (std::size_t u = 0; u < u_size_; ++u)
    for (std::size_t v = 0; v < v_size_; ++v)
      if ((*this)(u, v) > 0.0) out.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v));
  return out;
}

BipartiteSource make_perf() { return {2, 2, {0.5, 0.0, 0.0, 0.5}, "perf"}; }

BipartiteSource make_priv() { return {2, 2, {0.25, 0.25, 0.25, 0.25}, "priv"}; }

BipartiteSource make_disj() {
  const double t = 1.0 / 3.0;
  return {2, 2, {t, t, t, 0.0}, "disj"};
}

namespace {
std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}
}  // namespace

BipartiteSource make_bsc(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bsc: crossover must lie in [0, 1]");
  const double same = (1.0 - p) / 2.0;
  const double diff = p / 2.0;
  return {2, 2, {same, diff, diff, same}, "bsc(" + shortest(p) + ")"};
}

BipartiteSource make_sigma(unsigned m, unsigned b, std::size_t budget) {
  if (m < 2) throw DomainError("sigma: m must be >= 2");
  if (b > 1) throw DomainError("sigma: b must be 0 or 1");
  if (m >= 32) throw CapacityError("sigma: m = " + std::to_string(m) + " has no dense form");
  const std::size_t side = std::size_t{1} << m;
  check_budget(side, side, budget, "sigma");
  // Number of pairs with u.v = b.
  const double half = std::ldexp(1.0, static_cast<int>(2 * m - 1));
  const double corr = std::ldexp(1.0, static_cast<int>(m - 1));
  const double count = b == 0 ? half + corr : half - corr;
  const double w = 1.0 / count;
  std::vector<double> probs(side * side, 0.0);
  for (std::size_t u = 0; u < side; ++u)
    for (std::size_t v = 0; v < side; ++v)
      if (dot2(u, v) == b) probs[u * side + v] = w;
  return {side, side, std::move(probs),
          "sigma(" + std::to_string(m) + "," + std::to_string(b) + ")"};
}

BipartiteSource make_standard(const StandardSpec& spec, std::size_t budget) {
  switch (spec.kind) {
    case StandardKind::perf: return make_perf();
    case StandardKind::priv: return make_priv();
    case StandardKind::disj: return make_disj();
    case StandardKind::bsc: return make_bsc(spec.p);
    case StandardKind::sigma: return make_sigma(spec.m, spec.b, budget);
  }
  throw DomainError("unknown standard source");
}

BipartiteSource tensor(const BipartiteSource& a, const BipartiteSource& b, std::size_t budget) {
  const std::size_t nu = a.u_size() * b.u_size();
  const std::size_t nv = a.v_size() * b.v_size();
  check_budget(nu, nv, budget, "tensor");
  std::vector<double> probs(nu * nv);
  for (std::size_t u = 0; u < a.u_size(); ++u)
    for (std::size_t u2 = 0; u2 < b.u_size(); ++u2)
      for (std::size_t v = 0; v < a.v_size(); ++v)
        for (std::size_t v2 = 0; v2 < b.v_size(); ++v2)
          probs[(u * b.u_size() + u2) * nv + v * b.v_size() + v2] = a(u, v) * b(u2, v2);
  return {nu, nv, std::move(probs), a.label() + "*" + b.label()};
}

BipartiteSource tensor_power(const BipartiteSource& s, unsigned t, std::size_t budget) {
  if (t == 0) return {1, 1, {1.0}, "trivial"};
  BipartiteSource out = s;
  for (unsigned i = 1; i < t; ++i) out = tensor(out, s, budget);
  return out;
}

BipartiteSource product_source(const std::vector<double>& pu, const std::vector<double>& pv,
                               std::string label) {
  std::vector<double> probs(pu.size() * pv.size());
  for (std::size_t u = 0; u < pu.size(); ++u)
    for (std::size_t v = 0; v < pv.size(); ++v) probs[u * pv.size() + v] = pu[u] * pv[v];
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;
  return {pu.size(), pv.size(), std::move(probs), std::move(label)};
}

Marginals marginals(const BipartiteSource& s) {
  Marginals m{std::vector<double>(s.u_size(), 0.0), std::vector<double>(s.v_size(), 0.0)};
  for (std::size_t u = 0; u < s.u_size(); ++u)
    for (std::size_t v = 0; v < s.v_size(); ++v) {
      m.u[u] += s(u, v);
      m.v[v] += s(u, v);
    }
  return m;
}

bool is_product(const BipartiteSource& s, double tol) {
  if (tol < 0.0) throw DomainError("is_product: tol must be >= 0");
  const Marginals m = marginals(s);
  for (std::size_t u = 0; u < s.u_size(); ++u)
    for (std::size_t v = 0; v < s.v_size(); ++v)
      if (std::abs(s(u, v) - m.u[u] * m.v[v]) > tol) return false;
  return true;
}

bool is_degenerate(const BipartiteSource& s) {
  const Marginals m = marginals(s);
  auto support_size = [](const std::vector<double>& d) {
    return std::count_if(d.begin(), d.end(), [](double x) { return x > 0.0; });
  };
  return support_size(m.u) <= 1 || support_size(m.v) <= 1;
}

bool same_distribution(const BipartiteSource& a, const BipartiteSource& b, double tol) {
  if (a.u_size() != b.u_size() || a.v_size() != b.v_size()) return false;
  for (std::size_t i = 0; i < a.probs().size(); ++i)
    if (std::abs(a.probs()[i] - b.probs()[i]) > tol) return false;
  return true;
}

PairSampler::PairSampler(const BipartiteSource& s) : u_size_(s.u_size()), v_size_(s.v_size()) {
  Dense d;
  d.pairs = s.support();
  d.cdf.reserve(d.pairs.size());
  double acc = 0.0;
  for (auto [u, v] : d.pairs) {
    acc += s(u, v);
    d.cdf.push_back(acc);
  }
  for (double& c : d.cdf) c /= acc;
  d.cdf.back() = 1.0;
  impl_ = std::move(d);
}

PairSampler PairSampler::sigma(unsigned m, unsigned b) {
  if (m < 2 || m > 64) throw DomainError("sigma sampler: m must lie in [2, 64]");
  if (b > 1) throw DomainError("sigma sampler: b must be 0 or 1");
  PairSampler out;
  // Pr[u = 0] = 2^m / (2^{2m-1} + 2^{m-1}) = 2 / (2^m + 1) when b = 0; u = 0 is impossible when b = 1.
  const double p_zero = b == 0 ? 2.0 / (std::ldexp(1.0, static_cast<int>(m)) + 1.0) : 0.0;
  out.impl_ = Sigma{m, b, p_zero};
  const std::uint64_t side = m == 64 ? 0 : (std::uint64_t{1} << m);  // 0 encodes 2^64
  out.u_size_ = side;
  out.v_size_ = side;
  return out;
}

std::pair<std::uint64_t, std::uint64_t> PairSampler::draw(SplitMix64& rng) const {
  if (const auto* d = std::get_if<Dense>(&impl_)) {
    const double x = rng.uniform();
    auto it = std::upper_bound(d->cdf.begin(), d->cdf.end(), x);
    if (it == d->cdf.end()) --it;
    return d->pairs[static_cast<std::size_t>(it - d->cdf.begin())];
  }
  const auto& sg = std::get<Sigma>(impl_);
  const std::uint64_t mask = sg.m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << sg.m) - 1;
  std::uint64_t u = 0;
  if (sg.b == 1 || !rng.bernoulli(sg.p_zero)) {
    if (sg.m == 64) {
      do u = rng(); while (u == 0);
    } else {
      u = rng.below(mask) + 1;
    }
  }
  std::uint64_t v = rng() & mask;
  if (u != 0 && dot2(u, v) != sg.b) v ^= u & (~u + 1);
  return {u, v};
}

SampleBatch sample(const PairSampler& sampler, std::size_t count, std::uint64_t seed) {
  SampleBatch batch;
  batch.count = count;
  batch.seed = seed;
  batch.u_values.reserve(count);
  batch.v_values.reserve(count);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    auto [u, v] = sampler.draw(rng);
    batch.u_values.push_back(u);
    batch.v_values.push_back(v);
  }
  return batch;
}

SampleBatch sample(const BipartiteSource& s, std::size_t count, std::uint64_t seed) {
  return sample(PairSampler(s), count, seed);
}

}  // namespace corrsim
