#include "corrsim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrsim/errors.hpp"

namespace corrsim {

CorrelationMatrix correlation_matrix(const BipartiteSource& s) {
  const Marginals m = marginals(s);
  CorrelationMatrix cm;
  for (std::size_t u = 0; u < s.u_size(); ++u)
    if (m.u[u] > 0.0) cm.u_index.push_back(u);
  for (std::size_t v = 0; v < s.v_size(); ++v)
    if (m.v[v] > 0.0) cm.v_index.push_back(v);
  cm.entries = Matrix(cm.u_index.size(), cm.v_index.size());
  for (std::size_t i = 0; i < cm.u_index.size(); ++i)
    for (std::size_t j = 0; j < cm.v_index.size(); ++j) {
      const std::size_t u = cm.u_index[i];
      const std::size_t v = cm.v_index[j];
      cm.entries(i, j) = s(u, v) / std::sqrt(m.u[u] * m.v[v]);
    }
  return cm;
}

MaxCorrelation max_correlation_report(const BipartiteSource& s) {
  MaxCorrelation out;
  const CorrelationMatrix cm = correlation_matrix(s);
  if (cm.u_index.size() < 2 || cm.v_index.size() < 2) {
    out.degenerate = true;
    return out;
  }
  const std::vector<double> sv = singular_values(cm.entries);
  out.top_singular_value = sv[0];
  out.value = std::clamp(sv[1], 0.0, 1.0);
  return out;
}

double max_correlation(const BipartiteSource& s) { return max_correlation_report(s).value; }

double correlation_bound_gap(const BipartiteSource& s, std::span<const double> f,
                             std::span<const double> g) {
  if (f.size() != s.u_size() || g.size() != s.v_size())
    throw DomainError("correlation_bound_gap: table sizes must match U and V");
  const Marginals m = marginals(s);
  double ef = 0.0, ef2 = 0.0, eg = 0.0, eg2 = 0.0, efg = 0.0;
  for (std::size_t u = 0; u < s.u_size(); ++u) {
    ef += m.u[u] * f[u];
    ef2 += m.u[u] * f[u] * f[u];
  }
  for (std::size_t v = 0; v < s.v_size(); ++v) {
    eg += m.v[v] * g[v];
    eg2 += m.v[v] * g[v] * g[v];
  }
  for (std::size_t u = 0; u < s.u_size(); ++u)
    for (std::size_t v = 0; v < s.v_size(); ++v) efg += s(u, v) * f[u] * g[v];
  const double var_f = std::max(0.0, ef2 - ef * ef);
  const double var_g = std::max(0.0, eg2 - eg * eg);
  return ef * eg + max_correlation(s) * std::sqrt(var_f * var_g) - efg;
}

namespace {

template <class T>
double lp_norm_impl(std::span<const T> f, std::span<const double> mu, double p) {
  if (f.size() != mu.size()) throw DomainError("lp_norm: f and mu must have equal length");
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1 or infinity");
  if (std::isinf(p)) {
    double best = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (mu[i] > 0.0) best = std::max(best, std::abs(f[i]));
    return best;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (mu[i] > 0.0) acc += mu[i] * std::pow(std::abs(f[i]), p);
  return std::pow(acc, 1.0 / p);
}

template <class T>
std::vector<T> apply_channel_impl(const BipartiteSource& s, std::span<const T> f) {
  if (f.size() != s.u_size()) throw DomainError("apply_channel: f must be indexed by U");
  const Marginals m = marginals(s);
  std::vector<T> out(s.v_size(), T{});
  for (std::size_t v = 0; v < s.v_size(); ++v) {
    if (m.v[v] <= 0.0) continue;
    T acc{};
    for (std::size_t u = 0; u < s.u_size(); ++u) acc += (s(u, v) / m.v[v]) * f[u];
    out[v] = acc;
  }
  return out;
}

}  // namespace

double lp_norm(std::span<const cplx> f, std::span<const double> mu, double p) {
  return lp_norm_impl(f, mu, p);
}
double lp_norm(std::span<const double> f, std::span<const double> mu, double p) {
  return lp_norm_impl(f, mu, p);
}

std::vector<cplx> apply_channel(const BipartiteSource& s, std::span<const cplx> f) {
  return apply_channel_impl(s, f);
}
std::vector<double> apply_channel(const BipartiteSource& s, std::span<const double> f) {
  return apply_channel_impl(s, f);
}

HcReport check_hypercontractive(const BipartiteSource& s, double q, double p,
                                const HcSearch& search) {
  if (!(p >= 1.0 && q >= p)) throw DomainError("check_hypercontractive: need 1 <= p <= q");
  const Marginals m = marginals(s);
  std::vector<std::size_t> supp;
  for (std::size_t u = 0; u < s.u_size(); ++u)
    if (m.u[u] > 0.0) supp.push_back(u);

  HcReport report;
  std::vector<double> f(s.u_size(), 0.0);
  auto consider = [&] {
    const double norm = lp_norm(std::span<const double>(f), m.u, p);
    if (norm <= 0.0) return;
    for (double& x : f) x /= norm;
    const std::vector<double> tf = apply_channel(s, std::span<const double>(f));
    const double gap = 1.0 - lp_norm(std::span<const double>(tf), m.v, q);
    ++report.candidates;
    if (gap < report.worst_gap) {
      report.worst_gap = gap;
      report.witness = f;
    }
  };

  // Point indicators are always tried.
  for (std::size_t u : supp) {
    std::fill(f.begin(), f.end(), 0.0);
    f[u] = 1.0;
    consider();
  }

  if (const auto* grid = std::get_if<GridSearch>(&search)) {
    const std::size_t levels = grid->resolution + 1;
    double total = 1.0;
    for (std::size_t i = 0; i < supp.size(); ++i) total *= static_cast<double>(levels);
    if (total > 1e7) throw CapacityError("check_hypercontractive: grid has more than 1e7 points");
    std::vector<std::size_t> digit(supp.size(), 0);
    while (true) {
      std::size_t k = 0;
      while (k < digit.size() && ++digit[k] == levels) digit[k++] = 0;
      if (k == digit.size()) break;
      std::fill(f.begin(), f.end(), 0.0);
      for (std::size_t i = 0; i < supp.size(); ++i)
        f[supp[i]] = static_cast<double>(digit[i]) / static_cast<double>(grid->resolution);
      consider();
    }
  } else {
    const auto& rnd = std::get<RandomSearch>(search);
    SplitMix64 rng(rnd.seed);
    for (std::size_t t = 0; t < rnd.trials; ++t) {
      std::fill(f.begin(), f.end(), 0.0);
      for (std::size_t u : supp) f[u] = -std::log1p(-rng.uniform());
      consider();
    }
  }
  report.holds = report.worst_gap >= -1e-10;
  return report;
}

double disj_hc_gap(double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0) throw DomainError("disj_hc_gap: alpha, beta must be >= 0");
  const double d = std::sqrt(alpha) - std::sqrt(beta);
  return d * d * d * d * (alpha + 4.0 * std::sqrt(alpha * beta) + beta) / 36.0;
}

double disj_hc_gap_by_norms(double alpha, double beta) {
  static const BipartiteSource disj = make_disj();
  static const Marginals m = marginals(disj);
  const double f[2] = {alpha, beta};
  const std::vector<double> tf = apply_channel(disj, std::span<const double>(f));
  const double lhs = std::pow(lp_norm(std::span<const double>(f), m.u, 1.5), 3.0);
  const double rhs = std::pow(lp_norm(std::span<const double>(tf), m.v, 3.0), 3.0);
  return lhs - rhs;
}

double check_hoelder(const BipartiteSource& s, double p, double q_prime, std::span<const cplx> f,
                     std::span<const cplx> g) {
  if (f.size() != s.u_size() || g.size() != s.v_size())
    throw DomainError("check_hoelder: table sizes must match U and V");
  const Marginals m = marginals(s);
  cplx efg{};
  for (std::size_t u = 0; u < s.u_size(); ++u)
    for (std::size_t v = 0; v < s.v_size(); ++v) efg += s(u, v) * f[u] * g[v];
  return lp_norm(f, m.u, p) * lp_norm(g, m.v, q_prime) - std::abs(efg);
}

double entropy(std::span<const double> dist) {
  double h = 0.0;
  for (double x : dist)
    if (x > 0.0) h -= x * std::log2(x);
  return h;
}

namespace {

std::vector<double> row_sums(const Matrix& j) {
  std::vector<double> r(j.rows, 0.0);
  for (std::size_t i = 0; i < j.rows; ++i)
    for (std::size_t k = 0; k < j.cols; ++k) r[i] += j(i, k);
  return r;
}

std::vector<double> col_sums(const Matrix& j) {
  std::vector<double> c(j.cols, 0.0);
  for (std::size_t i = 0; i < j.rows; ++i)
    for (std::size_t k = 0; k < j.cols; ++k) c[k] += j(i, k);
  return c;
}

}  // namespace

double cond_entropy(const Matrix& joint) {
  return entropy(joint.data) - entropy(col_sums(joint));
}

double mutual_info(const Matrix& joint) {
  return entropy(row_sums(joint)) + entropy(col_sums(joint)) - entropy(joint.data);
}

namespace {

// Marginal over the kept axes of a 3-way joint.
std::vector<double> marginal3(const Joint3& j, bool keep_x, bool keep_y, bool keep_z) {
  const std::size_t sx = keep_x ? j.nx : 1, sy = keep_y ? j.ny : 1, sz = keep_z ? j.nz : 1;
  std::vector<double> out(sx * sy * sz, 0.0);
  for (std::size_t x = 0; x < j.nx; ++x)
    for (std::size_t y = 0; y < j.ny; ++y)
      for (std::size_t z = 0; z < j.nz; ++z) {
        const std::size_t ix = keep_x ? x : 0, iy = keep_y ? y : 0, iz = keep_z ? z : 0;
        out[(ix * sy + iy) * sz + iz] += j.p[(x * j.ny + y) * j.nz + z];
      }
  return out;
}

}  // namespace

double cond_mutual_info(const Joint3& j) {
  return entropy(marginal3(j, true, true, false)) + entropy(marginal3(j, false, true, true)) -
         entropy(marginal3(j, false, true, false)) - entropy(j.p);
}

double mutual_info_x_yz(const Joint3& j) {
  return entropy(marginal3(j, true, false, false)) + entropy(marginal3(j, false, true, true)) -
         entropy(j.p);
}

double mutual_info_x_y(const Joint3& j) {
  return entropy(marginal3(j, true, false, false)) + entropy(marginal3(j, false, true, false)) -
         entropy(marginal3(j, true, true, false));
}

double entropy_given_event(std::uint64_t domain_size, double event_prob) {
  if (!(event_prob > 0.0 && event_prob <= 1.0))
    throw DomainError("entropy_given_event: event probability must lie in (0, 1]");
  if (domain_size == 0) throw DomainError("entropy_given_event: empty domain");
  return std::log2(static_cast<double>(domain_size)) - std::log2(1.0 / event_prob);
}

double uniform_entropy_given_event(const std::vector<bool>& event) {
  const auto hits = std::count(event.begin(), event.end(), true);
  if (hits == 0) throw DomainError("uniform_entropy_given_event: event is empty");
  return std::log2(static_cast<double>(hits));
}

}  // namespace corrsim
