#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "corrsim/errors.hpp"
#include "corrsim/source.hpp"

namespace corrsim::detail {

/// Number of support tuples of rho^{(x) ell}, saturating at +inf.
inline double support_tuple_count(const BipartiteSource& s, unsigned ell) {
  return std::pow(static_cast<double>(s.support().size()), static_cast<double>(ell));
}

/// Calls fn(u_tuple, v_tuple, weight) for every support tuple of rho^{(x) ell}.
template <class Fn>
void for_each_support_tuple(const BipartiteSource& s, unsigned ell, std::size_t budget, Fn&& fn,
                            const char* who) {
  const auto supp = s.support();
  if (support_tuple_count(s, ell) > static_cast<double>(budget)) {
    throw CapacityError(std::string(who) + ": exact evaluation needs " +
                        std::to_string(support_tuple_count(s, ell)) +
                        " terms, over the budget; use Monte Carlo mode");
  }
  std::vector<std::size_t> digit(ell, 0);
  std::vector<std::uint64_t> u(ell), v(ell);
  while (true) {
    double w = 1.0;
    for (unsigned i = 0; i < ell; ++i) {
      const auto [a, b] = supp[digit[i]];
      u[i] = a;
      v[i] = b;
      w *= s(a, b);
    }
    fn(std::span<const std::uint64_t>(u), std::span<const std::uint64_t>(v), w);
    unsigned k = ell;
    while (k > 0) {
      --k;
      if (++digit[k] < supp.size()) break;
      digit[k] = 0;
      if (k == 0) return;
    }
    if (ell == 0) return;
  }
}

}  // namespace corrsim::detail
