#include "corrsim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "corrsim/errors.hpp"

namespace corrsim {

std::vector<double> singular_values(const Matrix& a, const JacobiOptions& opts) {
  // Orthogonalize the columns of the orientation with fewer columns.
  const bool transpose = a.cols > a.rows;
  const std::size_t m = transpose ? a.cols : a.rows;  // column length
  const std::size_t n = transpose ? a.rows : a.cols;  // column count
  std::vector<double> cols(m * n);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (transpose) cols[i * m + j] = a(i, j);
      else cols[j * m + i] = a(i, j);
    }

  std::vector<double> norm2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* c = &cols[j * m];
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += c[k] * c[k];
    norm2[j] = s;
  }
  // columns below this squared norm are roundoff and count as zero
  double frob2 = 0.0;
  for (double x : norm2) frob2 += x;
  const double negligible = frob2 * 1e-30;

  double worst = 0.0;
  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* cp = &cols[p * m];
        double* cq = &cols[q * m];
        const double alpha = norm2[p];
        const double beta = norm2[q];
        if (alpha <= negligible || beta <= negligible) continue;
        double gamma = 0.0;
        for (std::size_t k = 0; k < m; ++k) gamma += cp[k] * cq[k];
        const double coherence = std::abs(gamma) / std::sqrt(alpha * beta);
        worst = std::max(worst, coherence);
        if (coherence <= opts.tol) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        double np = 0.0;
        double nq = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const double x = cp[k];
          const double y = cq[k];
          cp[k] = c * x - s * y;
          cq[k] = s * x + c * y;
          np += cp[k] * cp[k];
          nq += cq[k] * cq[k];
        }
        norm2[p] = np;
        norm2[q] = nq;
      }
    }
    if (worst <= opts.tol) break;
  }
  if (worst > opts.tol) throw NumericError("jacobi svd did not converge", worst);

  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = std::sqrt(norm2[j]);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

}  // namespace corrsim
