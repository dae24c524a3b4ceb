#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <variant>
#include <vector>

#include "corrsim/linalg.hpp"
#include "corrsim/source.hpp"

namespace corrsim {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Maximum correlation

/// rho(u,v) / sqrt(rho_U(u) rho_V(v)) restricted to the marginal supports.
struct CorrelationMatrix {
  Matrix entries;
  std::vector<std::size_t> u_index;  // row -> original u
  std::vector<std::size_t> v_index;  // column -> original v
};

CorrelationMatrix correlation_matrix(const BipartiteSource& s);

struct MaxCorrelation {
  double value = 0.0;
  bool degenerate = false;
  double top_singular_value = 1.0;  // must be 1 within 1e-9
};

/// Second singular value of the correlation matrix, clamped to [0, 1].
/// Degenerate sources report value 0 with the flag set.
MaxCorrelation max_correlation_report(const BipartiteSource& s);
double max_correlation(const BipartiteSource& s);

/// (E f E g + Cor sqrt(Var f Var g)) - E_rho[f g]. Never below -1e-9 for valid inputs.
double correlation_bound_gap(const BipartiteSource& s, std::span<const double> f,
                             std::span<const double> g);

// ---------------------------------------------------------------------------
// Norms, channel, hypercontractivity

/// (E_mu |f|^p)^(1/p); p = kInf gives the max over the support of mu.
double lp_norm(std::span<const cplx> f, std::span<const double> mu, double p);
double lp_norm(std::span<const double> f, std::span<const double> mu, double p);

/// (T f)(v) = sum_u rho(u,v)/rho_V(v) f(u). Entries with rho_V(v) = 0 are set to 0.
std::vector<cplx> apply_channel(const BipartiteSource& s, std::span<const cplx> f);
std::vector<double> apply_channel(const BipartiteSource& s, std::span<const double> f);

struct GridSearch {
  unsigned resolution = 50;  // levels per coordinate
};
struct RandomSearch {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
};
using HcSearch = std::variant<GridSearch, RandomSearch>;

struct HcReport {
  bool holds = true;
  double worst_gap = kInf;        // min over searched f of ||f||_p - ||T f||_q
  std::vector<double> witness;    // minimizer, scaled to ||f||_p = 1
  std::size_t candidates = 0;
};

/// Searches nonnegative f on U for violations of ||T f||_q <= ||f||_p.
/// Evidence only: a passing report is not a proof.
HcReport check_hypercontractive(const BipartiteSource& s, double q, double p,
                                const HcSearch& search);

/// Closed form of ||f||_{3/2}^3 - ||T f||_3^3 on disj for f = (alpha, beta).
double disj_hc_gap(double alpha, double beta);

/// The same quantity computed through lp_norm and apply_channel.
double disj_hc_gap_by_norms(double alpha, double beta);

/// ||f||_{L_p(rho_U)} ||g||_{L_q'(rho_V)} - |E_rho[f g]|.
double check_hoelder(const BipartiteSource& s, double p, double q_prime, std::span<const cplx> f,
                     std::span<const cplx> g);

// ---------------------------------------------------------------------------
// Entropy (base 2, 0 log 0 = 0)

double entropy(std::span<const double> dist);

/// H(X | Y) for a joint over X x Y given as a rows(X) x cols(Y) matrix.
double cond_entropy(const Matrix& joint);

/// I(X; Y) = H(X) + H(Y) - H(XY).
double mutual_info(const Matrix& joint);

/// Joint over X x Y x Z, flattened as ((x * ny) + y) * nz + z.
struct Joint3 {
  std::size_t nx = 0, ny = 0, nz = 0;
  std::vector<double> p;
};

/// I(X; Z | Y) = H(XY) + H(YZ) - H(Y) - H(XYZ).
double cond_mutual_info(const Joint3& j);

/// I(X; YZ) computed by grouping (Y, Z) into one variable.
double mutual_info_x_yz(const Joint3& j);
/// I(X; Y) from the (X, Y) marginal.
double mutual_info_x_y(const Joint3& j);

/// Lower bound H(X) - log(1/Pr[event]) for X uniform on `domain_size` points.
double entropy_given_event(std::uint64_t domain_size, double event_prob);

/// Exact H(X | X in event) for X uniform; the event is a membership mask.
double uniform_entropy_given_event(const std::vector<bool>& event);

}  // namespace corrsim
