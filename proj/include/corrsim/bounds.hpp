#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "corrsim/collision.hpp"
#include "corrsim/measures.hpp"
#include "corrsim/source.hpp"

namespace corrsim {

/// Exponents for a q-to-p hypercontractive source: 1/q + 1/q' = 1, 1/c = 1/p + 1/q'.
struct HcParams {
  double p = 1.0;
  double q = 1.0;
  double q_prime = kInf;
  double c = 1.0;

  static HcParams from(double p, double q);
};

/// (p^(1/p) q'^(1/q') z)^c / c. Requires 1 <= p <= q and z in [0, 1].
double hyp_lower_bound(double p, double q, double z);

/// sqrt(max(0, z - cor)).
double cor_lower_bound(double z, double cor);

enum class BoundKind { hypercontractive, correlation, oracle };
const char* to_string(BoundKind kind);

struct BoundCertificate {
  BoundKind kind = BoundKind::correlation;
  std::string source;
  std::string target;  // "agr" or "col"
  double z = 0.0;      // success level (agr) or collision level p (col)
  std::uint32_t n = 0; // col only
  double value = 0.0;
  std::optional<HcParams> params;
  std::optional<HcReport> report;  // attached for the hypercontractive kind
  double cor = 0.0;
  std::string note;
};

/// A hypercontractivity exponent pair that passed the numerical search.
struct HcCertificate {
  HcParams params;
  HcReport report;
  bool analytic = false;  // disj at (3, 3/2) has a closed-form proof
};

/// Tries (q, p) in {(inf, 1), (4, 4/3), (3, 3/2), (2, 2)} and keeps those whose
/// search finds no violation. Grid search for supports up to 4 points, random
/// search beyond. Evidence, not proof, except where `analytic` is set.
std::vector<HcCertificate> certify_hypercontractivity(const BipartiteSource& s,
                                                      std::uint64_t seed = 0);

/// Lower bounds on agr at success z: one per hypercontractive certificate plus
/// the correlation bound.
std::vector<BoundCertificate> agreement_certificates(const BipartiteSource& s, double z,
                                                     const std::vector<HcCertificate>& hc);
std::vector<BoundCertificate> agreement_certificates(const BipartiteSource& s, double z);

/// Largest certified agreement lower bound.
double agreement_floor(const BipartiteSource& s, double z, const std::vector<HcCertificate>& hc);

/// Lower bounds on the smallest max output size of a collision protocol at (n, p),
/// via k >= n agr(p) / 2.
std::vector<BoundCertificate> collision_certificates(const BipartiteSource& s, std::uint32_t n,
                                                     double p, const std::vector<HcCertificate>& hc);
double collision_floor(const BipartiteSource& s, std::uint32_t n, double p,
                       const std::vector<HcCertificate>& hc);

struct SigmaCorReport {
  unsigned m = 0;
  unsigned b = 0;
  double measured = 0.0;
  double bound = 0.0;  // 2^(1 - m/2)
  bool ok = false;
};

/// Requires 2 <= m <= 11.
SigmaCorReport verify_sigma_cor(unsigned m, unsigned b);

struct CorShiftReport {
  double z = 0.0;
  double cor_sigma = 0.0;
  double shifted_z = 0.0;      // z - Cor(sigma)
  double rho_floor = 0.0;      // certified agr_rho(shifted_z)
  double achieved = 0.0;       // best construction cost on rho (x) sigma at z
  std::string construction;
  bool informative = false;    // false when z <= Cor(sigma)
  bool ok = false;             // achieved >= rho_floor - 1e-9
};

CorShiftReport verify_cor_to_agr_shift(const BipartiteSource& rho, const BipartiteSource& sigma,
                                       double z, std::size_t budget = kDefaultDenseBudget);

struct OracleResult {
  bool feasible = false;
  std::size_t best_size = 0;
  std::optional<CollisionProtocol> best_protocol;
  std::size_t maps_checked = 0;
};

/// Exhaustive search over deterministic (A, B) on marginal-support l-tuples with
/// outputs of size <= k, for k = 0..k_max in turn; the first k with a protocol
/// meeting Pr[i in A cap B] >= p for all i wins. Subsets are visited in colex
/// order and the first protocol found is returned. CapacityError if the largest
/// search space exceeds 1e8 pairs of maps.
OracleResult brute_force_col(const BipartiteSource& s, std::uint32_t n, double p, unsigned ell,
                             std::size_t k_max, double budget = 1e8);

struct ScalingPoint {
  std::uint32_t n = 0;
  double p = 0.0;
  std::size_t achieved_max_out = 0;
  double hyp_floor = 0.0;
  double cor_floor = 0.0;
  std::string construction;
};

struct ScalingResult {
  std::string source;
  std::vector<ScalingPoint> points;
  double fitted_exponent = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  bool reliable = false;  // at least 5 sizes and r^2 >= 0.9
  std::optional<HcParams> floor_params;  // certified pair with the smallest c
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;  // 1 when the response is constant
};
LogLogFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

/// Collision protocols valid at p = 1/n: birthday with k = ceil(sqrt n) for
/// product sources, otherwise collision_from_agreement over best_agreement at
/// success 2/n, so the halving in the conversion still leaves 1/n.
ScalingResult scaling_experiment(const BipartiteSource& s, const std::vector<std::uint32_t>& n_values,
                                 std::uint64_t seed);

/// Columns: n, p, achieved_max_out, hyp_floor, cor_floor.
void write_scaling_csv(std::ostream& out, const ScalingResult& r);

}  // namespace corrsim
