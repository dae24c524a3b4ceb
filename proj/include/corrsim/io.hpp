#pragma once

#include <string>

#include "json.hpp"

#include "corrsim/agreement.hpp"
#include "corrsim/bounds.hpp"
#include "corrsim/collision.hpp"
#include "corrsim/estimate.hpp"
#include "corrsim/measures.hpp"
#include "corrsim/smp.hpp"
#include "corrsim/source.hpp"

namespace corrsim {

using json = nlohmann::json;

/// Accepts {"label", "u_size", "v_size", "probs": [[...], ...]}, {"standard": "disj"},
/// {"standard": {"bsc": 0.2}}, {"standard": {"sigma": {"m": 8, "b": 0}}}, or a bare
/// string name (see parse_source_name). Throws DomainError naming the bad field.
BipartiteSource source_from_json(const json& j);

/// "perf", "priv", "disj", "bsc(0.2)", "sigma(8,0)".
BipartiteSource parse_source_name(const std::string& name);

/// A standard name, or a path to a JSON source file.
BipartiteSource load_source(const std::string& name_or_path);

json to_json(const BipartiteSource& s);
json to_json(const EstimateReport& r);
json to_json(const HcParams& h);
json to_json(const HcReport& r);
json to_json(const BoundCertificate& c);
json to_json(const SigmaCorReport& r);
json to_json(const CorShiftReport& r);
json to_json(const OracleResult& r);
json to_json(const ScalingResult& r);
json to_json(const InfluenceSummary& r);
json to_json(const WitnessSets& w);

/// Table-mode protocols: {"kind": "agreement", "ell", "u_size", "v_size",
/// "tables": {"f": [...], "g": [...]}}.
json agreement_to_json(const AgreementProtocol& pr);
AgreementProtocol agreement_from_json(const json& j);

/// {"kind": "collision", "ell", "n", "u_size", "v_size", "tables": {"a": [[...]], "b": [[...]]}};
/// requires membership functions with 0/1 values (deterministic protocols).
json collision_to_json(const CollisionProtocol& pr, std::size_t u_size, std::size_t v_size);
CollisionProtocol collision_from_json(const json& j);

}  // namespace corrsim
