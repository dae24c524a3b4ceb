#include "corrsim/io.hpp"

#include <cmath>
#include <fstream>
#include <regex>

#include "corrsim/errors.hpp"

namespace corrsim {

namespace {

double number(const json& j, const char* field) {
  if (!j.is_number()) throw DomainError(std::string("source: field '") + field + "' must be a number");
  return j.get<double>();
}

unsigned small_uint(const json& j, const char* field) {
  if (!j.is_number_unsigned()) throw DomainError(std::string("source: field '") + field + "' must be a nonnegative integer");
  return j.get<unsigned>();
}

}  // namespace

BipartiteSource parse_source_name(const std::string& name) {
  static const std::regex bsc(R"(bsc\(\s*([0-9.eE+-]+)\s*\))");
  static const std::regex sigma(R"(sigma\(\s*(\d+)\s*,\s*(\d+)\s*\))");
  std::smatch m;
  if (name == "perf") return make_perf();
  if (name == "priv") return make_priv();
  if (name == "disj") return make_disj();
  if (std::regex_match(name, m, bsc)) return make_bsc(std::stod(m[1]));
  if (std::regex_match(name, m, sigma))
    return make_sigma(static_cast<unsigned>(std::stoul(m[1])), static_cast<unsigned>(std::stoul(m[2])));
  throw DomainError("unknown source '" + name + "' (expected perf, priv, disj, bsc(p), sigma(m,b) or a JSON file)");
}

BipartiteSource source_from_json(const json& j) {
  if (j.is_string()) return parse_source_name(j.get<std::string>());
  if (!j.is_object()) throw DomainError("source: expected an object or a name");
  if (j.contains("standard")) {
    const json& st = j.at("standard");
    if (st.is_string()) return parse_source_name(st.get<std::string>());
    if (st.is_object() && st.size() == 1) {
      if (st.contains("bsc")) return make_bsc(number(st.at("bsc"), "standard.bsc"));
      if (st.contains("sigma")) {
        const json& sg = st.at("sigma");
        if (!sg.is_object() || !sg.contains("m") || !sg.contains("b"))
          throw DomainError("source: field 'standard.sigma' needs m and b");
        return make_sigma(small_uint(sg.at("m"), "standard.sigma.m"), small_uint(sg.at("b"), "standard.sigma.b"));
      }
    }
    throw DomainError("source: field 'standard' is not a recognised standard source");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "label" && key != "u_size" && key != "v_size" && key != "probs")
      throw DomainError("source: unknown field '" + key + "'");
  }
  if (!j.contains("probs") || !j.at("probs").is_array()) throw DomainError("source: field 'probs' must be a matrix");
  const json& rows = j.at("probs");
  const std::size_t nu = j.contains("u_size") ? small_uint(j.at("u_size"), "u_size") : rows.size();
  if (rows.size() != nu) throw DomainError("source: field 'probs' has " + std::to_string(rows.size()) + " rows, u_size is " + std::to_string(nu));
  std::size_t nv = j.contains("v_size") ? small_uint(j.at("v_size"), "v_size") : (rows.empty() ? 0 : rows[0].size());
  std::vector<double> probs;
  for (std::size_t u = 0; u < nu; ++u) {
    if (!rows[u].is_array() || rows[u].size() != nv)
      throw DomainError("source: field 'probs' row " + std::to_string(u) + " must have v_size entries");
    for (const auto& x : rows[u]) {
      probs.push_back(number(x, "probs"));
    }
  }
  return BipartiteSource(nu, nv, std::move(probs), j.value("label", std::string("custom")));
}

BipartiteSource load_source(const std::string& name_or_path) {
  std::ifstream in(name_or_path);
  if (!in) return parse_source_name(name_or_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DomainError(name_or_path + ": " + e.what());
  }
  return source_from_json(j);
}

json to_json(const BipartiteSource& s) {
  json rows = json::array();
  for (std::size_t u = 0; u < s.u_size(); ++u) {
    json row = json::array();
    for (std::size_t v = 0; v < s.v_size(); ++v) row.push_back(s(u, v));
    rows.push_back(std::move(row));
  }
  return {{"label", s.label()}, {"u_size", s.u_size()}, {"v_size", s.v_size()}, {"probs", std::move(rows)}};
}

json to_json(const EstimateReport& r) {
  return {{"value", r.value}, {"ci_low", r.ci_low}, {"ci_high", r.ci_high}, {"trials", r.trials},
          {"seed", r.seed},   {"mode", to_string(r.mode)}};
}

namespace {
json finite_or_inf(double x) { return std::isinf(x) ? json("inf") : json(x); }
}  // namespace

json to_json(const HcParams& h) {
  return {{"p", h.p}, {"q", finite_or_inf(h.q)}, {"q_prime", finite_or_inf(h.q_prime)}, {"c", h.c}};
}

json to_json(const HcReport& r) {
  return {{"holds", r.holds}, {"worst_gap", finite_or_inf(r.worst_gap)}, {"witness", r.witness}, {"candidates", r.candidates}};
}

json to_json(const BoundCertificate& c) {
  json j{{"kind", to_string(c.kind)}, {"source", c.source}, {"target", c.target}, {"z", c.z}, {"value", c.value}};
  if (c.target == "col") j["n"] = c.n;
  if (c.params) j["params"] = to_json(*c.params);
  if (c.report) j["report"] = to_json(*c.report);
  if (c.kind == BoundKind::correlation) j["cor"] = c.cor;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

json to_json(const SigmaCorReport& r) {
  return {{"m", r.m}, {"b", r.b}, {"measured", r.measured}, {"bound", r.bound}, {"ok", r.ok}};
}

json to_json(const CorShiftReport& r) {
  return {{"z", r.z},           {"cor_sigma", r.cor_sigma}, {"shifted_z", r.shifted_z},
          {"rho_floor", r.rho_floor}, {"achieved", r.achieved}, {"construction", r.construction},
          {"informative", r.informative}, {"ok", r.ok}};
}

json to_json(const OracleResult& r) {
  json j{{"feasible", r.feasible}, {"maps_checked", r.maps_checked}, {"bound_type", "upper bound on col at fixed ell"}};
  if (r.feasible) j["best_size"] = r.best_size;
  return j;
}

json to_json(const ScalingResult& r) {
  json pts = json::array();
  for (const auto& p : r.points)
    pts.push_back({{"n", p.n}, {"p", p.p}, {"achieved_max_out", p.achieved_max_out}, {"hyp_floor", p.hyp_floor},
                   {"cor_floor", p.cor_floor}, {"construction", p.construction}});
  json j{{"source", r.source}, {"points", std::move(pts)}, {"fitted_exponent", r.fitted_exponent},
         {"intercept", r.intercept}, {"r_squared", r.r_squared}, {"reliable", r.reliable}};
  if (r.floor_params) j["floor_params"] = to_json(*r.floor_params);
  return j;
}

json to_json(const InfluenceSummary& r) {
  return {{"trials", r.runs.size()}, {"threshold", r.threshold}, {"pr_la_at_least_threshold", r.pr_la_at_least_threshold},
          {"pr_in_a", r.pr_in_a}, {"pr_in_b", r.pr_in_b}, {"pr_in_both", r.pr_in_both},
          {"max_la", r.max_la}, {"max_lb", r.max_lb}};
}

json to_json(const WitnessSets& w) {
  auto members = [](const std::vector<bool>& m) {
    json a = json::array();
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m[i]) a.push_back(i);
    return a;
  };
  return {{"alice", members(w.alice)}, {"bob", members(w.bob)}, {"gamma", w.gamma},
          {"gamma_prime", w.gamma_prime}, {"delta", w.delta()}};
}

json agreement_to_json(const AgreementProtocol& pr) {
  if (!pr.table_mode()) throw DomainError(pr.name + ": only table-mode protocols serialize");
  return {{"kind", "agreement"}, {"name", pr.name}, {"ell", pr.ell}, {"u_size", pr.u_size}, {"v_size", pr.v_size},
          {"tables", {{"f", *pr.f_table}, {"g", *pr.g_table}}}};
}

AgreementProtocol agreement_from_json(const json& j) {
  if (j.value("kind", std::string{}) != "agreement") throw DomainError("protocol: kind must be 'agreement'");
  try {
    return agreement_from_tables(j.at("ell").get<unsigned>(), j.at("u_size").get<std::size_t>(),
                                 j.at("v_size").get<std::size_t>(), j.at("tables").at("f").get<std::vector<double>>(),
                                 j.at("tables").at("g").get<std::vector<double>>(), j.value("name", std::string("table")));
  } catch (const json::exception& e) {
    throw DomainError(std::string("protocol: ") + e.what());
  }
}

json collision_to_json(const CollisionProtocol& pr, std::size_t u_size, std::size_t v_size) {
  if (!pr.has_membership()) throw DomainError(pr.name + ": only protocols with membership tables serialize");
  auto dump = [&](const std::function<std::vector<double>(SampleView)>& member, std::size_t alphabet) {
    std::size_t size = 1;
    for (unsigned j = 0; j < pr.ell; ++j) size *= alphabet;
    json out = json::array();
    std::vector<std::uint64_t> tuple(pr.ell, 0);
    for (std::size_t idx = 0; idx < size; ++idx) {
      std::size_t rest = idx;
      for (unsigned j = pr.ell; j-- > 0;) {
        tuple[j] = rest % alphabet;
        rest /= alphabet;
      }
      json sub = json::array();
      const auto m = member(tuple);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] != 0.0 && m[i] != 1.0) throw DomainError(pr.name + ": randomized protocols do not serialize");
        if (m[i] == 1.0) sub.push_back(i);
      }
      out.push_back(std::move(sub));
    }
    return out;
  };
  return {{"kind", "collision"}, {"name", pr.name}, {"ell", pr.ell}, {"n", pr.n}, {"u_size", u_size}, {"v_size", v_size},
          {"tables", {{"a", dump(pr.alice_membership, u_size)}, {"b", dump(pr.bob_membership, v_size)}}}};
}

CollisionProtocol collision_from_json(const json& j) {
  if (j.value("kind", std::string{}) != "collision") throw DomainError("protocol: kind must be 'collision'");
  try {
    return collision_from_tables(j.at("ell").get<unsigned>(), j.at("n").get<std::uint32_t>(),
                                 j.at("u_size").get<std::size_t>(), j.at("v_size").get<std::size_t>(),
                                 j.at("tables").at("a").get<std::vector<Subset>>(),
                                 j.at("tables").at("b").get<std::vector<Subset>>(), j.value("name", std::string("table")));
  } catch (const json::exception& e) {
    throw DomainError(std::string("protocol: ") + e.what());
  }
}

}  // namespace corrsim
