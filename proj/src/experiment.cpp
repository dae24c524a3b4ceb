#include "corrsim/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "corrsim/rng.hpp"

#ifndef CORRSIM_VERSION
#define CORRSIM_VERSION "0.0.0"
#endif

namespace corrsim {

const char* version() { return CORRSIM_VERSION; }

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::equality: return "equality";
    case ExperimentKind::gapip: return "gapip";
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::scaling: return "scaling";
    case ExperimentKind::measures: return "measures";
    case ExperimentKind::oracle: return "oracle";
    case ExperimentKind::agreement: return "agreement";
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out = "invalid config:";
  for (const auto& l : lines) out += "\n  " + l;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : DomainError(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

// ---------------------------------------------------------------------------
// Schema

namespace {

enum class FieldType { uint, number, boolean, string, uint_list };

struct Field {
  const char* key;
  FieldType type;
  json fallback;  // null: no default (optional or computed)
};

const char* type_name(FieldType t) {
  switch (t) {
    case FieldType::uint: return "a nonnegative integer";
    case FieldType::number: return "a number";
    case FieldType::boolean: return "a boolean";
    case FieldType::string: return "a string";
    case FieldType::uint_list: return "a list of nonnegative integers";
  }
  return "?";
}

bool has_type(const json& v, FieldType t) {
  switch (t) {
    case FieldType::uint: return v.is_number_unsigned();
    case FieldType::number: return v.is_number();
    case FieldType::boolean: return v.is_boolean();
    case FieldType::string: return v.is_string();
    case FieldType::uint_list:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_unsigned(); });
  }
  return false;
}

const std::map<ExperimentKind, std::vector<Field>>& schema() {
  static const std::map<ExperimentKind, std::vector<Field>> table{
      {ExperimentKind::equality,
       {{"n", FieldType::uint, 8}, {"error", FieldType::number, 1.0 / 3}, {"x", FieldType::uint, 5}, {"y", FieldType::uint, 6}}},
      {ExperimentKind::gapip,
       {{"n", FieldType::uint, 27},
        {"m", FieldType::uint, nullptr},
        {"b_values", FieldType::uint_list, json::array({0, 1})},
        {"instances", FieldType::uint, 3}}},
      {ExperimentKind::simulate,
       {{"base", FieldType::string, "eq-perf"},
        {"n", FieldType::uint, 8},
        {"hashes", FieldType::uint, 2},
        {"table_size", FieldType::uint, nullptr},
        {"table_seed", FieldType::uint, 7},
        {"eps", FieldType::number, 1.0 / 3},
        {"x", FieldType::uint, 77},
        {"y", FieldType::uint, 78}}},
      {ExperimentKind::scaling, {{"n_values", FieldType::uint_list, json::array({8, 16, 32, 64, 128, 256, 512})}}},
      {ExperimentKind::measures, {{"hc", FieldType::boolean, false}}},
      {ExperimentKind::oracle,
       {{"n", FieldType::uint, 2}, {"p", FieldType::number, 0.5}, {"ell", FieldType::uint, 1}, {"k_max", FieldType::uint, 2}}},
      {ExperimentKind::agreement,
       {{"p", FieldType::number, nullptr}, {"ell", FieldType::uint, nullptr}, {"iters", FieldType::uint, 200}}},
  };
  return table;
}

std::optional<ExperimentKind> parse_kind(const std::string& name) {
  for (auto k : {ExperimentKind::equality, ExperimentKind::gapip, ExperimentKind::simulate, ExperimentKind::scaling,
                 ExperimentKind::measures, ExperimentKind::oracle, ExperimentKind::agreement})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

const std::vector<std::string>& standard_sources() {
  static const std::vector<std::string> names{"perf", "priv", "disj", "bsc(0.1)", "bsc(0.25)", "bsc(0.4)"};
  return names;
}

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ExperimentConfig validate_config(std::string_view raw) {
  json j;
  try {
    j = json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    // byte is one past the offending character
    const auto [line, col] = line_col(raw, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError({"parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                       e.what()});
  }
  return validate_config_json(j);
}

ExperimentConfig validate_config_json(const json& j) {
  std::vector<std::string> diag;
  if (!j.is_object()) throw ConfigError({"top level must be an object"});

  ExperimentConfig cfg;
  if (!j.contains("experiment") || !j.at("experiment").is_string()) {
    throw ConfigError({"experiment: required, one of equality, gapip, simulate, scaling, measures, oracle, agreement"});
  }
  const auto kind = parse_kind(j.at("experiment").get<std::string>());
  if (!kind) throw ConfigError({"experiment: unknown kind '" + j.at("experiment").get<std::string>() + "'"});
  cfg.kind = *kind;
  const auto& fields = schema().at(cfg.kind);

  json echo = json::object();
  echo["experiment"] = to_string(cfg.kind);

  const bool takes_source = cfg.kind != ExperimentKind::gapip;
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") continue;
    if (key == "trials") {
      if (!value.is_number_integer() || value.get<long long>() < 0)
        diag.push_back("trials: must be a nonnegative integer");
      else
        cfg.trials = value.get<std::size_t>();
      continue;
    }
    if (key == "seed") {
      if (!value.is_number_unsigned())
        diag.push_back("seed: must be a nonnegative integer");
      else
        cfg.seed = value.get<std::uint64_t>();
      continue;
    }
    if (key == "output") {
      if (!value.is_object()) {
        diag.push_back("output: must be an object with optional 'json' and 'csv' paths");
        continue;
      }
      for (const auto& [ok, ov] : value.items()) {
        if ((ok != "json" && ok != "csv") || !ov.is_string()) {
          diag.push_back("output." + ok + ": unknown key or not a string");
          continue;
        }
        (ok == "json" ? cfg.json_path : cfg.csv_path) = ov.get<std::string>();
      }
      echo["output"] = value;
      continue;
    }
    if ((key == "source" || key == "sources") && takes_source) continue;
    const auto f = std::find_if(fields.begin(), fields.end(), [&](const Field& x) { return key == x.key; });
    if (f == fields.end()) {
      diag.push_back(key + ": unknown key for experiment '" + to_string(cfg.kind) + "'");
      continue;
    }
    if (!has_type(value, f->type)) {
      diag.push_back(key + ": must be " + std::string(type_name(f->type)));
      continue;
    }
    echo[key] = value;
  }
  for (const auto& f : fields)
    if (!echo.contains(f.key) && !f.fallback.is_null()) echo[f.key] = f.fallback;

  // sources
  if (takes_source) {
    std::vector<json> specs;
    if (j.contains("source") && j.contains("sources")) diag.push_back("source: give either 'source' or 'sources', not both");
    if (j.contains("source")) specs.push_back(j.at("source"));
    if (j.contains("sources")) {
      if (!j.at("sources").is_array() || j.at("sources").empty())
        diag.push_back("sources: must be a nonempty list");
      else
        for (const auto& s : j.at("sources")) specs.push_back(s);
    }
    if (specs.empty() && cfg.kind == ExperimentKind::measures)
      for (const auto& name : standard_sources()) specs.emplace_back(name);
    if (specs.empty()) diag.push_back("source: required for experiment '" + std::string(to_string(cfg.kind)) + "'");
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const std::string where = j.contains("sources") ? "sources[" + std::to_string(i) + "]" : "source";
      try {
        cfg.sources.push_back(specs[i].is_string() ? load_source(specs[i].get<std::string>()) : source_from_json(specs[i]));
        cfg.source_specs.push_back(specs[i].is_string() ? specs[i].get<std::string>() : specs[i].dump());
      } catch (const std::exception& e) {
        std::string msg = e.what();
        if (msg.rfind("source: ", 0) == 0) msg.erase(0, 8);
        diag.push_back(where + ": " + msg);
      }
    }
    echo["sources"] = specs;
  }

  // kind-specific checks
  auto positive = [&](const char* key) {
    if (echo.contains(key) && echo.at(key).get<double>() <= 0) diag.push_back(std::string(key) + ": must be positive");
  };
  switch (cfg.kind) {
    case ExperimentKind::equality:
    case ExperimentKind::simulate:
      positive("n");
      if (echo.contains("n") && echo.at("n").get<unsigned>() > 30) diag.push_back("n: at most 30");
      break;
    case ExperimentKind::gapip:
      positive("n");
      if (!echo.contains("m") && echo.contains("n")) echo["m"] = gapip_default_m(std::max(1u, echo.at("n").get<unsigned>()));
      for (const auto& b : echo.value("b_values", json::array()))
        if (b.get<unsigned>() > 1) diag.push_back("b_values: entries must be 0 or 1");
      if (!cfg.seed) diag.push_back("seed: required (instances are sampled)");
      break;
    case ExperimentKind::scaling:
      if (echo.at("n_values").size() < 2) diag.push_back("n_values: need at least two sizes");
      if (!cfg.seed) diag.push_back("seed: required for scaling");
      break;
    case ExperimentKind::oracle:
      positive("n");
      break;
    case ExperimentKind::agreement:
      if (!echo.contains("p")) diag.push_back("p: required");
      else if (const double p = echo.at("p").get<double>(); !(p > 0 && p <= 1)) diag.push_back("p: must lie in (0, 1]");
      if (echo.contains("ell") && !cfg.seed) diag.push_back("seed: required when 'ell' requests the optimizer");
      break;
    case ExperimentKind::measures:
      break;
  }
  if (cfg.kind == ExperimentKind::simulate && !echo.contains("table_size") && echo.contains("n"))
    echo["table_size"] = default_table_size(echo.at("n").get<unsigned>());
  if (cfg.kind == ExperimentKind::simulate && echo.value("base", std::string()) != "eq-perf")
    diag.push_back("base: only 'eq-perf' is available");
  if (cfg.trials > 0 && !cfg.seed) diag.push_back("seed: required when trials > 0");

  if (!diag.empty()) throw ConfigError(std::move(diag));
  echo["trials"] = cfg.trials;
  if (cfg.seed) echo["seed"] = *cfg.seed;
  cfg.echo = std::move(echo);
  return cfg;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

struct Checks {
  json list = json::array();
  std::vector<std::string>* failed;
  std::string item;

  void add(const std::string& name, bool pass) {
    list.push_back({{"name", name}, {"pass", pass}});
    if (!pass) failed->push_back(item + ": " + name);
  }
};

EstimateReport complement(EstimateReport r) {
  const double lo = r.ci_low;
  r.value = 1.0 - r.value;
  r.ci_low = 1.0 - r.ci_high;
  r.ci_high = 1.0 - lo;
  return r;
}

std::size_t count_of(const EstimateReport& r) { return static_cast<std::size_t>(std::llround(r.value * r.trials)); }

json cost_json(const SmpProtocol& pr) {
  return {{"bits_alice", pr.bits_alice}, {"bits_bob", pr.bits_bob}, {"rho_samples", pr.sample_count}};
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) out += (out.empty() ? "" : ",") + c;
  return out + "\n";
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void run_equality(const ExperimentConfig& cfg, RunReport& rep) {
  const unsigned n = cfg.uint("n");
  const double target = cfg.number("error");
  const Input x{cfg.echo.at("x").get<std::uint64_t>()}, y{cfg.echo.at("y").get<std::uint64_t>()};
  if (x == y) throw DomainError("x and y must differ");
  rep.csv = csv_line({"source", "n", "rounds", "gamma", "gamma_prime", "error_same", "error_diff"});
  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    const auto& s = cfg.sources[i];
    Checks ck{json::array(), &rep.failed_checks, s.label()};
    const auto eq = equality_protocol(s, n, target);
    json item{{"source", s.label()},
              {"n", n},
              {"rounds", eq.rounds},
              {"threshold", eq.threshold},
              {"witness", to_json(eq.witness)},
              {"cost", cost_json(eq.protocol)}};
    std::string es = "", ed = "";
    if (cfg.trials > 0) {
      const PairSampler sampler(s);
      const std::uint64_t key = derive(*cfg.seed, i);
      const auto same = complement(run_smp(sampler, eq.protocol, equality_problem(), x, x, cfg.trials, derive(key, 0)));
      const auto diff = complement(run_smp(sampler, eq.protocol, equality_problem(), x, y, cfg.trials, derive(key, 1)));
      item["error_same"] = to_json(same);
      item["error_diff"] = to_json(diff);
      ck.add("error_same <= target (one-sided 95%)", wilson_upper(count_of(same), same.trials) <= target);
      ck.add("error_diff <= target (one-sided 95%)", wilson_upper(count_of(diff), diff.trials) <= target);
      const auto rate_same = equality_round_rate(s, eq, x, x, cfg.trials, derive(key, 2));
      const auto rate_diff = equality_round_rate(s, eq, x, y, cfg.trials, derive(key, 3));
      item["round_rate_same"] = to_json(rate_same);
      item["round_rate_diff"] = to_json(rate_diff);
      const double g = eq.witness.gamma, gp = eq.witness.gamma_prime;
      ck.add("gamma inside round-rate CI", rate_same.ci_low <= g && g <= rate_same.ci_high);
      ck.add("gamma_prime inside round-rate CI", rate_diff.ci_low <= gp && gp <= rate_diff.ci_high);
      es = num(same.value);
      ed = num(diff.value);
    }
    item["checks"] = ck.list;
    rep.csv += csv_line({s.label(), std::to_string(n), std::to_string(eq.rounds), num(eq.witness.gamma),
                         num(eq.witness.gamma_prime), es, ed});
    rep.results.push_back(std::move(item));
  }
}

Answer recount(const Input& x, const Input& y) {
  std::size_t ones = 0;
  for (std::size_t i = 0; i < x.size(); ++i) ones += dot2(x[i], y[i]);
  const std::size_t zeros = x.size() - ones;
  if (3 * zeros >= 2 * x.size()) return 0;
  if (3 * ones >= 2 * x.size()) return 1;
  return kBottom;
}

void run_gapip(const ExperimentConfig& cfg, RunReport& rep) {
  const unsigned n = cfg.uint("n"), m = cfg.uint("m");
  const auto naive = gapip_naive_protocol(n, m);
  const auto pr = over_perfect_randomness(naive);
  const PairSampler perf(make_perf());
  rep.csv = csv_line({"b", "instance", "truth", "success"});
  std::uint64_t k = 0;
  for (const auto& bj : cfg.echo.at("b_values")) {
    const unsigned b = bj.get<unsigned>();
    for (unsigned t = 0; t < cfg.uint("instances"); ++t, ++k) {
      const auto inst = sample_gapip_instance(n, m, b, derive(*cfg.seed, 2 * k));
      Checks ck{json::array(), &rep.failed_checks, "b=" + std::to_string(b) + " instance " + std::to_string(t)};
      ck.add("gapip_eval matches recount", gapip_eval(inst.x, inst.y) == recount(inst.x, inst.y));
      ck.add("instance answer equals b", inst.truth == static_cast<Answer>(b));
      json item{{"b", b}, {"instance", t}, {"n", n}, {"m", m}, {"truth", inst.truth},
                {"cost", cost_json(pr)}, {"random_bits", naive.random_bits}};
      std::string succ;
      if (cfg.trials > 0) {
        const auto r = run_smp(perf, pr, gapip_problem(), inst.x, inst.y, cfg.trials, derive(*cfg.seed, 2 * k + 1));
        item["success"] = to_json(r);
        ck.add("success >= 2/3 within one-sided CI", wilson_upper(count_of(r), r.trials) >= 2.0 / 3);
        succ = num(r.value);
      }
      item["checks"] = ck.list;
      rep.csv += csv_line({std::to_string(b), std::to_string(t), std::to_string(inst.truth), succ});
      rep.results.push_back(std::move(item));
    }
  }
}

// Error of a public-coin protocol on (x, y) averaged over all 2^R strings.
double exact_public_coin_error(const PublicCoinProtocol& pr, const Input& x, const Input& y) {
  const Answer truth = x == y ? 1 : 0;
  const std::uint64_t count = std::uint64_t{1} << pr.random_bits;
  std::uint64_t wrong = 0;
  for (std::uint64_t r = 0; r < count; ++r)
    wrong += pr.referee(pr.alice(x, r), pr.bob(y, r)) != truth;
  return static_cast<double>(wrong) / static_cast<double>(count);
}

void run_simulate(const ExperimentConfig& cfg, RunReport& rep) {
  const unsigned n = cfg.uint("n");
  const double eps = cfg.number("eps");
  const Input x{cfg.echo.at("x").get<std::uint64_t>()}, y{cfg.echo.at("y").get<std::uint64_t>()};
  if (x == y) throw DomainError("x and y must differ");
  auto base = inner_product_equality(n, cfg.uint("hashes"));
  const std::size_t table = cfg.echo.at("table_size").get<std::size_t>();
  if (table > 0) base = reduce_randomness(base, table, cfg.echo.at("table_seed").get<std::uint64_t>());
  if (base.random_bits > 20) throw CapacityError("simulate: base uses " + std::to_string(base.random_bits) + " public bits");
  const double base_err = std::max(exact_public_coin_error(base, x, x), exact_public_coin_error(base, x, y));
  rep.csv = csv_line({"source", "R", "max_out", "bits_alice", "bits_bob", "error_same", "error_diff"});
  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    const auto& s = cfg.sources[i];
    Checks ck{json::array(), &rep.failed_checks, s.label()};
    ck.add("base error on (x,x) and (x,y) <= eps", base_err <= eps);
    const auto sim = simulate_with_collision(s, base, eps);
    const std::size_t max_out = sim.collision.protocol.max_out;
    json item{{"source", s.label()},
              {"base", base.name},
              {"random_bits", sim.random_bits},
              {"base_bits_alice", base.bits_alice},
              {"base_bits_bob", base.bits_bob},
              {"base_error_exact", base_err},
              {"failure", sim.failure},
              {"max_out", max_out},
              {"repetitions", sim.collision.repetitions},
              {"copies", sim.copies},
              {"payload_alice", sim.payload_alice},
              {"payload_bob", sim.payload_bob},
              {"header_bits", sim.header_bits},
              {"cost", cost_json(sim.protocol)},
              {"single_cost", cost_json(sim.single)}};
    ck.add("payload_alice = max_out (R + base bits_alice)", sim.payload_alice == max_out * (sim.random_bits + base.bits_alice));
    ck.add("payload_bob = max_out (R + base bits_bob)", sim.payload_bob == max_out * (sim.random_bits + base.bits_bob));
    std::string es, ed;
    if (cfg.trials > 0) {
      const PairSampler sampler(s);
      const std::uint64_t key = derive(*cfg.seed, i);
      const auto same = complement(run_smp(sampler, sim.protocol, equality_problem(), x, x, cfg.trials, derive(key, 0)));
      const auto diff = complement(run_smp(sampler, sim.protocol, equality_problem(), x, y, cfg.trials, derive(key, 1)));
      item["error_same"] = to_json(same);
      item["error_diff"] = to_json(diff);
      ck.add("error_same <= eps (one-sided 95%)", wilson_upper(count_of(same), same.trials) <= eps);
      ck.add("error_diff <= eps (one-sided 95%)", wilson_upper(count_of(diff), diff.trials) <= eps);
      es = num(same.value);
      ed = num(diff.value);
    }
    item["checks"] = ck.list;
    rep.csv += csv_line({s.label(), std::to_string(sim.random_bits), std::to_string(max_out),
                         std::to_string(sim.protocol.bits_alice), std::to_string(sim.protocol.bits_bob), es, ed});
    rep.results.push_back(std::move(item));
  }
}

void run_scaling(const ExperimentConfig& cfg, RunReport& rep) {
  const auto ns = cfg.echo.at("n_values").get<std::vector<std::uint32_t>>();
  std::ostringstream csv;
  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    const auto& s = cfg.sources[i];
    Checks ck{json::array(), &rep.failed_checks, s.label()};
    const auto r = scaling_experiment(s, ns, derive(*cfg.seed, i));
    bool sound = true;
    for (const auto& p : r.points)
      sound = sound && p.achieved_max_out + 1e-9 >= std::max(p.hyp_floor, p.cor_floor);
    ck.add("achieved max_out >= certified floors", sound);
    json item = to_json(r);
    item["checks"] = ck.list;
    rep.results.push_back(std::move(item));
    if (cfg.sources.size() == 1) {
      write_scaling_csv(csv, r);
    } else {
      std::ostringstream one;
      write_scaling_csv(one, r);
      std::istringstream lines(one.str());
      std::string line;
      bool header = true;
      while (std::getline(lines, line)) {
        if (header && i > 0) {
          header = false;
          continue;
        }
        csv << (header ? "source" : s.label()) << ',' << line << '\n';
        header = false;
      }
    }
  }
  rep.csv = csv.str();
}

// Analytic maximum correlation for the recognised standard sources.
std::optional<double> analytic_cor(const BipartiteSource& s) {
  try {
    const auto ref = parse_source_name(s.label());
    if (!same_distribution(ref, s)) return std::nullopt;
  } catch (const DomainError&) {
    return std::nullopt;
  }
  const std::string& l = s.label();
  if (l == "perf") return 1.0;
  if (l == "priv") return 0.0;
  if (l == "disj") return 0.5;
  if (l.rfind("bsc(", 0) == 0) return std::abs(1.0 - 2.0 * std::stod(l.substr(4)));
  return std::nullopt;
}

void run_measures(const ExperimentConfig& cfg, RunReport& rep) {
  rep.csv = csv_line({"source", "cor", "expected", "h_u", "h_v", "mutual_info"});
  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    const auto& s = cfg.sources[i];
    Checks ck{json::array(), &rep.failed_checks, s.label()};
    const auto mc = max_correlation_report(s);
    const auto mg = marginals(s);
    Matrix joint(s.u_size(), s.v_size());
    joint.data = s.probs();
    json item{{"source", s.label()},
              {"cor", mc.value},
              {"degenerate", mc.degenerate},
              {"top_singular_value", mc.top_singular_value},
              {"h_u", entropy(mg.u)},
              {"h_v", entropy(mg.v)},
              {"mutual_info", mutual_info(joint)}};
    std::string expected;
    if (const auto a = analytic_cor(s)) {
      item["expected"] = *a;
      ck.add("cor matches analytic value within 1e-9", std::abs(mc.value - *a) <= 1e-9);
      expected = num(*a);
    }
    if (!mc.degenerate) ck.add("top singular value is 1", std::abs(mc.top_singular_value - 1.0) <= 1e-9);
    if (cfg.echo.at("hc").get<bool>()) {
      json certs = json::array();
      for (const auto& c : certify_hypercontractivity(s, cfg.seed.value_or(0))) {
        json cj{{"params", to_json(c.params)}, {"report", to_json(c.report)}, {"analytic", c.analytic}};
        certs.push_back(std::move(cj));
      }
      item["hypercontractivity"] = std::move(certs);
    }
    item["checks"] = ck.list;
    rep.csv += csv_line({s.label(), num(mc.value), expected, num(item["h_u"].get<double>()),
                         num(item["h_v"].get<double>()), num(item["mutual_info"].get<double>())});
    rep.results.push_back(std::move(item));
  }
}

void run_oracle(const ExperimentConfig& cfg, RunReport& rep) {
  const unsigned n = cfg.uint("n"), ell = cfg.uint("ell");
  const double p = cfg.number("p");
  const std::size_t k_max = cfg.echo.at("k_max").get<std::size_t>();
  rep.csv = csv_line({"source", "n", "p", "ell", "feasible", "best_size", "floor"});
  for (const auto& s : cfg.sources) {
    Checks ck{json::array(), &rep.failed_checks, s.label()};
    const auto r = brute_force_col(s, n, p, ell, k_max);
    const auto hc = certify_hypercontractivity(s, cfg.seed.value_or(0));
    const double floor = collision_floor(s, n, p, hc);
    json certs = json::array();
    for (const auto& c : collision_certificates(s, n, p, hc)) certs.push_back(to_json(c));
    json item{{"source", s.label()}, {"n", n}, {"p", p}, {"ell", ell}, {"k_max", k_max},
              {"oracle", to_json(r)}, {"floor", floor}, {"certificates", std::move(certs)}};
    if (r.feasible) ck.add("oracle size >= certified floor", static_cast<double>(r.best_size) + 1e-9 >= floor);
    item["checks"] = ck.list;
    rep.csv += csv_line({s.label(), std::to_string(n), num(p), std::to_string(ell), r.feasible ? "1" : "0",
                         r.feasible ? std::to_string(r.best_size) : "", num(floor)});
    rep.results.push_back(std::move(item));
  }
}

void run_agreement(const ExperimentConfig& cfg, RunReport& rep) {
  const double p = cfg.number("p");
  rep.csv = csv_line({"source", "p", "construction", "cost", "success", "floor"});
  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    const auto& s = cfg.sources[i];
    Checks ck{json::array(), &rep.failed_checks, s.label()};
    const auto hc = certify_hypercontractivity(s, cfg.seed.value_or(0));
    const double floor = agreement_floor(s, p, hc);
    json certs = json::array();
    for (const auto& c : agreement_certificates(s, p, hc)) certs.push_back(to_json(c));
    const auto best = best_agreement(s, p);
    json item{{"source", s.label()}, {"p", p}, {"floor", floor}, {"certificates", std::move(certs)},
              {"construction", {{"name", best.protocol.name}, {"ell", best.protocol.ell}, {"cost", best.cost}, {"success", best.success}}}};
    ck.add("construction success >= p", best.success + 1e-12 >= p);
    ck.add("construction cost >= certified floor", best.cost + 1e-9 >= floor);
    try {
      const auto ex = eval_agreement(s, best.protocol, ExactMode{});
      item["exact"] = {{"cost", to_json(ex.cost)}, {"success", to_json(ex.success)}};
      ck.add("exact evaluation matches closed form",
             std::abs(ex.cost.value - best.cost) <= 1e-9 && std::abs(ex.success.value - best.success) <= 1e-9);
    } catch (const CapacityError& e) {
      item["exact"] = {{"skipped", e.what()}};
    }
    if (cfg.trials > 0) {
      const auto mc = eval_agreement(s, best.protocol, McMode{cfg.trials, derive(*cfg.seed, 2 * i)});
      item["monte_carlo"] = {{"cost", to_json(mc.cost)}, {"success", to_json(mc.success)}};
    }
    if (cfg.echo.contains("ell")) {
      const auto opt = optimize_agreement(s, cfg.uint("ell"), p, cfg.uint("iters"), derive(*cfg.seed, 2 * i + 1));
      item["optimized"] = {{"ell", opt.protocol.ell}, {"cost", opt.cost}, {"success", opt.success},
                           {"protocol", agreement_to_json(opt.protocol)}};
      if (opt.success + 1e-12 >= p) ck.add("optimized cost >= certified floor", opt.cost + 1e-9 >= floor);
    }
    item["checks"] = ck.list;
    rep.csv += csv_line({s.label(), num(p), best.protocol.name, num(best.cost), num(best.success), num(floor)});
    rep.results.push_back(std::move(item));
  }
}

template <class E>
[[noreturn]] void rethrow_with_context(const E& e, ExperimentKind kind) {
  throw E(std::string(to_string(kind)) + ": " + e.what());
}

}  // namespace

json to_json(const RunReport& r) {
  return {{"config", r.config}, {"results", r.results}, {"ok", r.ok()}, {"failed_checks", r.failed_checks},
          {"wall_clock_s", r.wall_clock_s}, {"version", r.version}, {"rng", r.rng}};
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  RunReport rep;
  rep.config = cfg.echo;
  rep.version = version();
  rep.rng = kRngName;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (cfg.kind) {
      case ExperimentKind::equality: run_equality(cfg, rep); break;
      case ExperimentKind::gapip: run_gapip(cfg, rep); break;
      case ExperimentKind::simulate: run_simulate(cfg, rep); break;
      case ExperimentKind::scaling: run_scaling(cfg, rep); break;
      case ExperimentKind::measures: run_measures(cfg, rep); break;
      case ExperimentKind::oracle: run_oracle(cfg, rep); break;
      case ExperimentKind::agreement: run_agreement(cfg, rep); break;
    }
  } catch (const CapacityError& e) {
    rethrow_with_context(e, cfg.kind);
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    rethrow_with_context(e, cfg.kind);
  }
  rep.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (cfg.json_path) {
    std::ofstream out(*cfg.json_path);
    if (!out) throw DomainError("cannot write " + *cfg.json_path);
    out << to_json(rep).dump(2) << '\n';
  }
  if (cfg.csv_path && !rep.csv.empty()) {
    std::ofstream out(*cfg.csv_path);
    if (!out) throw DomainError("cannot write " + *cfg.csv_path);
    out << rep.csv;
  }
  return rep;
}

}  // namespace corrsim
