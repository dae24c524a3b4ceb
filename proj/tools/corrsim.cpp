#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "corrsim/experiment.hpp"

using namespace corrsim;

namespace {

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

json source_summary(const BipartiteSource& s) {
  const auto m = marginals(s);
  json j = to_json(s);
  j["marginal_u"] = m.u;
  j["marginal_v"] = m.v;
  j["product"] = is_product(s, 1e-12);
  j["degenerate"] = is_degenerate(s);
  return j;
}

int finish(const RunReport& rep) {
  json j{{"results", rep.results}, {"ok", rep.ok()}, {"failed_checks", rep.failed_checks},
         {"wall_clock_s", rep.wall_clock_s}, {"seed", rep.config.value("seed", json())}, {"rng", rep.rng}};
  print(j);
  return rep.exit_code();
}

// Runs a config assembled from flags through the same path as `experiment`.
int run_config(json cfg, const std::optional<std::uint64_t>& seed) {
  if (seed) cfg["seed"] = *seed;
  return finish(run_experiment(validate_config_json(cfg)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous-message protocols over imperfect shared randomness"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::size_t trials = 0;
  std::string source_name;
  int rc = 0;

  // source
  auto* src_cmd = app.add_subcommand("source", "Print a source, its marginals and a sample histogram");
  std::size_t samples = 0;
  src_cmd->add_option("--source", source_name, "name or JSON file")->required();
  src_cmd->add_option("--samples", samples, "draw this many pairs (needs --seed)");
  src_cmd->add_option("--seed", seed);
  src_cmd->callback([&] {
    const auto s = load_source(source_name);
    json j = source_summary(s);
    if (samples > 0) {
      if (!seed) throw DomainError("--seed: required when sampling");
      const auto batch = sample(s, samples, *seed);
      std::vector<std::size_t> counts(s.u_size() * s.v_size(), 0);
      for (std::size_t i = 0; i < batch.count; ++i) ++counts[batch.u_values[i] * s.v_size() + batch.v_values[i]];
      j["sample_counts"] = counts;
      j["seed"] = *seed;
    }
    print(j);
  });

  // measure
  auto* meas = app.add_subcommand("measure", "Correlation measures of a source");
  meas->require_subcommand(1);
  auto* m_cor = meas->add_subcommand("cor", "maximum correlation");
  auto* m_ent = meas->add_subcommand("entropy", "marginal entropies and mutual information");
  auto* m_hc = meas->add_subcommand("hc", "search for hypercontractivity violations");
  double hc_q = 0, hc_p = 0;
  unsigned grid = 0;
  std::size_t random_trials = 0;
  for (auto* c : {m_cor, m_ent, m_hc}) c->add_option("--source", source_name)->required();
  m_hc->add_option("--q", hc_q)->required();
  m_hc->add_option("--p", hc_p)->required();
  auto* grid_opt = m_hc->add_option("--grid", grid, "levels per coordinate");
  auto* rand_opt = m_hc->add_option("--random", random_trials, "random candidates (needs --seed)");
  grid_opt->excludes(rand_opt);
  m_hc->add_option("--seed", seed);
  m_cor->callback([&] {
    const auto r = max_correlation_report(load_source(source_name));
    print({{"value", r.value}, {"degenerate", r.degenerate}, {"top_singular_value", r.top_singular_value}});
  });
  m_ent->callback([&] {
    const auto s = load_source(source_name);
    const auto mg = marginals(s);
    Matrix joint(s.u_size(), s.v_size());
    joint.data = s.probs();
    print({{"value", mutual_info(joint)}, {"h_u", entropy(mg.u)}, {"h_v", entropy(mg.v)}, {"h_uv", entropy(s.probs())},
           {"h_u_given_v", cond_entropy(joint)}});
  });
  m_hc->callback([&] {
    HcSearch search = GridSearch{grid == 0 ? 50u : grid};
    if (random_trials > 0) {
      if (!seed) throw DomainError("--seed: required with --random");
      search = RandomSearch{random_trials, *seed};
    }
    const auto r = check_hypercontractive(load_source(source_name), hc_q, hc_p, search);
    json j{{"value", r.holds}, {"gap", r.worst_gap}, {"candidates", r.candidates}};
    if (!r.holds) j["witness"] = r.witness;
    print(j);
  });

  // agr
  auto* agr = app.add_subcommand("agr", "Agreement protocols: constructions, bounds, evaluation");
  double agr_p = 0;
  std::optional<unsigned> agr_ell;
  unsigned iters = 200;
  std::string protocol_file;
  agr->add_option("--source", source_name)->required();
  agr->add_option("--p", agr_p, "target success probability");
  agr->add_option("--ell", agr_ell, "also run the optimizer at this many samples (needs --seed)");
  agr->add_option("--iters", iters);
  agr->add_option("--protocol", protocol_file, "evaluate a table-mode protocol from JSON instead");
  agr->add_option("--trials", trials);
  agr->add_option("--seed", seed);
  agr->callback([&] {
    if (!protocol_file.empty()) {
      std::ifstream in(protocol_file);
      if (!in) throw DomainError("cannot read " + protocol_file);
      const auto pr = agreement_from_json(json::parse(in));
      const auto s = load_source(source_name);
      json j{{"exact", nullptr}};
      try {
        const auto ex = eval_agreement(s, pr, ExactMode{});
        j["exact"] = {{"cost", to_json(ex.cost)}, {"success", to_json(ex.success)}};
      } catch (const CapacityError& e) {
        j["exact"] = {{"skipped", e.what()}};
      }
      if (trials > 0) {
        if (!seed) throw DomainError("--seed: required when --trials > 0");
        const auto mc = eval_agreement(s, pr, McMode{trials, *seed});
        j["monte_carlo"] = {{"cost", to_json(mc.cost)}, {"success", to_json(mc.success)}};
      }
      print(j);
      return;
    }
    if (agr_p <= 0) throw DomainError("--p: required and positive");
    json cfg{{"experiment", "agreement"}, {"source", source_name}, {"p", agr_p}, {"iters", iters}, {"trials", trials}};
    if (agr_ell) cfg["ell"] = *agr_ell;
    rc = run_config(cfg, seed);
  });

  // col
  auto* col = app.add_subcommand("col", "Collision protocols at p = 1/n");
  std::uint32_t col_n = 16;
  std::string construction = "agreement";
  std::uint32_t birthday_k = 0;
  double failure = 0.5;
  col->add_option("--source", source_name)->required();
  col->add_option("--n", col_n);
  col->add_option("--construction", construction, "agreement | birthday | symmetrize")
      ->check(CLI::IsMember({"agreement", "birthday", "symmetrize"}));
  col->add_option("--k", birthday_k, "birthday set size (default ceil(sqrt n))");
  col->add_option("--failure", failure, "symmetrize: empty-intersection target");
  col->add_option("--protocol", protocol_file, "evaluate a table-mode protocol from JSON instead");
  col->add_option("--trials", trials);
  col->add_option("--seed", seed);
  col->callback([&] {
    const auto s = load_source(source_name);
    std::optional<CollisionProtocol> pr;
    json j;
    if (!protocol_file.empty()) {
      std::ifstream in(protocol_file);
      if (!in) throw DomainError("cannot read " + protocol_file);
      pr = collision_from_json(json::parse(in));
    } else if (construction == "birthday") {
      const auto k = birthday_k ? birthday_k : static_cast<std::uint32_t>(std::ceil(std::sqrt(col_n)));
      pr = birthday_collision(s, col_n, k);
    } else if (construction == "symmetrize") {
      const auto sym = symmetrize(s, col_n, failure);
      j["repetitions"] = sym.repetitions;
      j["base_max_out"] = sym.base_max_out;
      pr = sym.protocol;
    } else {
      const auto ag = best_agreement(s, 2.0 / col_n);
      j["agreement"] = {{"name", ag.protocol.name}, {"cost", ag.cost}, {"success", ag.success}};
      pr = collision_from_agreement(ag.protocol, col_n, ag.cost * (1 + 1e-9) + 1e-12);
    }
    j["name"] = pr->name;
    j["n"] = pr->n;
    j["ell"] = pr->ell;
    j["max_out"] = pr->max_out;
    j["floor"] = collision_floor(s, pr->n, 1.0 / pr->n, certify_hypercontractivity(s, seed.value_or(0)));
    if (trials > 0) {
      if (!seed) throw DomainError("--seed: required when --trials > 0");
      const auto ev = eval_collision(s, *pr, McMode{trials, *seed});
      j["min_prob"] = ev.min_prob;
      j["max_out_seen"] = ev.max_out_seen;
      json per = json::array();
      for (const auto& r : ev.per_i) per.push_back(to_json(r));
      j["per_i"] = std::move(per);
      j["seed"] = *seed;
    } else if (pr->has_membership()) {
      try {
        const auto ev = eval_collision(s, *pr, ExactMode{});
        j["min_prob"] = ev.min_prob;
        j["mode"] = "exact";
      } catch (const CapacityError& e) {
        j["exact"] = {{"skipped", e.what()}};
      }
    }
    print(j);
  });

  // smp
  auto* smp_cmd = app.add_subcommand("smp", "Simultaneous-message protocols");
  smp_cmd->require_subcommand(1);
  unsigned smp_n = 8;
  double err = 1.0 / 3, eps = 1.0 / 3;
  std::optional<std::uint64_t> x_in, y_in;
  std::optional<unsigned> gap_m, gap_b;
  unsigned instances = 1;
  std::string base = "eq-perf";
  auto* s_eq = smp_cmd->add_subcommand("eq", "equality over an imperfect source");
  auto* s_gap = smp_cmd->add_subcommand("gapip", "naive GAPIP protocol over perfect randomness");
  auto* s_sim = smp_cmd->add_subcommand("simulate", "simulate a perfect-randomness protocol over a source");
  for (auto* c : {s_eq, s_gap, s_sim}) {
    c->add_option("--n", smp_n);
    c->add_option("--trials", trials);
    c->add_option("--seed", seed);
  }
  for (auto* c : {s_eq, s_sim}) {
    c->add_option("--source", source_name)->required();
    c->add_option("--x", x_in);
    c->add_option("--y", y_in);
  }
  s_eq->add_option("--error", err);
  s_gap->add_option("--m", gap_m);
  s_gap->add_option("--b", gap_b)->check(CLI::Range(0, 1));
  s_gap->add_option("--instances", instances);
  s_sim->add_option("--base", base);
  s_sim->add_option("--eps", eps);
  auto inputs = [&](json& cfg) {
    if (x_in) cfg["x"] = *x_in;
    if (y_in) cfg["y"] = *y_in;
  };
  s_eq->callback([&] {
    json cfg{{"experiment", "equality"}, {"source", source_name}, {"n", smp_n}, {"error", err}, {"trials", trials}};
    inputs(cfg);
    rc = run_config(cfg, seed);
  });
  s_gap->callback([&] {
    json cfg{{"experiment", "gapip"}, {"n", smp_n}, {"instances", instances}, {"trials", trials}};
    if (gap_m) cfg["m"] = *gap_m;
    if (gap_b) cfg["b_values"] = json::array({*gap_b});
    rc = run_config(cfg, seed);
  });
  s_sim->callback([&] {
    json cfg{{"experiment", "simulate"}, {"source", source_name}, {"base", base}, {"n", smp_n}, {"eps", eps}, {"trials", trials}};
    inputs(cfg);
    rc = run_config(cfg, seed);
  });

  // bounds
  auto* bnd = app.add_subcommand("bounds", "Certified lower bounds, oracles and scaling");
  bnd->require_subcommand(1);
  auto* b_hyp = bnd->add_subcommand("hyp", "hypercontractive agreement floor");
  auto* b_orc = bnd->add_subcommand("oracle", "exhaustive collision search");
  auto* b_scl = bnd->add_subcommand("scaling", "collision cost against n");
  double bp = 0, bq = 0, bz = 0, orc_p = 0.5;
  std::optional<double> b_cor;
  unsigned orc_n = 2, orc_ell = 1, kmax = 2;
  std::string n_list = "8,16,32,64,128,256,512", out_csv;
  b_hyp->add_option("--p", bp)->required();
  b_hyp->add_option("--q", bq)->required();
  b_hyp->add_option("--z", bz)->required();
  b_hyp->add_option("--cor", b_cor, "also report the correlation floor at this Cor");
  b_hyp->callback([&] {
    json j{{"value", hyp_lower_bound(bp, bq, bz)}, {"params", to_json(HcParams::from(bp, bq))}};
    if (b_cor) j["cor_floor"] = cor_lower_bound(bz, *b_cor);
    print(j);
  });
  b_orc->add_option("--source", source_name)->required();
  b_orc->add_option("--n", orc_n);
  b_orc->add_option("--p", orc_p);
  b_orc->add_option("--ell", orc_ell);
  b_orc->add_option("--kmax", kmax);
  b_orc->callback([&] {
    rc = run_config({{"experiment", "oracle"}, {"source", source_name}, {"n", orc_n}, {"p", orc_p}, {"ell", orc_ell}, {"k_max", kmax}},
                    seed);
  });
  b_scl->add_option("--source", source_name)->required();
  b_scl->add_option("--n", n_list, "comma-separated sizes");
  b_scl->add_option("--seed", seed);
  b_scl->add_option("--out", out_csv, "CSV path");
  b_scl->callback([&] {
    json ns = json::array();
    std::stringstream ss(n_list);
    for (std::string tok; std::getline(ss, tok, ',');) ns.push_back(std::stoul(tok));
    json cfg{{"experiment", "scaling"}, {"source", source_name}, {"n_values", ns}};
    if (!out_csv.empty()) cfg["output"] = {{"csv", out_csv}};
    rc = run_config(cfg, seed);
  });

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a JSON experiment config");
  std::string config_path, out_json;
  exp->add_option("config", config_path)->required()->check(CLI::ExistingFile);
  exp->add_option("--out", out_json, "write the full report here (overrides output.json)");
  exp->callback([&] {
    std::ifstream in(config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    auto cfg = validate_config(buf.str());
    if (!out_json.empty()) cfg.json_path = out_json;
    const auto rep = run_experiment(cfg);
    print(to_json(rep));
    rc = rep.exit_code();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return rc;
}
