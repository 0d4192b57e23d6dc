// netcollapse: generate networks, simulate, reduce, sweep and predict.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "netcollapse/experiments.hpp"

using namespace netcollapse;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

json vec_json(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

struct DynamicsArgs {
  std::string kind = "glv";
  double mu_alpha = 1.0;
  std::optional<double> sigma_alpha;
  double mu_e = 0.5;
  std::uint64_t seed = 1;
};

void add_dynamics_flags(CLI::App* cmd, DynamicsArgs& d) {
  cmd->add_option("--dynamics", d.kind, "glv or sis")->check(CLI::IsMember({"glv", "sis"}));
  cmd->add_option("--mu-alpha", d.mu_alpha, "GLV mean growth rate");
  cmd->add_option("--sigma-alpha", d.sigma_alpha, "GLV growth rate sd (default |mu/3|)");
  cmd->add_option("--mu-e", d.mu_e, "SIS mean recovery rate; rates are U(0, 2 mu_e)");
  cmd->add_option("--seed", d.seed, "seed for node parameters and initial state");
}

DynamicsModel make_model(const DynamicsArgs& d, std::size_t n) {
  Rng rng(combine_seed({d.seed, 2}));
  Vector v(static_cast<Eigen::Index>(n));
  if (d.kind == "glv") {
    std::normal_distribution<double> dist(d.mu_alpha, d.sigma_alpha.value_or(std::abs(d.mu_alpha / 3.0)));
    for (auto& x : v) x = dist(rng);
    return make_glv(v);
  }
  std::uniform_real_distribution<double> dist(0.0, 2.0 * d.mu_e);
  for (auto& x : v) x = dist(rng);
  return make_sis(v);
}

json reduction_json(const InteractionMatrix& a, const DynamicsModel& model) {
  const EffectiveSystem sys = build_effective(a, model);
  const FixedPointReport rep = fixed_points(sys);
  json roots = json::array();
  for (std::size_t k = 0; k < rep.roots.size(); ++k)
    roots.push_back({{"x", rep.roots[k]}, {"multiplier", rep.multipliers[k]},
                     {"stable", static_cast<bool>(rep.stable[k])}});
  return {{"order", sys.order}, {"d", sys.d},       {"a_eff", sys.a_eff},
          {"b_eff", sys.b_eff}, {"c_eff", sys.c_eff}, {"fixed_points", roots}};
}

json ensemble_json(const GlvEnsemble& ens, const std::optional<MatrixStats>& stats) {
  json j{{"S", ens.S},         {"mu_alpha", ens.mu_alpha}, {"mu_A", ens.mu_A},
         {"sigma_A", ens.sigma_A}, {"rho_A", ens.rho_A}, {"mu_D", ens.mu_D},
         {"sigma_D", ens.sigma_D}, {"M", ens.M()}};
  try {
    const auto p = glv_effective_params(ens);
    j["pred_d2"] = p.d2;
    j["pred_d3"] = p.d3;
    j["pred_xeff"] = glv_x_eff_prediction(ens, Branch::nonzero);
    j["pred_err_nonzero"] = glv_error_prediction(ens, Branch::nonzero);
    j["pred_err_zero"] = glv_error_prediction(ens, Branch::zero);
  } catch (const ZeroDenominator& e) {
    j["error"] = e.what();
  }
  if (stats) {
    try {
      j["a_eff_rmt"] = a_eff_rmt(*stats, ens.S, DiagonalMoments{ens.mu_D, ens.sigma_D});
    } catch (const ZeroDenominator& e) {
      j["a_eff_rmt_error"] = e.what();
    }
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension reduction of networked discrete-time dynamics"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a network to a matrix file");
  std::string gen_kind = "random", gen_out, gen_incidence;
  std::uint64_t gen_seed = 1;
  RandomMatrixSpec rspec;
  std::size_t g_n = 100, g_m = 3, g_k = 6;
  double g_p = 0.1, g_weight = 1.0, g_mu_gamma = 0.4;
  std::string marginal = "normal";
  gen->add_option("--kind", gen_kind, "random, er, ba, sw or mutualistic")
      ->check(CLI::IsMember({"random", "er", "ba", "sw", "mutualistic"}));
  gen->add_option("--out", gen_out, "output file (default stdout)");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--size,-S", rspec.size, "random: species count");
  gen->add_option("--mu-X", rspec.mu_X);
  gen->add_option("--sigma-X", rspec.sigma_X);
  gen->add_option("--rho", rspec.rho);
  gen->add_option("--connectivity,-C", rspec.connectivity);
  gen->add_option("--mu-D", rspec.mu_D);
  gen->add_option("--sigma-D", rspec.sigma_D);
  gen->add_option("--marginal", marginal)->check(CLI::IsMember({"normal", "uniform"}));
  gen->add_option("--nodes,-n", g_n, "graph size");
  gen->add_option("--p", g_p, "er: edge probability; sw: rewiring probability");
  gen->add_option("--m", g_m, "ba: edges per new node");
  gen->add_option("--k", g_k, "sw: ring degree");
  gen->add_option("--weight", g_weight, "graph edge weight");
  gen->add_option("--incidence", gen_incidence, "mutualistic: incidence file");
  gen->add_option("--mu-gamma", g_mu_gamma, "mutualistic: mean mutualistic strength");

  // simulate / reduce
  auto* sim = app.add_subcommand("simulate", "iterate the full map to a steady state");
  auto* red = app.add_subcommand("reduce", "effective parameters and fixed points of a network");
  std::string matrix_path, sim_out, regime = "low";
  DynamicsArgs dyn;
  SimulationSettings settings;
  std::string clamp;
  for (auto* cmd : {sim, red}) {
    cmd->add_option("--matrix", matrix_path, "matrix file from 'generate'")->required();
    cmd->add_option("--out", sim_out, "output file (default stdout)");
    add_dynamics_flags(cmd, dyn);
  }
  sim->add_option("--regime", regime, "initial condition")->check(CLI::IsMember({"low", "high"}));
  sim->add_option("--max-steps", settings.max_steps);
  sim->add_option("--tol", settings.convergence_tol);
  sim->add_option("--clamp", clamp)->check(CLI::IsMember({"none", "nonnegative", "unit_interval"}));
  bool with_state = false;
  sim->add_flag("--state", with_state, "include the full steady state");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run an experiment plan");
  std::string config, out = "-", format = "csv", summary;
  std::optional<std::uint64_t> seed;
  std::optional<double> sis_weight;
  bool strict = false, size_cap = false;
  sweep->add_option("--config", config, "plan file")->required();
  sweep->add_option("--out", out, "result table (default stdout)");
  sweep->add_option("--format", format)->check(CLI::IsMember({"csv", "json", "structured-text"}));
  sweep->add_option("--seed", seed, "override the plan's base seed");
  sweep->add_option("--sis-weight", sis_weight, "scale of the SIS edge weight mu_e / <k>");
  sweep->add_flag("--size-cap", size_cap, "skip empirical networks with >= 200 species");
  sweep->add_flag("--strict", strict, "exit nonzero when any row diverged");
  sweep->add_option("--summary", summary, "also write per-value mean/std table");

  // predict
  auto* pred = app.add_subcommand("predict", "closed-form GLV predictions");
  std::string pred_config, pred_matrix, pred_out;
  RandomMatrixSpec pspec;
  double p_mu_alpha = 1.0;
  pred->add_option("--config", pred_config, "glv_random plan; one prediction per swept value");
  pred->add_option("--matrix", pred_matrix, "use moments measured from this matrix");
  pred->add_option("--out", pred_out);
  pred->add_option("--size,-S", pspec.size);
  pred->add_option("--mu-alpha", p_mu_alpha);
  pred->add_option("--mu-X", pspec.mu_X);
  pred->add_option("--sigma-X", pspec.sigma_X);
  pred->add_option("--rho", pspec.rho);
  pred->add_option("--connectivity,-C", pspec.connectivity);
  pred->add_option("--mu-D", pspec.mu_D);
  pred->add_option("--sigma-D", pspec.sigma_D);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      InteractionMatrix a = InteractionMatrix::zeros(1);
      if (gen_kind == "random") {
        rspec.seed = gen_seed;
        rspec.marginal = marginal == "uniform" ? Marginal::uniform : Marginal::normal;
        a = generate_random_matrix(rspec);
      } else if (gen_kind == "er") {
        a = generate_er(g_n, g_p, gen_seed, g_weight);
      } else if (gen_kind == "ba") {
        a = generate_ba(g_n, g_m, gen_seed, g_weight);
      } else if (gen_kind == "sw") {
        a = generate_sw(g_n, g_k, g_p, gen_seed, g_weight);
      } else {
        if (gen_incidence.empty()) throw InvalidSpec("mutualistic needs --incidence");
        BipartiteSpec b = parse_incidence(gen_incidence);
        b.mu_gamma = g_mu_gamma;
        b.seed = gen_seed;
        const auto net = build_mutualistic(b);
        for (const auto& iso : net.isolated)
          std::cerr << "warning: isolated "
                    << (iso.guild == IsolatedSpecies::Guild::plant ? "plant " : "animal ")
                    << iso.index << '\n';
        a = net.matrix;
      }
      write_text(gen_out, to_json(a).dump(1) + "\n");
      return 0;
    }

    if (*sim || *red) {
      const InteractionMatrix a = load_matrix(matrix_path);
      const DynamicsModel model = make_model(dyn, a.size());
      if (*red) {
        write_text(sim_out, reduction_json(a, model).dump(1) + "\n");
        return 0;
      }
      if (!clamp.empty()) settings.clamp = clamp_from_string(clamp);
      const Vector x0 = initial_state(a.size(), regime_from_string(regime), combine_seed({dyn.seed, 3}));
      const SteadyStateRecord rec = simulate(a, model, x0, settings);
      json j{{"status", to_string(rec.status)}, {"steps", rec.steps},
             {"period2", rec.period2},          {"x_eff", rec.x_eff},
             {"mean_x", rec.mean_state}};
      try {
        const EffectiveSystem sys = build_effective(a, model);
        const auto proj = project_onto_manifold(std::isfinite(rec.x_eff) ? rec.x_eff : rec.mean_state,
                                                fixed_points(sys));
        j["d"] = sys.d;
        j["root"] = proj.root;
        j["multiplier"] = proj.multiplier;
        j["err"] = proj.err;
      } catch (const Error& e) {
        j["reduction_error"] = e.what();
      }
      if (with_state) j["x_star"] = vec_json(rec.x_star);
      write_text(sim_out, j.dump(1) + "\n");
      return 0;
    }

    if (*sweep) {
      ExperimentPlan plan = load_plan(config);
      if (seed) plan.base_seed = *seed;
      if (sis_weight) plan.fixed["sis_weight"] = *sis_weight;
      if (size_cap) plan.size_cap = true;
      plan.validate();
      const ExperimentResult res = run_plan(plan);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
      const Format fmt = format_from_string(format);
      if (out == "-") {
        if (res.rows.empty()) throw IoError("refusing to write an empty result table");
        std::cout << (fmt == Format::csv ? to_csv(res.rows) : to_json(res.rows, plan).dump(1) + "\n");
      } else {
        emit(res.rows, out, fmt, &plan);
      }
      if (!summary.empty()) write_text(summary, summary_csv(summarize(res.rows)));
      if (strict)
        for (const auto& r : res.rows)
          if (r.status == Status::diverged) {
            std::cerr << "error: diverged rows present\n";
            return 3;
          }
      return 0;
    }

    if (*pred) {
      json j;
      if (!pred_matrix.empty()) {
        const InteractionMatrix a = load_matrix(pred_matrix);
        const MatrixStats st = matrix_stats(a);
        j = ensemble_json(glv_ensemble(st, p_mu_alpha, std::abs(p_mu_alpha / 3.0)), std::nullopt);
        j["a_eff"] = a_eff(a);
        j["a_eff_rmt_realized"] = a_eff_rmt(a);
      } else if (!pred_config.empty()) {
        const ExperimentPlan plan = load_plan(pred_config);
        if (plan.scenario != Scenario::glv_random)
          throw InvalidSpec("predict --config needs a glv_random plan");
        j = json::array();
        for (double v : plan.values) {
          const ParameterSet ps(plan, v);
          RandomMatrixSpec s;
          s.size = ps.get_count("S");
          s.mu_X = ps.get("mu_X");
          s.sigma_X = ps.get("sigma_X");
          s.rho = ps.get("rho");
          s.connectivity = ps.get("C");
          s.mu_D = ps.get("mu_D");
          s.sigma_D = ps.get("sigma_D");
          json row = ensemble_json(glv_ensemble(s, ps.get("mu_alpha"), ps.get("sigma_alpha")),
                                   ensemble_moments(s));
          row["value"] = v;
          j.push_back(row);
        }
      } else {
        j = ensemble_json(glv_ensemble(pspec, p_mu_alpha, std::abs(p_mu_alpha / 3.0)),
                          ensemble_moments(pspec));
      }
      write_text(pred_out, j.dump(1) + "\n");
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
