#pragma once

// Declarative parameter sweeps over the three studied scenarios, and the
// tabular output they produce.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "netcollapse/dynamics.hpp"
#include "netcollapse/generators.hpp"
#include "netcollapse/reduction.hpp"
#include "netcollapse/theory.hpp"

namespace netcollapse {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Scenario { glv_random, glv_empirical, sis_graph };
enum class Regime { low, high };
enum class InitialCondition { low, high, both };

inline std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::glv_random: return "glv_random";
    case Scenario::glv_empirical: return "glv_empirical";
    case Scenario::sis_graph: return "sis_graph";
  }
  return "unknown";
}

inline Scenario scenario_from_string(const std::string& s) {
  if (s == "glv_random") return Scenario::glv_random;
  if (s == "glv_empirical") return Scenario::glv_empirical;
  if (s == "sis_graph") return Scenario::sis_graph;
  throw InvalidSpec("unknown scenario '" + s + "'");
}

inline std::string to_string(Regime r) { return r == Regime::low ? "low" : "high"; }

inline Regime regime_from_string(const std::string& s) {
  if (s == "low") return Regime::low;
  if (s == "high") return Regime::high;
  throw InvalidSpec("unknown regime '" + s + "'");
}

inline std::string to_string(InitialCondition c) {
  switch (c) {
    case InitialCondition::low: return "low";
    case InitialCondition::high: return "high";
    case InitialCondition::both: return "both";
  }
  return "unknown";
}

inline InitialCondition initial_condition_from_string(const std::string& s) {
  if (s == "low") return InitialCondition::low;
  if (s == "high") return InitialCondition::high;
  if (s == "both") return InitialCondition::both;
  throw InvalidSpec("unknown initial condition '" + s + "'");
}

/// Initial states are uniform on [0, 0.1] (low) or [0.9, 1] (high).
inline Vector initial_state(std::size_t n, Regime regime, std::uint64_t seed) {
  Rng rng(seed);
  const double lo = regime == Regime::low ? 0.0 : 0.9;
  std::uniform_real_distribution<double> u(lo, lo + 0.1);
  Vector x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = u(rng);
  return x;
}

// ---------------------------------------------------------------------------
// Plans

struct ExperimentPlan {
  Scenario scenario = Scenario::glv_random;
  std::string swept_parameter = "mu_alpha";
  std::vector<double> values{1.0};
  std::map<std::string, double> fixed;
  std::string graph = "er";  // sis_graph: er | ba | sw
  std::size_t replicas = 50;
  InitialCondition initial_condition = InitialCondition::both;
  std::uint64_t base_seed = 1;
  std::string network_source;  // glv_empirical: directory of incidence files
  bool size_cap = false;
  SimulationSettings simulation;

  std::vector<Regime> regimes() const {
    switch (initial_condition) {
      case InitialCondition::low: return {Regime::low};
      case InitialCondition::high: return {Regime::high};
      case InitialCondition::both: return {Regime::low, Regime::high};
    }
    return {};
  }

  std::string effective_graph() const {
    if (swept_parameter == "er_p") return "er";
    if (swept_parameter == "ba_m") return "ba";
    if (swept_parameter == "sw_rewire") return "sw";
    return graph;
  }

  void validate() const {
    static const std::map<Scenario, std::set<std::string>> sweepable{
        {Scenario::glv_random, {"mu_alpha", "mu_X", "mu_D", "C", "S"}},
        {Scenario::glv_empirical, {"mu_alpha", "mu_gamma"}},
        {Scenario::sis_graph, {"er_p", "ba_m", "sw_rewire", "mu_e"}}};
    if (!sweepable.at(scenario).count(swept_parameter))
      throw InvalidSpec("parameter '" + swept_parameter + "' cannot be swept in " +
                        to_string(scenario));
    if (replicas < 1) throw InvalidSpec("replicas must be >= 1");
    if (values.empty()) throw InvalidSpec("sweep needs at least one value");
    for (double v : values)
      if (!std::isfinite(v)) throw InvalidSpec("sweep values must be finite");
    if (scenario == Scenario::sis_graph) {
      const auto g = effective_graph();
      if (g != "er" && g != "ba" && g != "sw") throw InvalidSpec("unknown graph '" + g + "'");
    }
    if (scenario == Scenario::glv_empirical && network_source.empty())
      throw InvalidSpec("glv_empirical needs a network_source directory");
    simulation.validate();
  }
};

/// Parameter values for one sweep point. Fixed overrides win; a standard
/// deviation left unset follows |mean / 3| of its (possibly swept) mean.
class ParameterSet {
 public:
  ParameterSet(const ExperimentPlan& plan, double swept_value)
      : fixed_(plan.fixed), swept_(plan.swept_parameter), value_(swept_value) {}

  double get(const std::string& key) const {
    if (key == swept_) return value_;
    if (auto it = fixed_.find(key); it != fixed_.end()) return it->second;
    static const std::map<std::string, std::string> sd_of{{"sigma_alpha", "mu_alpha"},
                                                          {"sigma_X", "mu_X"},
                                                          {"sigma_D", "mu_D"},
                                                          {"sigma_gamma", "mu_gamma"}};
    if (auto it = sd_of.find(key); it != sd_of.end()) return std::abs(get(it->second) / 3.0);
    static const std::map<std::string, double> defaults{
        {"mu_alpha", 1.0}, {"mu_X", -0.04}, {"mu_D", 1.0},     {"C", 0.5},
        {"S", 50.0},       {"rho", 0.0},    {"mu_gamma", 0.4}, {"n", 100.0},
        {"er_p", 0.1},     {"ba_m", 3.0},   {"sw_k", 6.0},     {"sw_rewire", 0.1},
        {"mu_e", 0.5},     {"sis_weight", 1.0}};
    if (auto it = defaults.find(key); it != defaults.end()) return it->second;
    throw InvalidSpec("unknown parameter '" + key + "'");
  }

  std::size_t get_count(const std::string& key) const {
    const double v = get(key);
    if (!(v >= 0.0) || v != std::floor(v)) throw InvalidSpec(key + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }

 private:
  std::map<std::string, double> fixed_;
  std::string swept_;
  double value_;
};

inline nlohmann::json to_json(const ExperimentPlan& p) {
  nlohmann::json sim{{"max_steps", p.simulation.max_steps},
                     {"convergence_tol", p.simulation.convergence_tol},
                     {"divergence_bound", p.simulation.divergence_bound}};
  if (p.simulation.clamp) sim["clamp"] = to_string(*p.simulation.clamp);
  nlohmann::json j{{"scenario", to_string(p.scenario)},
                   {"sweep", {{"parameter", p.swept_parameter}, {"values", p.values}}},
                   {"fixed", p.fixed},
                   {"replicas", p.replicas},
                   {"initial_condition", to_string(p.initial_condition)},
                   {"base_seed", p.base_seed},
                   {"simulation", sim}};
  if (p.scenario == Scenario::sis_graph) j["graph"] = p.graph;
  if (p.scenario == Scenario::glv_empirical) {
    j["network_source"] = p.network_source;
    j["size_cap"] = p.size_cap;
  }
  return j;
}

inline ExperimentPlan plan_from_json(const nlohmann::json& j) {
  ExperimentPlan p;
  try {
    p.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    const auto& sweep = j.at("sweep");
    p.swept_parameter = sweep.at("parameter").get<std::string>();
    p.values = sweep.at("values").get<std::vector<double>>();
    if (j.contains("fixed")) p.fixed = j.at("fixed").get<std::map<std::string, double>>();
    p.graph = j.value("graph", p.graph);
    p.replicas = j.value("replicas", p.replicas);
    p.initial_condition =
        initial_condition_from_string(j.value("initial_condition", std::string("both")));
    p.base_seed = j.value("base_seed", p.base_seed);
    p.network_source = j.value("network_source", std::string());
    p.size_cap = j.value("size_cap", false);
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      p.simulation.max_steps = s.value("max_steps", p.simulation.max_steps);
      p.simulation.convergence_tol = s.value("convergence_tol", p.simulation.convergence_tol);
      p.simulation.divergence_bound = s.value("divergence_bound", p.simulation.divergence_bound);
      if (s.contains("clamp")) p.simulation.clamp = clamp_from_string(s.at("clamp"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("plan: ") + e.what());
  }
  p.validate();
  return p;
}

inline ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(path.string() + ": " + e.what());
  }
  return plan_from_json(j);
}

// ---------------------------------------------------------------------------
// Seeds

/// Seed of the sampled system (matrix, rates) shared by both initial regimes.
inline std::uint64_t system_seed(std::uint64_t base, Scenario scenario, std::string_view network,
                                 std::size_t value_index, std::size_t replica) {
  return combine_seed({base, hash_string(to_string(scenario)), hash_string(network),
                       value_index, replica});
}

/// Distinct seed per (value, replica, regime) cell; drives the initial state.
inline std::uint64_t derive_seed(std::uint64_t base, Scenario scenario, std::string_view network,
                                 std::size_t value_index, std::size_t replica, Regime regime) {
  return combine_seed({system_seed(base, scenario, network, value_index, replica),
                       hash_string(to_string(regime))});
}

// ---------------------------------------------------------------------------
// Rows

struct ResultRow {
  std::string scenario;
  std::string network;
  double value = 0.0;
  std::size_t replica = 0;
  Regime regime = Regime::low;
  std::uint64_t seed = 0;
  Status status = Status::max_steps;
  bool period2 = false;
  double x_eff = kNaN;
  double mean_x = kNaN;
  std::vector<double> d;
  double root = kNaN;
  double multiplier = kNaN;
  double err = kNaN;
  double pred_d2 = kNaN;
  double pred_d3 = kNaN;
  double pred_xeff = kNaN;
  double pred_err = kNaN;
  std::optional<bool> pred_active;
  std::size_t steps = 0;

  auto sort_key() const { return std::tie(scenario, network, value, replica, regime); }
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<std::string> warnings;
};

/// x_eff below this counts as sitting on the zero solution.
inline constexpr double kZeroState = 1e-6;

namespace detail {

/// Fills the steady-state, reduction and manifold columns of a row.
inline void reduce_into(ResultRow& row, const InteractionMatrix& a, const DynamicsModel& model,
                        const SteadyStateRecord& rec) {
  row.status = rec.status;
  row.period2 = rec.period2;
  row.steps = rec.steps;
  row.mean_x = rec.mean_state;
  row.x_eff = std::isfinite(rec.x_eff) ? rec.x_eff : rec.mean_state;
  try {
    const EffectiveSystem sys = build_effective(a, model);
    row.d = sys.d;
    const auto proj = project_onto_manifold(row.x_eff, fixed_points(sys));
    row.root = proj.root;
    row.multiplier = proj.multiplier;
    row.err = proj.err;
  } catch (const ZeroTotalWeight&) {
  } catch (const NoManifoldSolution&) {
  } catch (const DegeneratePolynomial&) {
  } catch (const InvalidSpec&) {
  }
}

/// Theory columns for a GLV row; the branch follows the predicted stable root,
/// and a row stuck at zero while the nonzero root is stable uses the zero formula.
inline void glv_predictions(ResultRow& row, const GlvEnsemble& ens) {
  try {
    const auto p = glv_effective_params(ens);
    row.pred_d2 = p.d2;
    row.pred_d3 = p.d3;
    const auto rep = fixed_points(std::vector<double>{0.0, p.d2, p.d3});
    bool nonzero_stable = false, zero_stable = false;
    for (std::size_t k = 0; k < rep.roots.size(); ++k) {
      if (!rep.stable[k]) continue;
      (rep.roots[k] == 0.0 ? zero_stable : nonzero_stable) = true;
    }
    if (nonzero_stable) {
      const bool at_zero = std::abs(row.x_eff) <= kZeroState;
      const Branch b = at_zero ? Branch::zero : Branch::nonzero;
      row.pred_xeff = glv_x_eff_prediction(ens, b);
      row.pred_err = glv_error_prediction(ens, b);
    } else if (zero_stable) {
      row.pred_xeff = 0.0;
      row.pred_err = 0.0;
    }
  } catch (const ZeroDenominator&) {
  } catch (const DegeneratePolynomial&) {
  }
}

inline Vector normal_vector(std::size_t n, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = mean + sd * dist(rng);
  return v;
}

inline std::size_t worker_count() {
  if (const char* env = std::getenv("NETCOLLAPSE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace detail

struct RunOptions {
  std::optional<std::size_t> threads;            // default: NETCOLLAPSE_THREADS or hardware
  std::optional<std::uint64_t> shuffle_seed;     // permute cell execution order
};

/// Runs fn(k) for k in [0, count) on a worker pool and returns results in index order.
template <class Fn>
auto parallel_map(std::size_t count, Fn fn, const RunOptions& opt = {}) {
  using R = decltype(fn(std::size_t{}));
  std::vector<std::optional<R>> out(count);
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (opt.shuffle_seed) {
    Rng rng(*opt.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  const std::size_t workers = std::min(std::max<std::size_t>(1, count),
                                       opt.threads.value_or(detail::worker_count()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < count;) out[order[k]].emplace(fn(order[k]));
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  std::vector<R> result;
  result.reserve(count);
  for (auto& r : out) result.push_back(std::move(*r));
  return result;
}

namespace detail {

struct Cell {
  std::size_t network;
  std::size_t value_index;
  std::size_t replica;
  Regime regime;
};

inline std::vector<Cell> cells(const ExperimentPlan& plan, std::size_t networks) {
  std::vector<Cell> out;
  for (std::size_t n = 0; n < networks; ++n)
    for (std::size_t v = 0; v < plan.values.size(); ++v)
      for (std::size_t r = 0; r < plan.replicas; ++r)
        for (Regime g : plan.regimes()) out.push_back({n, v, r, g});
  return out;
}

inline ResultRow start_row(const ExperimentPlan& plan, const Cell& c, const std::string& network) {
  ResultRow row;
  row.scenario = to_string(plan.scenario);
  row.network = network;
  row.value = plan.values[c.value_index];
  row.replica = c.replica;
  row.regime = c.regime;
  row.seed = derive_seed(plan.base_seed, plan.scenario, network, c.value_index, c.replica, c.regime);
  return row;
}

inline ExperimentResult finish(std::vector<ResultRow> rows, std::vector<std::string> warnings) {
  std::sort(rows.begin(), rows.end(),
            [](const ResultRow& a, const ResultRow& b) { return a.sort_key() < b.sort_key(); });
  return {std::move(rows), std::move(warnings)};
}

}  // namespace detail

/// GLV on sampled random interaction matrices.
inline ExperimentResult run_glv_random(const ExperimentPlan& plan, const RunOptions& opt = {}) {
  plan.validate();
  if (plan.scenario != Scenario::glv_random) throw InvalidSpec("run_glv_random: wrong scenario");
  const auto cells = detail::cells(plan, 1);
  auto rows = parallel_map(cells.size(), [&](std::size_t k) {
    const auto& c = cells[k];
    ResultRow row = detail::start_row(plan, c, "");
    try {
      const ParameterSet ps(plan, row.value);
      RandomMatrixSpec spec;
      spec.size = ps.get_count("S");
      spec.mu_X = ps.get("mu_X");
      spec.sigma_X = ps.get("sigma_X");
      spec.rho = ps.get("rho");
      spec.connectivity = ps.get("C");
      spec.mu_D = ps.get("mu_D");
      spec.sigma_D = ps.get("sigma_D");
      const auto sys_seed = system_seed(plan.base_seed, plan.scenario, "", c.value_index, c.replica);
      spec.seed = combine_seed({sys_seed, 1});
      const InteractionMatrix a = generate_random_matrix(spec);
      const double mu_alpha = ps.get("mu_alpha"), sigma_alpha = ps.get("sigma_alpha");
      const Vector alpha =
          detail::normal_vector(spec.size, mu_alpha, sigma_alpha, combine_seed({sys_seed, 2}));
      const DynamicsModel model = make_glv(alpha);
      const auto rec = simulate(a, model, initial_state(spec.size, c.regime, row.seed), plan.simulation);
      detail::reduce_into(row, a, model, rec);
      detail::glv_predictions(row, glv_ensemble(spec, mu_alpha, sigma_alpha));
    } catch (const InvalidSpec&) {
      row.status = Status::diverged;
    }
    return row;
  }, opt);
  return detail::finish(std::move(rows), {});
}

/// Incidence files of a directory, sorted by name; unparseable files become warnings.
inline std::vector<BipartiteSpec> load_incidence_dir(const std::filesystem::path& dir, bool size_cap,
                                                     std::vector<std::string>& warnings) {
  if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<BipartiteSpec> out;
  IncidenceOptions opt;
  opt.size_cap = size_cap;
  for (const auto& f : files) {
    try {
      out.push_back(parse_incidence(f, opt));
    } catch (const Error& e) {
      warnings.push_back("skipping " + f.filename().string() + ": " + e.what());
    }
  }
  return out;
}

/// GLV on plant-pollinator block matrices built from incidence files.
inline ExperimentResult run_glv_empirical(const ExperimentPlan& plan, const RunOptions& opt = {}) {
  plan.validate();
  if (plan.scenario != Scenario::glv_empirical)
    throw InvalidSpec("run_glv_empirical: wrong scenario");
  std::vector<std::string> warnings;
  const auto networks = load_incidence_dir(plan.network_source, plan.size_cap, warnings);
  if (networks.empty()) throw EmptyNetwork("no parseable incidence files in " + plan.network_source);
  for (const auto& net : networks) {
    BipartiteSpec probe = net;
    probe.mu_gamma = 0.0;
    for (const auto& iso : build_mutualistic(probe).isolated)
      warnings.push_back(net.name + ": isolated " +
                         (iso.guild == IsolatedSpecies::Guild::plant ? "plant " : "animal ") +
                         std::to_string(iso.index));
  }

  const auto cells = detail::cells(plan, networks.size());
  auto rows = parallel_map(cells.size(), [&](std::size_t k) {
    const auto& c = cells[k];
    const auto& net = networks[c.network];
    ResultRow row = detail::start_row(plan, c, net.name);
    try {
      const ParameterSet ps(plan, row.value);
      const auto sys_seed =
          system_seed(plan.base_seed, plan.scenario, net.name, c.value_index, c.replica);
      BipartiteSpec spec = net;
      spec.mu_gamma = ps.get("mu_gamma");
      spec.sigma_gamma = ps.get("sigma_gamma");
      spec.seed = combine_seed({sys_seed, 1});
      const InteractionMatrix a = build_mutualistic(spec).matrix;
      const double mu_alpha = ps.get("mu_alpha"), sigma_alpha = ps.get("sigma_alpha");
      const Vector alpha =
          detail::normal_vector(a.size(), mu_alpha, sigma_alpha, combine_seed({sys_seed, 2}));
      const DynamicsModel model = make_glv(alpha);
      const auto rec = simulate(a, model, initial_state(a.size(), c.regime, row.seed), plan.simulation);
      detail::reduce_into(row, a, model, rec);
      if (a.size() >= 2) detail::glv_predictions(row, glv_ensemble(matrix_stats(a), mu_alpha, sigma_alpha));
    } catch (const InvalidSpec&) {
      row.status = Status::diverged;
    }
    return row;
  }, opt);
  return detail::finish(std::move(rows), std::move(warnings));
}

/// SIS on ER / BA / SW graphs with recovery rates uniform on [0, 2 mu_e].
inline ExperimentResult run_sis(const ExperimentPlan& plan, const RunOptions& opt = {}) {
  plan.validate();
  if (plan.scenario != Scenario::sis_graph) throw InvalidSpec("run_sis: wrong scenario");
  const std::string graph = plan.effective_graph();
  const auto cells = detail::cells(plan, 1);
  auto rows = parallel_map(cells.size(), [&](std::size_t k) {
    const auto& c = cells[k];
    ResultRow row = detail::start_row(plan, c, graph);
    try {
      const ParameterSet ps(plan, row.value);
      const std::size_t n = ps.get_count("n");
      const auto sys_seed = system_seed(plan.base_seed, plan.scenario, graph, c.value_index, c.replica);
      const auto graph_seed = combine_seed({sys_seed, 1});
      InteractionMatrix adj = InteractionMatrix::zeros(1);
      if (graph == "er")
        adj = generate_er(n, ps.get("er_p"), graph_seed);
      else if (graph == "ba")
        adj = generate_ba(n, ps.get_count("ba_m"), graph_seed);
      else
        adj = generate_sw(n, ps.get_count("sw_k"), ps.get("sw_rewire"), graph_seed);

      const double mu_e = ps.get("mu_e");
      const InteractionMatrix a = scaled(adj, infection_weight(adj, mu_e, ps.get("sis_weight")));
      Rng rng(combine_seed({sys_seed, 2}));
      std::uniform_real_distribution<double> ue(0.0, 2.0 * mu_e);
      Vector e(static_cast<Eigen::Index>(n));
      for (auto& v : e) v = ue(rng);

      const DynamicsModel model = make_sis(e);
      const auto rec = simulate(a, model, initial_state(n, c.regime, row.seed), plan.simulation);
      detail::reduce_into(row, a, model, rec);
      double e_eff = e.mean(), a_eff_value = 0.0;
      try {
        const MeanField mf(a);
        e_eff = mf(e);
        a_eff_value = mf(in_degrees(a));
      } catch (const ZeroTotalWeight&) {
      }
      row.pred_active = sis_threshold(e_eff, a_eff_value) == Phase::active;
    } catch (const InvalidSpec&) {
      row.status = Status::diverged;
    }
    return row;
  }, opt);
  return detail::finish(std::move(rows), {});
}

inline ExperimentResult run_plan(const ExperimentPlan& plan, const RunOptions& opt = {}) {
  switch (plan.scenario) {
    case Scenario::glv_random: return run_glv_random(plan, opt);
    case Scenario::glv_empirical: return run_glv_empirical(plan, opt);
    case Scenario::sis_graph: return run_sis(plan, opt);
  }
  throw InvalidSpec("unknown scenario");
}

// ---------------------------------------------------------------------------
// Output

enum class Format { csv, json };

inline Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json" || s == "structured-text") return Format::json;
  throw InvalidSpec("unknown format '" + s + "'");
}

inline std::size_t d_columns(const std::vector<ResultRow>& rows) {
  std::size_t s = 0;
  for (const auto& r : rows) s = std::max(s, r.d.size());
  return s;
}

inline std::vector<std::string> column_names(std::size_t d_count) {
  std::vector<std::string> cols{"scenario", "network", "value", "replica", "regime", "seed",
                                "status",   "period2", "x_eff", "mean_x"};
  for (std::size_t s = 1; s <= d_count; ++s) cols.push_back("d" + std::to_string(s));
  for (const char* c : {"root", "multiplier", "err", "pred_d2", "pred_d3", "pred_xeff", "pred_err",
                        "pred_active", "steps"})
    cols.emplace_back(c);
  return cols;
}

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::vector<std::string> row_cells(const ResultRow& r, std::size_t d_count) {
  std::vector<std::string> cells{r.scenario,
                                 r.network,
                                 format_number(r.value),
                                 std::to_string(r.replica),
                                 to_string(r.regime),
                                 std::to_string(r.seed),
                                 to_string(r.status),
                                 r.period2 ? "1" : "0",
                                 format_number(r.x_eff),
                                 format_number(r.mean_x)};
  for (std::size_t s = 0; s < d_count; ++s)
    cells.push_back(format_number(s < r.d.size() ? r.d[s] : kNaN));
  for (double v : {r.root, r.multiplier, r.err, r.pred_d2, r.pred_d3, r.pred_xeff, r.pred_err})
    cells.push_back(format_number(v));
  cells.push_back(r.pred_active ? (*r.pred_active ? "1" : "0") : "");
  cells.push_back(std::to_string(r.steps));
  return cells;
}

inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return kNaN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw MalformedFile("bad number '" + s + "'");
  return v;
}

inline Status status_from_string(const std::string& s) {
  if (s == "converged") return Status::converged;
  if (s == "diverged") return Status::diverged;
  if (s == "max_steps") return Status::max_steps;
  throw MalformedFile("bad status '" + s + "'");
}

}  // namespace detail

inline std::string to_csv(const std::vector<ResultRow>& rows) {
  const std::size_t d_count = d_columns(rows);
  std::ostringstream out;
  const auto cols = column_names(d_count);
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (const auto& r : rows) {
    const auto cells = detail::row_cells(r, d_count);
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << detail::csv_quote(cells[k]);
    out << '\n';
  }
  return out.str();
}

inline std::vector<ResultRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw MalformedFile("empty result table");
  const auto header = detail::parse_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
  std::size_t d_count = 0;
  while (col.count("d" + std::to_string(d_count + 1))) ++d_count;
  if (header != column_names(d_count)) throw MalformedFile("unexpected result table header");

  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = detail::parse_csv_line(line);
    if (c.size() != header.size()) throw MalformedFile("ragged result row");
    auto at = [&](const char* name) -> const std::string& { return c[col.at(name)]; };
    ResultRow r;
    r.scenario = at("scenario");
    r.network = at("network");
    r.value = detail::parse_double(at("value"));
    r.replica = std::stoull(at("replica"));
    r.regime = regime_from_string(at("regime"));
    r.seed = std::stoull(at("seed"));
    r.status = detail::status_from_string(at("status"));
    r.period2 = at("period2") == "1";
    r.x_eff = detail::parse_double(at("x_eff"));
    r.mean_x = detail::parse_double(at("mean_x"));
    for (std::size_t s = 1; s <= d_count; ++s)
      r.d.push_back(detail::parse_double(c[col.at("d" + std::to_string(s))]));
    while (!r.d.empty() && std::isnan(r.d.back())) r.d.pop_back();
    r.root = detail::parse_double(at("root"));
    r.multiplier = detail::parse_double(at("multiplier"));
    r.err = detail::parse_double(at("err"));
    r.pred_d2 = detail::parse_double(at("pred_d2"));
    r.pred_d3 = detail::parse_double(at("pred_d3"));
    r.pred_xeff = detail::parse_double(at("pred_xeff"));
    r.pred_err = detail::parse_double(at("pred_err"));
    if (!at("pred_active").empty()) r.pred_active = at("pred_active") == "1";
    r.steps = std::stoull(at("steps"));
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Per (scenario, network, value, regime) mean and standard deviation over converged rows.
struct SummaryRow {
  std::string scenario;
  std::string network;
  double value = 0.0;
  Regime regime = Regime::low;
  std::size_t rows = 0;
  std::size_t converged = 0;
  double err_mean = kNaN;
  double err_std = kNaN;
  double x_eff_mean = kNaN;
  double x_eff_std = kNaN;
  double pred_err_mean = kNaN;
};

inline std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<std::string, std::string, double, Regime>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[{r.scenario, r.network, r.value, r.regime}].push_back(&r);
  auto moments = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {kNaN, kNaN};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, kNaN};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
  };
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    std::tie(s.scenario, s.network, s.value, s.regime) = key;
    s.rows = members.size();
    std::vector<double> errs, xs, preds;
    for (const auto* r : members) {
      if (r->status != Status::converged) continue;
      ++s.converged;
      if (std::isfinite(r->err)) errs.push_back(r->err);
      if (std::isfinite(r->x_eff)) xs.push_back(r->x_eff);
      if (std::isfinite(r->pred_err)) preds.push_back(r->pred_err);
    }
    std::tie(s.err_mean, s.err_std) = moments(errs);
    std::tie(s.x_eff_mean, s.x_eff_std) = moments(xs);
    s.pred_err_mean = moments(preds).first;
    out.push_back(s);
  }
  return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "scenario,network,value,regime,rows,converged,err_mean,err_std,x_eff_mean,x_eff_std,"
         "pred_err\n";
  for (const auto& s : rows)
    out << s.scenario << ',' << detail::csv_quote(s.network) << ',' << format_number(s.value) << ','
        << to_string(s.regime) << ',' << s.rows << ',' << s.converged << ','
        << format_number(s.err_mean) << ',' << format_number(s.err_std) << ','
        << format_number(s.x_eff_mean) << ',' << format_number(s.x_eff_std) << ','
        << format_number(s.pred_err_mean) << '\n';
  return out.str();
}

inline nlohmann::json to_json(const std::vector<ResultRow>& rows, const ExperimentPlan& plan) {
  const std::size_t d_count = d_columns(rows);
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) table.push_back(detail::row_cells(r, d_count));
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : summarize(rows))
    summary.push_back({{"scenario", s.scenario}, {"network", s.network}, {"value", s.value},
                       {"regime", to_string(s.regime)}, {"rows", s.rows},
                       {"converged", s.converged}, {"err_mean", format_number(s.err_mean)},
                       {"err_std", format_number(s.err_std)},
                       {"x_eff_mean", format_number(s.x_eff_mean)},
                       {"x_eff_std", format_number(s.x_eff_std)}});
  return {{"format", "netcollapse-results"},
          {"plan", to_json(plan)},
          {"columns", column_names(d_count)},
          {"rows", std::move(table)},
          {"summary", std::move(summary)}};
}

/// Writes the table; values are printed with 17 significant digits.
inline void emit(const std::vector<ResultRow>& rows, const std::filesystem::path& path, Format format,
                 const ExperimentPlan* plan = nullptr) {
  if (rows.empty()) throw IoError("refusing to write an empty result table");
  std::string text;
  if (format == Format::csv) {
    text = to_csv(rows);
  } else {
    text = to_json(rows, plan ? *plan : ExperimentPlan{}).dump(1) + "\n";
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::vector<ResultRow> load_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return rows_from_csv(buf.str());
}

}  // namespace netcollapse
