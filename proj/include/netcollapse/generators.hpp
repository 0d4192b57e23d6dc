#pragma once

// Network construction: random interaction matrices, social graphs for the
// SIS scenario, and plant-pollinator block matrices.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "netcollapse/network.hpp"
#include "netcollapse/random.hpp"

namespace netcollapse {

// ---------------------------------------------------------------------------
// Random interaction matrices

struct RandomMatrixSpec {
  std::size_t size = 50;
  double mu_X = -0.04;
  double sigma_X = 0.04 / 3.0;
  double rho = 0.0;
  double connectivity = 0.5;
  double mu_D = 1.0;
  double sigma_D = 1.0 / 3.0;
  Marginal marginal = Marginal::normal;
  std::uint64_t seed = 0;

  void validate() const {
    if (size < 2) throw InvalidSpec("random matrix: S must be >= 2");
    if (!(connectivity > 0.0 && connectivity <= 1.0))
      throw InvalidSpec("random matrix: connectivity must lie in (0, 1]");
    if (!(sigma_X >= 0.0) || !(sigma_D >= 0.0))
      throw InvalidSpec("random matrix: standard deviations must be >= 0");
    if (!(rho >= -1.0 && rho <= 1.0))
      throw InvalidSpec("random matrix: rho must lie in [-1, 1]");
    if (!std::isfinite(mu_X) || !std::isfinite(mu_D))
      throw InvalidSpec("random matrix: means must be finite");
  }
};

/// Samples A with A_ii = -D_i and correlated off-diagonal pairs (A_ij, A_ji).
///
/// Each off-diagonal entry is present independently with probability C. Present
/// pairs share a Gaussian copula with correlation rho, so the realized global
/// moments are mu_A = C mu_X, sigma_A^2 = C sigma_X^2 + C(1-C) mu_X^2 and
/// cov(A_ij, A_ji) = C^2 rho sigma_X^2.
inline InteractionMatrix generate_random_matrix(const RandomMatrixSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution present(spec.connectivity);
  const auto n = static_cast<Eigen::Index>(spec.size);
  const double rho_perp = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));

  Matrix w = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const bool upper = present(rng);
      const bool lower = present(rng);
      const double z1 = normal(rng);
      const double z2 = spec.rho * z1 + rho_perp * normal(rng);
      if (upper) w(i, j) = to_marginal(z1, spec.mu_X, spec.sigma_X, spec.marginal);
      if (lower) w(j, i) = to_marginal(z2, spec.mu_X, spec.sigma_X, spec.marginal);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    w(i, i) = -to_marginal(normal(rng), spec.mu_D, spec.sigma_D, spec.marginal);
  return InteractionMatrix(std::move(w), true);
}

// ---------------------------------------------------------------------------
// Social graphs (binary symmetric adjacency times a uniform weight)

namespace detail {

inline InteractionMatrix from_edges(std::size_t n,
                                    const std::vector<std::set<std::size_t>>& adj,
                                    double weight) {
  Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : adj[i]) w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = weight;
  return InteractionMatrix(std::move(w), false);
}

inline void check_graph_args(std::size_t n, double weight) {
  if (n < 2) throw InvalidSpec("graph: n must be >= 2");
  if (!std::isfinite(weight)) throw InvalidSpec("graph: weight must be finite");
}

}  // namespace detail

/// Erdos-Renyi G(n, p).
inline InteractionMatrix generate_er(std::size_t n, double p, std::uint64_t seed,
                                     double weight = 1.0) {
  detail::check_graph_args(n, weight);
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec("ER: p must lie in [0, 1]");
  Rng rng(seed);
  std::bernoulli_distribution edge(p);
  std::vector<std::set<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) {
        adj[i].insert(j);
        adj[j].insert(i);
      }
  return detail::from_edges(n, adj, weight);
}

/// Barabasi-Albert preferential attachment; seeded from a clique on m + 1 nodes.
inline InteractionMatrix generate_ba(std::size_t n, std::size_t m, std::uint64_t seed,
                                     double weight = 1.0) {
  detail::check_graph_args(n, weight);
  if (m < 1 || m >= n) throw InvalidSpec("BA: need 1 <= m < n");
  Rng rng(seed);
  std::vector<std::set<std::size_t>> adj(n);
  std::vector<std::size_t> endpoints;  // node repeated once per incident edge
  for (std::size_t i = 0; i <= m; ++i)
    for (std::size_t j = i + 1; j <= m; ++j) {
      adj[i].insert(j);
      adj[j].insert(i);
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  for (std::size_t node = m + 1; node < n; ++node) {
    std::set<std::size_t> targets;
    std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
    while (targets.size() < m) targets.insert(endpoints[pick(rng)]);
    for (auto t : targets) {
      adj[node].insert(t);
      adj[t].insert(node);
      endpoints.push_back(node);
      endpoints.push_back(t);
    }
  }
  return detail::from_edges(n, adj, weight);
}

/// Watts-Strogatz: ring lattice of even degree k, each lattice edge rewired with probability p.
inline InteractionMatrix generate_sw(std::size_t n, std::size_t k, double p, std::uint64_t seed,
                                     double weight = 1.0) {
  detail::check_graph_args(n, weight);
  if (k < 2 || k % 2 != 0 || k >= n) throw InvalidSpec("SW: k must be even with 2 <= k < n");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec("SW: rewiring p must lie in [0, 1]");
  Rng rng(seed);
  std::vector<std::set<std::size_t>> adj(n);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t j = 1; j <= k / 2; ++j) {
      const std::size_t v = (u + j) % n;
      adj[u].insert(v);
      adj[v].insert(u);
    }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  for (std::size_t j = 1; j <= k / 2; ++j) {
    for (std::size_t u = 0; u < n; ++u) {
      const std::size_t v = (u + j) % n;
      if (coin(rng) >= p) continue;
      if (adj[u].size() >= n - 1 || !adj[u].count(v)) continue;
      std::size_t w = node(rng);
      while (w == u || adj[u].count(w)) w = node(rng);
      adj[u].erase(v);
      adj[v].erase(u);
      adj[u].insert(w);
      adj[w].insert(u);
    }
  }
  return detail::from_edges(n, adj, weight);
}

inline double mean_degree(const InteractionMatrix& adjacency) {
  return (adjacency.weights().array() != 0.0).cast<double>().sum() /
         static_cast<double>(adjacency.size());
}

/// Uniform infection weight lambda = scale * mu_e / <k>; zero for an edgeless graph.
inline double infection_weight(const InteractionMatrix& adjacency, double mu_e, double scale) {
  const double k = mean_degree(adjacency);
  return k > 0.0 ? scale * mu_e / k : 0.0;
}

inline InteractionMatrix scaled(const InteractionMatrix& a, double factor) {
  return InteractionMatrix(a.weights() * factor, a.directed());
}

// ---------------------------------------------------------------------------
// Plant-pollinator networks

struct BipartiteSpec {
  Matrix incidence;  // S_p x S_a, entries 0 or 1
  double mu_gamma = 0.4;
  std::optional<double> sigma_gamma;  // defaults to |mu_gamma / 3|
  double competition_max = -0.001;
  double intraspecific = -1.0;
  std::uint64_t seed = 0;
  std::string name;

  std::size_t plants() const { return static_cast<std::size_t>(incidence.rows()); }
  std::size_t animals() const { return static_cast<std::size_t>(incidence.cols()); }
  double gamma_sd() const { return sigma_gamma.value_or(std::abs(mu_gamma / 3.0)); }
};

struct IsolatedSpecies {
  enum class Guild { plant, animal } guild;
  std::size_t index;  // within its guild
};

struct MutualisticNetwork {
  InteractionMatrix matrix;
  std::vector<IsolatedSpecies> isolated;
};

/// Block matrix [Omega_pp Gamma_pa; Gamma_ap Omega_aa] with gamma_ij = gamma y_ij / k_i.
inline MutualisticNetwork build_mutualistic(const BipartiteSpec& spec) {
  const auto sp = static_cast<Eigen::Index>(spec.plants());
  const auto sa = static_cast<Eigen::Index>(spec.animals());
  if (sp < 1 || sa < 1) throw InvalidSpec("bipartite: need S_p, S_a >= 1");
  if (((spec.incidence.array() != 0.0) && (spec.incidence.array() != 1.0)).any())
    throw InvalidSpec("bipartite: incidence must be binary");
  if (!(spec.gamma_sd() >= 0.0)) throw InvalidSpec("bipartite: sigma_gamma must be >= 0");

  Rng rng(spec.seed);
  std::normal_distribution<double> gamma(spec.mu_gamma, spec.gamma_sd());
  const Eigen::Index s = sp + sa;
  Matrix w = Matrix::Zero(s, s);

  auto fill_competition = [&](Eigen::Index offset, Eigen::Index guild) {
    if (guild < 2) return;
    const double mean = -1.0 / static_cast<double>(guild);
    const double hi = spec.competition_max;
    if (mean > hi) throw InvalidSpec("bipartite: guild too large for the competition maximum");
    std::uniform_real_distribution<double> comp(2.0 * mean - hi, hi);
    for (Eigen::Index i = 0; i < guild; ++i)
      for (Eigen::Index j = 0; j < guild; ++j)
        if (i != j) w(offset + i, offset + j) = comp(rng);
  };
  fill_competition(0, sp);
  fill_competition(sp, sa);

  MutualisticNetwork out{InteractionMatrix::zeros(1), {}};
  const Eigen::VectorXd plant_degree = spec.incidence.rowwise().sum();
  const Eigen::VectorXd animal_degree = spec.incidence.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < sp; ++i) {
    if (plant_degree(i) == 0.0)
      out.isolated.push_back({IsolatedSpecies::Guild::plant, static_cast<std::size_t>(i)});
    for (Eigen::Index j = 0; j < sa; ++j)
      if (spec.incidence(i, j) != 0.0) w(i, sp + j) = gamma(rng) / plant_degree(i);
  }
  for (Eigen::Index j = 0; j < sa; ++j) {
    if (animal_degree(j) == 0.0)
      out.isolated.push_back({IsolatedSpecies::Guild::animal, static_cast<std::size_t>(j)});
    for (Eigen::Index i = 0; i < sp; ++i)
      if (spec.incidence(i, j) != 0.0) w(sp + j, i) = gamma(rng) / animal_degree(j);
  }
  w.diagonal().setConstant(spec.intraspecific);
  out.matrix = InteractionMatrix(std::move(w), true);
  return out;
}

// ---------------------------------------------------------------------------
// Incidence files

struct IncidenceOptions {
  bool size_cap = false;
  std::size_t max_species = 200;  // networks with S_p + S_a >= this are rejected under the cap
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"'");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"'");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_cells(const std::string& line, bool comma) {
  std::vector<std::string> cells;
  if (comma) {
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
  } else {
    std::istringstream ss(line);
    std::string cell;
    while (ss >> cell) cells.push_back(cell);
  }
  return cells;
}

}  // namespace detail

/// Parses a plants x animals grid. Non-zero cells become 1. A non-numeric first
/// row is treated as a header, and a first column that is non-numeric on every
/// row is treated as row labels.
inline BipartiteSpec parse_incidence_text(const std::string& text,
                                          const IncidenceOptions& options = {}) {
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
      if (!detail::trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw EmptyNetwork("incidence file is empty");
  const bool comma = text.find(',') != std::string::npos;

  std::vector<std::vector<std::string>> rows;
  for (const auto& l : lines) rows.push_back(detail::split_cells(l, comma));

  auto all_numeric = [](const std::vector<std::string>& r, std::size_t from) {
    for (std::size_t k = from; k < r.size(); ++k)
      if (!detail::parse_number(r[k])) return false;
    return true;
  };
  // A header row carries column labels only; numbers past its first cell make it data.
  const bool header = !all_numeric(rows.front(), 0) &&
                      std::none_of(rows.front().begin() + 1, rows.front().end(),
                                   [](const std::string& c) { return detail::parse_number(c).has_value(); });
  if (header) rows.erase(rows.begin());
  if (rows.empty()) throw EmptyNetwork("incidence file has no data rows");

  const bool labelled = std::all_of(rows.begin(), rows.end(), [](const auto& r) {
    return !r.empty() && !detail::parse_number(r.front());
  });
  if (labelled)
    for (auto& r : rows) r.erase(r.begin());

  const std::size_t cols = rows.front().size();
  if (cols == 0) throw EmptyNetwork("incidence file has no columns");
  Matrix y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw MalformedFile("incidence row " + std::to_string(i + 1) + " has " +
                          std::to_string(rows[i].size()) + " cells, expected " +
                          std::to_string(cols));
    for (std::size_t j = 0; j < cols; ++j) {
      const auto v = detail::parse_number(rows[i][j]);
      if (!v) throw MalformedFile("non-numeric cell '" + rows[i][j] + "'");
      if (*v < 0.0) throw MalformedFile("negative cell '" + rows[i][j] + "'");
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *v > 0.0 ? 1.0 : 0.0;
    }
  }
  if (options.size_cap && rows.size() + cols >= options.max_species)
    throw SizeCapExceeded("network has " + std::to_string(rows.size() + cols) +
                          " species, cap is below " + std::to_string(options.max_species));

  BipartiteSpec spec;
  spec.incidence = std::move(y);
  return spec;
}

inline BipartiteSpec parse_incidence(const std::filesystem::path& path,
                                     const IncidenceOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto spec = parse_incidence_text(buf.str(), options);
  spec.name = path.stem().string();
  return spec;
}

}  // namespace netcollapse
