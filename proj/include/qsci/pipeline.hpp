#pragma once

/**
 * @file pipeline.hpp
 * @brief Sample-based subspace diagonalization around a parameterized
 *        circuit, and the derivative-free outer loop.
 */

#include <qsci/ansatz.hpp>
#include <qsci/circuit.hpp>
#include <qsci/hamiltonian.hpp>
#include <qsci/rng.hpp>
#include <qsci/sampler.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace qsci {

struct OptimizerConfig {
  std::string method = "linear-trust-region";
  std::size_t max_evaluations = 500;
  double tolerance = 1e-8;
  std::size_t patience = 10;
  double initial_radius = 0.5;
  double final_radius = 1e-6;
};

struct PipelineConfig {
  std::uint64_t shots = 100000;
  double cutoff = 0.0;
  std::size_t top_m = 0;
  std::size_t layers = 1;
  std::size_t degree_cap = 0;
  bool orbital_rotation = false;
  bool compile_support = false;
  NoiseModel noise;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  /// Build the subspace from the alpha x beta product of the sampled spin marginals.
  bool spin_factorized = false;
  std::size_t combine_cap = 0;
  DavidsonOptions davidson;

  void validate() const {
    if (shots == 0) throw Error(ErrorCode::InvalidArgument, "shots must be positive");
    if (layers == 0) throw Error(ErrorCode::InvalidArgument, "layers must be positive");
    if (!(optimizer.tolerance > 0)) throw Error(ErrorCode::InvalidArgument, "optimizer tolerance must be positive");
    if (optimizer.max_evaluations == 0) throw Error(ErrorCode::InvalidArgument, "evaluation budget must be positive");
    if (!(cutoff >= 0)) throw Error(ErrorCode::InvalidArgument, "cutoff must be non-negative");
    noise.validate();
  }
};

struct QsciResult {
  Wavefunction wavefunction;
  SampleCounts counts;  // full register, after readout, before filtering
  std::uint64_t retained = 0;
  std::uint64_t rejected = 0;
  std::size_t unique = 0;
};

/**
 * circuit |reference> -> |amp|^2 -> depolarize -> sample -> readout ->
 * symmetry filter -> subspace ground state. Fixed seed streams make the
 * result a deterministic function of the parameters.
 */
inline QsciResult run_qsci_once(const Circuit& circuit, std::span<const double> params, const IntegralTable& t,
                                const Determinant& reference, const PipelineConfig& cfg) {
  const std::size_t n = t.n_orbitals();
  const std::size_t full = circuit.support.empty() ? circuit.n_qubits : circuit.full_qubits;
  if (full != 2 * n)
    throw Error(ErrorCode::ShapeMismatch, "circuit acts on " + std::to_string(full) + " qubits, table needs " +
                                              std::to_string(2 * n));
  const auto sv = run_from_basis(circuit, params, to_register_index(reference, n));
  const auto dist = depolarize_distribution(ideal_distribution(sv), cfg.noise.effective_p());
  auto counts = sample(dist, cfg.shots, derive_seed(cfg.seed, 1));
  counts.noise = cfg.noise;
  counts = embed_counts(apply_readout(counts, cfg.noise, derive_seed(cfg.seed, 2)), circuit);

  auto filtered = symmetry_filter(counts, n, t.n_alpha(), t.n_beta());
  if (filtered.kept.counts.empty())
    throw Error(ErrorCode::EmptySubspace, "no sampled string survived the symmetry filter (" +
                                              std::to_string(filtered.rejected) + " rejected)");
  std::vector<Determinant> dets;
  if (cfg.spin_factorized) {
    const auto [a, b] = spin_marginals(filtered.kept, n);
    dets = spin_factorized_combine(a, b, cfg.combine_cap);
  } else {
    dets = determinants_of(filtered.kept, n);
  }
  QsciResult r;
  r.wavefunction = davidson_lowest(build_subspace(dets, t), cfg.davidson);
  r.counts = std::move(counts);
  r.retained = filtered.retained;
  r.rejected = filtered.rejected;
  r.unique = dets.size();
  return r;
}

struct OptimizeResult {
  std::vector<double> params;
  double energy = 0.0;
  /// Best energy so far after each evaluation.
  std::vector<double> trace;
  std::size_t evaluations = 0;
  bool converged = false;
};

/**
 * Derivative-free minimization in the COBYLA family, without constraints:
 * each iteration fits a linear model on the simplex {x, x + rho e_i}, steps a
 * distance rho downhill and keeps the best point seen; rho halves whenever an
 * iteration fails to improve. Stops on budget, on rho < final_radius, or
 * after `patience` iterations improving by less than `tolerance` in total.
 */
inline OptimizeResult minimize(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                               const OptimizerConfig& opt) {
  OptimizeResult r;
  double best = std::numeric_limits<double>::infinity();
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++r.evaluations;
    if (v < best) {
      best = v;
      r.params = x;
    }
    r.trace.push_back(best);
    return v;
  };
  const std::size_t n = x0.size();
  double fx = eval(x0);
  if (n == 0) {
    r.energy = best;
    r.converged = true;
    return r;
  }
  double rho = opt.initial_radius;
  std::vector<double> x = x0;
  std::size_t stalled = 0;
  double window_start = fx;
  auto budget_left = [&] { return r.evaluations < opt.max_evaluations; };

  while (budget_left() && rho >= opt.final_radius) {
    std::vector<double> grad(n);
    std::vector<double> best_vertex;
    double best_vertex_f = fx;
    for (std::size_t i = 0; i < n && budget_left(); ++i) {
      auto xi = x;
      xi[i] += rho;
      const double fi = eval(xi);
      grad[i] = (fi - fx) / rho;
      if (fi < best_vertex_f) {
        best_vertex_f = fi;
        best_vertex = xi;
      }
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm > 0 && budget_left()) {
      auto xs = x;
      for (std::size_t i = 0; i < n; ++i) xs[i] -= rho * grad[i] / gnorm;
      const double fs = eval(xs);
      if (fs < best_vertex_f) {
        best_vertex_f = fs;
        best_vertex = xs;
      }
    }
    if (best_vertex_f < fx) {
      x = best_vertex;
      fx = best_vertex_f;
    } else {
      rho *= 0.5;
    }
    if (window_start - fx < opt.tolerance) {
      if (++stalled >= opt.patience) {
        r.converged = true;
        break;
      }
    } else {
      stalled = 0;
      window_start = fx;
    }
  }
  if (rho < opt.final_radius) r.converged = true;
  r.energy = best;
  return r;
}

/// Minimize the sampled subspace energy over the circuit parameters, starting from zero.
inline OptimizeResult optimize(const Circuit& circuit, const IntegralTable& t, const Determinant& reference,
                               const PipelineConfig& cfg) {
  cfg.validate();
  const auto objective = [&](std::span<const double> p) {
    try {
      return run_qsci_once(circuit, p, t, reference, cfg).wavefunction.energy;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptySubspace) return std::numeric_limits<double>::infinity();
      throw;
    }
  };
  return minimize(objective, std::vector<double>(circuit.n_params, 0.0), cfg.optimizer);
}

/// Prescreened targets with `reference` moved to the front, or prepended if it was screened out.
inline std::vector<Determinant> usci_targets(const Wavefunction& seed, const Determinant& reference, double cutoff,
                                             std::size_t top_m) {
  auto sel = prescreen(seed, cutoff, top_m);
  sel.erase(std::remove(sel.begin(), sel.end(), reference), sel.end());
  sel.insert(sel.begin(), reference);
  return sel;
}

/// USCI circuit from `reference` over the prescreened targets of a seed wavefunction.
inline Circuit usci_from_seed(const Wavefunction& seed, const Determinant& reference, const PipelineConfig& cfg) {
  const auto sel = usci_targets(seed, reference, cfg.cutoff, cfg.top_m);
  auto c = build_usci(reference, sel, seed.n_orbitals,
                      {.layers = cfg.layers, .degree_cap = cfg.degree_cap, .orbital_rotation = cfg.orbital_rotation});
  if (cfg.compile_support) c = compile_active_support(c, to_register_index(reference, seed.n_orbitals));
  return c;
}

/// Same, taking the heaviest seed determinant as the reference.
inline Circuit usci_from_seed(const Wavefunction& seed, const PipelineConfig& cfg) {
  return usci_from_seed(seed, seed.ranked().dets.front(), cfg);
}

}  // namespace qsci
