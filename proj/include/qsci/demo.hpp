#pragma once

/**
 * @file demo.hpp
 * @brief Fixture-scale end-to-end run: USCI and LUCJ sampling side by side,
 *        then sample-based diagonalization, H-Couple refinement and PT2
 *        against the exact ground state.
 */

#include <qsci/ansatz.hpp>
#include <qsci/fixtures.hpp>
#include <qsci/hcouple.hpp>
#include <qsci/pipeline.hpp>
#include <qsci/rng.hpp>
#include <qsci/sampler.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace qsci {

struct DemoConfig {
  std::string fixture = "hubbard4";
  PipelineConfig pipeline;
  /// USCI targets: the top_m heaviest determinants of the exact ground state.
  std::size_t top_m = 16;
  std::size_t top_k_check = 10;
  std::size_t hcouple_iterations = 1;
  double tau = 0.0;
  /// Scale of the random LUCJ generator entries.
  double lucj_scale = 0.3;
};

struct SamplingSummary {
  std::string ansatz;
  std::size_t qubits = 0;
  std::size_t parameters = 0;
  std::size_t unique = 0;
  std::uint64_t retained = 0;
  std::uint64_t rejected = 0;
  double valid_fraction = 0.0;
  /// A heaviest exact determinant is among the top_k_check most frequent valid strings.
  bool dominant_in_top = false;
  std::vector<std::pair<Determinant, std::uint64_t>> top;
};

struct DemoReport {
  std::string fixture;
  std::size_t n_orbitals = 0;
  std::size_t fci_dimension = 0;
  double fci_energy = 0.0;
  double reference_energy = 0.0;
  /// Exact determinants tied for the largest |c|.
  std::vector<Determinant> dominant;
  SamplingSummary usci;
  SamplingSummary lucj;
  OptimizeResult optimization;
  double qsci_energy = 0.0;
  std::size_t qsci_subspace = 0;
  std::vector<double> hcouple_energies;
  std::size_t hcouple_subspace = 0;
  double pt2_correction = 0.0;
  double final_energy = 0.0;
  double final_error = 0.0;
  Wavefunction final_wavefunction;
};

namespace detail {

inline SamplingSummary summarize(const std::string& name, const Circuit& c, const SampleCounts& counts,
                                 std::size_t n, int na, int nb, const std::vector<Determinant>& dominant, std::size_t top_k) {
  SamplingSummary s;
  s.ansatz = name;
  s.qubits = c.n_qubits;
  s.parameters = c.n_params;
  s.unique = counts.counts.size();
  const auto f = symmetry_filter(counts, n, na, nb);
  s.retained = f.retained;
  s.rejected = f.rejected;
  s.valid_fraction = static_cast<double>(f.retained) / static_cast<double>(std::max<std::uint64_t>(counts.sum(), 1));
  std::vector<std::pair<Determinant, std::uint64_t>> rows;
  for (const auto& [x, k] : f.kept.counts) rows.emplace_back(from_register_index(x, n), k);
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (rows.size() > top_k) rows.resize(top_k);
  s.dominant_in_top = std::any_of(rows.begin(), rows.end(), [&](const auto& r) {
    return std::find(dominant.begin(), dominant.end(), r.first) != dominant.end();
  });
  s.top = std::move(rows);
  return s;
}

/// Seeded LUCJ generators: K antisymmetric n x n, J symmetric 2n x 2n, entries uniform in [-scale, scale].
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> random_lucj_generators(std::size_t n, double scale,
                                                                          std::uint64_t seed) {
  CounterRng rng(seed, 3);
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(ni, ni), j = Eigen::MatrixXd::Zero(2 * ni, 2 * ni);
  for (Eigen::Index p = 0; p < ni; ++p)
    for (Eigen::Index q = p + 1; q < ni; ++q) {
      k(p, q) = scale * (2 * rng.uniform() - 1);
      k(q, p) = -k(p, q);
    }
  for (Eigen::Index p = 0; p < 2 * ni; ++p)
    for (Eigen::Index q = p; q < 2 * ni; ++q) j(p, q) = j(q, p) = scale * (2 * rng.uniform() - 1);
  return {k, j};
}

}  // namespace detail

inline DemoReport run_demo(const DemoConfig& cfg) {
  cfg.pipeline.validate();
  const auto fx = make_fixture(cfg.fixture);
  const auto& t = fx.table;
  const std::size_t n = t.n_orbitals();
  DemoReport r;
  r.fixture = fx.name;
  r.n_orbitals = n;
  const auto exact = fci_oracle(t);
  r.fci_dimension = exact.size();
  r.fci_energy = exact.energy;
  r.reference_energy = determinant_energy(fx.reference, t);
  const auto ranked = exact.ranked();
  for (std::size_t i = 0; i < ranked.size(); ++i)
    if (std::abs(ranked.coeffs[i]) >= std::abs(ranked.coeffs[0]) - 1e-10) r.dominant.push_back(ranked.dets[i]);

  auto pc = cfg.pipeline;
  pc.top_m = cfg.top_m;
  const auto usci = usci_from_seed(exact, fx.reference, pc);

  r.optimization = optimize(usci, t, fx.reference, cfg.pipeline);
  const auto best = run_qsci_once(usci, r.optimization.params, t, fx.reference, cfg.pipeline);
  r.usci = detail::summarize("USCI", usci, best.counts, n, t.n_alpha(), t.n_beta(), r.dominant, cfg.top_k_check);

  const auto [k, j] = detail::random_lucj_generators(n, cfg.lucj_scale, cfg.pipeline.seed);
  const auto lucj = build_lucj(k, j);
  const auto sv = run_from_basis(lucj, {}, to_register_index(fx.reference, n));
  auto lc = sample(depolarize_distribution(ideal_distribution(sv), cfg.pipeline.noise.effective_p()), cfg.pipeline.shots,
                   derive_seed(cfg.pipeline.seed, 1));
  lc = apply_readout(lc, cfg.pipeline.noise, derive_seed(cfg.pipeline.seed, 2));
  r.lucj = detail::summarize("LUCJ", lucj, lc, n, t.n_alpha(), t.n_beta(), r.dominant, cfg.top_k_check);

  r.qsci_energy = best.wavefunction.energy;
  r.qsci_subspace = best.wavefunction.size();
  Wavefunction psi = best.wavefunction;
  if (cfg.hcouple_iterations > 0) {
    for (const auto& step : hcouple_iterate(psi, t, cfg.tau, 0, cfg.hcouple_iterations, cfg.pipeline.davidson)) {
      r.hcouple_energies.push_back(step.energy_after);
      psi = step.wavefunction_after;
    }
  }
  r.hcouple_subspace = psi.size();
  r.pt2_correction = en_pt2(psi, t).correction;
  r.final_energy = psi.energy;
  r.final_error = psi.energy - exact.energy;
  r.final_wavefunction = std::move(psi);
  return r;
}

}  // namespace qsci
