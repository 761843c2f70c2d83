#pragma once

/**
 * @file hcouple.hpp
 * @brief Hamiltonian-coupled subspace expansion and Epstein-Nesbet PT2.
 */

#include <qsci/determinant.hpp>
#include <qsci/hamiltonian.hpp>
#include <qsci/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace qsci {

/// Couplings below this magnitude count as zero.
inline constexpr double coupling_zero = 1e-14;

/// External determinant mu with sum_I H_{mu I} c_I and sum_I |H_{mu I} c_I|.
struct Coupling {
  Determinant det;
  double amplitude = 0.0;
  double score = 0.0;
};

/// Every determinant outside S with a nonzero matrix element to S, in bitmask order.
inline std::vector<Coupling> external_couplings(const Wavefunction& psi, const IntegralTable& t) {
  const std::size_t n = t.n_orbitals();
  std::unordered_set<Determinant, DeterminantHash> inside(psi.dets.begin(), psi.dets.end());
  using Map = std::unordered_map<Determinant, Coupling, DeterminantHash>;
  const std::size_t workers = static_cast<std::size_t>(std::max(1, thread_count()));
  const std::size_t blocks = std::min<std::size_t>(workers, std::max<std::size_t>(psi.size(), 1));
  std::vector<Map> partial(blocks);
  parallel_for_blocks(blocks, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t lo = psi.size() * b / blocks, hi = psi.size() * (b + 1) / blocks;
      for (std::size_t i = lo; i < hi; ++i) {
        const auto& src = psi.dets[i];
        const double ci = psi.coeffs[i];
        for_each_connected(src, n, [&](const Determinant& mu) {
          if (inside.count(mu)) return;
          const double h = slater_condon(mu, src, t);
          if (std::abs(h) <= coupling_zero) return;
          auto& e = partial[b][mu];
          e.det = mu;
          e.amplitude += h * ci;
          e.score += std::abs(h * ci);
        });
      }
    }
  });
  Map merged = std::move(partial[0]);
  for (std::size_t b = 1; b < blocks; ++b)
    for (auto& [k, v] : partial[b]) {
      auto& e = merged[k];
      e.det = k;
      e.amplitude += v.amplitude;
      e.score += v.score;
    }
  std::vector<Coupling> out;
  out.reserve(merged.size());
  for (auto& [k, v] : merged) out.push_back(v);
  std::sort(out.begin(), out.end(), [](const Coupling& a, const Coupling& b) { return a.det < b.det; });
  return out;
}

inline std::vector<Determinant> connected_set(const Wavefunction& psi, const IntegralTable& t) {
  std::vector<Determinant> out;
  for (const auto& c : external_couplings(psi, t)) out.push_back(c.det);
  return out;
}

struct ScoredDeterminant {
  Determinant det;
  double score = 0.0;
};

inline void sort_by_score(std::vector<ScoredDeterminant>& v) {
  std::sort(v.begin(), v.end(), [](const ScoredDeterminant& a, const ScoredDeterminant& b) {
    return a.score != b.score ? a.score > b.score : a.det < b.det;
  });
}

/// s_mu = sum_I |H_{mu I} c_I| for each candidate, sorted descending (ties by bitmask order).
inline std::vector<ScoredDeterminant> score_candidates(const Wavefunction& psi,
                                                       const std::vector<Determinant>& candidates,
                                                       const IntegralTable& t) {
  std::vector<ScoredDeterminant> out(candidates.size());
  parallel_for_blocks(candidates.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) s += std::abs(slater_condon(candidates[k], psi.dets[i], t) * psi.coeffs[i]);
      out[k] = {candidates[k], s};
    }
  });
  sort_by_score(out);
  return out;
}

struct ExpansionResult {
  std::vector<Determinant> added;
  std::vector<double> scores;
  double energy_before = 0.0;
  double energy_after = 0.0;
  Wavefunction wavefunction_after;
  double tau = 0.0;
  std::size_t top_k = 0;
  /// Nothing passed the threshold; wavefunction_after is the input.
  bool no_candidates = false;
};

/**
 * Augment S with the external determinants scoring s_mu >= tau (then the
 * top_k best, if top_k > 0) and re-diagonalize over the enlarged space.
 */
inline ExpansionResult expand_and_rediagonalize(const Wavefunction& psi, const IntegralTable& t, double tau,
                                                std::size_t top_k = 0, const DavidsonOptions& opt = {}) {
  if (!(tau >= 0)) throw Error(ErrorCode::InvalidArgument, "tau must be non-negative");
  ExpansionResult r;
  r.tau = tau;
  r.top_k = top_k;
  r.energy_before = psi.energy;
  std::vector<ScoredDeterminant> pass;
  for (const auto& c : external_couplings(psi, t))
    if (c.score >= tau) pass.push_back({c.det, c.score});
  sort_by_score(pass);
  if (top_k != 0 && pass.size() > top_k) pass.resize(top_k);
  if (pass.empty()) {
    r.no_candidates = true;
    r.energy_after = psi.energy;
    r.wavefunction_after = psi;
    return r;
  }
  auto dets = psi.dets;
  for (const auto& s : pass) {
    r.added.push_back(s.det);
    r.scores.push_back(s.score);
    dets.push_back(s.det);
  }
  r.wavefunction_after = davidson_lowest(build_subspace(dets, t), opt);
  r.energy_after = r.wavefunction_after.energy;
  return r;
}

/// Repeat the expansion until nothing is added or `max_iterations` is reached.
inline std::vector<ExpansionResult> hcouple_iterate(Wavefunction psi, const IntegralTable& t, double tau,
                                                    std::size_t top_k, std::size_t max_iterations,
                                                    const DavidsonOptions& opt = {}) {
  std::vector<ExpansionResult> out;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    auto r = expand_and_rediagonalize(psi, t, tau, top_k, opt);
    const bool stop = r.no_candidates;
    psi = r.wavefunction_after;
    out.push_back(std::move(r));
    if (stop) break;
  }
  return out;
}

struct Pt2Result {
  double correction = 0.0;
  std::size_t terms = 0;
  /// Terms dropped because |E_mu - E_S| fell below the denominator floor.
  std::size_t small_denominators = 0;
};

inline constexpr double pt2_denominator_floor = 1e-8;

/// Epstein-Nesbet correction -sum_mu |sum_I H_{mu I} c_I|^2 / (E_mu - E_S), E_mu = <mu|H|mu>.
inline Pt2Result en_pt2(const Wavefunction& psi, const IntegralTable& t) {
  Pt2Result r;
  for (const auto& c : external_couplings(psi, t)) {
    const double denom = determinant_energy(c.det, t) - psi.energy;
    if (std::abs(denom) < pt2_denominator_floor) {
      ++r.small_denominators;
      continue;
    }
    r.correction -= c.amplitude * c.amplitude / denom;
    ++r.terms;
  }
  return r;
}

}  // namespace qsci
