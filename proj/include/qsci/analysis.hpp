#pragma once

/**
 * @file analysis.hpp
 * @brief Spin-orbital occupation entropies, pairwise mutual information and
 *        excitation-rank weights of a determinant expansion.
 *
 * Everything here treats p_k = c_k^2 as a classical distribution over
 * determinants. The mutual information therefore mixes classical correlation
 * and entanglement; it is not a reduced-density-matrix quantity.
 * Spin orbitals use the register order (alpha 0..n-1, then beta). Natural logs.
 */

#include <qsci/determinant.hpp>
#include <qsci/hamiltonian.hpp>
#include <qsci/parallel.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <charconv>
#include <string>
#include <vector>

namespace qsci {

namespace detail {

inline double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

/// c_k^2 normalized to sum 1.
inline std::vector<double> weights(const Wavefunction& psi) {
  std::vector<double> w(psi.size());
  double s = 0.0;
  for (std::size_t k = 0; k < psi.size(); ++k) s += w[k] = psi.coeffs[k] * psi.coeffs[k];
  if (s > 0)
    for (double& x : w) x /= s;
  return w;
}

}  // namespace detail

/// -[p ln p + (1-p) ln(1-p)].
inline double binary_entropy(double p) { return -(detail::xlogx(p) + detail::xlogx(1.0 - p)); }

struct OrbitalEntropies {
  std::vector<double> occupations;
  std::vector<double> entropies;
};

inline OrbitalEntropies orbital_entropies(const Wavefunction& psi) {
  const std::size_t n = psi.n_orbitals, m = 2 * n;
  const auto w = detail::weights(psi);
  OrbitalEntropies r{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
  for (std::size_t k = 0; k < psi.size(); ++k)
    for (std::size_t i = 0; i < m; ++i)
      if (psi.dets[k].occupied(i, n)) r.occupations[i] += w[k];
  for (std::size_t i = 0; i < m; ++i) {
    r.occupations[i] = std::clamp(r.occupations[i], 0.0, 1.0);
    r.entropies[i] = binary_entropy(r.occupations[i]);
  }
  return r;
}

/// I(i,j) = s_i + s_j - s_ij over spin orbitals, zero diagonal.
inline Eigen::MatrixXd mutual_information(const Wavefunction& psi) {
  const std::size_t n = psi.n_orbitals, m = 2 * n;
  const auto w = detail::weights(psi);
  const auto single = orbital_entropies(psi);
  Eigen::MatrixXd mi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  parallel_for_blocks(m, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        double joint[2][2] = {{0, 0}, {0, 0}};
        for (std::size_t k = 0; k < psi.size(); ++k)
          joint[psi.dets[k].occupied(i, n)][psi.dets[k].occupied(j, n)] += w[k];
        double sij = 0.0;
        for (auto& row : joint)
          for (double p : row) sij -= detail::xlogx(p);
        const double v = std::max(0.0, single.entropies[i] + single.entropies[j] - sij);
        mi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        mi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
  });
  return mi;
}

/// Weight sum c^2 per excitation rank relative to `reference`, buckets 0..max rank present.
inline std::vector<double> rank_histogram(const Wavefunction& psi, const Determinant& reference) {
  const auto w = detail::weights(psi);
  std::vector<double> h;
  for (std::size_t k = 0; k < psi.size(); ++k) {
    const auto r = static_cast<std::size_t>(excitation_rank(psi.dets[k], reference));
    if (h.size() <= r) h.resize(r + 1, 0.0);
    h[r] += w[k];
  }
  if (h.empty()) h.push_back(0.0);
  return h;
}

struct AnalysisReport {
  std::vector<double> occupations;
  std::vector<double> entropies;
  Eigen::MatrixXd mi;
  std::vector<double> rank_histogram;
};

inline AnalysisReport analyze(const Wavefunction& psi, const Determinant& reference) {
  const auto e = orbital_entropies(psi);
  return {e.occupations, e.entropies, mutual_information(psi), rank_histogram(psi, reference)};
}

/// Spin-orbital label: "0a".."(n-1)a", then "0b"...
inline std::string spin_orbital_label(std::size_t i, std::size_t n) {
  return std::to_string(i % n) + (i < n ? "a" : "b");
}

/// "i,j,label_i,label_j,weight" lines for every pair with I > threshold.
inline std::string mi_edge_list_csv(const Eigen::MatrixXd& mi, std::size_t n_orbitals, double threshold = 0.0) {
  std::string out = "i,j,label_i,label_j,mutual_information\n";
  char buf[64];
  for (Eigen::Index i = 0; i < mi.rows(); ++i)
    for (Eigen::Index j = i + 1; j < mi.cols(); ++j) {
      if (!(mi(i, j) > threshold)) continue;
      const auto end = std::to_chars(buf, buf + sizeof buf, mi(i, j)).ptr;
      out += std::to_string(i) + "," + std::to_string(j) + "," +
             spin_orbital_label(static_cast<std::size_t>(i), n_orbitals) + "," +
             spin_orbital_label(static_cast<std::size_t>(j), n_orbitals) + "," + std::string(buf, end) + "\n";
    }
  return out;
}

}  // namespace qsci
