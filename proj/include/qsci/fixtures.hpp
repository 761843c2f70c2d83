#pragma once

/// Built-in model Hamiltonians used by the demo, the samples and the tests.

#include <qsci/determinant.hpp>
#include <qsci/error.hpp>
#include <qsci/fcidump.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace qsci {

struct Fixture {
  std::string name;
  IntegralTable table;
  /// Reference determinant for USCI construction and single-determinant seeds.
  Determinant reference;
  std::string description;
};

/// Open-chain Hubbard model in the site basis: h_{p,p+1} = -t, (pp|pp) = U.
inline IntegralTable hubbard_chain(std::size_t sites, double u, double t = 1.0, int n_electrons = -1, int ms2 = 0) {
  if (n_electrons < 0) n_electrons = static_cast<int>(sites);
  IntegralTable table(sites, n_electrons, ms2);
  for (std::size_t p = 0; p + 1 < sites; ++p) table.set_h(p, p + 1, -t);
  for (std::size_t p = 0; p < sites; ++p) table.set_g(p, p, p, p, u);
  return table;
}

/// Neel configuration: alpha on even sites, beta on odd sites.
inline Determinant neel_determinant(std::size_t sites) {
  Determinant d;
  for (std::size_t p = 0; p < sites; ++p) (p % 2 == 0 ? d.alpha : d.beta) |= Word{1} << p;
  return d;
}

inline Determinant aufbau_determinant(std::size_t n_alpha, std::size_t n_beta) {
  return {low_mask(n_alpha), low_mask(n_beta)};
}

/**
 * Synthetic hydrogen-chain-like model: nearest-neighbour hopping plus a
 * screened density-density repulsion V_pq = U / (1 + |p - q|), rotated into
 * the eigenbasis of the hopping matrix so the aufbau determinant is the
 * Hartree-Fock-like reference.
 */
inline IntegralTable synthetic_chain(std::size_t sites, double u = 1.5, double t = 1.0) {
  const auto n = static_cast<Eigen::Index>(sites);
  Eigen::MatrixXd hop = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index p = 0; p + 1 < n; ++p) hop(p, p + 1) = hop(p + 1, p) = -t;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hop);
  Eigen::MatrixXd c = es.eigenvectors();
  // Deterministic sign: first nonzero component of each orbital positive.
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index first = 0;
    while (first < n && std::abs(c(first, k)) < 1e-12) ++first;
    if (first < n && c(first, k) < 0) c.col(k) *= -1.0;
  }
  Eigen::MatrixXd v(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) v(a, b) = u / (1.0 + static_cast<double>(std::abs(a - b)));

  IntegralTable table(sites, static_cast<int>(sites), 0);
  const Eigen::MatrixXd hmo = c.transpose() * hop * c;
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q <= p; ++q)
      if (std::abs(hmo(p, q)) > 1e-14) table.set_h(static_cast<std::size_t>(p), static_cast<std::size_t>(q), hmo(p, q));

  // (pq|rs) = sum_ab C_ap C_aq V_ab C_br C_bs
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q <= p; ++q) {
      const Eigen::VectorXd rho_pq = c.col(p).cwiseProduct(c.col(q));
      const Eigen::VectorXd pot = v * rho_pq;
      for (Eigen::Index r = 0; r <= p; ++r)
        for (Eigen::Index s = 0; s <= r; ++s) {
          if (r * (r + 1) / 2 + s > p * (p + 1) / 2 + q) continue;
          const double val = pot.dot(c.col(r).cwiseProduct(c.col(s)));
          if (std::abs(val) > 1e-14)
            table.set_g(static_cast<std::size_t>(p), static_cast<std::size_t>(q), static_cast<std::size_t>(r),
                        static_cast<std::size_t>(s), val);
        }
    }
  double background = 0.0;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b) background += v(a, b);
  table.set_core_energy(background);
  return table;
}

/// Minimal-basis H2-like two-orbital, two-electron model in the MO basis.
inline IntegralTable two_orbital_model() {
  IntegralTable table(2, 2, 0);
  table.set_h(0, 0, -1.2528);
  table.set_h(1, 1, -0.4756);
  table.set_g(0, 0, 0, 0, 0.6746);
  table.set_g(1, 1, 1, 1, 0.6975);
  table.set_g(0, 0, 1, 1, 0.6636);
  table.set_g(0, 1, 0, 1, 0.1813);
  table.set_core_energy(0.7137);
  return table;
}

inline std::vector<std::string> fixture_names() { return {"hubbard4", "h-chain-synthetic", "two-orbital"}; }

inline Fixture make_fixture(std::string_view name) {
  if (name == "hubbard4")
    return {"hubbard4", hubbard_chain(4, 2.0), neel_determinant(4),
            "4-site open Hubbard chain, t=1, U=2, half filling (4e,4o)"};
  if (name == "h-chain-synthetic")
    return {"h-chain-synthetic", synthetic_chain(6), aufbau_determinant(3, 3),
            "6-site screened-Coulomb chain in the hopping eigenbasis (6e,6o)"};
  if (name == "two-orbital")
    return {"two-orbital", two_orbital_model(), aufbau_determinant(1, 1), "H2-like minimal model (2e,2o)"};
  throw Error(ErrorCode::UnknownFixture, "unknown fixture '" + std::string(name) +
                                             "' (expected hubbard4, h-chain-synthetic or two-orbital)");
}

}  // namespace qsci
