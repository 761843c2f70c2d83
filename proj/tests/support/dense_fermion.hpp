#pragma once

// Test-only reference: second-quantized operators as explicit matrices built
// from Kronecker products of 2x2 Pauli blocks. Shares no code with the
// bit-twiddling phase logic in the library.

#include <qsci/fcidump.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <cstddef>
#include <vector>

namespace qsci::oracle {

using SpMat = Eigen::SparseMatrix<double>;

inline SpMat small(double a, double b, double c, double d) {
  SpMat m(2, 2);
  std::vector<Eigen::Triplet<double>> t;
  if (a != 0) t.emplace_back(0, 0, a);
  if (b != 0) t.emplace_back(0, 1, b);
  if (c != 0) t.emplace_back(1, 0, c);
  if (d != 0) t.emplace_back(1, 1, d);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Annihilation operator on qubit p of an n-qubit register; basis index bit k = qubit k.
/// a_p = Z_0 ... Z_{p-1} |0><1|_p, so the Kronecker product runs from qubit n-1 down to 0.
inline SpMat annihilator(std::size_t p, std::size_t n) {
  const SpMat id = small(1, 0, 0, 1);
  const SpMat z = small(1, 0, 0, -1);
  const SpMat lower = small(0, 1, 0, 0);  // |0><1|
  SpMat out = small(1, 0, 0, 0);
  out.resize(1, 1);
  out.setIdentity();
  for (std::size_t q = n; q-- > 0;) {
    const SpMat& f = q == p ? lower : (q < p ? z : id);
    SpMat next = Eigen::kroneckerProduct(out, f);
    out = next;
  }
  return out;
}

/// Full Fock-space Hamiltonian over 2n spin orbitals (blocked ordering), core energy included.
inline SpMat fock_hamiltonian(const IntegralTable& t) {
  const std::size_t n = t.n_orbitals();
  const std::size_t nq = 2 * n;
  std::vector<SpMat> a(nq), ad(nq);
  for (std::size_t p = 0; p < nq; ++p) {
    a[p] = annihilator(p, nq);
    ad[p] = SpMat(a[p].transpose());
  }
  auto spatial = [n](std::size_t k) { return k % n; };
  auto spin = [n](std::size_t k) { return k >= n; };
  const long dim = 1L << nq;
  SpMat h(dim, dim);
  for (std::size_t p = 0; p < nq; ++p)
    for (std::size_t q = 0; q < nq; ++q) {
      if (spin(p) != spin(q)) continue;
      const double v = t.h(spatial(p), spatial(q));
      if (v != 0.0) h += v * (ad[p] * a[q]);
    }
  // 1/2 sum (pq|rs) a+_p a+_r a_s a_q
  for (std::size_t p = 0; p < nq; ++p)
    for (std::size_t q = 0; q < nq; ++q) {
      if (spin(p) != spin(q)) continue;
      for (std::size_t r = 0; r < nq; ++r)
        for (std::size_t s = 0; s < nq; ++s) {
          if (spin(r) != spin(s)) continue;
          const double v = t.g(spatial(p), spatial(q), spatial(r), spatial(s));
          if (v == 0.0) continue;
          h += 0.5 * v * (ad[p] * ad[r] * a[s] * a[q]);
        }
    }
  SpMat id(dim, dim);
  id.setIdentity();
  h += t.core_energy() * id;
  h.prune(1e-15);
  return h;
}

/// Dense matrix of a real operator exponential exp(theta * G) for antisymmetric G.
inline Eigen::MatrixXcd expm_antisymmetric(const Eigen::MatrixXd& g, double theta) {
  // i*G is Hermitian: exp(theta G) = exp(-i theta (iG)).
  const Eigen::MatrixXcd herm = std::complex<double>(0, 1) * g.cast<std::complex<double>>();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
  const Eigen::VectorXcd phases =
      (std::complex<double>(0, -theta) * es.eigenvalues().cast<std::complex<double>>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// exp(i * theta * A) for Hermitian A.
inline Eigen::MatrixXcd expm_i_hermitian(const Eigen::MatrixXcd& a, double theta) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  const Eigen::VectorXcd phases =
      (std::complex<double>(0, theta) * es.eigenvalues().cast<std::complex<double>>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qsci::oracle
