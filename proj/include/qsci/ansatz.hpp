#pragma once

/**
 * @file ansatz.hpp
 * @brief USCI circuit construction from a prescreened determinant set, and
 *        the LUCJ reference ansatz.
 */

#include <qsci/circuit.hpp>
#include <qsci/determinant.hpp>
#include <qsci/hamiltonian.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace qsci {

/// Determinants of the seed ranked by |c| (ties by bitmask order), |c| >= cutoff, at most top_m (0 = no cap).
inline std::vector<Determinant> prescreen(const Wavefunction& seed, double cutoff, std::size_t top_m = 0) {
  const auto ranked = seed.ranked();
  std::vector<Determinant> out;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (std::abs(ranked.coeffs[i]) < cutoff) break;
    if (top_m != 0 && out.size() == top_m) break;
    out.push_back(ranked.dets[i]);
  }
  if (out.empty())
    throw Error(ErrorCode::EmptySelection, "no determinant has |c| >= " + std::to_string(cutoff));
  return out;
}

struct UsciOptions {
  std::size_t layers = 1;
  /// Maximum distinct interaction partners per qubit within a block; 0 disables the cap.
  std::size_t degree_cap = 0;
  bool orbital_rotation = false;
};

namespace detail {

inline Gate excitation_gate(const ExcitationOp& op, std::size_t slot) {
  Gate g;
  g.kind = GateKind::ExcitationRotation;
  g.annihilated = op.annihilated;
  g.created = op.created;
  g.qubits = op.annihilated;
  g.qubits.insert(g.qubits.end(), op.created.begin(), op.created.end());
  g.sign = op.phase;
  g.param_slot = slot;
  return g;
}

inline Gate orbital_gate(std::size_t p, std::size_t q, std::size_t slot) {
  Gate g;
  g.kind = GateKind::OrbitalRotation;
  g.annihilated = {q};
  g.created = {p};
  g.qubits = {q, p};
  g.param_slot = slot;
  return g;
}

/// Partner bookkeeping for degree-capped insertion.
class ConnectivityTable {
 public:
  ConnectivityTable(std::size_t n_qubits, std::size_t cap) : partners_(n_qubits), cap_(cap) {}

  /// Insert the all-to-all coupling among `qubits` unless a qubit would exceed the cap.
  bool try_insert(const std::vector<std::size_t>& qubits) {
    if (cap_ != 0) {
      for (auto q : qubits) {
        std::size_t grown = partners_[q].size();
        for (auto r : qubits)
          if (r != q && !partners_[q].count(r)) ++grown;
        if (grown > cap_) return false;
      }
    }
    for (auto q : qubits)
      for (auto r : qubits)
        if (r != q) partners_[q].insert(r);
    return true;
  }

  std::size_t degree(std::size_t q) const { return partners_[q].size(); }

 private:
  std::vector<std::set<std::size_t>> partners_;
  std::size_t cap_;
};

}  // namespace detail

/**
 * USCI circuit acting on |reference>. Each block applies one excitation
 * rotation per decomposed operator of every selected target (in the order
 * given, i.e. descending seed amplitude) and then, if enabled, the orbital
 * rotation e^{-k} as row-major Givens gates over p > q, alpha and beta
 * sharing a parameter. Blocks repeat with fresh parameters.
 */
inline Circuit build_usci(const Determinant& reference, const std::vector<Determinant>& selected,
                          std::size_t n_orbitals, const UsciOptions& opt = {}) {
  if (selected.empty()) throw Error(ErrorCode::EmptySelection, "selection is empty");
  if (selected.front() != reference)
    throw Error(ErrorCode::InvalidArgument, "reference must be the first selected determinant");
  if (opt.layers == 0) throw Error(ErrorCode::InvalidArgument, "layers must be positive");
  if (2 * n_orbitals > 64) throw Error(ErrorCode::TooManyQubits, "registers are limited to 64 qubits");

  std::vector<ExcitationOp> ops;
  for (std::size_t i = 1; i < selected.size(); ++i) {
    auto part = decompose_excitation(reference, selected[i], n_orbitals);
    ops.insert(ops.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }

  Circuit c;
  c.n_qubits = 2 * n_orbitals;
  c.layers = opt.layers;
  std::size_t slot = 0;
  for (std::size_t layer = 0; layer < opt.layers; ++layer) {
    detail::ConnectivityTable table(c.n_qubits, opt.degree_cap);
    for (const auto& op : ops) {
      auto g = detail::excitation_gate(op, slot);
      if (!table.try_insert(g.qubits)) continue;
      c.gates.push_back(std::move(g));
      ++slot;
    }
    if (opt.orbital_rotation) {
      for (std::size_t p = 1; p < n_orbitals; ++p)
        for (std::size_t q = 0; q < p; ++q) {
          c.gates.push_back(detail::orbital_gate(p, q, slot));
          c.gates.push_back(detail::orbital_gate(n_orbitals + p, n_orbitals + q, slot));
          ++slot;
        }
    }
  }
  c.n_params = slot;
  return c;
}

/**
 * Givens network for a real orthogonal single-particle matrix U. Applying the
 * returned steps in order realizes the many-body operator whose action on
 * creation operators is a+_q -> sum_p U_pq a+_p.
 */
inline std::vector<GivensStep> givens_network(const Eigen::MatrixXd& u) {
  const auto n = u.rows();
  Eigen::MatrixXd m = u;
  std::vector<GivensStep> elim;
  for (Eigen::Index j = 0; j + 1 < n; ++j)
    for (Eigen::Index i = n - 1; i > j; --i) {
      const Eigen::Index p = i - 1, q = i;
      if (std::abs(m(q, j)) < 1e-15) continue;
      const double phi = std::atan2(m(q, j), m(p, j));
      const double c = std::cos(phi), s = std::sin(phi);
      const Eigen::RowVectorXd rp = m.row(p), rq = m.row(q);
      m.row(p) = c * rp + s * rq;
      m.row(q) = -s * rp + c * rq;
      elim.push_back({static_cast<std::size_t>(p), static_cast<std::size_t>(q), phi});
    }
  // Now G_k ... G_1 U = D with D = diag(+-1), so U = G_1^T ... G_k^T D.
  std::vector<GivensStep> out;
  for (Eigen::Index p = 0; p < n; ++p)
    if (m(p, p) < 0) out.push_back({static_cast<std::size_t>(p), static_cast<std::size_t>(p), 0.0});
  for (auto it = elim.rbegin(); it != elim.rend(); ++it) out.push_back({it->p, it->q, -it->angle});
  return out;
}

/// Steps of the inverse operator.
inline std::vector<GivensStep> inverse_network(const std::vector<GivensStep>& net) {
  std::vector<GivensStep> out(net.rbegin(), net.rend());
  for (auto& s : out) s.angle = -s.angle;
  return out;
}

namespace detail {

inline Gate basis_rotation_gate(const std::vector<GivensStep>& spatial, std::size_t n) {
  Gate g;
  g.kind = GateKind::BasisRotationLayer;
  std::set<std::size_t> touched;
  for (std::size_t spin = 0; spin < 2; ++spin)
    for (const auto& s : spatial) {
      g.network.push_back({s.p + spin * n, s.q + spin * n, s.angle});
      touched.insert(s.p + spin * n);
      touched.insert(s.q + spin * n);
    }
  g.qubits.assign(touched.begin(), touched.end());
  return g;
}

}  // namespace detail

/**
 * One LUCJ layer e^{K} e^{iJ} e^{-K} on 2n qubits. K is the n x n real
 * antisymmetric orbital-rotation generator shared by both spins; J is a
 * 2n x 2n real symmetric matrix over spin orbitals with
 * J-hat = sum_{p<q} J_pq n_p n_q + sum_p J_pp n_p.
 */
inline Circuit build_lucj(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j) {
  const auto n = k.rows();
  if (k.cols() != n || j.rows() != 2 * n || j.cols() != 2 * n)
    throw Error(ErrorCode::ShapeMismatch, "K must be n x n and J must be 2n x 2n");
  if ((k + k.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorCode::ShapeMismatch, "K must be antisymmetric");
  if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorCode::ShapeMismatch, "J must be symmetric");
  const auto norb = static_cast<std::size_t>(n);
  if (2 * norb > 64) throw Error(ErrorCode::TooManyQubits, "registers are limited to 64 qubits");

  const Eigen::MatrixXd u = k.exp();
  const auto forward = givens_network(u);

  Circuit c;
  c.n_qubits = 2 * norb;
  c.gates.push_back(detail::basis_rotation_gate(inverse_network(forward), norb));
  for (Eigen::Index p = 0; p < 2 * n; ++p)
    for (Eigen::Index q = p; q < 2 * n; ++q) {
      if (j(p, q) == 0.0) continue;
      Gate g;
      g.kind = GateKind::JastrowPhase;
      g.qubits = p == q ? std::vector<std::size_t>{static_cast<std::size_t>(p)}
                        : std::vector<std::size_t>{static_cast<std::size_t>(p), static_cast<std::size_t>(q)};
      g.angle = j(p, q);
      c.gates.push_back(std::move(g));
    }
  c.gates.push_back(detail::basis_rotation_gate(forward, norb));
  return c;
}

/**
 * Restrict a circuit to the qubits its gates touch. Untouched qubits keep
 * their occupation in `reference`; their Jordan-Wigner parity is folded into
 * each gate's sign. Sampled local indices map back through Circuit::embed.
 */
inline Circuit compile_active_support(const Circuit& c, Word reference) {
  if (!c.support.empty()) return c;
  Word touched = 0;
  for (const auto& g : c.gates) {
    for (auto q : g.qubits) touched |= Word{1} << q;
    for (const auto& s : g.network) touched |= (Word{1} << s.p) | (Word{1} << s.q);
  }
  Circuit out;
  out.full_qubits = c.n_qubits;
  out.frozen = reference & ~touched & low_mask(c.n_qubits);
  out.n_params = c.n_params;
  out.layers = c.layers;
  std::vector<std::size_t> local(c.n_qubits, 0);
  for (std::size_t q = 0; q < c.n_qubits; ++q)
    if ((touched >> q) & 1) {
      local[q] = out.support.size();
      out.support.push_back(q);
    }
  out.n_qubits = out.support.size();

  const auto frozen_parity = [&](std::size_t q) { return std::popcount(out.frozen & low_mask(q)); };
  const auto remap = [&](std::vector<std::size_t>& v) {
    for (auto& q : v) q = local[q];
  };
  for (auto g : c.gates) {
    int parity = 0;
    for (auto q : g.annihilated) parity += frozen_parity(q);
    for (auto q : g.created) parity += frozen_parity(q);
    if (parity & 1) g.sign = -g.sign;
    for (auto& s : g.network) {
      if (s.p != s.q && ((frozen_parity(s.p) + frozen_parity(s.q)) & 1)) s.angle = -s.angle;
      s.p = local[s.p];
      s.q = local[s.q];
    }
    remap(g.annihilated);
    remap(g.created);
    remap(g.qubits);
    out.gates.push_back(std::move(g));
  }
  return out;
}

struct CircuitStats {
  std::size_t qubits = 0;
  std::size_t gates = 0;
  std::size_t parameters = 0;
  std::size_t depth = 0;
  std::size_t singles = 0;
  std::size_t doubles = 0;
};

inline CircuitStats circuit_stats(const Circuit& c) {
  CircuitStats s{c.n_qubits, c.gates.size(), c.n_params, c.depth(), 0, 0};
  for (const auto& g : c.gates) {
    if (g.kind != GateKind::ExcitationRotation) continue;
    (g.annihilated.size() == 1 ? s.singles : s.doubles)++;
  }
  return s;
}

}  // namespace qsci
