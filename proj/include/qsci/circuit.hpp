#pragma once

/**
 * @file circuit.hpp
 * @brief Gate-list circuits and an exact statevector simulator.
 *
 * Qubit k is spin orbital k (blocked ordering) and bit k of a basis-state
 * index. Fermionic gates act analytically on the pairs of basis states they
 * connect, with Jordan-Wigner signs from the parity of lower occupied qubits,
 * so a gate costs O(2^n) regardless of its Pauli-string expansion.
 */

#include <qsci/determinant.hpp>
#include <qsci/error.hpp>
#include <qsci/pauli.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qsci {

/// Hard statevector size limit.
inline constexpr std::size_t max_simulator_qubits = 24;

struct Statevector {
  std::size_t n_qubits = 0;
  std::vector<Complex> amps;

  static Statevector basis(std::size_t n_qubits, Word index) {
    if (n_qubits > max_simulator_qubits)
      throw Error(ErrorCode::TooManyQubits, std::to_string(n_qubits) + " qubits exceed the simulator cap of " +
                                                std::to_string(max_simulator_qubits));
    Statevector s{n_qubits, std::vector<Complex>(std::size_t{1} << n_qubits)};
    s.amps[index] = 1.0;
    return s;
  }

  double norm() const noexcept {
    double t = 0.0;
    for (const auto& a : amps) t += std::norm(a);
    return std::sqrt(t);
  }

  std::vector<double> probabilities() const {
    std::vector<double> p(amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i) p[i] = std::norm(amps[i]);
    return p;
  }
};

enum class GateKind { ExcitationRotation, OrbitalRotation, JastrowPhase, BasisRotationLayer };

inline std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::ExcitationRotation: return "ExcitationRotation";
    case GateKind::OrbitalRotation: return "OrbitalRotation";
    case GateKind::JastrowPhase: return "JastrowPhase";
    case GateKind::BasisRotationLayer: return "BasisRotationLayer";
  }
  return "?";
}

/// One step of a basis-rotation network: a Givens rotation between qubits p < q,
/// or (p == q) the sign flip exp(i pi n_p).
struct GivensStep {
  std::size_t p = 0;
  std::size_t q = 0;
  double angle = 0.0;
};

/**
 * ExcitationRotation / OrbitalRotation: exp(theta * sign * (tau - tau+)) with
 * tau = a+_c0 [a+_c1 a_a1] a_a0. JastrowPhase: exp(i angle n_p [n_q]).
 * BasisRotationLayer: `network` applied in order. `qubits` lists every qubit
 * the gate touches (annihilated then created for excitations).
 */
struct Gate {
  GateKind kind = GateKind::ExcitationRotation;
  std::vector<std::size_t> qubits;
  std::optional<std::size_t> param_slot;
  std::vector<std::size_t> annihilated;
  std::vector<std::size_t> created;
  int sign = 1;
  double angle = 0.0;
  std::vector<GivensStep> network;

  bool parameterized() const noexcept { return param_slot.has_value(); }
};

struct Circuit {
  std::size_t n_qubits = 0;
  std::vector<Gate> gates;
  std::size_t n_params = 0;
  std::size_t layers = 1;
  /// Compiled circuits: full-register qubit of each local qubit. Empty means identity.
  std::vector<std::size_t> support;
  /// Compiled circuits: size and fixed occupation of the full register.
  std::size_t full_qubits = 0;
  Word frozen = 0;

  std::size_t parameterized_gates() const noexcept {
    std::size_t k = 0;
    for (const auto& g : gates) k += g.parameterized();
    return k;
  }

  /// Greedy layering where a fermionic gate blocks the contiguous qubit range it spans (JW chain included).
  std::size_t depth() const {
    std::vector<std::size_t> level(n_qubits, 0);
    std::size_t d = 0;
    for (const auto& g : gates) {
      if (g.kind == GateKind::BasisRotationLayer) {
        for (const auto& s : g.network) {
          const std::size_t t = 1 + std::max(level[s.p], level[s.q]);
          for (std::size_t k = s.p; k <= s.q; ++k) level[k] = t;
          d = std::max(d, t);
        }
        continue;
      }
      if (g.qubits.empty()) continue;
      const auto [lo, hi] = std::minmax_element(g.qubits.begin(), g.qubits.end());
      std::size_t t = 0;
      for (std::size_t k = *lo; k <= *hi; ++k) t = std::max(t, level[k]);
      ++t;
      for (std::size_t k = *lo; k <= *hi; ++k) level[k] = t;
      d = std::max(d, t);
    }
    return d;
  }

  /// Map a local basis-state index to the full register.
  Word embed(Word local) const noexcept {
    if (support.empty()) return local;
    Word out = frozen;
    for (std::size_t k = 0; k < support.size(); ++k)
      if ((local >> k) & 1) out |= Word{1} << support[k];
    return out;
  }

  /// Inverse of embed on the active qubits.
  Word restrict_index(Word full) const noexcept {
    if (support.empty()) return full;
    Word out = 0;
    for (std::size_t k = 0; k < support.size(); ++k)
      if ((full >> support[k]) & 1) out |= Word{1} << k;
    return out;
  }
};

namespace detail {

/// Sign of a ladder string applied to basis index x: annihilators in listed
/// order, then creators in reverse listed order (the operator reads right to left).
inline int ladder_sign(Word x, std::span<const std::size_t> ann, std::span<const std::size_t> cre) noexcept {
  int parity = 0;
  for (auto k : ann) {
    parity += std::popcount(x & low_mask(k));
    x ^= Word{1} << k;
  }
  for (auto it = cre.rbegin(); it != cre.rend(); ++it) {
    parity += std::popcount(x & low_mask(*it));
    x ^= Word{1} << *it;
  }
  return parity & 1 ? -1 : 1;
}

inline Word mask_of(std::span<const std::size_t> idx) noexcept {
  Word m = 0;
  for (auto k : idx) m |= Word{1} << k;
  return m;
}

/// Visit every basis index whose bits in `fixed_mask` equal `fixed_value`.
template <class F>
void for_each_with_bits(std::size_t n_qubits, Word fixed_mask, Word fixed_value, F&& f) {
  const Word free = low_mask(n_qubits) & ~fixed_mask;
  Word sub = 0;
  do {
    f(sub | fixed_value);
    sub = (sub - free) & free;
  } while (sub != 0);
}

inline void rotate_excitation(Statevector& s, std::span<const std::size_t> ann, std::span<const std::size_t> cre,
                              int sign, double theta) {
  if (theta == 0.0) return;
  const double c = std::cos(theta), sn = std::sin(theta);
  const Word am = mask_of(ann), cm = mask_of(cre);
  for_each_with_bits(s.n_qubits, am | cm, am, [&](Word x) {
    const Word y = x ^ am ^ cm;
    const double f = sign * ladder_sign(x, ann, cre) * sn;
    const Complex ax = s.amps[x], ay = s.amps[y];
    s.amps[x] = c * ax - f * ay;
    s.amps[y] = c * ay + f * ax;
  });
}

inline void phase_on_occupied(Statevector& s, Word mask, double angle) {
  const Complex ph = std::polar(1.0, angle);
  for_each_with_bits(s.n_qubits, mask, mask, [&](Word x) { s.amps[x] *= ph; });
}

inline void apply_network(Statevector& s, const std::vector<GivensStep>& net) {
  for (const auto& st : net) {
    if (st.p == st.q) {
      for_each_with_bits(s.n_qubits, Word{1} << st.p, Word{1} << st.p, [&](Word x) { s.amps[x] = -s.amps[x]; });
    } else {
      // exp(angle (a+_p a_q - a+_q a_p))
      const std::size_t a[1] = {st.q}, c[1] = {st.p};
      rotate_excitation(s, a, c, 1, st.angle);
    }
  }
}

}  // namespace detail

/// Apply one gate with the given parameter vector.
inline void apply_gate(const Gate& g, std::span<const double> params, Statevector& s) {
  const double theta = g.param_slot ? params[*g.param_slot] : g.angle;
  switch (g.kind) {
    case GateKind::ExcitationRotation:
    case GateKind::OrbitalRotation:
      detail::rotate_excitation(s, g.annihilated, g.created, g.sign, theta);
      break;
    case GateKind::JastrowPhase:
      detail::phase_on_occupied(s, detail::mask_of(g.qubits), theta);
      break;
    case GateKind::BasisRotationLayer:
      detail::apply_network(s, g.network);
      break;
  }
}

inline Statevector apply_circuit(const Circuit& c, std::span<const double> params, Statevector input) {
  if (c.n_qubits > max_simulator_qubits)
    throw Error(ErrorCode::TooManyQubits, std::to_string(c.n_qubits) + " qubits exceed the simulator cap of " +
                                              std::to_string(max_simulator_qubits));
  if (params.size() != c.n_params)
    throw Error(ErrorCode::ParamCountMismatch, "circuit expects " + std::to_string(c.n_params) +
                                                   " parameters, got " + std::to_string(params.size()));
  if (input.n_qubits != c.n_qubits)
    throw Error(ErrorCode::ShapeMismatch, "statevector has " + std::to_string(input.n_qubits) +
                                              " qubits, circuit has " + std::to_string(c.n_qubits));
  for (const auto& g : c.gates) apply_gate(g, params, input);
  return input;
}

/// Output state of the circuit on a basis-state input given as a full-register index.
inline Statevector run_from_basis(const Circuit& c, std::span<const double> params, Word full_index) {
  return apply_circuit(c, params, Statevector::basis(c.n_qubits, c.restrict_index(full_index)));
}

}  // namespace qsci
