#pragma once

/// Minimal Pauli-string algebra and the Jordan-Wigner image of excitation generators.

#include <qsci/determinant.hpp>

#include <bit>
#include <complex>
#include <map>
#include <string>
#include <vector>

namespace qsci {

/// Tensor product of single-qubit Paulis: qubit k carries X if x_k, Z if z_k, Y if both.
struct PauliString {
  Word x = 0;
  Word z = 0;

  friend constexpr auto operator<=>(const PauliString&, const PauliString&) = default;

  int weight() const noexcept { return std::popcount(x | z); }

  /// Label with qubit 0 leftmost, e.g. "XZY".
  std::string label(std::size_t n_qubits) const {
    std::string s(n_qubits, 'I');
    for (std::size_t k = 0; k < n_qubits; ++k) {
      const bool xb = (x >> k) & 1, zb = (z >> k) & 1;
      s[k] = xb && zb ? 'Y' : xb ? 'X' : zb ? 'Z' : 'I';
    }
    return s;
  }
};

using Complex = std::complex<double>;

/// Linear combination of Pauli strings.
class PauliSum {
 public:
  PauliSum() = default;
  PauliSum(PauliString p, Complex c) { terms_[p] = c; }

  const std::map<PauliString, Complex>& terms() const noexcept { return terms_; }

  PauliSum& operator+=(const PauliSum& o) {
    for (const auto& [p, c] : o.terms_) terms_[p] += c;
    return *this;
  }

  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    PauliSum out;
    for (const auto& [pa, ca] : a.terms_)
      for (const auto& [pb, cb] : b.terms_) {
        const auto [p, phase] = multiply(pa, pb);
        out.terms_[p] += phase * ca * cb;
      }
    return out;
  }

  friend PauliSum operator*(Complex s, PauliSum a) {
    for (auto& [p, c] : a.terms_) c *= s;
    return a;
  }

  PauliSum adjoint() const {
    PauliSum out;
    for (const auto& [p, c] : terms_) out.terms_[p] = std::conj(c);
    return out;
  }

  void prune(double tol = 1e-14) {
    std::erase_if(terms_, [tol](const auto& kv) { return std::abs(kv.second) <= tol; });
  }

  /// Single-qubit products: XY = iZ, YZ = iX, ZX = iY and reversed orders give -i.
  static std::pair<PauliString, Complex> multiply(const PauliString& a, const PauliString& b) {
    int power = 0;  // of i
    for (Word m = (a.x | a.z) & (b.x | b.z); m; m &= m - 1) {
      const int k = std::countr_zero(m);
      const int ca = code(a, k), cb = code(b, k);
      if (ca == cb) continue;
      // cyclic order X(1) -> Y(2) -> Z(3)
      power += ((cb - ca + 3) % 3 == 1) ? 1 : 3;
    }
    static constexpr Complex powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return {PauliString{a.x ^ b.x, a.z ^ b.z}, powers[power % 4]};
  }

 private:
  static int code(const PauliString& p, int k) {
    const bool xb = (p.x >> k) & 1, zb = (p.z >> k) & 1;
    return xb && zb ? 2 : xb ? 1 : 3;
  }

  std::map<PauliString, Complex> terms_;
};

/// a_p (dagger = false) or a+_p under Jordan-Wigner: Z_0..Z_{p-1} (X_p +/- i Y_p) / 2.
inline PauliSum jw_ladder(std::size_t p, bool dagger) {
  const Word chain = low_mask(p);
  const Word bit = Word{1} << p;
  PauliSum out(PauliString{bit, chain}, 0.5);
  out += PauliSum(PauliString{bit, chain | bit}, Complex(0, dagger ? -0.5 : 0.5));
  return out;
}

struct PauliTerm {
  PauliString string;
  double coeff = 0.0;
};

/**
 * Jordan-Wigner image of the anti-Hermitian generator phase * (tau - tau+),
 * returned as real c_k with generator = i * sum_k c_k P_k.
 */
inline std::vector<PauliTerm> jordan_wigner(const ExcitationOp& op, std::size_t n_qubits) {
  for (auto k : op.annihilated)
    if (k >= n_qubits) throw Error(ErrorCode::IndexOutOfRange, "excitation index exceeds qubit count");
  for (auto k : op.created)
    if (k >= n_qubits) throw Error(ErrorCode::IndexOutOfRange, "excitation index exceeds qubit count");
  PauliSum tau(PauliString{}, 1.0);
  for (auto c : op.created) tau = tau * jw_ladder(c, true);
  for (auto it = op.annihilated.rbegin(); it != op.annihilated.rend(); ++it) tau = tau * jw_ladder(*it, false);
  PauliSum gen = tau;
  gen += Complex(-1.0) * tau.adjoint();
  gen = Complex(0, -op.phase) * gen;  // generator = i * (this)
  gen.prune();
  std::vector<PauliTerm> out;
  for (const auto& [p, c] : gen.terms()) out.push_back({p, c.real()});
  return out;
}

}  // namespace qsci
