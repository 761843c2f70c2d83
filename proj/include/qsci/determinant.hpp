#pragma once

/**
 * @file determinant.hpp
 * @brief Slater determinants as alpha/beta occupation words and their
 *        excitation algebra.
 *
 * Spin orbitals use the blocked ordering: alpha orbitals 0..n-1 map to spin
 * orbitals 0..n-1, beta orbitals map to n..2n-1. Determinants are the ordered
 * products a+_{i1} a+_{i2} ... |vac> with ascending spin-orbital index, which
 * is also the Jordan-Wigner convention used by the statevector simulator.
 */

#include <qsci/error.hpp>

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qsci {

using Word = std::uint64_t;

constexpr Word low_mask(std::size_t bits) noexcept {
  return bits >= 64 ? ~Word{0} : (Word{1} << bits) - 1;
}

struct Determinant {
  Word alpha = 0;
  Word beta = 0;

  friend constexpr auto operator<=>(const Determinant&, const Determinant&) = default;

  constexpr int n_alpha() const noexcept { return std::popcount(alpha); }
  constexpr int n_beta() const noexcept { return std::popcount(beta); }

  /// Occupation of spin orbital k in the blocked ordering.
  constexpr bool occupied(std::size_t k, std::size_t n_orbitals) const noexcept {
    return k < n_orbitals ? (alpha >> k) & 1 : (beta >> (k - n_orbitals)) & 1;
  }

  constexpr void flip(std::size_t k, std::size_t n_orbitals) noexcept {
    if (k < n_orbitals) alpha ^= Word{1} << k;
    else beta ^= Word{1} << (k - n_orbitals);
  }

  /// Number of occupied spin orbitals with index strictly below k.
  constexpr int count_below(std::size_t k, std::size_t n_orbitals) const noexcept {
    if (k < n_orbitals) return std::popcount(alpha & low_mask(k));
    return std::popcount(alpha) + std::popcount(beta & low_mask(k - n_orbitals));
  }

  /// Occupied spin-orbital indices, ascending.
  std::vector<std::size_t> occupied_list(std::size_t n_orbitals) const {
    std::vector<std::size_t> occ;
    occ.reserve(static_cast<std::size_t>(n_alpha() + n_beta()));
    for (Word a = alpha; a; a &= a - 1) occ.push_back(static_cast<std::size_t>(std::countr_zero(a)));
    for (Word b = beta; b; b &= b - 1)
      occ.push_back(n_orbitals + static_cast<std::size_t>(std::countr_zero(b)));
    return occ;
  }
};

struct DeterminantHash {
  std::size_t operator()(const Determinant& d) const noexcept {
    return std::hash<Word>{}(d.alpha * 0x9e3779b97f4a7c15ULL ^ (d.beta + 0x632be59bd9b4e019ULL));
  }
};

/// Text form: 2n characters, alpha block first, orbital 0 leftmost.
inline std::string to_bitstring(const Determinant& d, std::size_t n_orbitals) {
  std::string s(2 * n_orbitals, '0');
  for (std::size_t p = 0; p < n_orbitals; ++p) {
    if ((d.alpha >> p) & 1) s[p] = '1';
    if ((d.beta >> p) & 1) s[n_orbitals + p] = '1';
  }
  return s;
}

inline Determinant from_bitstring(std::string_view s) {
  if (s.size() % 2 != 0 || s.size() > 128)
    throw Error(ErrorCode::InvalidArgument, "bitstring length must be even and <= 128: '" + std::string(s) + "'");
  const std::size_t n = s.size() / 2;
  Determinant d;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] != '0' && s[k] != '1')
      throw Error(ErrorCode::InvalidArgument, "bitstring contains non-binary character: '" + std::string(s) + "'");
    if (s[k] == '1') d.flip(k, n);
  }
  return d;
}

/// Basis-state index of a determinant in a 2n-qubit register (qubit k = spin orbital k).
constexpr Word to_register_index(const Determinant& d, std::size_t n_orbitals) noexcept {
  return d.alpha | (d.beta << n_orbitals);
}

constexpr Determinant from_register_index(Word index, std::size_t n_orbitals) noexcept {
  return {index & low_mask(n_orbitals), (index >> n_orbitals) & low_mask(n_orbitals)};
}

inline int excitation_rank(const Determinant& a, const Determinant& b) noexcept {
  return (std::popcount(a.alpha ^ b.alpha) + std::popcount(a.beta ^ b.beta)) / 2;
}

enum class Spin { Alpha, Beta, Mixed };

/**
 * A spin-conserving single or double excitation in spin-orbital indices.
 *
 * The operator is a+_c0 a_a0 for singles and a+_c0 a+_c1 a_a1 a_a0 for
 * doubles, with annihilated and created each sorted ascending. `phase` is the
 * sign picked up when the operator acts on `source`, so that
 * phase * op |source> = +|target>.
 */
struct ExcitationOp {
  std::vector<std::size_t> annihilated;
  std::vector<std::size_t> created;
  int phase = 1;
  Determinant source;
  Determinant target;

  std::size_t rank() const noexcept { return annihilated.size(); }

  Spin spin(std::size_t n_orbitals) const noexcept {
    bool any_alpha = false, any_beta = false;
    for (auto k : annihilated) (k < n_orbitals ? any_alpha : any_beta) = true;
    if (any_alpha && any_beta) return Spin::Mixed;
    return any_alpha ? Spin::Alpha : Spin::Beta;
  }

  bool same_operator(const ExcitationOp& o) const noexcept {
    return annihilated == o.annihilated && created == o.created;
  }
};

/// Apply a+_c0 a+_c1 ... a_a1 a_a0 to a determinant: annihilators act in
/// listed order, then creators in reverse listed order. Returns 0 if the
/// result vanishes, otherwise the fermionic sign, with `d` updated in place.
inline int apply_ladder(Determinant& d, std::size_t n_orbitals, std::span<const std::size_t> annihilated,
                        std::span<const std::size_t> created) noexcept {
  int sign = 1;
  for (auto k : annihilated) {
    if (!d.occupied(k, n_orbitals)) return 0;
    if (d.count_below(k, n_orbitals) & 1) sign = -sign;
    d.flip(k, n_orbitals);
  }
  for (auto it = created.rbegin(); it != created.rend(); ++it) {
    if (d.occupied(*it, n_orbitals)) return 0;
    if (d.count_below(*it, n_orbitals) & 1) sign = -sign;
    d.flip(*it, n_orbitals);
  }
  return sign;
}

namespace detail {

/// Spin orbitals occupied in `from` but not `to`, ascending.
inline std::vector<std::size_t> holes(const Determinant& from, const Determinant& to, std::size_t n) {
  return Determinant{from.alpha & ~to.alpha, from.beta & ~to.beta}.occupied_list(n);
}

inline ExcitationOp make_op(const Determinant& source, std::vector<std::size_t> ann,
                            std::vector<std::size_t> cre, std::size_t n_orbitals) {
  ExcitationOp op;
  op.annihilated = std::move(ann);
  op.created = std::move(cre);
  op.source = source;
  Determinant d = source;
  op.phase = apply_ladder(d, n_orbitals, op.annihilated, op.created);
  op.target = d;
  return op;
}

}  // namespace detail

/**
 * Split the occupation change from `reference` to `target` into single and
 * double excitations. Holes and particles are paired in ascending order
 * (alpha before beta, so each pair conserves spin) and consecutive pairs are
 * grouped into doubles: rank 3 -> [double, single], rank 4 -> [double,
 * double], rank 5 -> [double, double, single]. Each op's source is the
 * previous op's target.
 */
inline std::vector<ExcitationOp> decompose_excitation(const Determinant& reference, const Determinant& target,
                                                      std::size_t n_orbitals) {
  if (reference.n_alpha() != target.n_alpha() || reference.n_beta() != target.n_beta())
    throw Error(ErrorCode::InvalidArgument, "determinants differ in alpha/beta electron count");
  const auto ann = detail::holes(reference, target, n_orbitals);
  const auto cre = detail::holes(target, reference, n_orbitals);
  if (ann.empty()) throw Error(ErrorCode::ZeroRank, "reference and target are identical");

  std::vector<ExcitationOp> ops;
  Determinant current = reference;
  for (std::size_t k = 0; k < ann.size(); k += 2) {
    const std::size_t len = std::min<std::size_t>(2, ann.size() - k);
    std::vector<std::size_t> a(ann.begin() + k, ann.begin() + k + len);
    std::vector<std::size_t> c(cre.begin() + k, cre.begin() + k + len);
    ops.push_back(detail::make_op(current, std::move(a), std::move(c), n_orbitals));
    current = ops.back().target;
  }
  return ops;
}

/// The unique rank-1 or rank-2 excitation connecting source to target.
inline ExcitationOp excitation_between(const Determinant& source, const Determinant& target,
                                       std::size_t n_orbitals) {
  const int rank = excitation_rank(source, target);
  if (rank == 0 || rank > 2)
    throw Error(ErrorCode::RankTooHigh, "excitation rank " + std::to_string(rank) + " is not 1 or 2");
  if (source.n_alpha() != target.n_alpha() || source.n_beta() != target.n_beta())
    throw Error(ErrorCode::InvalidArgument, "excitation does not conserve spin");
  return detail::make_op(source, detail::holes(source, target, n_orbitals),
                         detail::holes(target, source, n_orbitals), n_orbitals);
}

/// Binomial coefficient; saturates at UINT64_MAX on overflow.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > ~std::uint64_t{0}) return ~std::uint64_t{0};
  }
  return static_cast<std::uint64_t>(r);
}

/// All k-bit words over n bits, ascending (Gosper's hack).
inline std::vector<Word> combinations(std::size_t n, std::size_t k) {
  std::vector<Word> out;
  if (k > n) return out;
  if (k == 0) return {Word{0}};
  out.reserve(binomial(n, k));
  Word w = low_mask(k);
  const Word limit = n >= 64 ? 0 : Word{1} << n;
  for (;;) {
    out.push_back(w);
    const Word c = w & (0 - w);
    const Word r = w + c;
    if (r == 0) break;  // wrapped past bit 63
    w = (((r ^ w) >> 2) / c) | r;
    if (limit != 0 && w >= limit) break;
  }
  return out;
}

inline constexpr std::uint64_t default_space_cap = 10'000'000;

/// Every determinant with the given alpha/beta counts, sorted by (alpha, beta).
inline std::vector<Determinant> enumerate_space(std::size_t n_orbitals, std::size_t n_alpha, std::size_t n_beta,
                                                std::uint64_t cap = default_space_cap) {
  if (n_orbitals > 64 || n_alpha > n_orbitals || n_beta > n_orbitals)
    throw Error(ErrorCode::InvalidArgument, "need n_alpha, n_beta <= n_orbitals <= 64");
  const std::uint64_t na = binomial(n_orbitals, n_alpha);
  const std::uint64_t nb = binomial(n_orbitals, n_beta);
  const unsigned __int128 total = static_cast<unsigned __int128>(na) * nb;
  if (total > cap)
    throw Error(ErrorCode::TooLarge, "space of " + std::to_string(static_cast<double>(total)) +
                                         " determinants exceeds cap " + std::to_string(cap));
  const auto alphas = combinations(n_orbitals, n_alpha);
  const auto betas = combinations(n_orbitals, n_beta);
  std::vector<Determinant> space;
  space.reserve(static_cast<std::size_t>(total));
  for (Word a : alphas)
    for (Word b : betas) space.push_back({a, b});
  return space;
}

}  // namespace qsci
