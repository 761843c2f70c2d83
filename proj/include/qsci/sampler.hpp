#pragma once

/**
 * @file sampler.hpp
 * @brief Measurement sampling with global depolarizing and per-shot readout
 *        noise, symmetry filtering and spin-factorized pool combination.
 *
 * Outcomes are register indices (bit k = qubit k). Depolarizing noise acts
 * on the distribution, where it is exact; readout noise acts shot by shot.
 */

#include <qsci/circuit.hpp>
#include <qsci/determinant.hpp>
#include <qsci/error.hpp>
#include <qsci/parallel.hpp>
#include <qsci/rng.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <unordered_set>
#include <vector>

namespace qsci {

struct NoiseModel {
  double depolarizing_p = 0.0;
  /// Effective two-qubit error rate; when set, overrides depolarizing_p via 1 - (1 - p_g)^n_2q.
  std::optional<double> per_gate_pg;
  std::size_t n_2q = 0;
  /// Per-qubit flip probabilities 0->1 and 1->0. A single entry applies to every qubit; empty means 0.
  std::vector<double> readout_eps0;
  std::vector<double> readout_eps1;

  double effective_p() const {
    if (per_gate_pg) return 1.0 - std::pow(1.0 - *per_gate_pg, static_cast<double>(n_2q));
    return depolarizing_p;
  }

  double eps0(std::size_t q) const { return pick(readout_eps0, q); }
  double eps1(std::size_t q) const { return pick(readout_eps1, q); }

  bool has_readout() const {
    auto any = [](const std::vector<double>& v) { return std::any_of(v.begin(), v.end(), [](double e) { return e > 0; }); };
    return any(readout_eps0) || any(readout_eps1);
  }

  void validate() const {
    auto check = [](double v, const char* what) {
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must lie in [0, 1]");
    };
    check(depolarizing_p, "depolarizing p");
    if (per_gate_pg) check(*per_gate_pg, "per-gate p_g");
    for (double e : readout_eps0) check(e, "readout eps0");
    for (double e : readout_eps1) check(e, "readout eps1");
  }

 private:
  static double pick(const std::vector<double>& v, std::size_t q) {
    if (v.empty()) return 0.0;
    return v.size() == 1 ? v[0] : (q < v.size() ? v[q] : 0.0);
  }
};

/// Sparse outcome distribution plus uniform mass spread over every string not listed.
struct Distribution {
  std::size_t n_qubits = 0;
  std::vector<std::pair<Word, double>> support;  // ascending index
  double residual = 0.0;

  double total() const noexcept {
    double s = residual;
    for (const auto& [k, p] : support) s += p;
    return s;
  }

  double probability(Word x) const {
    const auto it = std::lower_bound(support.begin(), support.end(), std::make_pair(x, -1.0));
    if (it != support.end() && it->first == x) return it->second;
    const double unlisted = std::ldexp(1.0, static_cast<int>(n_qubits)) - static_cast<double>(support.size());
    return unlisted > 0 ? residual / unlisted : 0.0;
  }
};

struct SampleCounts {
  std::size_t n_qubits = 0;
  std::map<Word, std::uint64_t> counts;
  std::uint64_t total_shots = 0;
  std::uint64_t seed = 0;
  NoiseModel noise;

  std::uint64_t sum() const noexcept {
    std::uint64_t s = 0;
    for (const auto& [k, c] : counts) s += c;
    return s;
  }
};

inline Distribution ideal_distribution(const Statevector& sv, double prune = 1e-16) {
  Distribution d{sv.n_qubits, {}, 0.0};
  for (std::size_t i = 0; i < sv.amps.size(); ++i) {
    const double p = std::norm(sv.amps[i]);
    if (p > prune) d.support.emplace_back(static_cast<Word>(i), p);
  }
  return d;
}

/// Global depolarizing channel: p_i -> (1 - p) p_i + p / 2^n, the unlisted strings sharing the rest.
inline Distribution depolarize_distribution(const Distribution& d, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "depolarizing p must lie in [0, 1]");
  Distribution out = d;
  const double dim = std::ldexp(1.0, static_cast<int>(d.n_qubits));
  const double uniform = p / dim;
  for (auto& [k, v] : out.support) v = (1.0 - p) * v + uniform;
  out.residual = (1.0 - p) * d.residual + p * (dim - static_cast<double>(d.support.size())) / dim;
  return out;
}

namespace detail {

inline constexpr std::uint64_t shots_per_shard = 1u << 16;

struct Sampler {
  const Distribution& d;
  std::vector<double> cdf;
  std::unordered_set<Word> listed;
  double residual_fraction = 0.0;

  explicit Sampler(const Distribution& dist) : d(dist) {
    const double total = d.total();
    if (!(total > 0)) throw Error(ErrorCode::InvalidArgument, "distribution has no mass");
    double acc = 0.0;
    cdf.reserve(d.support.size());
    for (const auto& [k, p] : d.support) {
      acc += p / total;
      cdf.push_back(acc);
    }
    residual_fraction = d.residual / total;
    if (residual_fraction > 0)
      for (const auto& kv : d.support) listed.insert(kv.first);
  }

  Word draw(CounterRng& rng) const {
    const double u = rng.uniform();
    if (u < residual_fraction || cdf.empty()) {
      const Word mask = low_mask(d.n_qubits);
      for (;;) {
        const Word x = rng() & mask;
        if (!listed.count(x)) return x;
      }
    }
    const double v = (u - residual_fraction) / (1.0 - residual_fraction);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), v);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    return d.support[i].first;
  }
};

}  // namespace detail

/// Multinomial draw. Shots are split into fixed shards with derived seeds, so
/// counts depend only on (distribution, shots, seed), not on the thread count.
inline SampleCounts sample(const Distribution& d, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw Error(ErrorCode::InvalidArgument, "shots must be positive");
  const detail::Sampler s(d);
  const std::uint64_t n_shards = (shots + detail::shots_per_shard - 1) / detail::shots_per_shard;
  std::vector<std::map<Word, std::uint64_t>> partial(n_shards);
  parallel_for_blocks(n_shards, [&](std::size_t begin, std::size_t end) {
    for (std::size_t shard = begin; shard < end; ++shard) {
      CounterRng rng(seed, shard);
      const std::uint64_t lo = shard * detail::shots_per_shard;
      const std::uint64_t hi = std::min(shots, lo + detail::shots_per_shard);
      for (std::uint64_t m = lo; m < hi; ++m) ++partial[shard][s.draw(rng)];
    }
  });
  SampleCounts out{d.n_qubits, {}, shots, seed, {}};
  for (const auto& p : partial)
    for (const auto& [k, c] : p) out.counts[k] += c;
  return out;
}

/// Flip every bit of every shot independently: 0 -> 1 with eps0(q), 1 -> 0 with eps1(q).
inline SampleCounts apply_readout(const SampleCounts& sc, const NoiseModel& model, std::uint64_t seed) {
  model.validate();
  SampleCounts out{sc.n_qubits, {}, sc.total_shots, sc.seed, sc.noise};
  out.noise.readout_eps0 = model.readout_eps0;
  out.noise.readout_eps1 = model.readout_eps1;
  if (!model.has_readout()) {
    out.counts = sc.counts;
    return out;
  }
  std::vector<double> e0(sc.n_qubits), e1(sc.n_qubits);
  for (std::size_t q = 0; q < sc.n_qubits; ++q) {
    e0[q] = model.eps0(q);
    e1[q] = model.eps1(q);
  }
  CounterRng rng(seed, 0x5eadull);
  for (const auto& [x, c] : sc.counts)
    for (std::uint64_t m = 0; m < c; ++m) {
      Word y = x;
      for (std::size_t q = 0; q < sc.n_qubits; ++q) {
        const bool bit = (x >> q) & 1;
        if (rng.bernoulli(bit ? e1[q] : e0[q])) y ^= Word{1} << q;
      }
      ++out.counts[y];
    }
  return out;
}

/// Re-express counts from a compiled circuit's local register in the full register.
inline SampleCounts embed_counts(const SampleCounts& sc, const Circuit& c) {
  if (c.support.empty()) return sc;
  SampleCounts out{c.full_qubits, {}, sc.total_shots, sc.seed, sc.noise};
  for (const auto& [x, n] : sc.counts) out.counts[c.embed(x)] += n;
  return out;
}

struct FilterResult {
  SampleCounts kept;
  std::uint64_t retained = 0;
  std::uint64_t rejected = 0;
};

/// Keep strings with n_alpha set bits in the alpha block and n_beta in the beta block (2n-qubit register).
inline FilterResult symmetry_filter(const SampleCounts& sc, std::size_t n_orbitals, int n_alpha, int n_beta) {
  if (sc.n_qubits != 2 * n_orbitals)
    throw Error(ErrorCode::ShapeMismatch, "register has " + std::to_string(sc.n_qubits) + " qubits, expected " +
                                              std::to_string(2 * n_orbitals));
  FilterResult r{{sc.n_qubits, {}, 0, sc.seed, sc.noise}, 0, 0};
  for (const auto& [x, c] : sc.counts) {
    const auto d = from_register_index(x, n_orbitals);
    if (d.n_alpha() == n_alpha && d.n_beta() == n_beta) {
      r.kept.counts.emplace(x, c);
      r.retained += c;
    } else {
      r.rejected += c;
    }
  }
  r.kept.total_shots = r.retained;
  return r;
}

inline std::vector<Determinant> determinants_of(const SampleCounts& sc, std::size_t n_orbitals) {
  std::vector<Determinant> out;
  out.reserve(sc.counts.size());
  for (const auto& [x, c] : sc.counts) out.push_back(from_register_index(x, n_orbitals));
  std::sort(out.begin(), out.end());
  return out;
}

/// Single-spin string with its observed frequency.
struct SpinString {
  Word bits = 0;
  double weight = 0.0;
};

/// Marginal alpha and beta pools of a set of counts.
inline std::pair<std::vector<SpinString>, std::vector<SpinString>> spin_marginals(const SampleCounts& sc,
                                                                                  std::size_t n_orbitals) {
  std::map<Word, double> a, b;
  for (const auto& [x, c] : sc.counts) {
    const auto d = from_register_index(x, n_orbitals);
    a[d.alpha] += static_cast<double>(c);
    b[d.beta] += static_cast<double>(c);
  }
  std::pair<std::vector<SpinString>, std::vector<SpinString>> out;
  for (const auto& [k, w] : a) out.first.push_back({k, w});
  for (const auto& [k, w] : b) out.second.push_back({k, w});
  return out;
}

/// alpha x beta product, ordered by descending weight product (ties by bitmask), truncated to cap (0 = all).
inline std::vector<Determinant> spin_factorized_combine(const std::vector<SpinString>& alpha,
                                                        const std::vector<SpinString>& beta, std::size_t cap = 0) {
  if (alpha.empty() || beta.empty()) throw Error(ErrorCode::EmptyPool, "spin pools must be non-empty");
  struct Entry {
    double w;
    Determinant d;
  };
  std::vector<Entry> all;
  all.reserve(alpha.size() * beta.size());
  for (const auto& a : alpha)
    for (const auto& b : beta) all.push_back({a.weight * b.weight, {a.bits, b.bits}});
  const auto better = [](const Entry& x, const Entry& y) { return x.w != y.w ? x.w > y.w : x.d < y.d; };
  const std::size_t keep = cap == 0 ? all.size() : std::min(cap, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  std::vector<Determinant> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(all[i].d);
  return out;
}

/// Total-variation distance between empirical counts and a distribution over the listed support.
inline double total_variation(const SampleCounts& sc, const Distribution& d) {
  const double m = static_cast<double>(sc.sum());
  double tv = 0.0;
  std::unordered_set<Word> seen;
  for (const auto& [x, p] : d.support) {
    const auto it = sc.counts.find(x);
    const double q = it == sc.counts.end() ? 0.0 : static_cast<double>(it->second) / m;
    tv += std::abs(p - q);
    seen.insert(x);
  }
  double rest_emp = 0.0;
  for (const auto& [x, c] : sc.counts)
    if (!seen.count(x)) rest_emp += static_cast<double>(c) / m;
  tv += std::abs(rest_emp - d.residual);
  return 0.5 * tv;
}

}  // namespace qsci
