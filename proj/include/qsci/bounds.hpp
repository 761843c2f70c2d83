#pragma once

/**
 * @file bounds.hpp
 * @brief Closed-form truncation, noise and finite-shot error bounds, and
 *        Monte Carlo checks of the concentration inequalities behind them.
 */

#include <qsci/determinant.hpp>
#include <qsci/error.hpp>
#include <qsci/hamiltonian.hpp>
#include <qsci/parallel.hpp>
#include <qsci/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

namespace qsci {

/// Sum of c_i^2 over the determinants of `subset` that appear in `ground`.
inline double retained_weight(const Wavefunction& ground, const std::vector<Determinant>& subset) {
  std::unordered_set<Determinant, DeterminantHash> keep(subset.begin(), subset.end());
  double q = 0.0;
  for (std::size_t i = 0; i < ground.size(); ++i)
    if (keep.count(ground.dets[i])) q += ground.coeffs[i] * ground.coeffs[i];
  return q;
}

namespace detail {

inline void require_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in [0, 1]");
}

}  // namespace detail

/// min{2 Lambda, 2 Lambda sqrt(2 - 2 sqrt(Q))}. Q = 0 gives the cap 2 Lambda.
inline double truncation_bound(double lambda_h, double q_r) {
  detail::require_unit(q_r, "retained weight");
  if (!(lambda_h >= 0)) throw Error(ErrorCode::InvalidArgument, "spectral half-width must be non-negative");
  const double cap = 2.0 * lambda_h;
  return std::min(cap, cap * std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(q_r))));
}

/// (1 - p) P_id + p R / d.
inline double noisy_cumulative(double p_ideal, double p, double r, double d) {
  detail::require_unit(p_ideal, "ideal cumulative probability");
  detail::require_unit(p, "depolarizing strength");
  if (!(r >= 0 && r <= d && d > 0)) throw Error(ErrorCode::InvalidArgument, "need 0 <= R <= d and d > 0");
  return (1.0 - p) * p_ideal + p * r / d;
}

/// (P_noisy - p R / d) / (1 - p) - zeta, clamped to [0, 1].
inline double invert_weight(double p_noisy, double p, double r, double d, double zeta = 0.0) {
  detail::require_unit(p, "depolarizing strength");
  if (p == 1.0) throw Error(ErrorCode::FullDepolarization, "the weight cannot be recovered at p = 1");
  if (!(r >= 0 && r <= d && d > 0)) throw Error(ErrorCode::InvalidArgument, "need 0 <= R <= d and d > 0");
  return std::clamp((p_noisy - p * r / d) / (1.0 - p) - zeta, 0.0, 1.0);
}

/// Hoeffding half-width sqrt(ln(2/delta) / (2M)).
inline double hoeffding_epsilon(std::uint64_t shots, double delta) {
  if (shots == 0) throw Error(ErrorCode::InvalidArgument, "shots must be positive");
  if (!(delta > 0 && delta < 1)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(shots)));
}

/// max[0, (P_hat - eps - p R / d) / (1 - p) - zeta].
inline double weight_lower_bound(double p_hat, double epsilon, double p, double r, double d, double zeta = 0.0) {
  if (p >= 1.0) throw Error(ErrorCode::FullDepolarization, "the weight cannot be recovered at p = 1");
  return std::clamp((p_hat - epsilon - p * r / d) / (1.0 - p) - zeta, 0.0, 1.0);
}

/// min{1, 2K exp(-M Delta^2 / 2)}.
inline double selection_failure(std::uint64_t shots, std::size_t k, double delta_r) {
  if (!(delta_r > 0)) throw Error(ErrorCode::ZeroGap, "the boundary probability gap must be positive");
  return std::min(1.0, 2.0 * static_cast<double>(k) * std::exp(-static_cast<double>(shots) * delta_r * delta_r / 2.0));
}

/// Smallest integer M with M >= 2 ln(2K/delta) / ((1-p)^2 gap^2).
inline std::uint64_t required_shots(std::size_t k, double delta, double p, double gap_ideal) {
  if (!(gap_ideal > 0)) throw Error(ErrorCode::ZeroGap, "the ideal probability gap must be positive");
  if (!(delta > 0 && delta < 1)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  if (p >= 1.0) throw Error(ErrorCode::FullDepolarization, "no shot count resolves the gap at p = 1");
  const double g = (1.0 - p) * gap_ideal;
  return static_cast<std::uint64_t>(std::ceil(2.0 * std::log(2.0 * static_cast<double>(k) / delta) / (g * g)));
}

/// Truncation bound plus the selection-failure penalty 4 K Lambda exp(-M (1-p)^2 gap^2 / 2).
inline double expected_error_bound(double lambda_h, double q_r, std::uint64_t shots, std::size_t k, double p,
                                   double gap_ideal) {
  const double g = (1.0 - p) * gap_ideal;
  return truncation_bound(lambda_h, q_r) +
         4.0 * static_cast<double>(k) * lambda_h * std::exp(-static_cast<double>(shots) * g * g / 2.0);
}

inline double direct_noise_bias(double p, double lambda_h) {
  detail::require_unit(p, "depolarizing strength");
  return 2.0 * p * lambda_h;
}

/// ln C(n, k) via log-gamma.
inline double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  const auto lg = [](std::uint64_t x) { return std::lgamma(static_cast<double>(x) + 1.0); };
  return lg(n) - lg(k) - lg(n - k);
}

/// ln[C(n, na) C(n, nb) / 2^(2n)]: log-probability that a uniform 2n-bit string has the right spin counts.
inline double log_uniform_probability(std::size_t n, std::size_t n_alpha, std::size_t n_beta) {
  return log_binomial(n, n_alpha) + log_binomial(n, n_beta) - 2.0 * static_cast<double>(n) * std::log(2.0);
}

/// Closed-shell C(n, m/2)^2 / 2^(2n).
inline double uniform_probability(std::size_t n, std::size_t m) {
  if (m % 2 != 0) throw Error(ErrorCode::InvalidArgument, "closed-shell form needs an even electron count");
  if (m / 2 > n) throw Error(ErrorCode::InvalidArgument, "more electrons per spin than orbitals");
  return std::exp(log_uniform_probability(n, m / 2, m / 2));
}

/// floor(ln P_u / ln F). Natural logs throughout; the base cancels.
inline std::uint64_t gate_budget(double f2q, std::size_t n, std::size_t m) {
  if (!(f2q > 0 && f2q < 1)) throw Error(ErrorCode::InvalidArgument, "two-qubit fidelity must lie in (0, 1)");
  if (m % 2 != 0) throw Error(ErrorCode::InvalidArgument, "closed-shell form needs an even electron count");
  return static_cast<std::uint64_t>(std::floor(log_uniform_probability(n, m / 2, m / 2) / std::log(f2q)));
}

struct BoundInputs {
  double q_r = 1.0;
  double lambda_h = 0.0;
  /// Global depolarizing strength. Ignored when p_g is set.
  double p = 0.0;
  std::optional<double> p_g;
  std::size_t n_2q = 0;
  double r = 1.0;
  double d = 1.0;
  std::uint64_t shots = 100000;
  double delta = 0.05;
  /// Mismatch between the circuit distribution and the ground-state weights. No estimator exists; 0 by default.
  double zeta_r = 0.0;
  /// Measured cumulative probability of the retained set. Defaults to the noisy forward model of q_r.
  std::optional<double> p_hat;
  /// p_(R) - p_(R+1) in the ideal distribution.
  double gap_ideal = 0.0;
  std::size_t k = 1;
  double f2q = 0.99;
  std::size_t n = 0;
  std::size_t m = 0;

  double effective_p() const { return p_g ? 1.0 - std::pow(1.0 - *p_g, static_cast<double>(n_2q)) : p; }

  void validate() const {
    detail::require_unit(q_r, "q_r");
    detail::require_unit(effective_p(), "p");
    detail::require_unit(delta, "delta");
    detail::require_unit(f2q, "f2q");
    if (!(lambda_h >= 0)) throw Error(ErrorCode::InvalidArgument, "lambda_h must be non-negative");
    if (!(d > 0 && r > 0 && r <= d)) throw Error(ErrorCode::InvalidArgument, "need 0 < R <= d");
    if (shots == 0 || k == 0) throw Error(ErrorCode::InvalidArgument, "shots and K must be positive");
    if (!(zeta_r >= 0)) throw Error(ErrorCode::InvalidArgument, "zeta_r must be non-negative");
  }
};

struct BoundReport {
  double p = 0.0;
  double truncation_bound = 0.0;
  /// Q_R = 0: the truncation bound is the bare cap 2 Lambda.
  bool zero_weight = false;
  double epsilon_m = 0.0;
  double q_r_lower = 0.0;
  double energy_bound_confident = 0.0;
  /// Absent when the gap is zero.
  std::optional<double> selection_failure;
  std::optional<std::uint64_t> required_shots;
  std::optional<double> expected_error;
  double direct_noise_bias = 0.0;
  std::optional<double> p_u;
  std::optional<double> log_p_u;
  std::optional<std::uint64_t> n_g_max;
  double zeta_r = 0.0;
  bool zeta_assumed_zero = true;
};

/// Truncation bound evaluated at the confident lower weight.
inline double confident_energy_bound(const BoundInputs& in) {
  const double p = in.effective_p();
  const double p_hat = in.p_hat ? *in.p_hat : noisy_cumulative(in.q_r, p, in.r, in.d);
  const double lower = weight_lower_bound(p_hat, hoeffding_epsilon(in.shots, in.delta), p, in.r, in.d, in.zeta_r);
  return truncation_bound(in.lambda_h, lower);
}

inline BoundReport evaluate_bounds(const BoundInputs& in) {
  in.validate();
  BoundReport b;
  b.p = in.effective_p();
  b.truncation_bound = truncation_bound(in.lambda_h, in.q_r);
  b.zero_weight = in.q_r == 0.0;
  b.epsilon_m = in.delta > 0 && in.delta < 1 ? hoeffding_epsilon(in.shots, in.delta) : 0.0;
  if (b.p < 1.0) {
    const double p_hat = in.p_hat ? *in.p_hat : noisy_cumulative(in.q_r, b.p, in.r, in.d);
    b.q_r_lower = weight_lower_bound(p_hat, b.epsilon_m, b.p, in.r, in.d, in.zeta_r);
  }
  b.energy_bound_confident = truncation_bound(in.lambda_h, b.q_r_lower);
  if (in.gap_ideal > 0 && b.p < 1.0) {
    b.selection_failure = selection_failure(in.shots, in.k, (1.0 - b.p) * in.gap_ideal);
    if (in.delta > 0 && in.delta < 1) b.required_shots = required_shots(in.k, in.delta, b.p, in.gap_ideal);
    b.expected_error = expected_error_bound(in.lambda_h, in.q_r, in.shots, in.k, b.p, in.gap_ideal);
  }
  b.direct_noise_bias = direct_noise_bias(b.p, in.lambda_h);
  if (in.n > 0 && in.m % 2 == 0 && in.m / 2 <= in.n) {
    b.log_p_u = log_uniform_probability(in.n, in.m / 2, in.m / 2);
    b.p_u = std::exp(*b.log_p_u);
    if (in.f2q > 0 && in.f2q < 1) b.n_g_max = gate_budget(in.f2q, in.n, in.m);
  }
  b.zeta_r = in.zeta_r;
  b.zeta_assumed_zero = in.zeta_r == 0.0;
  return b;
}

struct BoundPreset {
  std::string name;
  std::size_t n = 0;
  std::size_t m = 0;
  double f2q = 0.0;
};

inline std::vector<BoundPreset> bound_presets() {
  return {{"cas10-10", 10, 10, 0.990}, {"pcluster", 73, 114, 0.992}};
}

inline BoundPreset bound_preset(const std::string& name) {
  for (auto& p : bound_presets())
    if (p.name == name) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
}

struct MonteCarloCheck {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double rate() const { return trials ? static_cast<double>(violations) / static_cast<double>(trials) : 0.0; }
};

/// Fraction of binomial(M, p_true) estimates that miss p_true by more than the Hoeffding half-width.
inline MonteCarloCheck hoeffding_violation_rate(double p_true, std::uint64_t shots, double delta, std::size_t trials,
                                                std::uint64_t seed) {
  detail::require_unit(p_true, "probability");
  const double eps = hoeffding_epsilon(shots, delta);
  std::vector<std::uint8_t> miss(trials, 0);
  parallel_for_blocks(trials, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      CounterRng rng(seed, t);
      std::binomial_distribution<std::uint64_t> draw(shots, p_true);
      const double est = static_cast<double>(draw(rng)) / static_cast<double>(shots);
      miss[t] = std::abs(est - p_true) > eps;
    }
  });
  return {trials, static_cast<std::size_t>(std::accumulate(miss.begin(), miss.end(), std::size_t{0}))};
}

/// Fraction of multinomial(M, probs) draws whose empirical top-R set differs from the true top-R set.
inline MonteCarloCheck top_r_misidentification_rate(const std::vector<double>& probs, std::size_t r,
                                                    std::uint64_t shots, std::size_t trials, std::uint64_t seed) {
  if (r == 0 || r >= probs.size()) throw Error(ErrorCode::InvalidArgument, "need 0 < R < K");
  const auto top = [r](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    idx.resize(r);
    std::sort(idx.begin(), idx.end());
    return idx;
  };
  const auto truth = top(probs);
  std::vector<std::uint8_t> miss(trials, 0);
  parallel_for_blocks(trials, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      CounterRng rng(seed, t);
      std::vector<double> counts(probs.size(), 0.0);
      std::uint64_t left = shots;
      double mass = 1.0;
      for (std::size_t i = 0; i + 1 < probs.size() && left > 0; ++i) {
        std::binomial_distribution<std::uint64_t> draw(left, std::clamp(probs[i] / mass, 0.0, 1.0));
        const auto c = draw(rng);
        counts[i] = static_cast<double>(c);
        left -= c;
        mass -= probs[i];
      }
      counts.back() += static_cast<double>(left);
      miss[t] = top(counts) != truth;
    }
  });
  return {trials, static_cast<std::size_t>(std::accumulate(miss.begin(), miss.end(), std::size_t{0}))};
}

}  // namespace qsci
