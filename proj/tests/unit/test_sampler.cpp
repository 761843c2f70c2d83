#include <qsci/ansatz.hpp>
#include <qsci/fixtures.hpp>
#include <qsci/sampler.hpp>

#include <gtest/gtest.h>

#include <numeric>

namespace {

using namespace qsci;

Distribution random_distribution(std::size_t n_qubits, std::size_t k, CounterRng& rng) {
  std::map<Word, double> m;
  while (m.size() < k) m[rng.below(Word{1} << n_qubits)] = rng.uniform() + 1e-3;
  double s = 0;
  for (auto& [x, p] : m) s += p;
  Distribution d{n_qubits, {}, 0.0};
  for (auto& [x, p] : m) d.support.emplace_back(x, p / s);
  return d;
}

TEST(IdealDistribution, BasisAndUniform) {
  const auto b = ideal_distribution(Statevector::basis(3, 5));
  ASSERT_EQ(b.support.size(), 1u);
  EXPECT_EQ(b.support[0].first, 5u);
  EXPECT_DOUBLE_EQ(b.support[0].second, 1.0);

  Statevector u{2, std::vector<Complex>(4, 0.5)};
  const auto d = ideal_distribution(u);
  ASSERT_EQ(d.support.size(), 4u);
  for (const auto& [x, p] : d.support) EXPECT_NEAR(p, 0.25, 1e-15);
}

TEST(IdealDistribution, MatchesSquaredUsciAmplitudes) {
  const auto fx = make_fixture("hubbard4");
  const auto sel = prescreen(fci_oracle(fx.table), 0.0, 6);
  const auto c = build_usci(sel[0], sel, 4);
  std::vector<double> params(c.n_params, 0.3);
  const auto sv = run_from_basis(c, params, to_register_index(sel[0], 4));
  const auto d = ideal_distribution(sv);
  double total = 0;
  for (const auto& [x, p] : d.support) {
    EXPECT_NEAR(p, std::norm(sv.amps[x]), 1e-15);
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(Depolarize, LimitsAndCumulativeIdentity) {
  CounterRng rng(17);
  const auto d = random_distribution(6, 10, rng);
  const auto same = depolarize_distribution(d, 0.0);
  for (std::size_t i = 0; i < d.support.size(); ++i) EXPECT_EQ(same.support[i].second, d.support[i].second);
  EXPECT_EQ(same.residual, 0.0);

  const auto flat = depolarize_distribution(d, 1.0);
  for (const auto& [x, p] : flat.support) EXPECT_NEAR(p, 1.0 / 64, 1e-15);
  EXPECT_NEAR(flat.residual, 54.0 / 64, 1e-15);
  EXPECT_NEAR(flat.probability(63) + flat.probability(0), 2.0 / 64, 1e-15);

  for (int trial = 0; trial < 100; ++trial) {
    const double p = rng.uniform();
    const auto dn = depolarize_distribution(d, p);
    EXPECT_NEAR(dn.total(), 1.0, 1e-12);
    // Any subset R of the listed strings.
    double pr_id = 0, pr_noisy = 0;
    std::size_t r = 0;
    for (std::size_t i = 0; i < d.support.size(); ++i)
      if (rng.bernoulli(0.5)) {
        pr_id += d.support[i].second;
        pr_noisy += dn.support[i].second;
        ++r;
      }
    ASSERT_NEAR(pr_noisy, (1 - p) * pr_id + p * static_cast<double>(r) / 64, 1e-12);
  }
}

TEST(Depolarize, PreservesRanking) {
  CounterRng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_distribution(8, 1 + rng.below(40), rng);
    const auto dn = depolarize_distribution(d, rng.uniform());
    std::vector<std::size_t> a(d.support.size()), b(d.support.size());
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::stable_sort(a.begin(), a.end(), [&](auto i, auto j) { return d.support[i].second > d.support[j].second; });
    std::stable_sort(b.begin(), b.end(), [&](auto i, auto j) { return dn.support[i].second > dn.support[j].second; });
    ASSERT_EQ(a, b);
  }
}

TEST(Sample, PointCoinAndDeterminism) {
  const Distribution point{4, {{7, 1.0}}, 0.0};
  const auto pc = sample(point, 1000, 1);
  ASSERT_EQ(pc.counts.size(), 1u);
  EXPECT_EQ(pc.counts.at(7), 1000u);

  const Distribution coin{1, {{0, 0.5}, {1, 0.5}}, 0.0};
  const auto c = sample(coin, 1'000'000, 42);
  EXPECT_EQ(c.sum(), 1'000'000u);
  EXPECT_NEAR(static_cast<double>(c.counts.at(0)), 5e5, 1500.0);
  EXPECT_EQ(sample(coin, 1'000'000, 42).counts, c.counts);

  set_thread_count(3);
  const auto threaded = sample(coin, 1'000'000, 42);
  set_thread_count(0);
  EXPECT_EQ(threaded.counts, c.counts);
}

TEST(Sample, ResidualMassLandsOnUnlistedStrings) {
  const auto d = depolarize_distribution({3, {{0, 1.0}}, 0.0}, 1.0);
  const auto c = sample(d, 80'000, 9);
  EXPECT_EQ(c.counts.size(), 8u);
  for (const auto& [x, n] : c.counts) EXPECT_NEAR(static_cast<double>(n), 1e4, 400.0);
}

TEST(Readout, LimitsAndRate) {
  SampleCounts sc{3, {{0b001, 10}, {0b110, 5}}, 15, 0, {}};
  NoiseModel none;
  EXPECT_EQ(apply_readout(sc, none, 1).counts, sc.counts);
  NoiseModel all;
  all.readout_eps0 = {1.0};
  all.readout_eps1 = {1.0};
  const auto inv = apply_readout(sc, all, 1);
  EXPECT_EQ(inv.counts.at(0b110), 10u);
  EXPECT_EQ(inv.counts.at(0b001), 5u);

  SampleCounts zeros{1, {{0, 1'000'000}}, 1'000'000, 0, {}};
  NoiseModel e;
  e.readout_eps0 = {0.1};
  const auto out = apply_readout(zeros, e, 3);
  EXPECT_EQ(out.sum(), 1'000'000u);
  EXPECT_NEAR(static_cast<double>(out.counts.at(1)), 1e5, 900.0);  // 3 sigma = 900
}

TEST(SymmetryFilter, RetentionRules) {
  const auto fx = make_fixture("hubbard4");
  const auto sel = prescreen(fci_oracle(fx.table), 0.0, 8);
  const auto c = build_usci(sel[0], sel, 4);
  CounterRng rng(2);
  std::vector<double> params(c.n_params);
  for (auto& p : params) p = rng.uniform() - 0.5;
  const auto counts = sample(ideal_distribution(run_from_basis(c, params, to_register_index(sel[0], 4))), 20000, 5);
  const auto f = symmetry_filter(counts, 4, 2, 2);
  EXPECT_EQ(f.rejected, 0u);
  EXPECT_EQ(f.retained, 20000u);

  NoiseModel noisy;
  noisy.readout_eps0 = {0.02};
  noisy.readout_eps1 = {0.02};
  EXPECT_GT(symmetry_filter(apply_readout(counts, noisy, 1), 4, 2, 2).rejected, 0u);

  const SampleCounts zero{20, {{0, 3}}, 3, 0, {}};
  EXPECT_EQ(symmetry_filter(zero, 10, 5, 5).rejected, 3u);
}

TEST(SymmetryFilter, UniformTwentyBitRetention) {
  const auto d = depolarize_distribution({20, {}, 0.0}, 1.0);
  const auto c = sample(d, 1'000'000, 77);
  const auto f = symmetry_filter(c, 10, 5, 5);
  const double pu = 63504.0 / 1048576.0;
  const double sigma = std::sqrt(pu * (1 - pu) / 1e6);
  EXPECT_NEAR(static_cast<double>(f.retained) / 1e6, pu, 3 * sigma);
}

TEST(SpinFactorized, ProductAndCap) {
  const std::vector<SpinString> a{{0b0011, 5}, {0b0101, 3}, {0b1001, 1}};
  const std::vector<SpinString> b{{0b0011, 4}, {0b0110, 2}, {0b1100, 1}, {0b1010, 0.5}};
  EXPECT_EQ(spin_factorized_combine(a, b).size(), 12u);
  const auto top = spin_factorized_combine(a, b, 5);
  ASSERT_EQ(top.size(), 5u);
  // weight products 20, 12, 10, 6, 5
  EXPECT_EQ(top[0], (Determinant{0b0011, 0b0011}));
  EXPECT_EQ(top[1], (Determinant{0b0101, 0b0011}));
  EXPECT_EQ(top[2], (Determinant{0b0011, 0b0110}));
  EXPECT_EQ(top[3], (Determinant{0b0101, 0b0110}));
  EXPECT_EQ(top[4], (Determinant{0b0011, 0b1100}));
  EXPECT_THROW(spin_factorized_combine({}, b), Error);
}

TEST(SpinFactorized, ToySplitSamplingFindsDominantDeterminant) {
  const auto fx = make_fixture("hubbard4");
  const auto exact = fci_oracle(fx.table);
  const auto sel = prescreen(exact, 0.0, 4);
  const auto c = build_usci(sel[0], sel, 4);
  std::vector<double> params(c.n_params, 0.2);
  const auto counts = sample(ideal_distribution(run_from_basis(c, params, to_register_index(sel[0], 4))), 5000, 4);
  const auto [a, b] = spin_marginals(counts, 4);
  const auto pool = spin_factorized_combine(a, b);
  EXPECT_NE(std::find(pool.begin(), pool.end(), exact.ranked().dets[0]), pool.end());
}

TEST(Noise, PerGateComposition) {
  NoiseModel m;
  m.per_gate_pg = 0.01;
  m.n_2q = 50;
  EXPECT_NEAR(m.effective_p(), 1 - std::pow(0.99, 50), 1e-15);
  m.readout_eps0 = {1.5};
  EXPECT_THROW(m.validate(), Error);
}

}  // namespace
