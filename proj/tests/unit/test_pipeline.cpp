#include <qsci/fixtures.hpp>
#include <qsci/pipeline.hpp>

#include <gtest/gtest.h>

#include <numbers>

namespace {

using namespace qsci;

TEST(RunQsciOnce, ZeroParametersGiveReferenceEnergy) {
  const auto fx = make_fixture("hubbard4");
  const auto sel = prescreen(fci_oracle(fx.table), 0.0, 6);
  const auto c = build_usci(sel[0], sel, 4);
  PipelineConfig cfg;
  cfg.shots = 1000;
  const auto r = run_qsci_once(c, std::vector<double>(c.n_params, 0.0), fx.table, sel[0], cfg);
  EXPECT_EQ(r.unique, 1u);
  EXPECT_NEAR(r.wavefunction.energy, determinant_energy(sel[0], fx.table), 1e-12);
}

TEST(RunQsciOnce, FullSelectionReachesFci) {
  const auto fx = make_fixture("hubbard4");
  const auto exact = fci_oracle(fx.table);
  const auto sel = prescreen(exact, 0.0);
  const auto c = build_usci(sel[0], sel, 4);
  PipelineConfig cfg;
  cfg.shots = 200000;
  std::vector<double> params(c.n_params, 0.4);
  const auto r = run_qsci_once(c, params, fx.table, sel[0], cfg);
  EXPECT_EQ(r.rejected, 0u);
  EXPECT_NEAR(r.wavefunction.energy, exact.energy, 1e-6);
  EXPECT_GE(r.wavefunction.energy, exact.energy - 1e-10);
}

TEST(RunQsciOnce, FullDepolarizationMayEmptyTheSubspace) {
  const auto fx = make_fixture("two-orbital");
  const auto c = build_usci(fx.reference, {fx.reference}, 2);
  PipelineConfig cfg;
  cfg.shots = 1;
  cfg.noise.depolarizing_p = 1.0;
  int empty = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    try {
      const auto r = run_qsci_once(c, {}, fx.table, fx.reference, cfg);
      EXPECT_EQ(r.retained, 1u);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::EmptySubspace);
      ++empty;
    }
  }
  EXPECT_GT(empty, 0);
}

TEST(RunQsciOnce, ShotConvergenceInTotalVariation) {
  const auto fx = make_fixture("hubbard4");
  const auto sel = prescreen(fci_oracle(fx.table), 0.0, 8);
  const auto c = build_usci(sel[0], sel, 4);
  std::vector<double> params(c.n_params, 0.25);
  const auto dist = ideal_distribution(run_from_basis(c, params, to_register_index(sel[0], 4)));
  const double tv_small = total_variation(sample(dist, 1000, 3), dist);
  const double tv_large = total_variation(sample(dist, 100000, 3), dist);
  EXPECT_LT(tv_large, tv_small);
}

TEST(RunQsciOnce, SubspaceEnergyDropsAsSelectionGrows) {
  const auto fx = make_fixture("h-chain-synthetic");
  const auto exact = fci_oracle(fx.table);
  PipelineConfig cfg;
  cfg.shots = 50000;
  double previous = 0.0;
  for (std::size_t m : {2u, 6u, 12u, 24u}) {
    const auto sel = prescreen(exact, 0.0, m);
    const auto c = build_usci(sel[0], sel, 6);
    const auto r = run_qsci_once(c, std::vector<double>(c.n_params, 0.3), fx.table, sel[0], cfg);
    EXPECT_GE(r.wavefunction.energy, exact.energy - 1e-10);
    if (m > 2) EXPECT_LE(r.wavefunction.energy, previous + 1e-10);
    previous = r.wavefunction.energy;
  }
}

TEST(RunQsciOnce, CompiledSupportGivesTheSameEnergy) {
  const auto fx = make_fixture("h-chain-synthetic");
  const auto sel = prescreen(fci_oracle(fx.table), 0.0, 5);
  const auto full = build_usci(sel[0], sel, 6);
  const auto compiled = compile_active_support(full, to_register_index(sel[0], 6));
  PipelineConfig cfg;
  cfg.shots = 20000;
  std::vector<double> params(full.n_params, 0.3);
  const auto a = run_qsci_once(full, params, fx.table, sel[0], cfg);
  const auto b = run_qsci_once(compiled, params, fx.table, sel[0], cfg);
  EXPECT_NEAR(a.wavefunction.energy, b.wavefunction.energy, 1e-10);
}

TEST(RunQsciOnce, SpinFactorizedSubspaceIsAtLeastAsGood) {
  const auto fx = make_fixture("hubbard4");
  const auto sel = prescreen(fci_oracle(fx.table), 0.0, 5);
  const auto c = build_usci(sel[0], sel, 4);
  PipelineConfig cfg;
  cfg.shots = 5000;
  std::vector<double> params(c.n_params, 0.3);
  const auto plain = run_qsci_once(c, params, fx.table, sel[0], cfg);
  cfg.spin_factorized = true;
  const auto split = run_qsci_once(c, params, fx.table, sel[0], cfg);
  EXPECT_GE(split.unique, plain.unique);
  EXPECT_LE(split.wavefunction.energy, plain.wavefunction.energy + 1e-12);
}

TEST(Optimize, NoParametersEvaluatesOnce) {
  const auto fx = make_fixture("two-orbital");
  const auto c = build_usci(fx.reference, {fx.reference}, 2);
  PipelineConfig cfg;
  cfg.shots = 100;
  const auto r = optimize(c, fx.table, fx.reference, cfg);
  EXPECT_EQ(r.evaluations, 1u);
  EXPECT_TRUE(r.params.empty());
}

TEST(Optimize, OneParameterMatchesGridScan) {
  const auto fx = make_fixture("two-orbital");
  const Determinant target{0b10, 0b10};
  const auto c = build_usci(fx.reference, {fx.reference, target}, 2);
  ASSERT_EQ(c.n_params, 1u);
  PipelineConfig cfg;
  cfg.shots = 2000;
  cfg.seed = 11;
  double scan = std::numeric_limits<double>::infinity();
  for (int k = -200; k <= 200; ++k) {
    const std::vector<double> p{k * std::numbers::pi / 200};
    scan = std::min(scan, run_qsci_once(c, p, fx.table, fx.reference, cfg).wavefunction.energy);
  }
  const auto r = optimize(c, fx.table, fx.reference, cfg);
  EXPECT_NEAR(r.energy, scan, 1e-6);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
}

TEST(Minimize, QuadraticBowl) {
  const auto f = [](std::span<const double> x) { return (x[0] - 0.3) * (x[0] - 0.3) + 2 * (x[1] + 0.2) * (x[1] + 0.2); };
  OptimizerConfig opt;
  opt.patience = 50;
  const auto r = minimize(f, {0.0, 0.0}, opt);
  EXPECT_NEAR(r.params[0], 0.3, 1e-3);
  EXPECT_NEAR(r.params[1], -0.2, 1e-3);
  EXPECT_LE(r.evaluations, opt.max_evaluations);
}

TEST(PipelineConfig, Validation) {
  PipelineConfig cfg;
  cfg.shots = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.shots = 1;
  cfg.optimizer.tolerance = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
