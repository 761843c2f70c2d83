#include <qsci/fixtures.hpp>
#include <qsci/hcouple.hpp>

#include <gtest/gtest.h>

#include <cstring>
#include <set>

namespace {

using namespace qsci;

Wavefunction single(const Determinant& d, const IntegralTable& t) {
  return diagonalize_subset({d}, t);
}

std::vector<Determinant> full_space(const IntegralTable& t) {
  return enumerate_space(t.n_orbitals(), static_cast<std::size_t>(t.n_alpha()), static_cast<std::size_t>(t.n_beta()));
}

TEST(ConnectedSet, EdgeCases) {
  const auto hub = hubbard_chain(4, 2.0);
  EXPECT_TRUE(connected_set(fci_oracle(hub), hub).empty());

  IntegralTable one(1, 2, 0);
  one.set_h(0, 0, -1.0);
  one.set_g(0, 0, 0, 0, 0.5);
  EXPECT_TRUE(connected_set(single({1, 1}, one), one).empty());
}

TEST(ConnectedSet, ReferenceGivesCoupledSinglesAndDoubles) {
  const auto fx = make_fixture("hubbard4");
  const auto got = connected_set(single(fx.reference, fx.table), fx.table);
  std::vector<Determinant> expect;
  for (const auto& d : full_space(fx.table)) {
    const int r = excitation_rank(d, fx.reference);
    if ((r == 1 || r == 2) && std::abs(slater_condon(d, fx.reference, fx.table)) > coupling_zero) expect.push_back(d);
  }
  EXPECT_EQ(got, expect);
  // In the site basis only hopping couples the Neel state: six singles.
  EXPECT_EQ(got.size(), 6u);

  // Molecular-orbital basis: the full singles+doubles manifold is coupled.
  const auto mo = make_fixture("h-chain-synthetic");
  std::size_t cisd = 0;
  for (const auto& d : full_space(mo.table)) {
    const int r = excitation_rank(d, mo.reference);
    cisd += (r == 1 || r == 2) && std::abs(slater_condon(d, mo.reference, mo.table)) > coupling_zero;
  }
  EXPECT_EQ(connected_set(single(mo.reference, mo.table), mo.table).size(), cisd);
}

// Closure under Hamiltonian coupling is the connected component of the
// reference in the graph of nonzero full-space matrix elements.
TEST(ConnectedSet, IterationSpansTheCoupledComponent) {
  for (const char* name : {"hubbard4", "h-chain-synthetic", "two-orbital"}) {
    const auto fx = make_fixture(name);
    const auto space = full_space(fx.table);
    const Eigen::MatrixXd h = build_subspace(space, fx.table).to_dense();
    std::vector<char> seen(space.size(), 0);
    std::vector<std::size_t> frontier{static_cast<std::size_t>(std::find(space.begin(), space.end(), fx.reference) - space.begin())};
    seen[frontier[0]] = 1;
    while (!frontier.empty()) {
      std::vector<std::size_t> next;
      for (auto i : frontier)
        for (std::size_t j = 0; j < space.size(); ++j)
          if (!seen[j] && std::abs(h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) > coupling_zero) {
            seen[j] = 1;
            next.push_back(j);
          }
      frontier = std::move(next);
    }
    std::vector<Determinant> component;
    for (std::size_t j = 0; j < space.size(); ++j)
      if (seen[j]) component.push_back(space[j]);

    std::vector<Determinant> s{fx.reference};
    for (std::size_t it = 0; it < space.size(); ++it) {
      Wavefunction w{fx.table.n_orbitals(), s, std::vector<double>(s.size(), 1.0), 0.0};
      const auto more = connected_set(w, fx.table);
      if (more.empty()) break;
      s.insert(s.end(), more.begin(), more.end());
    }
    std::sort(s.begin(), s.end());
    EXPECT_EQ(s, component) << name;

    // Without the coupling restriction, |occupied| rounds of singles and doubles reach everything.
    std::set<Determinant> reach{fx.reference};
    for (int it = 0; it < fx.table.n_electrons(); ++it) {
      const std::vector<Determinant> cur(reach.begin(), reach.end());
      for (const auto& d : cur) for_each_connected(d, fx.table.n_orbitals(), [&](const Determinant& e) { reach.insert(e); });
    }
    EXPECT_EQ(std::vector<Determinant>(reach.begin(), reach.end()), space) << name;
  }
}

TEST(Score, MatchesDirectSummation) {
  const auto fx = make_fixture("hubbard4");
  const auto space = full_space(fx.table);
  std::vector<Determinant> s(space.begin(), space.begin() + 9);
  const auto psi = diagonalize_subset(s, fx.table);
  std::vector<Determinant> cand(space.begin() + 9, space.end());
  const auto scored = score_candidates(psi, cand, fx.table);
  double best = -1;
  Determinant best_det;
  for (const auto& mu : cand) {
    double v = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) v += std::abs(slater_condon(mu, psi.dets[i], fx.table) * psi.coeffs[i]);
    if (v > best || (v == best && mu < best_det)) {
      best = v;
      best_det = mu;
    }
  }
  EXPECT_EQ(scored.front().det, best_det);
  EXPECT_NEAR(scored.front().score, best, 1e-12);
  for (std::size_t i = 1; i < scored.size(); ++i) EXPECT_GE(scored[i - 1].score, scored[i].score);

  // Single-determinant S: score is |H_{mu,ref}|; decoupled candidates score zero.
  const auto ref = single(fx.reference, fx.table);
  for (const auto& sc : score_candidates(ref, cand, fx.table))
    EXPECT_NEAR(sc.score, std::abs(slater_condon(sc.det, fx.reference, fx.table)), 1e-15);
  const Determinant far{0b1010, 0b0101};
  EXPECT_EQ(score_candidates(ref, {far}, fx.table)[0].score, 0.0);
}

TEST(Expand, InfiniteThresholdAddsNothing) {
  const auto fx = make_fixture("hubbard4");
  const auto psi = single(fx.reference, fx.table);
  const auto r = expand_and_rediagonalize(psi, fx.table, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(r.no_candidates);
  EXPECT_TRUE(r.added.empty());
  EXPECT_EQ(r.energy_after, r.energy_before);
}

TEST(Expand, ZeroThresholdConvergesToFci) {
  for (const auto& name : fixture_names()) {
    const auto fx = make_fixture(name);
    const double e_fci = fci_oracle(fx.table).energy;
    const auto steps = hcouple_iterate(single(fx.reference, fx.table), fx.table, 0.0, 0, 4 * fx.table.n_orbitals());
    double prev = determinant_energy(fx.reference, fx.table);
    for (const auto& s : steps) {
      EXPECT_LE(s.energy_after, s.energy_before + 1e-12);
      EXPECT_LE(s.energy_after, prev + 1e-12);
      EXPECT_GE(s.energy_after, e_fci - 1e-10);
      prev = s.energy_after;
    }
    EXPECT_TRUE(steps.back().no_candidates) << name;
    EXPECT_NEAR(prev, e_fci, 1e-9) << name;
  }
}

TEST(Expand, OneStepEqualsCisdSpace) {
  const auto fx = make_fixture("h-chain-synthetic");
  const auto r = expand_and_rediagonalize(single(fx.reference, fx.table), fx.table, 0.0);
  std::vector<Determinant> cisd;
  for (const auto& d : full_space(fx.table))
    if (excitation_rank(d, fx.reference) <= 2) cisd.push_back(d);
  EXPECT_NEAR(r.energy_after, diagonalize_subset(cisd, fx.table).energy, 1e-10);
}

TEST(Expand, TopKAppliesAfterThreshold) {
  const auto fx = make_fixture("h-chain-synthetic");
  const auto psi = single(fx.reference, fx.table);
  const auto r = expand_and_rediagonalize(psi, fx.table, 1e-3, 5);
  ASSERT_EQ(r.added.size(), 5u);
  for (double s : r.scores) EXPECT_GE(s, 1e-3);
  const auto all = expand_and_rediagonalize(psi, fx.table, 1e-3);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(all.added[i], r.added[i]);
}

TEST(Pt2, ContractAndPurity) {
  const auto fx = make_fixture("hubbard4");
  EXPECT_EQ(en_pt2(fci_oracle(fx.table), fx.table).correction, 0.0);

  const auto psi = single(fx.reference, fx.table);
  const auto before = psi;
  const auto pt2 = en_pt2(psi, fx.table);
  EXPECT_EQ(psi.coeffs, before.coeffs);
  EXPECT_EQ(psi.dets, before.dets);
  EXPECT_EQ(std::memcmp(&psi.energy, &before.energy, sizeof(double)), 0);
  // Six hops of amplitude -1 into doubly-occupied sites at cost U = 2.
  EXPECT_NEAR(pt2.correction, -3.0, 1e-12);
  EXPECT_EQ(pt2.terms, 6u);
  const double gap = fci_oracle(fx.table).energy - psi.energy;
  EXPECT_LT(pt2.correction, 0.0);
  EXPECT_NEAR(pt2.correction / gap, 1.0, 0.2);
}

TEST(Pt2, SmallDenominatorsAreSkippedAndCounted) {
  // Two degenerate orbitals: the doubly excited determinant has the same diagonal energy.
  IntegralTable t(2, 2, 0);
  t.set_g(0, 0, 0, 0, 1.0);
  t.set_g(1, 1, 1, 1, 1.0);
  t.set_g(0, 1, 0, 1, 0.1);
  const auto psi = single({0b01, 0b01}, t);
  const auto pt2 = en_pt2(psi, t);
  EXPECT_EQ(pt2.small_denominators, 1u);
  EXPECT_EQ(pt2.correction, 0.0);
}

}  // namespace
