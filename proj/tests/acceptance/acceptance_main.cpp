// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <qsci/analysis.hpp>
#include <qsci/ansatz.hpp>
#include <qsci/bounds.hpp>
#include <qsci/demo.hpp>
#include <qsci/fixtures.hpp>
#include <qsci/hcouple.hpp>
#include <qsci/pauli.hpp>
#include <qsci/rng.hpp>
#include <qsci/sampler.hpp>

#include "dense_fermion.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

namespace {

using namespace qsci;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

std::vector<Determinant> full_space(const IntegralTable& t) {
  return enumerate_space(t.n_orbitals(), static_cast<std::size_t>(t.n_alpha()), static_cast<std::size_t>(t.n_beta()));
}

MatrixXd dense_block(const IntegralTable& t, const std::vector<Determinant>& dets) {
  const MatrixXd h(oracle::fock_hamiltonian(t));
  const auto m = static_cast<Eigen::Index>(dets.size());
  MatrixXd out(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      out(i, j) = h(static_cast<Eigen::Index>(to_register_index(dets[static_cast<std::size_t>(i)], t.n_orbitals())),
                    static_cast<Eigen::Index>(to_register_index(dets[static_cast<std::size_t>(j)], t.n_orbitals())));
  return out;
}

MatrixXcd pauli_matrix(const PauliString& p, std::size_t n) {
  const Complex i(0, 1);
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (std::size_t q = n; q-- > 0;) {
    MatrixXcd f(2, 2);
    const bool x = (p.x >> q) & 1, z = (p.z >> q) & 1;
    if (x && z) f << 0, -i, i, 0;
    else if (x) f << 0, 1, 1, 0;
    else if (z) f << 1, 0, 0, -1;
    else f << 1, 0, 0, 1;
    MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    out = next;
  }
  return out;
}

MatrixXd fermion_generator(const ExcitationOp& op, std::size_t n) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  MatrixXd tau = MatrixXd::Identity(dim, dim);
  for (auto c : op.created) tau = tau * MatrixXd(oracle::annihilator(c, n).transpose());
  for (auto it = op.annihilated.rbegin(); it != op.annihilated.rend(); ++it) tau = tau * MatrixXd(oracle::annihilator(*it, n));
  return op.phase * (tau - tau.transpose());
}

MatrixXcd circuit_matrix(const Circuit& c, const std::vector<double>& params) {
  const std::size_t dim = std::size_t{1} << c.n_qubits;
  MatrixXcd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t k = 0; k < dim; ++k) {
    const auto out = apply_circuit(c, params, Statevector::basis(c.n_qubits, k));
    for (std::size_t r = 0; r < dim; ++r) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = out.amps[r];
  }
  return m;
}

Distribution random_distribution(std::size_t n_qubits, std::size_t k, CounterRng& rng) {
  std::map<Word, double> m;
  while (m.size() < k) m[rng.below(Word{1} << n_qubits)] = rng.uniform() + 1e-3;
  double s = 0;
  for (auto& [x, p] : m) s += p;
  Distribution d{n_qubits, {}, 0.0};
  for (auto& [x, p] : m) d.support.emplace_back(x, p / s);
  return d;
}

// 1
void fci_space_count(Outcome& o) {
  const auto n = enumerate_space(10, 5, 5).size();
  o.detail << "dimension " << n;
  o.require(n == 63504, "63504 determinants");
}

// 2
void uniform_constants(Outcome& o) {
  const double pu = uniform_probability(10, 10);
  const double per_spin = std::exp(log_binomial(73, 57) - 73 * std::numbers::ln2);
  const double full = uniform_probability(73, 114);
  o.detail << "P_u(10,10)=" << pu << " per-spin=" << per_spin << " P_u(73,114)=" << full;
  o.require(std::abs(pu - 0.0606) <= 1e-4, "P_u(10,10)");
  o.require(std::abs(per_spin / 5.6e-7 - 1) <= 0.02, "per-spin");
  o.require(full >= 3e-13 / 1.5 && full <= 3e-13 * 1.5, "P_u(73,114)");
}

// 3
void gate_budgets(Outcome& o) {
  const auto a = gate_budget(0.990, 10, 10), b = gate_budget(0.996, 10, 10), c = gate_budget(0.992, 73, 114);
  o.detail << "N_g=" << a << ", " << b << ", " << c;
  o.require(a >= 275 && a <= 283, "F=0.990");
  o.require(b >= 690 && b <= 710, "F=0.996");
  o.require(c >= 3400 && c <= 3800, "P-cluster");
}

// 4
void oracle_equivalence(Outcome& o) {
  const auto fx = make_fixture("hubbard4");
  const auto dets = full_space(fx.table);
  const auto dense = dense_block(fx.table, dets);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(dense, Eigen::EigenvaluesOnly);
  const double e = diagonalize_subset(dets, fx.table).energy;
  double worst = 0;
  for (std::size_t i = 0; i < dets.size(); ++i)
    for (std::size_t j = 0; j < dets.size(); ++j) {
      const double core = i == j ? fx.table.core_energy() : 0.0;
      worst = std::max(worst, std::abs(slater_condon(dets[i], dets[j], fx.table) + core -
                                       dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
  o.detail << "dim " << dets.size() << " |dE|=" << std::abs(e - es.eigenvalues()(0)) << " max element diff " << worst;
  o.require(dets.size() == 36, "dimension 36");
  o.require(std::abs(e - es.eigenvalues()(0)) <= 1e-9, "ground energy");
  o.require(worst <= 1e-10, "Slater-Condon elements");
}

// 5
void variational_suite(Outcome& o) {
  const auto fx = make_fixture("hubbard4");
  const auto space = full_space(fx.table);
  const auto ground = fci_oracle(fx.table);
  const double lambda = spectral_halfwidth(build_subspace(space, fx.table));
  CounterRng rng(2024);
  std::size_t violations = 0;
  double tightest = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> idx(space.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const std::size_t small = 1 + rng.below(space.size() - 1);
    const std::size_t large = small + 1 + rng.below(space.size() - small);
    std::vector<Determinant> s, sp;
    for (std::size_t i = 0; i < large; ++i) {
      if (i < small) s.push_back(space[idx[i]]);
      sp.push_back(space[idx[i]]);
    }
    const double es = diagonalize_subset(s, fx.table).energy, esp = diagonalize_subset(sp, fx.table).energy;
    if (esp > es + 1e-10) ++violations;
    for (const auto& [sub, e] : {std::pair{&s, es}, std::pair{&sp, esp}}) {
      const double gap = e - ground.energy;
      const double bound = truncation_bound(lambda, std::min(1.0, retained_weight(ground, *sub)));
      if (gap < -1e-10 || gap > bound + 1e-10) ++violations;
      if (bound > 0) tightest = std::max(tightest, gap / bound);
    }
  }
  o.detail << "violations " << violations << " over 200 nested pairs, max gap/bound " << tightest;
  o.require(violations == 0, "zero violations");
}

// 6
void hcouple_convergence(Outcome& o) {
  const auto fx = make_fixture("hubbard4");
  const double e_fci = fci_oracle(fx.table).energy;
  const auto start = diagonalize_subset({fx.reference}, fx.table);
  const auto steps = hcouple_iterate(start, fx.table, 0.0, 0, 16);
  double prev = start.energy;
  bool monotone = true;
  for (const auto& s : steps) {
    monotone = monotone && s.energy_after <= prev + 1e-12;
    prev = s.energy_after;
  }
  o.detail << steps.size() << " rounds, |E-E_FCI|=" << std::abs(prev - e_fci);
  o.require(monotone, "non-increasing energies");
  o.require(std::abs(prev - e_fci) <= 1e-9, "reaches FCI");
}

// 7
void pt2_contract(Outcome& o) {
  const auto fx = make_fixture("hubbard4");
  const auto start = diagonalize_subset({fx.reference}, fx.table);
  bool all_above = true;
  for (const auto& d : connected_set(start, fx.table))
    all_above = all_above && determinant_energy(d, fx.table) > start.energy;
  const double corr = en_pt2(start, fx.table).correction;
  const double full = en_pt2(fci_oracle(fx.table), fx.table).correction;
  o.detail << "dE(reference)=" << corr << " dE(full space)=" << full;
  o.require(all_above, "every external diagonal above E_S");
  o.require(corr <= 0.0, "non-positive correction");
  o.require(full == 0.0, "zero on the full space");
}

// 8
void noise_laws(Outcome& o) {
  CounterRng rng(808);
  std::size_t rank_violations = 0;
  double worst_identity = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_distribution(8, 1 + rng.below(40), rng);
    const double p = rng.uniform();
    const auto dn = depolarize_distribution(d, p);
    for (std::size_t i = 0; i < d.support.size(); ++i)
      for (std::size_t j = 0; j < d.support.size(); ++j)
        if (d.support[i].second > d.support[j].second && !(dn.support[i].second >= dn.support[j].second))
          ++rank_violations;
    double id = 0, noisy = 0;
    std::size_t r = 0;
    for (std::size_t i = 0; i < d.support.size(); ++i)
      if (rng.bernoulli(0.5)) {
        id += d.support[i].second;
        noisy += dn.support[i].second;
        ++r;
      }
    worst_identity = std::max(worst_identity, std::abs(noisy - noisy_cumulative(id, p, static_cast<double>(r), 256)));
  }

  // Diagonal distributions over the 16 Fock states of the (2e,2o) model.
  const auto fx = make_fixture("two-orbital");
  const MatrixXd h(oracle::fock_hamiltonian(fx.table));
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(h, Eigen::EigenvaluesOnly);
  const double lambda = 0.5 * (es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff());
  std::size_t bias_violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd q(16);
    for (Eigen::Index i = 0; i < 16; ++i) q(i) = rng.bernoulli(0.4) ? rng.uniform() : 0.0;
    q(static_cast<Eigen::Index>(rng.below(16))) += 1e-3;
    q /= q.sum();
    const double p = rng.uniform();
    const Eigen::VectorXd qn = (1 - p) * q + Eigen::VectorXd::Constant(16, p / 16);
    const double bias = std::abs(qn.dot(h.diagonal()) - q.dot(h.diagonal()));
    if (bias > direct_noise_bias(p, lambda) + 1e-12) ++bias_violations;
  }
  o.detail << "rank violations " << rank_violations << ", max identity error " << worst_identity
           << ", bias violations " << bias_violations;
  o.require(rank_violations == 0, "ranking preserved");
  o.require(worst_identity <= 1e-12, "cumulative identity");
  o.require(bias_violations == 0, "bias bound");
}

// 9
void concentration(Outcome& o) {
  for (double delta : {0.01, 0.05, 0.2}) {
    const auto mc = hoeffding_violation_rate(0.3, 10000, delta, 10000, 99);
    o.detail << "delta=" << delta << " rate=" << mc.rate() << "; ";
    o.require(mc.trials >= 10000 && mc.rate() <= delta, "Hoeffding at delta " + std::to_string(delta));
  }
  const std::vector<double> probs{0.35, 0.25, 0.2, 0.12, 0.08};
  const double delta = 0.1;
  const std::size_t r = 2;
  const auto m = required_shots(static_cast<double>(probs.size()), delta, 0.0, probs[r - 1] - probs[r]);
  const auto mc = top_r_misidentification_rate(probs, r, m, 1000, 17);
  o.detail << "top-2 with M=" << m << " misidentified " << mc.rate();
  o.require(mc.rate() <= delta, "top-R selection");
}

// 10
void ansatz_correctness(Outcome& o) {
  const auto fx = make_fixture("hubbard4");
  const auto seed = fci_oracle(fx.table);
  const auto sel = prescreen(seed, 0.0, 16);
  const auto usci = build_usci(sel[0], sel, 4, {.layers = 2, .orbital_rotation = true});
  const MatrixXcd zero = circuit_matrix(usci, std::vector<double>(usci.n_params, 0.0));
  const double id_err = (zero - MatrixXcd::Identity(zero.rows(), zero.cols())).cwiseAbs().maxCoeff();

  double jw_err = 0;
  for (std::size_t n = 2; n <= 4; ++n)
    for (std::size_t a0 = 0; a0 < n; ++a0)
      for (std::size_t c0 = 0; c0 < n; ++c0) {
        if (a0 == c0) continue;
        std::vector<ExcitationOp> ops{{{a0}, {c0}, 1}};
        for (std::size_t a1 = a0 + 1; a1 < n; ++a1)
          for (std::size_t c1 = c0 + 1; c1 < n; ++c1)
            if (c0 != a1 && c1 != a0 && c1 != a1) ops.push_back({{a0, a1}, {c0, c1}, -1});
        for (const auto& op : ops) {
          MatrixXcd h = MatrixXcd::Zero(1 << n, 1 << n);
          for (const auto& t : jordan_wigner(op, n)) h += t.coeff * pauli_matrix(t.string, n);
          const MatrixXcd fermion = oracle::expm_antisymmetric(fermion_generator(op, n), 0.61);
          jw_err = std::max(jw_err, (oracle::expm_i_hermitian(h, 0.61) - fermion).cwiseAbs().maxCoeff());
        }
      }

  PipelineConfig cfg;
  cfg.shots = 20000;
  cfg.noise.depolarizing_p = 0.0;
  CounterRng rng(10);
  std::uint64_t rejected = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> theta(usci.n_params);
    for (auto& t : theta) t = 4 * rng.uniform() - 2;
    cfg.seed = static_cast<std::uint64_t>(trial);
    rejected += run_qsci_once(usci, theta, fx.table, sel[0], cfg).rejected;
  }

  MatrixXd k = MatrixXd::Zero(3, 3);
  for (Eigen::Index p = 0; p < 3; ++p)
    for (Eigen::Index q = p + 1; q < 3; ++q) k(q, p) = -(k(p, q) = 2 * rng.uniform() - 1);
  const MatrixXcd lucj = circuit_matrix(build_lucj(k, MatrixXd::Zero(6, 6)), {});
  const double lucj_err = (lucj - MatrixXcd::Identity(64, 64)).cwiseAbs().maxCoeff();

  o.detail << "theta=0 " << id_err << ", JW " << jw_err << ", rejected shots " << rejected << ", LUCJ(J=0) " << lucj_err;
  o.require(id_err <= 1e-12, "identity at theta=0");
  o.require(jw_err <= 1e-10, "Jordan-Wigner exponentials");
  o.require(rejected == 0, "particle conservation");
  o.require(lucj_err <= 1e-10, "LUCJ identity");
}

// 11
void end_to_end(Outcome& o) {
  for (double p : {0.01, 0.0}) {
    DemoConfig cfg;
    cfg.pipeline.shots = 100000;
    cfg.pipeline.noise.depolarizing_p = p;
    const auto r = run_demo(cfg);
    const double tol = p > 0 ? 1.6e-3 : 1e-6;
    o.detail << "p=" << p << " error " << r.final_error << " (" << r.hcouple_subspace << " dets); ";
    o.require(std::abs(r.final_error) <= tol, "p=" + std::to_string(p));
  }
}

// 12
void analysis_suite(Outcome& o) {
  double max_s = 0, asym = 0, min_mi = 0;
  for (const auto& name : fixture_names()) {
    const auto fx = make_fixture(name);
    const auto rep = analyze(fci_oracle(fx.table), fx.reference);
    for (double s : rep.entropies) max_s = std::max(max_s, s);
    asym = std::max(asym, (rep.mi - rep.mi.transpose()).cwiseAbs().maxCoeff());
    min_mi = std::min(min_mi, rep.mi.minCoeff());
  }
  const auto fx = make_fixture("h-chain-synthetic");
  const double single_mi = mutual_information(Wavefunction{6, {fx.reference}, {1.0}, 0.0}).cwiseAbs().maxCoeff();
  std::vector<Determinant> cisd;
  for (const auto& d : full_space(fx.table))
    if (excitation_rank(d, fx.reference) <= 2) cisd.push_back(d);
  const auto hist = rank_histogram(diagonalize_subset(cisd, fx.table), fx.reference);
  o.detail << "max s " << max_s << ", asymmetry " << asym << ", min I " << min_mi << ", single-det I " << single_mi
           << ", CISD ranks " << hist.size();
  o.require(max_s <= std::numbers::ln2 + 1e-12, "entropy ceiling");
  o.require(asym == 0.0 && min_mi >= 0.0, "symmetric non-negative I");
  o.require(single_mi == 0.0, "zero I for one determinant");
  o.require(hist.size() <= 3, "no weight above rank 2");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "FCI space count", 1, fci_space_count},
      {2, "uniform-sampling constants", 1, uniform_constants},
      {3, "gate budgets", 1, gate_budgets},
      {4, "oracle equivalence", 1, oracle_equivalence},
      {5, "variational and truncation bound", 30, variational_suite},
      {6, "H-Couple convergence", 10, hcouple_convergence},
      {7, "EN-PT2 contract", 1, pt2_contract},
      {8, "noise-model laws", 10, noise_laws},
      {9, "concentration", 60, concentration},
      {10, "ansatz correctness", 10, ansatz_correctness},
      {11, "end-to-end demo", 60, end_to_end},
      {12, "analysis suite", 5, analysis_suite},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(secs <= c.budget_s, "time budget " + std::to_string(c.budget_s) + " s");
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.3f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                secs);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
