// Sample-based diagonalization of an FCIDUMP file in a dozen calls.
//
//   quickstart [FCIDUMP] [depolarizing p]

#include <qsci/fcidump.hpp>
#include <qsci/fixtures.hpp>
#include <qsci/hcouple.hpp>
#include <qsci/pipeline.hpp>

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
  using namespace qsci;
  try {
    const auto table = argc > 1 ? read_fcidump(argv[1]) : make_fixture("hubbard4").table;
    const auto exact = fci_oracle(table);
    const auto reference = exact.ranked().dets.front();

    PipelineConfig cfg;
    cfg.top_m = 16;
    cfg.shots = 100000;
    cfg.noise.depolarizing_p = argc > 2 ? std::atof(argv[2]) : 0.01;
    cfg.seed = 7;

    const auto circuit = usci_from_seed(exact, reference, cfg);
    const auto opt = optimize(circuit, table, reference, cfg);
    const auto sampled = run_qsci_once(circuit, opt.params, table, reference, cfg);
    std::printf("circuit: %zu qubits, %zu parameters, %zu optimizer evaluations\n", circuit.n_qubits, circuit.n_params,
                opt.evaluations);
    std::printf("sampled subspace: %zu determinants, E = %.10f (retained %llu of %llu shots)\n",
                sampled.wavefunction.size(), sampled.wavefunction.energy,
                static_cast<unsigned long long>(sampled.retained), static_cast<unsigned long long>(cfg.shots));

    auto psi = sampled.wavefunction;
    for (const auto& step : hcouple_iterate(psi, table, 0.0, 0, 1)) psi = step.wavefunction_after;
    const auto pt2 = en_pt2(psi, table);
    std::printf("after H-Couple: %zu determinants, E = %.10f, E + PT2 = %.10f\n", psi.size(), psi.energy,
                psi.energy + pt2.correction);
    std::printf("exact:          %zu determinants, E = %.10f, error %.2e\n", exact.size(), exact.energy,
                psi.energy - exact.energy);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
