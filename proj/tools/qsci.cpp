// qsci: command-line front end for the sample-based subspace diagonalization toolkit.
//
// Every subcommand writes one JSON report (stdout or --out) whose "manifest"
// echoes the resolved configuration, seeds, library versions, SHA-256 digests of
// inputs and outputs, and per-stage timings. Exit codes: 0 success, 1 domain
// error, 2 usage or configuration error.

#include <qsci/analysis.hpp>
#include <qsci/bounds.hpp>
#include <qsci/demo.hpp>
#include <qsci/fcidump.hpp>
#include <qsci/fixtures.hpp>
#include <qsci/hcouple.hpp>
#include <qsci/io.hpp>
#include <qsci/pipeline.hpp>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace qsci;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, what + ": '" + tok + "' is not a number");
    }
  }
  return out;
}

/// Per-invocation bookkeeping that ends up in the manifest.
struct Run {
  Json config = Json::object();
  Json seeds = Json::object();
  Json inputs = Json::object();
  Json outputs = Json::object();
  Json timings = Json::object();

  template <class F>
  auto timed(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      timings[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto r = f();
      finish();
      return r;
    }
  }

  std::string read_input(const std::string& path) {
    auto text = read_text_file(path);
    inputs[path] = sha256_hex(text);
    return text;
  }

  void write_output(const std::string& path, const std::string& text) {
    write_text_file(path, text);
    outputs[path] = sha256_hex(text);
  }

  Json manifest() const {
    Json versions{{"qsci", QSCI_VERSION},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                  {"cli11", CLI11_VERSION},
                  {"compiler", __VERSION__}};
    return {{"config", config}, {"seeds", seeds},     {"versions", versions},
            {"inputs", inputs}, {"outputs", outputs}, {"timings", timings}};
  }
};

/// Registers options on a subcommand and remembers how to echo their resolved values.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    echo_.emplace_back([name, &var](Json& j) { j[name] = var; });
    return app_->add_option("--" + name, var, help)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    echo_.emplace_back([name, &var](Json& j) { j[name] = var; });
    return app_->add_flag("--" + name, var, help);
  }

  void echo(Json& j) const {
    for (const auto& e : echo_) e(j);
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void(Json&)>> echo_;
};

struct TableSource {
  std::string fcidump;
  std::string fixture;
  std::string reference;

  void add(Options& o) {
    o.add("fcidump", fcidump, "FCIDUMP file to read");
    o.add("fixture", fixture, "built-in model: hubbard4, h-chain-synthetic, two-orbital");
    o.add("reference", reference, "reference determinant as a bitstring (alpha block first)");
  }

  struct Loaded {
    IntegralTable table;
    Determinant reference;
    std::string name;
    std::vector<std::string> warnings;
  };

  Loaded load(Run& run) const {
    if (fcidump.empty() == fixture.empty())
      throw CLI::ValidationError("give exactly one of --fcidump or --fixture");
    Loaded l;
    if (!fixture.empty()) {
      auto fx = make_fixture(fixture);
      l.table = std::move(fx.table);
      l.reference = fx.reference;
      l.name = fx.name;
    } else {
      l.table = parse_fcidump(run.read_input(fcidump), &l.warnings);
      l.reference = aufbau_determinant(static_cast<std::size_t>(l.table.n_alpha()), static_cast<std::size_t>(l.table.n_beta()));
      l.name = fcidump;
    }
    if (!reference.empty()) {
      l.reference = from_bitstring(reference);
      if (reference.size() != 2 * l.table.n_orbitals())
        throw Error(ErrorCode::ShapeMismatch, "reference needs " + std::to_string(2 * l.table.n_orbitals()) + " bits");
      if (l.reference.n_alpha() != l.table.n_alpha() || l.reference.n_beta() != l.table.n_beta())
        throw Error(ErrorCode::InvalidArgument, "reference has the wrong electron counts");
    }
    return l;
  }
};

/// Pipeline and noise options shared by usci-build, sample, qsci and demo.
struct PipelineOptions {
  PipelineConfig cfg;
  double p_g = -1.0;
  std::string eps0, eps1;

  void add_circuit(Options& o) {
    o.add("cutoff", cfg.cutoff, "prescreen: keep seed determinants with |c| >= cutoff");
    o.add("top-m", cfg.top_m, "prescreen: keep at most this many determinants (0 = no cap)");
    o.add("layers", cfg.layers, "stacked USCI blocks with independent parameters");
    o.add("degree-cap", cfg.degree_cap, "max distinct partners per qubit within a block (0 = unlimited)");
    o.flag("orbital-rotation", cfg.orbital_rotation, "append an orbital-rotation layer to every block");
    o.flag("compile-support", cfg.compile_support, "simulate only the qubits the gates touch");
  }

  void add_sampling(Options& o) {
    o.add("shots", cfg.shots, "measurement shots per circuit evaluation");
    o.add("p", cfg.noise.depolarizing_p, "global depolarizing strength");
    o.add("p-g", p_g, "per two-qubit-gate error; overrides --p when >= 0");
    o.add("n-2q", cfg.noise.n_2q, "two-qubit gate count used with --p-g");
    o.add("eps0", eps0, "readout flip probability 0->1: one value or a comma list per qubit");
    o.add("eps1", eps1, "readout flip probability 1->0: one value or a comma list per qubit");
    o.add("seed", cfg.seed, "top-level random seed");
    o.flag("spin-factorized", cfg.spin_factorized, "build the subspace from the alpha x beta product of sampled strings");
    o.add("combine-cap", cfg.combine_cap, "keep at most this many combined determinants (0 = all)");
  }

  void add_optimizer(Options& o) {
    o.add("max-evals", cfg.optimizer.max_evaluations, "optimizer evaluation budget");
    o.add("tolerance", cfg.optimizer.tolerance, "optimizer improvement tolerance");
    o.add("patience", cfg.optimizer.patience, "optimizer iterations without improvement before stopping");
    o.add("initial-radius", cfg.optimizer.initial_radius, "optimizer initial trust radius");
  }

  PipelineConfig resolve(Run& run) {
    if (p_g >= 0) cfg.noise.per_gate_pg = p_g;
    cfg.noise.readout_eps0 = parse_list(eps0, "eps0");
    cfg.noise.readout_eps1 = parse_list(eps1, "eps1");
    cfg.validate();
    run.seeds = {{"seed", cfg.seed}, {"sampling", derive_seed(cfg.seed, 1)}, {"readout", derive_seed(cfg.seed, 2)}};
    return cfg;
  }
};

Json determinant_rows(const Wavefunction& psi, std::size_t top) {
  const auto ranked = psi.ranked();
  Json rows = Json::array();
  for (std::size_t i = 0; i < ranked.size() && (top == 0 || i < top); ++i)
    rows.push_back({{"bitstring", to_bitstring(ranked.dets[i], psi.n_orbitals)},
                    {"coefficient", ranked.coeffs[i]},
                    {"weight", ranked.coeffs[i] * ranked.coeffs[i]}});
  return rows;
}

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Wavefunction seed_wavefunction(Run& run, const std::string& path, const IntegralTable& t) {
  if (path.empty()) return run.timed("seed_fci", [&] { return fci_oracle(t); });
  auto psi = wavefunction_from_json(parse_json(run.read_input(path), path));
  if (psi.n_orbitals != t.n_orbitals()) throw Error(ErrorCode::ShapeMismatch, "seed wavefunction orbital count differs from the table");
  return psi;
}

std::vector<double> resolve_params(std::size_t n, const std::string& list, double value) {
  if (list.empty()) return std::vector<double>(n, value);
  auto p = parse_list(list, "params");
  if (p.size() != n)
    throw Error(ErrorCode::ParamCountMismatch, "circuit has " + std::to_string(n) + " parameters, got " + std::to_string(p.size()));
  return p;
}

Json sampling_json(const SamplingSummary& s, std::size_t n) {
  Json top = Json::array();
  for (const auto& [d, c] : s.top) top.push_back({{"bitstring", to_bitstring(d, n)}, {"count", c}});
  return {{"ansatz", s.ansatz},       {"qubits", s.qubits},     {"parameters", s.parameters},
          {"unique", s.unique},       {"retained", s.retained}, {"rejected", s.rejected},
          {"valid_fraction", s.valid_fraction}, {"dominant_in_top", s.dominant_in_top}, {"top", std::move(top)}};
}

struct Command {
  CLI::App* app = nullptr;
  std::unique_ptr<Options> options;
  std::function<Json(Run&)> body;
  std::string out;
};

/// Reads `key = value` lines (# comments) and turns them into --key=value tokens for `cmd`.
std::vector<std::string> config_tokens(const std::string& path, CLI::App* cmd) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParseError, "cannot open config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigParseError, path + ":" + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "config" || cmd->get_option_no_throw("--" + key) == nullptr)
      throw Error(ErrorCode::ConfigParseError,
                  path + ":" + std::to_string(lineno) + ": unknown field '" + key + "' for " + cmd->get_name());
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsci: sample-based subspace diagonalization with USCI circuits, H-Couple expansion and error bounds"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: QSCI_THREADS or 1)");

  std::map<std::string, Command> commands;
  std::string config_path;
  auto make = [&](const std::string& name, const std::string& help) -> Command& {
    auto& c = commands[name];
    c.app = app.add_subcommand(name, help);
    c.options = std::make_unique<Options>(c.app);
    c.app->add_option("--config", config_path, "key = value file; command-line flags take precedence");
    c.app->add_option("--out", c.out, "write the JSON report here instead of stdout");
    return c;
  };

  // fcidump-info
  {
    auto& c = make("fcidump-info", "summarize an integral file or built-in model");
    auto src = std::make_shared<TableSource>();
    auto exp = std::make_shared<std::string>();
    src->add(*c.options);
    c.options->add("export", *exp, "write the table as an FCIDUMP file");
    c.body = [src, exp](Run& run) {
      const auto l = src->load(run);
      const auto& t = l.table;
      if (!exp->empty()) run.write_output(*exp, serialize_fcidump(t));
      return Json{{"source", l.name},
                  {"n_orbitals", t.n_orbitals()},
                  {"n_electrons", t.n_electrons()},
                  {"ms2", t.ms2()},
                  {"n_alpha", t.n_alpha()},
                  {"n_beta", t.n_beta()},
                  {"core_energy", t.core_energy()},
                  {"isym", t.isym()},
                  {"orbsym", t.orbsym()},
                  {"nonzero_one_body", t.count_nonzero_h()},
                  {"nonzero_two_body", t.count_nonzero_g()},
                  {"fci_dimension", binomial(t.n_orbitals(), static_cast<std::uint64_t>(t.n_alpha())) *
                                        binomial(t.n_orbitals(), static_cast<std::uint64_t>(t.n_beta()))},
                  {"reference", to_bitstring(l.reference, t.n_orbitals())},
                  {"reference_energy", determinant_energy(l.reference, t)},
                  {"warnings", l.warnings}};
    };
  }

  // fci
  {
    auto& c = make("fci", "exact ground state over the full determinant space");
    auto src = std::make_shared<TableSource>();
    auto top = std::make_shared<std::size_t>(10);
    auto wf = std::make_shared<std::string>();
    src->add(*c.options);
    c.options->add("top", *top, "list this many leading determinants (0 = all)");
    c.options->add("wavefunction-out", *wf, "write the ground state as JSON");
    c.body = [src, top, wf](Run& run) {
      const auto l = src->load(run);
      const auto space = run.timed("enumerate", [&] {
        return enumerate_space(l.table.n_orbitals(), static_cast<std::size_t>(l.table.n_alpha()),
                               static_cast<std::size_t>(l.table.n_beta()));
      });
      const auto m = run.timed("build", [&] { return build_subspace(space, l.table); });
      const auto psi = run.timed("diagonalize", [&] { return davidson_lowest(m); });
      Json lambda = nullptr;
      if (m.dim() <= dense_cap) lambda = run.timed("spectrum", [&] { return spectral_halfwidth(m); });
      if (!wf->empty()) run.write_output(*wf, to_json(psi).dump(2) + "\n");
      const double eref = determinant_energy(l.reference, l.table);
      return Json{{"source", l.name},
                  {"energy", psi.energy},
                  {"dimension", space.size()},
                  {"reference", to_bitstring(l.reference, l.table.n_orbitals())},
                  {"reference_energy", eref},
                  {"correlation_energy", psi.energy - eref},
                  {"lambda_h", lambda},
                  {"determinants", determinant_rows(psi, *top)}};
    };
  }

  // usci-build
  {
    auto& c = make("usci-build", "prescreen a seed wavefunction and build the USCI circuit");
    auto src = std::make_shared<TableSource>();
    auto po = std::make_shared<PipelineOptions>();
    auto seed_wf = std::make_shared<std::string>();
    auto circuit_out = std::make_shared<std::string>();
    src->add(*c.options);
    c.options->add("seed-wavefunction", *seed_wf, "seed wavefunction JSON (default: exact ground state)");
    po->add_circuit(*c.options);
    c.options->add("circuit-out", *circuit_out, "write the circuit JSON here instead of embedding it");
    c.body = [src, po, seed_wf, circuit_out](Run& run) {
      const auto l = src->load(run);
      const auto cfg = po->resolve(run);
      const auto seed = seed_wavefunction(run, *seed_wf, l.table);
      const auto targets = usci_targets(seed, l.reference, cfg.cutoff, cfg.top_m);
      const auto circuit = run.timed("build", [&] { return usci_from_seed(seed, l.reference, cfg); });
      const auto cj = to_json(circuit, to_register_index(l.reference, l.table.n_orbitals()));
      Json sel = Json::array();
      for (const auto& d : targets) sel.push_back(to_bitstring(d, l.table.n_orbitals()));
      Json r{{"source", l.name},
             {"reference", to_bitstring(l.reference, l.table.n_orbitals())},
             {"targets", std::move(sel)},
             {"stats", circuit_stats_json(circuit)}};
      if (!circuit_out->empty()) run.write_output(*circuit_out, cj.dump(2) + "\n");
      else r["circuit"] = cj;
      return r;
    };
  }

  // sample
  {
    auto& c = make("sample", "run a circuit from its reference and draw noisy measurement shots");
    auto src = std::make_shared<TableSource>();
    auto po = std::make_shared<PipelineOptions>();
    auto circuit_in = std::make_shared<std::string>();
    auto seed_wf = std::make_shared<std::string>();
    auto params = std::make_shared<std::string>();
    auto value = std::make_shared<double>(0.0);
    auto csv = std::make_shared<std::string>();
    src->add(*c.options);
    c.options->add("circuit", *circuit_in, "circuit JSON from usci-build (default: build one here)");
    c.options->add("seed-wavefunction", *seed_wf, "seed wavefunction JSON when building the circuit");
    po->add_circuit(*c.options);
    po->add_sampling(*c.options);
    c.options->add("params", *params, "comma-separated circuit parameters");
    c.options->add("param-value", *value, "value for every parameter when --params is absent");
    c.options->add("counts-csv", *csv, "write bitstring,count,frequency rows here");
    c.body = [=](Run& run) {
      const auto l = src->load(run);
      const auto cfg = po->resolve(run);
      const std::size_t n = l.table.n_orbitals();
      Circuit circuit;
      Word reference = to_register_index(l.reference, n);
      if (!circuit_in->empty()) {
        const auto j = parse_json(run.read_input(*circuit_in), *circuit_in);
        circuit = circuit_from_json(j);
        if (j.contains("reference")) reference = parse_register_bitstring(j["reference"].get<std::string>());
      } else {
        const auto seed = seed_wavefunction(run, *seed_wf, l.table);
        circuit = usci_from_seed(seed, l.reference, cfg);
      }
      const auto theta = resolve_params(circuit.n_params, *params, *value);
      const auto dist = run.timed("simulate", [&] {
        return depolarize_distribution(ideal_distribution(run_from_basis(circuit, theta, reference)),
                                       cfg.noise.effective_p());
      });
      auto counts = run.timed("sample", [&] {
        auto sc = sample(dist, cfg.shots, derive_seed(cfg.seed, 1));
        sc.noise = cfg.noise;
        return embed_counts(apply_readout(sc, cfg.noise, derive_seed(cfg.seed, 2)), circuit);
      });
      counts.seed = cfg.seed;
      const auto f = symmetry_filter(counts, n, l.table.n_alpha(), l.table.n_beta());
      if (!csv->empty()) run.write_output(*csv, counts_csv(counts));
      return Json{{"source", l.name},
                  {"parameters", theta},
                  {"retained", f.retained},
                  {"rejected", f.rejected},
                  {"valid_fraction", static_cast<double>(f.retained) / static_cast<double>(cfg.shots)},
                  {"counts", to_json(counts)}};
    };
  }

  // qsci (alias run)
  {
    auto& c = make("qsci", "optimize a USCI circuit on the sampled subspace energy, then refine");
    c.app->alias("run");
    auto src = std::make_shared<TableSource>();
    auto po = std::make_shared<PipelineOptions>();
    auto seed_wf = std::make_shared<std::string>();
    auto no_opt = std::make_shared<bool>(false);
    auto value = std::make_shared<double>(0.0);
    auto iters = std::make_shared<std::size_t>(0);
    auto tau = std::make_shared<double>(0.0);
    auto top_k = std::make_shared<std::size_t>(0);
    auto pt2 = std::make_shared<bool>(false);
    auto exact = std::make_shared<bool>(false);
    auto wf = std::make_shared<std::string>();
    auto csv = std::make_shared<std::string>();
    src->add(*c.options);
    c.options->add("seed-wavefunction", *seed_wf, "seed wavefunction JSON (default: exact ground state)");
    po->add_circuit(*c.options);
    po->add_sampling(*c.options);
    po->add_optimizer(*c.options);
    c.options->flag("no-optimize", *no_opt, "skip optimization and use --param-value for every parameter");
    c.options->add("param-value", *value, "parameter value with --no-optimize");
    c.options->add("hcouple-iterations", *iters, "H-Couple expansion rounds after sampling");
    c.options->add("tau", *tau, "H-Couple score threshold");
    c.options->add("top-k", *top_k, "H-Couple: add at most this many determinants per round (0 = all)");
    c.options->flag("pt2", *pt2, "add the Epstein-Nesbet correction of the final subspace");
    c.options->flag("exact", *exact, "also compute the exact ground-state energy for comparison");
    c.options->add("wavefunction-out", *wf, "write the final wavefunction as JSON");
    c.options->add("counts-csv", *csv, "write the final sampled counts here");
    c.body = [=](Run& run) {
      const auto l = src->load(run);
      const auto cfg = po->resolve(run);
      const auto& t = l.table;
      const auto seed = seed_wavefunction(run, *seed_wf, t);
      const auto circuit = usci_from_seed(seed, l.reference, cfg);
      OptimizeResult opt;
      if (*no_opt) {
        opt.params.assign(circuit.n_params, *value);
      } else {
        opt = run.timed("optimize", [&] { return optimize(circuit, t, l.reference, cfg); });
      }
      const auto best = run.timed("qsci", [&] { return run_qsci_once(circuit, opt.params, t, l.reference, cfg); });
      Wavefunction psi = best.wavefunction;
      Json steps = Json::array();
      if (*iters > 0) {
        const auto hc = run.timed("hcouple", [&] { return hcouple_iterate(psi, t, *tau, *top_k, *iters, cfg.davidson); });
        for (std::size_t i = 0; i < hc.size(); ++i) {
          steps.push_back({{"iteration", i + 1}, {"added", hc[i].added.size()}, {"energy", hc[i].energy_after}});
          psi = hc[i].wavefunction_after;
        }
      }
      Json pt2_json = nullptr;
      if (*pt2) {
        const auto p = run.timed("pt2", [&] { return en_pt2(psi, t); });
        pt2_json = {{"correction", p.correction},
                    {"total", psi.energy + p.correction},
                    {"terms", p.terms},
                    {"small_denominators", p.small_denominators}};
      }
      Json fci = nullptr, err = nullptr;
      if (*exact) {
        const double e = run.timed("fci", [&] { return fci_oracle(t).energy; });
        fci = e;
        err = psi.energy - e;
      }
      if (!wf->empty()) run.write_output(*wf, to_json(psi).dump(2) + "\n");
      if (!csv->empty()) run.write_output(*csv, counts_csv(best.counts));
      return Json{{"source", l.name},
                  {"reference", to_bitstring(l.reference, t.n_orbitals())},
                  {"circuit", circuit_stats_json(circuit)},
                  {"optimizer",
                   {{"method", cfg.optimizer.method},
                    {"evaluations", opt.evaluations},
                    {"converged", opt.converged},
                    {"params", opt.params},
                    {"trace", opt.trace}}},
                  {"sampling",
                   {{"shots", cfg.shots},
                    {"retained", best.retained},
                    {"rejected", best.rejected},
                    {"unique", best.unique}}},
                  {"qsci_energy", best.wavefunction.energy},
                  {"qsci_subspace", best.wavefunction.size()},
                  {"hcouple", std::move(steps)},
                  {"energy", psi.energy},
                  {"subspace", psi.size()},
                  {"pt2", pt2_json},
                  {"fci_energy", fci},
                  {"error", err}};
    };
  }

  // expand
  {
    auto& c = make("expand", "H-Couple expansion of a wavefunction");
    auto src = std::make_shared<TableSource>();
    auto in = std::make_shared<std::string>();
    auto tau = std::make_shared<double>(0.0);
    auto top_k = std::make_shared<std::size_t>(0);
    auto iters = std::make_shared<std::size_t>(1);
    auto wf = std::make_shared<std::string>();
    src->add(*c.options);
    c.options->add("in", *in, "wavefunction JSON")->required();
    c.options->add("tau", *tau, "score threshold");
    c.options->add("top-k", *top_k, "add at most this many determinants per round (0 = all)");
    c.options->add("iterations", *iters, "maximum expansion rounds");
    c.options->add("wavefunction-out", *wf, "write the expanded wavefunction as JSON");
    c.body = [=](Run& run) {
      const auto l = src->load(run);
      auto psi = wavefunction_from_json(parse_json(run.read_input(*in), *in));
      if (psi.n_orbitals != l.table.n_orbitals()) throw Error(ErrorCode::ShapeMismatch, "wavefunction and table differ in orbital count");
      psi = diagonalize_subset(psi.dets, l.table);
      const double start = psi.energy;
      const std::size_t start_size = psi.size();
      const auto steps = run.timed("expand", [&] { return hcouple_iterate(psi, l.table, *tau, *top_k, *iters); });
      Json rows = Json::array();
      for (std::size_t i = 0; i < steps.size(); ++i) {
        Json top = Json::array();
        for (std::size_t k = 0; k < steps[i].added.size() && k < 10; ++k)
          top.push_back({{"bitstring", to_bitstring(steps[i].added[k], psi.n_orbitals)}, {"score", steps[i].scores[k]}});
        rows.push_back({{"iteration", i + 1},
                        {"added", steps[i].added.size()},
                        {"energy_before", steps[i].energy_before},
                        {"energy_after", steps[i].energy_after},
                        {"top_added", std::move(top)}});
        psi = steps[i].wavefunction_after;
      }
      if (!wf->empty()) run.write_output(*wf, to_json(psi).dump(2) + "\n");
      return Json{{"source", l.name},
                  {"initial_energy", start},
                  {"initial_subspace", start_size},
                  {"steps", std::move(rows)},
                  {"converged", !steps.empty() && steps.back().no_candidates},
                  {"energy", psi.energy},
                  {"subspace", psi.size()}};
    };
  }

  // pt2
  {
    auto& c = make("pt2", "Epstein-Nesbet second-order correction of a wavefunction");
    auto src = std::make_shared<TableSource>();
    auto in = std::make_shared<std::string>();
    src->add(*c.options);
    c.options->add("in", *in, "wavefunction JSON")->required();
    c.body = [=](Run& run) {
      const auto l = src->load(run);
      auto psi = wavefunction_from_json(parse_json(run.read_input(*in), *in));
      if (psi.n_orbitals != l.table.n_orbitals()) throw Error(ErrorCode::ShapeMismatch, "wavefunction and table differ in orbital count");
      psi.normalize();
      psi.energy = rayleigh_quotient(psi, l.table);
      const auto p = run.timed("pt2", [&] { return en_pt2(psi, l.table); });
      return Json{{"source", l.name},
                  {"variational_energy", psi.energy},
                  {"correction", p.correction},
                  {"total", psi.energy + p.correction},
                  {"terms", p.terms},
                  {"small_denominators", p.small_denominators},
                  {"subspace", psi.size()}};
    };
  }

  // bounds
  {
    auto& c = make("bounds", "evaluate truncation, noise and finite-shot error bounds");
    auto in = std::make_shared<BoundInputs>();
    auto preset = std::make_shared<std::string>();
    auto d_log2 = std::make_shared<double>(-1.0);
    auto p_g = std::make_shared<double>(-1.0);
    auto p_hat = std::make_shared<double>(-1.0);
    auto table = std::make_shared<bool>(false);
    in->n = 0;
    in->m = 0;
    auto& o = *c.options;
    o.add("preset", *preset, "cas10-10 or pcluster (sets n, m, f2q unless given)");
    auto* on = o.add("n", in->n, "active orbitals");
    auto* om = o.add("m", in->m, "active electrons (even)");
    auto* of = o.add("f2q", in->f2q, "two-qubit gate fidelity");
    o.add("q-r", in->q_r, "exact retained weight");
    o.add("lambda-h", in->lambda_h, "spectral half-width, Hartree");
    o.add("p", in->p, "global depolarizing strength");
    o.add("p-g", *p_g, "per two-qubit-gate error; overrides --p when >= 0");
    o.add("n-2q", in->n_2q, "two-qubit gate count used with --p-g");
    o.add("r", in->r, "retained-set size");
    o.add("d-log2", *d_log2, "log2 of the outcome-space size (default: 2n, or log2 R)");
    o.add("shots", in->shots, "measurement shots");
    o.add("delta", in->delta, "confidence parameter");
    o.add("zeta", in->zeta_r, "circuit-distribution mismatch");
    o.add("p-hat", *p_hat, "measured cumulative probability of the retained set (default: noisy model of q-r)");
    o.add("gap", in->gap_ideal, "ideal probability gap at the selection boundary (0 skips selection terms)");
    o.add("k", in->k, "candidate-pool size");
    o.flag("table", *table, "also print a formatted table to stderr");
    c.body = [=](Run&) {
      if (!preset->empty()) {
        const auto ps = bound_preset(*preset);
        if (on->count() == 0) in->n = ps.n;
        if (om->count() == 0) in->m = ps.m;
        if (of->count() == 0) in->f2q = ps.f2q;
      }
      if (*p_g >= 0) in->p_g = *p_g;
      if (*p_hat >= 0) in->p_hat = *p_hat;
      const double dl = *d_log2 >= 0 ? *d_log2 : (in->n > 0 ? 2.0 * static_cast<double>(in->n) : std::log2(in->r));
      in->d = std::exp2(dl);
      const auto b = evaluate_bounds(*in);
      if (*table) {
        const auto j = to_json(b);
        for (const auto& [k, v] : j.items()) std::fprintf(stderr, "  %-24s %s\n", k.c_str(), v.dump().c_str());
      }
      return Json{{"inputs",
                   {{"n", in->n},
                    {"m", in->m},
                    {"f2q", in->f2q},
                    {"q_r", in->q_r},
                    {"lambda_h", in->lambda_h},
                    {"p", in->effective_p()},
                    {"r", in->r},
                    {"d_log2", dl},
                    {"shots", in->shots},
                    {"delta", in->delta},
                    {"zeta_r", in->zeta_r},
                    {"gap", in->gap_ideal},
                    {"k", in->k}}},
                  {"report", to_json(b)}};
    };
  }

  // analyze
  {
    auto& c = make("analyze", "orbital entropies, mutual information and excitation-rank weights");
    auto in = std::make_shared<std::string>();
    auto ref = std::make_shared<std::string>();
    auto edges = std::make_shared<std::string>();
    auto threshold = std::make_shared<double>(0.0);
    c.options->add("in", *in, "wavefunction JSON")->required();
    c.options->add("reference", *ref, "reference bitstring for the rank histogram (default: heaviest determinant)");
    c.options->add("edges", *edges, "write the mutual-information graph as a CSV edge list");
    c.options->add("edge-threshold", *threshold, "omit edges with I at or below this value");
    c.body = [=](Run& run) {
      const auto psi = wavefunction_from_json(parse_json(run.read_input(*in), *in));
      if (psi.size() == 0) throw Error(ErrorCode::EmptyInput, "wavefunction has no determinants");
      const Determinant reference = ref->empty() ? psi.ranked().dets.front() : from_bitstring(*ref);
      const auto rep = run.timed("analyze", [&] { return analyze(psi, reference); });
      if (!edges->empty()) run.write_output(*edges, mi_edge_list_csv(rep.mi, psi.n_orbitals, *threshold));
      Json r = to_json(rep, psi.n_orbitals);
      r["reference"] = to_bitstring(reference, psi.n_orbitals);
      r["determinants"] = psi.size();
      return r;
    };
  }

  // demo
  {
    auto& c = make("demo", "USCI vs LUCJ sampling, then QSCI, H-Couple and PT2 against the exact answer");
    auto dc = std::make_shared<DemoConfig>();
    auto po = std::make_shared<PipelineOptions>();
    auto wf = std::make_shared<std::string>();
    auto& o = *c.options;
    o.add("fixture", dc->fixture, "hubbard4, h-chain-synthetic or two-orbital");
    o.add("top-m", dc->top_m, "USCI targets: heaviest exact determinants");
    o.add("top", dc->top_k_check, "top-k window for the dominant-determinant check");
    o.add("hcouple-iterations", dc->hcouple_iterations, "H-Couple rounds after sampling");
    o.add("tau", dc->tau, "H-Couple score threshold");
    o.add("lucj-scale", dc->lucj_scale, "scale of the random LUCJ generators");
    po->add_sampling(o);
    po->add_optimizer(o);
    o.add("wavefunction-out", *wf, "write the final wavefunction as JSON");
    c.body = [=](Run& run) {
      dc->pipeline = po->resolve(run);
      const auto r = run.timed("demo", [&] { return run_demo(*dc); });
      const std::size_t n = r.n_orbitals;
      if (!wf->empty()) run.write_output(*wf, to_json(r.final_wavefunction).dump(2) + "\n");
      Json dominant = Json::array();
      for (const auto& d : r.dominant) dominant.push_back(to_bitstring(d, n));
      return Json{{"fixture", r.fixture},
                  {"n_orbitals", n},
                  {"fci_dimension", r.fci_dimension},
                  {"fci_energy", r.fci_energy},
                  {"reference_energy", r.reference_energy},
                  {"dominant", std::move(dominant)},
                  {"usci", sampling_json(r.usci, n)},
                  {"lucj", sampling_json(r.lucj, n)},
                  {"optimizer",
                   {{"evaluations", r.optimization.evaluations},
                    {"converged", r.optimization.converged},
                    {"energy", nullable(r.optimization.energy)}}},
                  {"qsci_energy", r.qsci_energy},
                  {"qsci_subspace", r.qsci_subspace},
                  {"hcouple_energies", r.hcouple_energies},
                  {"hcouple_subspace", r.hcouple_subspace},
                  {"pt2_correction", r.pt2_correction},
                  {"final_energy", r.final_energy},
                  {"final_error", r.final_error},
                  {"chemical_accuracy", std::abs(r.final_error) <= 1.6e-3}};
    };
  }

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  std::vector<std::string> args(argv + 1, argv + argc);
  if (!args.empty() && args[0].rfind("-", 0) != 0 && args[0] != "run" && !commands.count(args[0])) {
    std::cerr << "error: UnknownSubcommand: '" << args[0] << "'\n\n" << app.help();
    return 2;
  }

  try {
    // A --config file expands into --key=value tokens placed before the user's own flags.
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (path.empty()) continue;
      std::size_t at = 0;
      while (at < args.size() && args[at].rfind("-", 0) == 0) at += args[at] == "--threads" ? 2 : 1;
      if (at >= args.size()) break;
      const std::string name = args[at] == "run" ? "qsci" : args[at];
      auto tokens = config_tokens(path, commands.at(name).app);
      args.insert(args.begin() + static_cast<std::ptrdiff_t>(at + 1), tokens.begin(), tokens.end());
      break;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (threads > 0) set_thread_count(threads);

  for (auto& [name, cmd] : commands) {
    if (!cmd.app->parsed()) continue;
    Run run;
    cmd.options->echo(run.config);
    try {
      Json result = cmd.body(run);
      Json report{{"command", name}, {"status", "ok"}, {"result", std::move(result)}, {"manifest", run.manifest()}};
      const std::string text = report.dump(2) + "\n";
      if (cmd.out.empty()) std::cout << text;
      else write_text_file(cmd.out, text);
      return 0;
    } catch (const CLI::ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
