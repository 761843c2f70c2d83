#pragma once

/**
 * @file io.hpp
 * @brief JSON and CSV forms of wavefunctions, circuits, sample counts and
 *        reports. Bitstrings put qubit 0 leftmost: alpha block, then beta.
 */

#include <qsci/analysis.hpp>
#include <qsci/bounds.hpp>
#include <qsci/circuit.hpp>
#include <qsci/determinant.hpp>
#include <qsci/error.hpp>
#include <qsci/hamiltonian.hpp>
#include <qsci/sampler.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

namespace qsci {

using Json = nlohmann::ordered_json;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigParseError, origin + ": " + e.what());
  }
}

/// Register bitstring of `n_qubits` bits, qubit 0 first.
inline std::string register_bitstring(Word x, std::size_t n_qubits) {
  std::string s(n_qubits, '0');
  for (std::size_t q = 0; q < n_qubits; ++q)
    if ((x >> q) & 1u) s[q] = '1';
  return s;
}

inline Word parse_register_bitstring(const std::string& s) {
  if (s.size() > 64) throw Error(ErrorCode::InvalidArgument, "register bitstring longer than 64 bits");
  Word x = 0;
  for (std::size_t q = 0; q < s.size(); ++q) {
    if (s[q] != '0' && s[q] != '1') throw Error(ErrorCode::InvalidArgument, "non-binary character in '" + s + "'");
    if (s[q] == '1') x |= Word{1} << q;
  }
  return x;
}

namespace detail {

template <class T>
T field(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorCode::ConfigParseError, what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ConfigParseError, what + ": field '" + std::string(key) + "' has the wrong type");
  }
}

}  // namespace detail

inline Json to_json(const Wavefunction& psi) {
  Json dets = Json::array();
  for (std::size_t k = 0; k < psi.size(); ++k)
    dets.push_back({{"bitstring", to_bitstring(psi.dets[k], psi.n_orbitals)}, {"coefficient", psi.coeffs[k]}});
  return {{"n_orbitals", psi.n_orbitals}, {"energy", psi.energy}, {"determinants", std::move(dets)}};
}

inline Wavefunction wavefunction_from_json(const Json& j) {
  const std::string what = "wavefunction";
  Wavefunction psi;
  psi.n_orbitals = detail::field<std::size_t>(j, "n_orbitals", what);
  psi.energy = detail::field<double>(j, "energy", what);
  const auto dets = detail::field<Json>(j, "determinants", what);
  if (!dets.is_array()) throw Error(ErrorCode::ConfigParseError, what + ": 'determinants' must be an array");
  for (const auto& e : dets) {
    const auto bits = detail::field<std::string>(e, "bitstring", what);
    if (bits.size() != 2 * psi.n_orbitals)
      throw Error(ErrorCode::ShapeMismatch, what + ": bitstring '" + bits + "' does not have 2*n_orbitals bits");
    psi.dets.push_back(from_bitstring(bits));
    psi.coeffs.push_back(detail::field<double>(e, "coefficient", what));
  }
  return psi;
}

inline Json to_json(const Gate& g) {
  Json j{{"kind", to_string(g.kind)}, {"qubits", g.qubits}};
  j["param_slot"] = g.param_slot ? Json(*g.param_slot) : Json(nullptr);
  if (g.kind == GateKind::ExcitationRotation || g.kind == GateKind::OrbitalRotation) {
    j["annihilated"] = g.annihilated;
    j["created"] = g.created;
    j["sign"] = g.sign;
  }
  if (g.kind == GateKind::JastrowPhase) j["angle"] = g.angle;
  if (g.kind == GateKind::BasisRotationLayer) {
    Json net = Json::array();
    for (const auto& s : g.network) net.push_back({s.p, s.q, s.angle});
    j["network"] = std::move(net);
  }
  return j;
}

inline GateKind gate_kind_from_string(const std::string& s) {
  for (auto k : {GateKind::ExcitationRotation, GateKind::OrbitalRotation, GateKind::JastrowPhase,
                 GateKind::BasisRotationLayer})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::ConfigParseError, "unknown gate kind '" + s + "'");
}

inline Json circuit_stats_json(const Circuit& c) {
  const auto st = circuit_stats(c);
  return {{"qubits", st.qubits}, {"gates", st.gates},     {"parameters", st.parameters},
          {"depth", st.depth},   {"singles", st.singles}, {"doubles", st.doubles}};
}

/// Gate list, register layout and, if given, the full-register reference the circuit starts from.
inline Json to_json(const Circuit& c, std::optional<Word> reference = std::nullopt) {
  Json gates = Json::array();
  for (const auto& g : c.gates) gates.push_back(to_json(g));
  Json j{{"n_qubits", c.n_qubits}, {"n_params", c.n_params}, {"layers", c.layers}};
  if (!c.support.empty()) {
    j["support"] = c.support;
    j["full_qubits"] = c.full_qubits;
    j["frozen"] = register_bitstring(c.frozen, c.full_qubits);
  }
  if (reference) j["reference"] = register_bitstring(*reference, c.support.empty() ? c.n_qubits : c.full_qubits);
  j["stats"] = circuit_stats_json(c);
  j["gates"] = std::move(gates);
  return j;
}

inline Circuit circuit_from_json(const Json& j) {
  const std::string what = "circuit";
  Circuit c;
  c.n_qubits = detail::field<std::size_t>(j, "n_qubits", what);
  c.n_params = detail::field<std::size_t>(j, "n_params", what);
  c.layers = j.value("layers", std::size_t{1});
  if (j.contains("support")) {
    c.support = detail::field<std::vector<std::size_t>>(j, "support", what);
    c.full_qubits = detail::field<std::size_t>(j, "full_qubits", what);
    c.frozen = parse_register_bitstring(detail::field<std::string>(j, "frozen", what));
  }
  for (const auto& e : detail::field<Json>(j, "gates", what)) {
    Gate g;
    g.kind = gate_kind_from_string(detail::field<std::string>(e, "kind", what));
    g.qubits = detail::field<std::vector<std::size_t>>(e, "qubits", what);
    if (e.contains("param_slot") && !e["param_slot"].is_null()) g.param_slot = e["param_slot"].get<std::size_t>();
    if (g.param_slot && *g.param_slot >= c.n_params)
      throw Error(ErrorCode::ParamCountMismatch, what + ": parameter slot out of range");
    g.annihilated = e.value("annihilated", std::vector<std::size_t>{});
    g.created = e.value("created", std::vector<std::size_t>{});
    g.sign = e.value("sign", 1);
    g.angle = e.value("angle", 0.0);
    if (e.contains("network"))
      for (const auto& s : e["network"]) g.network.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(), s.at(2).get<double>()});
    for (auto q : g.qubits)
      if (q >= c.n_qubits) throw Error(ErrorCode::IndexOutOfRange, what + ": gate qubit out of range");
    c.gates.push_back(std::move(g));
  }
  return c;
}

inline Json to_json(const NoiseModel& m) {
  Json j{{"depolarizing_p", m.depolarizing_p}, {"effective_p", m.effective_p()}};
  j["per_gate_pg"] = m.per_gate_pg ? Json(*m.per_gate_pg) : Json(nullptr);
  j["n_2q"] = m.n_2q;
  j["readout_eps0"] = m.readout_eps0;
  j["readout_eps1"] = m.readout_eps1;
  return j;
}

inline Json to_json(const SampleCounts& sc) {
  Json counts = Json::object();
  for (const auto& [x, n] : sc.counts) counts[register_bitstring(x, sc.n_qubits)] = n;
  return {{"n_qubits", sc.n_qubits}, {"total_shots", sc.total_shots}, {"seed", sc.seed},
          {"noise", to_json(sc.noise)},  {"unique", sc.counts.size()},    {"counts", std::move(counts)}};
}

inline SampleCounts counts_from_json(const Json& j) {
  const std::string what = "counts";
  SampleCounts sc;
  sc.n_qubits = detail::field<std::size_t>(j, "n_qubits", what);
  sc.total_shots = detail::field<std::uint64_t>(j, "total_shots", what);
  sc.seed = j.value("seed", std::uint64_t{0});
  for (const auto& [k, v] : detail::field<Json>(j, "counts", what).items()) {
    if (k.size() != sc.n_qubits) throw Error(ErrorCode::ShapeMismatch, what + ": bitstring '" + k + "' has the wrong length");
    sc.counts[parse_register_bitstring(k)] = v.get<std::uint64_t>();
  }
  return sc;
}

/// "bitstring,count,frequency" rows, most frequent first.
inline std::string counts_csv(const SampleCounts& sc) {
  std::vector<std::pair<Word, std::uint64_t>> rows(sc.counts.begin(), sc.counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string out = "bitstring,count,frequency\n";
  const double total = static_cast<double>(std::max<std::uint64_t>(sc.sum(), 1));
  for (const auto& [x, n] : rows) {
    char buf[32];
    const auto end = std::to_chars(buf, buf + sizeof buf, static_cast<double>(n) / total).ptr;
    out += register_bitstring(x, sc.n_qubits) + "," + std::to_string(n) + "," + std::string(buf, end) + "\n";
  }
  return out;
}

inline Json to_json(const BoundReport& b) {
  auto opt = [](const auto& v) { return v ? Json(*v) : Json(nullptr); };
  return {{"p", b.p},
          {"truncation_bound", b.truncation_bound},
          {"zero_weight", b.zero_weight},
          {"epsilon_M", b.epsilon_m},
          {"Q_R_lower", b.q_r_lower},
          {"energy_bound_confident", b.energy_bound_confident},
          {"selection_failure", opt(b.selection_failure)},
          {"required_shots", opt(b.required_shots)},
          {"expected_error", opt(b.expected_error)},
          {"direct_noise_bias", b.direct_noise_bias},
          {"P_u", opt(b.p_u)},
          {"log_P_u", opt(b.log_p_u)},
          {"N_g_max", opt(b.n_g_max)},
          {"zeta_R", b.zeta_r},
          {"zeta_R_assumed_zero", b.zeta_assumed_zero}};
}

inline Json to_json(const AnalysisReport& r, std::size_t n_orbitals) {
  Json labels = Json::array();
  for (std::size_t i = 0; i < 2 * n_orbitals; ++i) labels.push_back(spin_orbital_label(i, n_orbitals));
  Json mi = Json::array();
  for (Eigen::Index i = 0; i < r.mi.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < r.mi.cols(); ++j) row.push_back(r.mi(i, j));
    mi.push_back(std::move(row));
  }
  return {{"spin_orbitals", std::move(labels)},
          {"occupations", r.occupations},
          {"entropies", r.entropies},
          {"max_entropy", r.entropies.empty() ? 0.0 : *std::max_element(r.entropies.begin(), r.entropies.end())},
          {"mutual_information", std::move(mi)},
          {"rank_histogram", r.rank_histogram}};
}

}  // namespace qsci
