#pragma once

/**
 * @file fcidump.hpp
 * @brief One- and two-electron integrals and the Molpro FCIDUMP reader/writer.
 *
 * Two-electron integrals are stored in chemist notation (pq|rs). Every
 * index tuple is folded onto a canonical representative of its 8-element
 * permutation class, so symmetry holds by construction:
 *
 *   (pq|rs) = (qp|rs) = (pq|sr) = (qp|sr) = (rs|pq) = (sr|pq) = (rs|qp) = (sr|qp)
 *
 * All indices are 0-based in memory and 1-based in files.
 */

#include <qsci/error.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qsci {

/// Index of the unordered pair {p, q} in the packed lower triangle.
constexpr std::size_t pair_index(std::size_t p, std::size_t q) noexcept {
  return p >= q ? p * (p + 1) / 2 + q : q * (q + 1) / 2 + p;
}

/// Canonical slot for (pq|rs) under the 8-fold permutation group.
constexpr std::size_t canonical_index(std::size_t p, std::size_t q, std::size_t r,
                                      std::size_t s) noexcept {
  return pair_index(pair_index(p, q), pair_index(r, s));
}

class IntegralTable {
 public:
  static constexpr std::size_t max_orbitals = 64;

  IntegralTable() = default;

  IntegralTable(std::size_t n_orbitals, int n_electrons, int ms2)
      : n_orbitals_(n_orbitals), n_electrons_(n_electrons), ms2_(ms2) {
    if (n_orbitals == 0 || n_orbitals > max_orbitals)
      throw Error(ErrorCode::InvalidArgument,
                  "orbital count must be in [1, 64], got " + std::to_string(n_orbitals));
    if (n_electrons < 0 || n_electrons > 2 * static_cast<int>(n_orbitals))
      throw Error(ErrorCode::InvalidArgument, "electron count out of range");
    if ((n_electrons + ms2) % 2 != 0 || std::abs(ms2) > n_electrons)
      throw Error(ErrorCode::InvalidArgument, "MS2 inconsistent with electron count");
    h_.assign(n_orbitals * n_orbitals, 0.0);
    const std::size_t npair = n_orbitals * (n_orbitals + 1) / 2;
    g_.assign(npair * (npair + 1) / 2, 0.0);
  }

  std::size_t n_orbitals() const noexcept { return n_orbitals_; }
  int n_electrons() const noexcept { return n_electrons_; }
  int ms2() const noexcept { return ms2_; }
  int n_alpha() const noexcept { return (n_electrons_ + ms2_) / 2; }
  int n_beta() const noexcept { return (n_electrons_ - ms2_) / 2; }

  double core_energy() const noexcept { return core_energy_; }
  void set_core_energy(double e) noexcept { core_energy_ = e; }

  double h(std::size_t p, std::size_t q) const noexcept { return h_[p * n_orbitals_ + q]; }
  void set_h(std::size_t p, std::size_t q, double v) noexcept {
    h_[p * n_orbitals_ + q] = v;
    h_[q * n_orbitals_ + p] = v;
  }

  /// (pq|rs); zero for tuples that were never set.
  double g(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const noexcept {
    return g_[canonical_index(p, q, r, s)];
  }
  void set_g(std::size_t p, std::size_t q, std::size_t r, std::size_t s, double v) noexcept {
    g_[canonical_index(p, q, r, s)] = v;
  }

  /// Point-group labels are carried for round-tripping only.
  const std::vector<int>& orbsym() const noexcept { return orbsym_; }
  void set_orbsym(std::vector<int> sym) { orbsym_ = std::move(sym); }
  int isym() const noexcept { return isym_; }
  void set_isym(int isym) noexcept { isym_ = isym; }

  std::size_t count_nonzero_h() const noexcept {
    std::size_t n = 0;
    for (std::size_t p = 0; p < n_orbitals_; ++p)
      for (std::size_t q = 0; q <= p; ++q) n += h(p, q) != 0.0;
    return n;
  }
  std::size_t count_nonzero_g() const noexcept {
    return static_cast<std::size_t>(std::count_if(g_.begin(), g_.end(), [](double v) { return v != 0.0; }));
  }

  /// Calls f(p, q, r, s, value) once per nonzero canonical class, with p>=q, r>=s, pq>=rs.
  template <class F>
  void for_each_g(F&& f) const {
    const std::size_t n = n_orbitals_;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q <= p; ++q)
        for (std::size_t r = 0; r <= p; ++r)
          for (std::size_t s = 0; s <= r; ++s) {
            if (pair_index(r, s) > pair_index(p, q)) continue;
            const double v = g(p, q, r, s);
            if (v != 0.0) f(p, q, r, s, v);
          }
  }

  /// Field-wise comparison within an absolute tolerance.
  bool approx_equal(const IntegralTable& other, double tol = 1e-12) const noexcept {
    if (n_orbitals_ != other.n_orbitals_ || n_electrons_ != other.n_electrons_ || ms2_ != other.ms2_)
      return false;
    if (std::abs(core_energy_ - other.core_energy_) > tol) return false;
    for (std::size_t i = 0; i < h_.size(); ++i)
      if (std::abs(h_[i] - other.h_[i]) > tol) return false;
    for (std::size_t i = 0; i < g_.size(); ++i)
      if (std::abs(g_[i] - other.g_[i]) > tol) return false;
    return true;
  }

 private:
  std::size_t n_orbitals_ = 0;
  int n_electrons_ = 0;
  int ms2_ = 0;
  double core_energy_ = 0.0;
  std::vector<double> h_;
  std::vector<double> g_;
  std::vector<int> orbsym_;
  int isym_ = 1;
};

namespace detail {

inline std::string to_upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline bool parse_double(std::string token, double& out) {
  for (auto& c : token)
    if (c == 'D' || c == 'd') c = 'E';
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0' && std::isfinite(out);
}

inline bool parse_int(const std::string& token, long& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtol(begin, &end, 10);
  return end != begin && *end == '\0';
}

inline bool looks_numeric(std::string_view line) {
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }
  return false;
}

struct HeaderFields {
  long norb = -1;
  long nelec = -1;
  long ms2 = 0;
  bool has_ms2 = false;
  long isym = 1;
  std::vector<int> orbsym;
};

inline HeaderFields parse_header(const std::string& text, std::size_t line) {
  std::string cleaned = text;
  for (auto& c : cleaned)
    if (c == ',' || c == '/') c = ' ';
  std::istringstream in(cleaned);
  HeaderFields fields;
  std::string token, key;
  while (in >> token) {
    const std::string upper = to_upper(token);
    if (upper == "&FCI" || upper == "&END" || upper == "$FCI" || upper == "$END") continue;
    std::string value;
    if (const auto eq = upper.find('='); eq != std::string::npos) {
      key = upper.substr(0, eq);
      value = token.substr(eq + 1);
      if (key.starts_with("&FCI")) key = key.substr(4);
      if (value.empty()) continue;
    } else {
      value = token;
    }
    long v = 0;
    if (!parse_int(value, v)) {
      if (key == "NORB" || key == "NELEC" || key == "MS2")
        throw ParseError(ErrorCode::MalformedHeader, line, "non-integer value for " + key);
      continue;
    }
    if (key == "NORB") fields.norb = v;
    else if (key == "NELEC") fields.nelec = v;
    else if (key == "MS2") { fields.ms2 = v; fields.has_ms2 = true; }
    else if (key == "ISYM") fields.isym = v;
    else if (key == "ORBSYM") fields.orbsym.push_back(static_cast<int>(v));
  }
  return fields;
}

}  // namespace detail

/**
 * Parse FCIDUMP text. Integrals not listed default to zero. Symmetry-equivalent
 * duplicates that disagree by more than 1e-10 keep the last value and append
 * a message to @p warnings when provided.
 */
inline IntegralTable parse_fcidump(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };

  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(std::move(l));
  }
  std::size_t first = 0;
  while (first < lines.size() &&
         lines[first].find_first_not_of(" \t") == std::string::npos)
    ++first;
  if (first == lines.size()) throw ParseError(ErrorCode::EmptyInput, 1, "no content");

  if (detail::to_upper(lines[first]).find("FCI") == std::string::npos)
    throw ParseError(ErrorCode::MalformedHeader, first + 1, "expected &FCI namelist");

  // Header runs to &END or '/', or to the first numeric line when unterminated.
  std::string header;
  std::size_t body = first;
  bool terminated = false;
  for (; body < lines.size(); ++body) {
    const std::string upper = detail::to_upper(lines[body]);
    if (body > first && detail::looks_numeric(lines[body]) &&
        lines[body].find_first_of(",=") == std::string::npos)
      break;
    header += ' ' + lines[body];
    const auto trimmed_end = upper.find_last_not_of(" \t");
    if (upper.find("&END") != std::string::npos || upper.find("$END") != std::string::npos ||
        (trimmed_end != std::string::npos && upper[trimmed_end] == '/')) {
      terminated = true;
      ++body;
      break;
    }
  }
  if (!terminated) warn("header not terminated by &END; assuming it ends before line " +
                        std::to_string(body + 1));

  const auto fields = detail::parse_header(header, first + 1);
  if (fields.norb <= 0) throw ParseError(ErrorCode::MalformedHeader, first + 1, "missing NORB");
  if (fields.nelec < 0) throw ParseError(ErrorCode::MalformedHeader, first + 1, "missing NELEC");
  if (!fields.has_ms2) warn("MS2 missing from header; assuming 0");
  if (fields.norb > static_cast<long>(IntegralTable::max_orbitals))
    throw ParseError(ErrorCode::MalformedHeader, first + 1, "NORB exceeds 64");

  IntegralTable table;
  try {
    table = IntegralTable(static_cast<std::size_t>(fields.norb), static_cast<int>(fields.nelec),
                          static_cast<int>(fields.ms2));
  } catch (const Error& e) {
    throw ParseError(ErrorCode::MalformedHeader, first + 1, e.what());
  }
  table.set_orbsym(fields.orbsym);
  table.set_isym(static_cast<int>(fields.isym));

  const auto norb = fields.norb;
  const std::size_t n = static_cast<std::size_t>(norb);
  std::vector<char> g_seen((n * (n + 1) / 2) * (n * (n + 1) / 2 + 1) / 2, 0);
  std::vector<char> h_seen(n * (n + 1) / 2, 0);
  bool core_seen = false;

  auto check_duplicate = [&](char& seen, double old_value, double new_value, std::size_t line) {
    if (seen && std::abs(old_value - new_value) > 1e-10)
      warn("line " + std::to_string(line) + ": symmetry-equivalent entry disagrees with earlier value " +
           std::to_string(old_value) + "; keeping the later value");
    seen = 1;
  };

  for (std::size_t i = body; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::istringstream ls(lines[i]);
    std::vector<std::string> tokens;
    for (std::string t; ls >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    if (tokens.size() != 5)
      throw ParseError(ErrorCode::NonNumericValue, line_no,
                       "expected 'value i j k l', got " + std::to_string(tokens.size()) + " fields");
    double value = 0.0;
    if (!detail::parse_double(tokens[0], value))
      throw ParseError(ErrorCode::NonNumericValue, line_no, "cannot parse value '" + tokens[0] + "'");
    long idx[4];
    for (int k = 0; k < 4; ++k) {
      if (!detail::parse_int(tokens[k + 1], idx[k]))
        throw ParseError(ErrorCode::NonNumericValue, line_no, "cannot parse index '" + tokens[k + 1] + "'");
      if (idx[k] < 0 || idx[k] > norb)
        throw ParseError(ErrorCode::IndexOutOfRange, line_no,
                         "index " + std::to_string(idx[k]) + " outside [1, " + std::to_string(norb) + "]");
    }
    const auto [p, q, r, s] = idx;
    if (p > 0 && q > 0 && r > 0 && s > 0) {
      const auto key = canonical_index(p - 1, q - 1, r - 1, s - 1);
      check_duplicate(g_seen[key], table.g(p - 1, q - 1, r - 1, s - 1), value, line_no);
      table.set_g(p - 1, q - 1, r - 1, s - 1, value);
    } else if (p > 0 && q > 0 && r == 0 && s == 0) {
      check_duplicate(h_seen[pair_index(p - 1, q - 1)], table.h(p - 1, q - 1), value, line_no);
      table.set_h(p - 1, q - 1, value);
    } else if (p == 0 && q == 0 && r == 0 && s == 0) {
      char seen = core_seen ? 1 : 0;
      check_duplicate(seen, table.core_energy(), value, line_no);
      core_seen = true;
      table.set_core_energy(value);
    } else if (p > 0 && q == 0 && r == 0 && s == 0) {
      // Orbital energy line; not needed for CI.
    } else {
      throw ParseError(ErrorCode::IndexOutOfRange, line_no, "unsupported index pattern");
    }
  }
  return table;
}

inline IntegralTable parse_fcidump(std::string_view text, std::vector<std::string>* warnings = nullptr) {
  std::istringstream in{std::string(text)};
  return parse_fcidump(in, warnings);
}

inline IntegralTable read_fcidump(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_fcidump(in, warnings);
}

/// Serialize with 17 significant digits so parse(serialize(t)) reproduces t exactly.
inline std::string serialize_fcidump(const IntegralTable& t) {
  std::ostringstream out;
  out << "&FCI NORB=" << t.n_orbitals() << ",NELEC=" << t.n_electrons() << ",MS2=" << t.ms2() << ",\n";
  out << "  ORBSYM=";
  for (std::size_t p = 0; p < t.n_orbitals(); ++p)
    out << (p < t.orbsym().size() ? t.orbsym()[p] : 1) << ',';
  out << "\n  ISYM=" << t.isym() << ",\n&END\n";
  char buf[96];
  auto line = [&](double v, std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    std::snprintf(buf, sizeof buf, "%24.16e %4zu %4zu %4zu %4zu\n", v, i, j, k, l);
    out << buf;
  };
  t.for_each_g([&](std::size_t p, std::size_t q, std::size_t r, std::size_t s, double v) {
    line(v, p + 1, q + 1, r + 1, s + 1);
  });
  for (std::size_t p = 0; p < t.n_orbitals(); ++p)
    for (std::size_t q = 0; q <= p; ++q)
      if (t.h(p, q) != 0.0) line(t.h(p, q), p + 1, q + 1, 0, 0);
  line(t.core_energy(), 0, 0, 0, 0);
  return out.str();
}

}  // namespace qsci
