#pragma once

/**
 * @file hamiltonian.hpp
 * @brief Slater-Condon matrix elements and sparse subspace Hamiltonians.
 *
 * H = sum_pq h_pq a+_p a_q + 1/2 sum_pqrs (pq|rs) a+_p a+_r a_s a_q over spin
 * orbitals, with spin-free spatial integrals from an IntegralTable. The core
 * energy is kept out of every matrix and added only when reporting energies.
 */

#include <qsci/determinant.hpp>
#include <qsci/fcidump.hpp>
#include <qsci/parallel.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace qsci {

namespace detail {

/// Spin-orbital chemist integral (pq|rs); zero unless spin(p)=spin(q) and spin(r)=spin(s).
inline double g_so(const IntegralTable& t, std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
  const std::size_t n = t.n_orbitals();
  if ((p < n) != (q < n) || (r < n) != (s < n)) return 0.0;
  return t.g(p % n, q % n, r % n, s % n);
}

inline double h_so(const IntegralTable& t, std::size_t p, std::size_t q) {
  const std::size_t n = t.n_orbitals();
  if ((p < n) != (q < n)) return 0.0;
  return t.h(p % n, q % n);
}

/// Fixed-capacity list of spin-orbital indices, avoids heap traffic in hot loops.
struct IndexList {
  std::array<std::size_t, 128> idx{};
  std::size_t size = 0;
  void push(std::size_t k) noexcept { idx[size++] = k; }
  std::span<const std::size_t> span() const noexcept { return {idx.data(), size}; }
};

inline IndexList occupied(const Determinant& d, std::size_t n) {
  IndexList out;
  for (Word a = d.alpha; a; a &= a - 1) out.push(static_cast<std::size_t>(std::countr_zero(a)));
  for (Word b = d.beta; b; b &= b - 1) out.push(n + static_cast<std::size_t>(std::countr_zero(b)));
  return out;
}

inline IndexList set_bits(Word alpha, Word beta, std::size_t n) { return occupied({alpha, beta}, n); }

}  // namespace detail

/// <D|H|D> without core energy.
inline double diagonal_element(const Determinant& d, const IntegralTable& t) {
  const std::size_t n = t.n_orbitals();
  const auto occ = detail::occupied(d, n);
  double e = 0.0;
  for (std::size_t a = 0; a < occ.size; ++a) {
    const std::size_t i = occ.idx[a];
    e += detail::h_so(t, i, i);
    for (std::size_t b = 0; b < a; ++b) {
      const std::size_t j = occ.idx[b];
      e += detail::g_so(t, i, i, j, j) - detail::g_so(t, i, j, j, i);
    }
  }
  return e;
}

/**
 * <a|H|b> by the Slater-Condon rules, without core energy. Pairs differing by
 * more than two spin-orbital substitutions return exactly 0 without touching
 * the integrals.
 */
inline double slater_condon(const Determinant& a, const Determinant& b, const IntegralTable& t) {
  const int rank = excitation_rank(a, b);
  if (rank > 2) return 0.0;
  if (rank == 0) return diagonal_element(a, t);
  if (a.n_alpha() != b.n_alpha() || a.n_beta() != b.n_beta()) return 0.0;

  const std::size_t n = t.n_orbitals();
  // Excitation b -> a: holes are occupied in b only, particles in a only.
  const auto holes = detail::set_bits(b.alpha & ~a.alpha, b.beta & ~a.beta, n);
  const auto parts = detail::set_bits(a.alpha & ~b.alpha, a.beta & ~b.beta, n);
  Determinant work = b;
  const int sign = apply_ladder(work, n, holes.span(), parts.span());

  if (rank == 1) {
    const std::size_t i = holes.idx[0], p = parts.idx[0];
    double v = detail::h_so(t, p, i);
    const auto occ = detail::occupied(b, n);
    for (std::size_t k = 0; k < occ.size; ++k) {
      const std::size_t j = occ.idx[k];
      v += detail::g_so(t, p, i, j, j) - detail::g_so(t, p, j, j, i);
    }
    return sign * v;
  }
  const std::size_t i = holes.idx[0], j = holes.idx[1];
  const std::size_t p = parts.idx[0], q = parts.idx[1];
  // <pq||ij> for the operator a+_p a+_q a_j a_i.
  return sign * (detail::g_so(t, p, i, q, j) - detail::g_so(t, p, j, q, i));
}

/// Sparse symmetric Hamiltonian over an ordered determinant list (CSR, both triangles).
class SubspaceMatrix {
 public:
  SubspaceMatrix() = default;

  std::size_t dim() const noexcept { return dets_.size(); }
  const std::vector<Determinant>& dets() const noexcept { return dets_; }
  double core_energy() const noexcept { return core_energy_; }
  std::size_t n_orbitals() const noexcept { return n_orbitals_; }
  const std::vector<double>& diagonal() const noexcept { return diag_; }
  std::size_t nonzeros() const noexcept { return values_.size() + diag_.size(); }

  /// y = H x (core energy excluded).
  void multiply(std::span<const double> x, std::span<double> y) const {
    parallel_for_blocks(dim(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        double acc = diag_[i] * x[i];
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * x[cols_[k]];
        y[i] = acc;
      }
    });
  }

  double element(std::size_t i, std::size_t j) const {
    if (i == j) return diag_[i];
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    for (std::size_t i = 0; i < dim(); ++i) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag_[i];
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols_[k])) = values_[k];
    }
    return m;
  }

  /// Build from explicit upper-triangle entries (i < j). Used by the builders and by tests.
  static SubspaceMatrix from_entries(std::vector<Determinant> dets, std::size_t n_orbitals, double core_energy,
                                     std::vector<double> diag,
                                     const std::vector<std::vector<std::pair<std::size_t, double>>>& upper) {
    SubspaceMatrix m;
    m.dets_ = std::move(dets);
    m.n_orbitals_ = n_orbitals;
    m.core_energy_ = core_energy;
    m.diag_ = std::move(diag);
    const std::size_t n = m.dets_.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [j, v] : upper[i]) {
        rows[i].emplace_back(j, v);
        rows[j].emplace_back(i, v);
      }
    m.row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(rows[i].begin(), rows[i].end());
      m.row_ptr_[i + 1] = m.row_ptr_[i] + rows[i].size();
    }
    m.cols_.reserve(m.row_ptr_[n]);
    m.values_.reserve(m.row_ptr_[n]);
    for (const auto& row : rows)
      for (const auto& [j, v] : row) {
        m.cols_.push_back(j);
        m.values_.push_back(v);
      }
    return m;
  }

  /// Dense symmetric matrix with explicit determinant labels (tests, small demos).
  static SubspaceMatrix from_dense(const Eigen::MatrixXd& h, double core_energy = 0.0) {
    const std::size_t n = static_cast<std::size_t>(h.rows());
    std::vector<Determinant> dets(n);
    for (std::size_t i = 0; i < n; ++i) dets[i] = {Word{i}, 0};
    std::vector<double> diag(n);
    std::vector<std::vector<std::pair<std::size_t, double>>> upper(n);
    for (std::size_t i = 0; i < n; ++i) {
      diag[i] = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
      for (std::size_t j = i + 1; j < n; ++j) {
        const double v = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (v != 0.0) upper[i].emplace_back(j, v);
      }
    }
    return from_entries(std::move(dets), 64, core_energy, std::move(diag), upper);
  }

 private:
  std::vector<Determinant> dets_;
  std::size_t n_orbitals_ = 0;
  double core_energy_ = 0.0;
  std::vector<double> diag_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

enum class BuildStrategy { Auto, Pairwise, Connections };

/// Calls f(c) for every spin-conserving single and double excitation c of d, each once.
template <class F>
void for_each_connected(const Determinant& d, std::size_t n, F&& f) {
  const Word full = low_mask(n);
  auto emit = [&](Word alpha, Word beta) { f(Determinant{alpha, beta}); };
  for (Word o = d.alpha; o; o &= o - 1) {
    const Word i = o & (0 - o);
    for (Word v = full & ~d.alpha; v; v &= v - 1) emit(d.alpha ^ i ^ (v & (0 - v)), d.beta);
  }
  for (Word o = d.beta; o; o &= o - 1) {
    const Word i = o & (0 - o);
    for (Word v = full & ~d.beta; v; v &= v - 1) emit(d.alpha, d.beta ^ i ^ (v & (0 - v)));
  }
  auto same = [&](Word occ, bool is_alpha) {
    const Word virt = full & ~occ;
    for (Word o1 = occ; o1; o1 &= o1 - 1) {
      const Word i = o1 & (0 - o1);
      for (Word o2 = o1 & (o1 - 1); o2; o2 &= o2 - 1) {
        const Word j = o2 & (0 - o2);
        for (Word v1 = virt; v1; v1 &= v1 - 1) {
          const Word a = v1 & (0 - v1);
          for (Word v2 = v1 & (v1 - 1); v2; v2 &= v2 - 1) {
            const Word b = v2 & (0 - v2);
            const Word next = occ ^ i ^ j ^ a ^ b;
            is_alpha ? emit(next, d.beta) : emit(d.alpha, next);
          }
        }
      }
    }
  };
  same(d.alpha, true);
  same(d.beta, false);
  for (Word oa = d.alpha; oa; oa &= oa - 1) {
    const Word i = oa & (0 - oa);
    for (Word va = full & ~d.alpha; va; va &= va - 1) {
      const Word na = d.alpha ^ i ^ (va & (0 - va));
      for (Word ob = d.beta; ob; ob &= ob - 1) {
        const Word j = ob & (0 - ob);
        for (Word vb = full & ~d.beta; vb; vb &= vb - 1) emit(na, d.beta ^ j ^ (vb & (0 - vb)));
      }
    }
  }
}

/**
 * Assemble H over `dets`. Pairwise mode screens every pair by excitation rank
 * before touching integrals; connection mode generates singles/doubles of
 * each row and looks them up, which scales to larger spaces.
 */
inline SubspaceMatrix build_subspace(const std::vector<Determinant>& dets, const IntegralTable& t,
                                     BuildStrategy strategy = BuildStrategy::Auto) {
  if (dets.empty()) throw Error(ErrorCode::InvalidArgument, "empty determinant list");
  const std::size_t n = dets.size();
  const std::size_t norb = t.n_orbitals();
  std::unordered_map<Determinant, std::size_t, DeterminantHash> index;
  index.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i)
    if (!index.emplace(dets[i], i).second)
      throw Error(ErrorCode::DuplicateDeterminant, "determinant " + to_bitstring(dets[i], norb) +
                                                       " appears more than once");

  if (strategy == BuildStrategy::Auto) strategy = n <= 2000 ? BuildStrategy::Pairwise : BuildStrategy::Connections;

  std::vector<double> diag(n);
  std::vector<std::vector<std::pair<std::size_t, double>>> upper(n);
  parallel_for_blocks(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      diag[i] = diagonal_element(dets[i], t);
      if (strategy == BuildStrategy::Pairwise) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (excitation_rank(dets[i], dets[j]) > 2) continue;
          const double v = slater_condon(dets[i], dets[j], t);
          if (v != 0.0) upper[i].emplace_back(j, v);
        }
      } else {
        for_each_connected(dets[i], norb, [&](const Determinant& c) {
          const auto it = index.find(c);
          if (it == index.end() || it->second <= i) return;
          const double v = slater_condon(dets[i], c, t);
          if (v != 0.0) upper[i].emplace_back(it->second, v);
        });
      }
    }
  });
  return SubspaceMatrix::from_entries(dets, norb, t.core_energy(), std::move(diag), upper);
}

/// Normalized CI vector over a determinant list. Energy includes the core energy.
struct Wavefunction {
  std::size_t n_orbitals = 0;
  std::vector<Determinant> dets;
  std::vector<double> coeffs;
  double energy = 0.0;

  std::size_t size() const noexcept { return dets.size(); }

  double norm() const noexcept {
    double s = 0.0;
    for (double c : coeffs) s += c * c;
    return std::sqrt(s);
  }

  void normalize() {
    const double nrm = norm();
    if (nrm == 0.0) throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero wavefunction");
    for (double& c : coeffs) c /= nrm;
  }

  /// Copy sorted by |c| descending, ties by determinant order.
  Wavefunction ranked() const {
    std::vector<std::size_t> order(size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ca = std::abs(coeffs[a]), cb = std::abs(coeffs[b]);
      if (ca != cb) return ca > cb;
      return dets[a] < dets[b];
    });
    Wavefunction out{n_orbitals, {}, {}, energy};
    out.dets.reserve(size());
    out.coeffs.reserve(size());
    for (auto i : order) {
      out.dets.push_back(dets[i]);
      out.coeffs.push_back(coeffs[i]);
    }
    return out;
  }

  /// Coefficient of d, zero when absent. Linear scan; build an index for bulk use.
  double coefficient(const Determinant& d) const noexcept {
    for (std::size_t i = 0; i < size(); ++i)
      if (dets[i] == d) return coeffs[i];
    return 0.0;
  }
};

/// Thrown when the iteration budget runs out; carries the best Ritz pair found.
class NoConvergence : public Error {
 public:
  NoConvergence(Wavefunction best, double residual, std::size_t iterations)
      : Error(ErrorCode::NoConvergence, "Davidson stopped after " + std::to_string(iterations) +
                                            " iterations with residual " + std::to_string(residual)),
        best_(std::move(best)),
        residual_(residual) {}

  const Wavefunction& best() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Wavefunction best_;
  double residual_;
};

struct DavidsonOptions {
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  std::size_t max_subspace = 30;
  std::size_t restart_keep = 2;
  double level_shift = 1e-8;
  /// Problems at or below this dimension are solved densely.
  std::size_t dense_fallback_dim = 2000;
};

namespace detail {

inline void fix_sign(std::vector<double>& c) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < c.size(); ++i)
    if (std::abs(c[i]) > std::abs(c[imax])) imax = i;
  if (!c.empty() && c[imax] < 0)
    for (double& x : c) x = -x;
}

inline Wavefunction make_wavefunction(const SubspaceMatrix& m, std::vector<double> coeffs, double eigenvalue) {
  fix_sign(coeffs);
  Wavefunction wf{m.n_orbitals(), m.dets(), std::move(coeffs), eigenvalue + m.core_energy()};
  wf.normalize();
  return wf;
}

}  // namespace detail

inline Wavefunction dense_lowest(const SubspaceMatrix& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.to_dense());
  const Eigen::VectorXd v = es.eigenvectors().col(0);
  return detail::make_wavefunction(m, std::vector<double>(v.data(), v.data() + v.size()), es.eigenvalues()(0));
}

/**
 * Lowest eigenpair by Davidson iteration. The initial guess is the unit vector
 * on the lowest diagonal entry; corrections use the diagonal preconditioner
 * (D - theta)^-1 with denominators clamped to the level shift; the search
 * space restarts from the lowest `restart_keep` Ritz vectors when it reaches
 * `max_subspace`.
 */
inline Wavefunction davidson_lowest(const SubspaceMatrix& m, const DavidsonOptions& opt = {}) {
  if (!(opt.tol > 0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  const std::size_t n = m.dim();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty matrix");
  if (n <= opt.dense_fallback_dim) return dense_lowest(m);

  using Eigen::Index;
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const auto& diag = m.diagonal();
  const Index N = static_cast<Index>(n);
  const std::size_t max_sub = std::max<std::size_t>(std::min(opt.max_subspace, n), 2);

  MatrixXd V(N, static_cast<Index>(max_sub));
  MatrixXd W(N, static_cast<Index>(max_sub));
  std::size_t k = 0;

  auto matvec = [&](std::size_t col) {
    m.multiply({V.col(static_cast<Index>(col)).data(), n}, {W.col(static_cast<Index>(col)).data(), n});
  };
  // Orthonormalize against the current basis (two passes of Gram-Schmidt).
  auto append = [&](VectorXd t) -> bool {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < k; ++j) t -= V.col(static_cast<Index>(j)).dot(t) * V.col(static_cast<Index>(j));
    const double nrm = t.norm();
    if (nrm < 1e-10) return false;
    V.col(static_cast<Index>(k)) = t / nrm;
    matvec(k);
    ++k;
    return true;
  };

  const std::size_t start =
      static_cast<std::size_t>(std::min_element(diag.begin(), diag.end()) - diag.begin());
  VectorXd guess = VectorXd::Zero(N);
  guess(static_cast<Index>(start)) = 1.0;
  append(guess);

  VectorXd x, hx;
  double theta = 0.0, rnorm = 0.0;
  for (std::size_t iter = 0; iter < opt.max_iter; ++iter) {
    const Index kk = static_cast<Index>(k);
    const MatrixXd T = V.leftCols(kk).transpose() * W.leftCols(kk);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (T + T.transpose()));
    theta = es.eigenvalues()(0);
    const VectorXd s = es.eigenvectors().col(0);
    x = V.leftCols(kk) * s;
    hx = W.leftCols(kk) * s;
    VectorXd r = hx - theta * x;
    rnorm = r.norm();
    if (rnorm <= opt.tol) {
      return detail::make_wavefunction(m, std::vector<double>(x.data(), x.data() + n), theta);
    }

    if (k == max_sub) {
      const std::size_t keep = std::clamp<std::size_t>(opt.restart_keep, 1, k - 1);
      const MatrixXd S = es.eigenvectors().leftCols(static_cast<Index>(keep));
      const MatrixXd Vn = V.leftCols(kk) * S;
      const MatrixXd Wn = W.leftCols(kk) * S;
      V.leftCols(static_cast<Index>(keep)) = Vn;
      W.leftCols(static_cast<Index>(keep)) = Wn;
      k = keep;
    }

    VectorXd t(N);
    for (Index i = 0; i < N; ++i) {
      double denom = diag[static_cast<std::size_t>(i)] - theta;
      if (std::abs(denom) < opt.level_shift) denom = denom < 0 ? -opt.level_shift : opt.level_shift;
      t(i) = r(i) / denom;
    }
    if (!append(std::move(t)) && !append(r)) {
      // Search space cannot grow: the residual lies in span(V) up to round-off.
      return detail::make_wavefunction(m, std::vector<double>(x.data(), x.data() + n), theta);
    }
  }
  throw NoConvergence(detail::make_wavefunction(m, std::vector<double>(x.data(), x.data() + n), theta), rnorm,
                      opt.max_iter);
}

/// Largest dimension handled by dense spectra.
inline constexpr std::size_t dense_cap = 3000;

/// Exact ground state over the full particle-conserving space of the table.
inline Wavefunction fci_oracle(const IntegralTable& t, std::uint64_t cap = default_space_cap,
                               const DavidsonOptions& opt = {}) {
  const auto space = enumerate_space(t.n_orbitals(), static_cast<std::size_t>(t.n_alpha()),
                                     static_cast<std::size_t>(t.n_beta()), cap);
  return davidson_lowest(build_subspace(space, t), opt);
}

/// (E_max - E_min) / 2 from the full spectrum of M.
inline double spectral_halfwidth(const SubspaceMatrix& m, std::size_t cap = dense_cap) {
  if (m.dim() > cap)
    throw Error(ErrorCode::TooLarge, "dimension " + std::to_string(m.dim()) + " exceeds dense cap " +
                                         std::to_string(cap) + "; supply the half-width externally");
  if (m.dim() == 1) return 0.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.to_dense(), Eigen::EigenvaluesOnly);
  return 0.5 * (es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff());
}

/// Energy (with core) of a single determinant.
inline double determinant_energy(const Determinant& d, const IntegralTable& t) {
  return diagonal_element(d, t) + t.core_energy();
}

/// <psi|H|psi> / <psi|psi> over the wavefunction's own determinant list, with core energy.
inline double rayleigh_quotient(const Wavefunction& psi, const IntegralTable& t) {
  const auto m = build_subspace(psi.dets, t);
  std::vector<double> hx(psi.size());
  m.multiply(psi.coeffs, hx);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    num += psi.coeffs[i] * hx[i];
    den += psi.coeffs[i] * psi.coeffs[i];
  }
  return num / den + t.core_energy();
}

/// Variational ground state over a chosen determinant subset (duplicates removed, order kept).
inline Wavefunction diagonalize_subset(std::vector<Determinant> dets, const IntegralTable& t,
                                       const DavidsonOptions& opt = {}) {
  std::unordered_map<Determinant, char, DeterminantHash> seen;
  std::vector<Determinant> unique;
  unique.reserve(dets.size());
  for (const auto& d : dets)
    if (seen.emplace(d, 1).second) unique.push_back(d);
  return davidson_lowest(build_subspace(unique, t), opt);
}

}  // namespace qsci
