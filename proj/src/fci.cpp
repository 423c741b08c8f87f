#include "qlr/fci.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qlr/constants.hpp"
#include "qlr/errors.hpp"
#include "qlr/rng.hpp"

#ifdef QLR_USE_OPENMP
#include <omp.h>
#endif

namespace qlr {

namespace {

// parity of occupied spin orbitals strictly between global indices m1 and m2
inline int parity_between(uint64_t amask, uint64_t bmask, int m1, int m2) {
    const int lo = std::min(m1, m2);
    const int hi = std::max(m1, m2);
    auto range_mask = [](int pmin, int pmax) -> uint64_t {
        if (pmax < pmin) return 0ull;
        return ((pmax >= 63) ? ~0ull : ((1ull << (pmax + 1)) - 1)) ^ ((1ull << pmin) - 1);
    };
    const uint64_t ar = range_mask((lo >> 1) + 1, (hi - 1) >> 1);
    const uint64_t br = range_mask((lo + 1) >> 1, (hi - 2) >> 1);
    const int count = std::popcount(amask & ar) + std::popcount(bmask & br);
    return (count & 1) ? -1 : 1;
}

inline int global_index(int p, bool beta) { return 2 * p + (beta ? 1 : 0); }

} // namespace

SectorOperator::SectorOperator(const Hamiltonian& H, BasisPtr basis,
                               std::size_t memory_budget_bytes)
    : H_(&H), basis_(std::move(basis)) {
    if (basis_->n_orbs() != H.n_orbs)
        throw DomainError("basis and Hamiltonian disagree on n_orbs");

    const int n = H.n_orbs;
    const Sector sec = basis_->sector();

    // single-excitation tables per spin string
    auto build_singles = [&](bool beta) {
        const std::size_t ns = beta ? basis_->n_beta_strings() : basis_->n_alpha_strings();
        std::vector<std::vector<StringSingle>> table(ns);
        for (std::size_t si = 0; si < ns; ++si) {
            const uint64_t mask = beta ? basis_->beta_string(si) : basis_->alpha_string(si);
            for (int p = 0; p < n; ++p) {
                if (!((mask >> p) & 1ull)) continue;
                for (int q = 0; q < n; ++q) {
                    if ((mask >> q) & 1ull) continue;
                    const uint64_t tmask = (mask ^ (1ull << p)) | (1ull << q);
                    const std::size_t tr =
                        beta ? basis_->beta_rank(tmask) : basis_->alpha_rank(tmask);
                    table[si].push_back({p, q, static_cast<uint32_t>(tr)});
                }
            }
        }
        return table;
    };
    alpha_singles_ = build_singles(false);
    beta_singles_ = build_singles(true);

    // diagonal
    const std::size_t dim = basis_->size();
    diag_.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        auto [amask, bmask] = basis_->det(i);
        double e = H.e_core;
        int occ[128];
        int nocc = 0;
        for (int p = 0; p < n; ++p) {
            if ((amask >> p) & 1ull) occ[nocc++] = 2 * p;
            if ((bmask >> p) & 1ull) occ[nocc++] = 2 * p + 1;
        }
        for (int a = 0; a < nocc; ++a) {
            const int p = occ[a] >> 1;
            e += H.h(p, p);
            for (int b = a + 1; b < nocc; ++b) {
                const int q = occ[b] >> 1;
                e += H.eri(p, p, q, q);
                if ((occ[a] & 1) == (occ[b] & 1)) e -= H.eri(p, q, q, p);
            }
        }
        diag_[static_cast<Eigen::Index>(i)] = e;
    }

    // size estimate for the explicit matrix
    const int na = sec.n_alpha, nb = sec.n_beta;
    const std::size_t sa = static_cast<std::size_t>(na) * (n - na);
    const std::size_t sb = static_cast<std::size_t>(nb) * (n - nb);
    const std::size_t c_aa = (na >= 2 && n - na >= 2)
                                 ? (static_cast<std::size_t>(na) * (na - 1) / 2) *
                                       (static_cast<std::size_t>(n - na) * (n - na - 1) / 2)
                                 : 0;
    const std::size_t c_bb = (nb >= 2 && n - nb >= 2)
                                 ? (static_cast<std::size_t>(nb) * (nb - 1) / 2) *
                                       (static_cast<std::size_t>(n - nb) * (n - nb - 1) / 2)
                                 : 0;
    const std::size_t nnz_per_row = 1 + sa + sb + c_aa + c_bb + sa * sb;
    estimated_bytes_ = dim * nnz_per_row * (sizeof(double) + sizeof(uint32_t)) +
                       (dim + 1) * sizeof(std::size_t);
    if (estimated_bytes_ <= memory_budget_bytes) {
        build_csr();
        explicit_ = true;
    }
}

void SectorOperator::enumerate_row(std::size_t row,
                                   const std::function<void(std::size_t, double)>& emit) const {
    const Hamiltonian& H = *H_;
    const int n = H.n_orbs;
    const std::size_t nb = basis_->n_beta_strings();
    const std::size_t ia = row / nb;
    const std::size_t ib = row % nb;
    const uint64_t amask = basis_->alpha_string(ia);
    const uint64_t bmask = basis_->beta_string(ib);

    emit(row, diag_[static_cast<Eigen::Index>(row)]);

    // occupied spin orbitals (both spins), used by the single-excitation sums
    int occ[128];
    int nocc = 0;
    for (int p = 0; p < n; ++p) {
        if ((amask >> p) & 1ull) occ[nocc++] = 2 * p;
        if ((bmask >> p) & 1ull) occ[nocc++] = 2 * p + 1;
    }

    auto single_element = [&](int p, int q, bool beta) {
        // <D'|H|D> for the excitation p->q within one spin, D' differing from
        // D only there; sum over the remaining occupied spin orbitals
        double f = H.h(p, q);
        const int mp = global_index(p, beta);
        for (int a = 0; a < nocc; ++a) {
            if (occ[a] == mp) continue;
            const int r = occ[a] >> 1;
            f += H.eri(p, q, r, r);
            if ((occ[a] & 1) == (beta ? 1 : 0)) f -= H.eri(p, r, r, q);
        }
        return f;
    };

    // alpha singles
    for (const auto& s : alpha_singles_[ia]) {
        const double f = single_element(s.p, s.q, false);
        const int sgn = parity_between(amask, bmask, 2 * s.p, 2 * s.q);
        emit(static_cast<std::size_t>(s.target) * nb + ib, sgn * f);
    }
    // beta singles
    for (const auto& s : beta_singles_[ib]) {
        const double f = single_element(s.p, s.q, true);
        const int sgn = parity_between(amask, bmask, 2 * s.p + 1, 2 * s.q + 1);
        emit(ia * nb + s.target, sgn * f);
    }

    // same-spin doubles
    auto same_spin_doubles = [&](uint64_t mask, bool beta) {
        int occs[64], virts[64];
        int no = 0, nv = 0;
        for (int p = 0; p < n; ++p) {
            if ((mask >> p) & 1ull)
                occs[no++] = p;
            else
                virts[nv++] = p;
        }
        for (int a = 0; a < no; ++a)
            for (int b = a + 1; b < no; ++b)
                for (int c = 0; c < nv; ++c)
                    for (int d = c + 1; d < nv; ++d) {
                        const int i = occs[a], j = occs[b];
                        const int r = virts[c], s = virts[d];
                        // excite i->r then j->s with mask updates in between
                        uint64_t am = amask, bm = bmask;
                        uint64_t& m = beta ? bm : am;
                        int sign = parity_between(am, bm, global_index(i, beta),
                                                  global_index(r, beta));
                        m ^= (1ull << i) | (1ull << r);
                        sign *= parity_between(am, bm, global_index(j, beta),
                                               global_index(s, beta));
                        m ^= (1ull << j) | (1ull << s);
                        const double elem = H.eri(i, r, j, s) - H.eri(i, s, j, r);
                        if (elem == 0.0) continue;
                        const std::size_t col =
                            beta ? ia * nb + basis_->beta_rank(bm)
                                 : basis_->alpha_rank(am) * nb + ib;
                        emit(col, sign * elem);
                    }
    };
    same_spin_doubles(amask, false);
    same_spin_doubles(bmask, true);

    // opposite-spin doubles: one single per spin
    for (const auto& sa : alpha_singles_[ia]) {
        const int sgn_a = parity_between(amask, bmask, 2 * sa.p, 2 * sa.q);
        const uint64_t am = (amask ^ (1ull << sa.p)) | (1ull << sa.q);
        for (const auto& sb : beta_singles_[ib]) {
            const double elem = H.eri(sa.p, sa.q, sb.p, sb.q);
            if (elem == 0.0) continue;
            const int sgn_b = parity_between(am, bmask, 2 * sb.p + 1, 2 * sb.q + 1);
            emit(static_cast<std::size_t>(sa.target) * nb + sb.target,
                 sgn_a * sgn_b * elem);
        }
    }
}

void SectorOperator::build_csr() {
    const std::size_t dim = basis_->size();
    std::vector<std::vector<std::pair<uint32_t, double>>> rows(dim);
#ifdef QLR_USE_OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
    for (long long i = 0; i < static_cast<long long>(dim); ++i) {
        auto& r = rows[static_cast<std::size_t>(i)];
        enumerate_row(static_cast<std::size_t>(i), [&](std::size_t j, double v) {
            r.emplace_back(static_cast<uint32_t>(j), v);
        });
        std::sort(r.begin(), r.end());
    }
    row_ptr_.assign(dim + 1, 0);
    for (std::size_t i = 0; i < dim; ++i) row_ptr_[i + 1] = row_ptr_[i] + rows[i].size();
    cols_.resize(row_ptr_[dim]);
    vals_.resize(row_ptr_[dim]);
    for (std::size_t i = 0; i < dim; ++i) {
        std::size_t o = row_ptr_[i];
        for (const auto& [c, v] : rows[i]) {
            cols_[o] = c;
            vals_[o] = v;
            ++o;
        }
    }
}

void SectorOperator::row_kernel(std::size_t row, const double* x, double& acc) const {
    if (explicit_) {
        double s = 0.0;
        for (std::size_t o = row_ptr_[row]; o < row_ptr_[row + 1]; ++o)
            s += vals_[o] * x[cols_[o]];
        acc = s;
    } else {
        double s = 0.0;
        enumerate_row(row, [&](std::size_t j, double v) { s += v * x[j]; });
        acc = s;
    }
}

void SectorOperator::apply_serial(const double* x, double* y) const {
    const std::size_t dim = basis_->size();
    for (std::size_t i = 0; i < dim; ++i) row_kernel(i, x, y[i]);
}

void SectorOperator::apply(const double* x, double* y) const {
#ifdef QLR_USE_OPENMP
    const long long dim = static_cast<long long>(basis_->size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < dim; ++i) row_kernel(static_cast<std::size_t>(i), x, y[i]);
#else
    apply_serial(x, y);
#endif
}

Eigen::VectorXd SectorOperator::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(x.size());
    apply(x.data(), y.data());
    return y;
}

SectorOperator build_sector_matrix(const Hamiltonian& H, BasisPtr basis,
                                   std::size_t memory_budget_bytes) {
    return SectorOperator(H, std::move(basis), memory_budget_bytes);
}

namespace {

EigenSolution dense_solve(const SectorOperator& A, int k) {
    const std::size_t dim = A.dim();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i)
        A.enumerate_row(i, [&](std::size_t j, double v) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += v;
        });
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    EigenSolution sol;
    sol.sector = A.basis()->sector();
    sol.basis = A.basis();
    sol.dim = dim;
    sol.k_kept = k;
    sol.energies.assign(es.eigenvalues().data(), es.eigenvalues().data() + k);
    sol.vectors = es.eigenvectors().leftCols(k);
    return sol;
}

EigenSolution lanczos_solve(const SectorOperator& A, int k, uint64_t seed) {
    const std::size_t dim = A.dim();
    const double tol = 1e-10;
    const int m = static_cast<int>(
        std::min<std::size_t>(dim, std::max<std::size_t>(2 * k + 20, 60)));

    Eigen::MatrixXd V(static_cast<Eigen::Index>(dim), m);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);

    CounterRng rng(seed, 0xFC1);
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = rng.uniform_at(i) - 0.5;
    v.normalize();
    V.col(0) = v;

    int nkeep = 0;  // retained Ritz vectors after a thick restart
    Eigen::VectorXd resid_h;

    const int max_restarts = 600;
    for (int restart = 0; restart < max_restarts; ++restart) {
        // (re)build the projected matrix from column nkeep onward
        for (int j = nkeep; j < m; ++j) {
            Eigen::VectorXd w = A.apply(V.col(j));
            if (j == nkeep && nkeep > 0) {
                // arrow head coupling to the retained Ritz vectors
                for (int i = 0; i < nkeep; ++i) {
                    T(i, j) = T(j, i) = resid_h[i];
                    w -= resid_h[i] * V.col(i);
                }
            } else if (j > 0) {
                w -= T(j, j - 1) * V.col(j - 1);
            }
            const double alpha = V.col(j).dot(w);
            T(j, j) = alpha;
            w -= alpha * V.col(j);
            // full reorthogonalization, twice for safety
            for (int pass = 0; pass < 2; ++pass)
                w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
            const double beta = w.norm();
            if (j + 1 < m) {
                T(j, j + 1) = T(j + 1, j) = beta;
                if (beta < 1e-14) {
                    // invariant subspace hit; continue with a fresh direction
                    Eigen::VectorXd f(static_cast<Eigen::Index>(dim));
                    for (std::size_t i = 0; i < dim; ++i)
                        f[static_cast<Eigen::Index>(i)] =
                            rng.uniform_at(i, static_cast<uint32_t>(restart * m + j + 1)) - 0.5;
                    for (int pass = 0; pass < 2; ++pass)
                        f -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * f);
                    f.normalize();
                    V.col(j + 1) = f;
                    T(j, j + 1) = T(j + 1, j) = 0.0;
                } else {
                    V.col(j + 1) = w / beta;
                }
            } else {
                // final residual direction for the restart
                v = (beta > 1e-14) ? Eigen::VectorXd(w / beta) : w;
                resid_h.resize(m);
                resid_h.setZero();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(m, m));
                const Eigen::VectorXd& theta = es.eigenvalues();
                const Eigen::MatrixXd& S = es.eigenvectors();
                // residual norms: beta * |last row of S|
                Eigen::VectorXd res = beta * S.row(m - 1).cwiseAbs().transpose();
                bool done = true;
                for (int i = 0; i < k; ++i)
                    if (res[i] > tol * std::max(1.0, std::abs(theta[i]))) done = false;

                const int keep = std::min(m - 1, k + std::min(k, 12));
                Eigen::MatrixXd newV = V.leftCols(m) * S.leftCols(keep);
                V.leftCols(keep) = newV;
                T.setZero();
                for (int i = 0; i < keep; ++i) T(i, i) = theta[i];
                resid_h = beta * S.row(m - 1).head(keep).transpose();
                nkeep = keep;
                if (beta <= 1e-14) {
                    Eigen::VectorXd f(static_cast<Eigen::Index>(dim));
                    for (std::size_t i = 0; i < dim; ++i)
                        f[static_cast<Eigen::Index>(i)] =
                            rng.uniform_at(i, static_cast<uint32_t>(restart * m + m + 7)) - 0.5;
                    for (int pass = 0; pass < 2; ++pass)
                        f -= V.leftCols(keep) * (V.leftCols(keep).transpose() * f);
                    f.normalize();
                    v = f;
                    resid_h.setZero();
                }
                V.col(nkeep) = v;

                if (done) {
                    EigenSolution sol;
                    sol.sector = A.basis()->sector();
                    sol.basis = A.basis();
                    sol.dim = dim;
                    sol.k_kept = k;
                    sol.energies.assign(theta.data(), theta.data() + k);
                    sol.vectors = V.leftCols(k);
                    for (int i = 0; i < k; ++i) sol.vectors.col(i).normalize();
                    return sol;
                }
            }
        }
    }
    std::ostringstream oss;
    oss << "Lanczos failed to converge " << k << " eigenpairs in sector ("
        << A.basis()->sector().n_alpha << "," << A.basis()->sector().n_beta << ")";
    throw ConvergenceError(oss.str());
}

} // namespace

EigenSolution solve_eigen(const SectorOperator& A, int k, uint64_t seed) {
    const std::size_t dim = A.dim();
    if (k < 1 || static_cast<std::size_t>(k) > dim)
        throw DomainError("requested eigenpair count outside [1, dim]");
    EigenSolution sol = (dim <= 600 || static_cast<std::size_t>(3 * k) >= dim)
                            ? dense_solve(A, k)
                            : lanczos_solve(A, k, seed);
    // verify the residual contract
    std::ostringstream bad;
    for (int i = 0; i < sol.k_kept; ++i) {
        const Eigen::VectorXd vi = sol.vectors.col(i);
        const double res = (A.apply(vi) - sol.energies[i] * vi).norm();
        if (res > 1e-8 * std::max(1.0, std::abs(sol.energies[i])))
            bad << " pair " << i << ": residual " << res;
    }
    if (!bad.str().empty()) throw ConvergenceError("eigen residuals too large:" + bad.str());
    return sol;
}

GroundStateInfo ground_state(const Hamiltonian& H, uint64_t seed,
                             std::size_t memory_budget_bytes) {
    SpectrumCache cache(H, seed, memory_budget_bytes);
    const int N = H.n_electrons;
    const int n = H.n_orbs;
    std::vector<std::pair<double, Sector>> lowest;
    for (int na = std::max(0, N - n); na <= std::min(n, N); ++na) {
        const int nbv = N - na;
        if (na < nbv) continue;  // mirror sectors share spectra
        const Sector sec{na, nbv};
        auto basis = enumerate_determinants(n, sec);
        const int k = static_cast<int>(std::min<std::size_t>(2, basis->size()));
        const EigenSolution& sol = cache.ensure(sec, k);
        for (int i = 0; i < sol.k_kept; ++i) {
            lowest.emplace_back(sol.energies[i], sec);
            if (na != nbv) lowest.emplace_back(sol.energies[i], Sector{nbv, na});
        }
    }
    std::sort(lowest.begin(), lowest.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    GroundStateInfo info;
    info.sector = lowest[0].second;
    info.energy = lowest[0].first;
    info.gap = lowest.size() > 1 ? lowest[1].first - lowest[0].first : 1e300;
    info.degenerate = info.gap < kDegeneracyTol;
    return info;
}

SpectrumCache::SpectrumCache(const Hamiltonian& H, uint64_t seed,
                             std::size_t memory_budget_bytes, std::string cache_dir)
    : H_(&H), seed_(seed), budget_(memory_budget_bytes), cache_dir_(std::move(cache_dir)),
      hash_(content_hash(H)) {}

std::string SpectrumCache::cache_path(Sector sector, int k) const {
    std::ostringstream oss;
    oss << cache_dir_ << "/" << std::hex << hash_ << std::dec << "_a" << sector.n_alpha << "_b"
        << sector.n_beta << "_k" << k << ".eig";
    return oss.str();
}

namespace {
constexpr char kCacheMagic[8] = {'Q', 'L', 'R', 'E', 'C', 'A', 'C', '1'};
}

std::optional<EigenSolution> SpectrumCache::load_cached(Sector sector, int k) const {
    if (cache_dir_.empty()) return std::nullopt;
    std::ifstream in(cache_path(sector, k), std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCacheMagic, 8) != 0) return std::nullopt;
    uint64_t hash = 0, dim = 0;
    int32_t na = 0, nb = 0, kk = 0;
    in.read(reinterpret_cast<char*>(&hash), 8);
    in.read(reinterpret_cast<char*>(&na), 4);
    in.read(reinterpret_cast<char*>(&nb), 4);
    in.read(reinterpret_cast<char*>(&kk), 4);
    in.read(reinterpret_cast<char*>(&dim), 8);
    if (!in || hash != hash_ || na != sector.n_alpha || nb != sector.n_beta || kk != k)
        return std::nullopt;
    EigenSolution sol;
    sol.sector = sector;
    sol.basis = enumerate_determinants(H_->n_orbs, sector);
    if (sol.basis->size() != dim) return std::nullopt;
    sol.dim = dim;
    sol.k_kept = k;
    sol.energies.resize(k);
    in.read(reinterpret_cast<char*>(sol.energies.data()), 8 * k);
    sol.vectors.resize(static_cast<Eigen::Index>(dim), k);
    in.read(reinterpret_cast<char*>(sol.vectors.data()),
            static_cast<std::streamsize>(8 * dim * k));
    if (!in) return std::nullopt;
    return sol;
}

void SpectrumCache::store_cached(const EigenSolution& sol) const {
    if (cache_dir_.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(cache_dir_, ec);
    std::ofstream out(cache_path(sol.sector, sol.k_kept), std::ios::binary);
    if (!out) return;
    out.write(kCacheMagic, 8);
    const uint64_t dim = sol.dim;
    const int32_t na = sol.sector.n_alpha, nb = sol.sector.n_beta, kk = sol.k_kept;
    out.write(reinterpret_cast<const char*>(&hash_), 8);
    out.write(reinterpret_cast<const char*>(&na), 4);
    out.write(reinterpret_cast<const char*>(&nb), 4);
    out.write(reinterpret_cast<const char*>(&kk), 4);
    out.write(reinterpret_cast<const char*>(&dim), 8);
    out.write(reinterpret_cast<const char*>(sol.energies.data()), 8 * kk);
    out.write(reinterpret_cast<const char*>(sol.vectors.data()),
              static_cast<std::streamsize>(8 * dim * kk));
}

const EigenSolution& SpectrumCache::ensure(Sector sector, int k) {
    auto it = solved_.find(sector);
    if (it != solved_.end() && it->second.k_kept >= k) return it->second;
    auto basis = enumerate_determinants(H_->n_orbs, sector);
    k = static_cast<int>(std::min<std::size_t>(k, basis->size()));
    if (auto cached = load_cached(sector, k)) {
        solved_[sector] = std::move(*cached);
        return solved_[sector];
    }
    SectorOperator op(*H_, basis, budget_);
    EigenSolution sol = solve_eigen(op, k, seed_);
    store_cached(sol);
    solved_[sector] = std::move(sol);
    return solved_[sector];
}

} // namespace qlr
