#include "qlr/fock.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <mutex>

#include "qlr/errors.hpp"

namespace qlr {

namespace {

std::vector<uint64_t> combinations_ascending(int n_orbs, int k) {
    std::vector<uint64_t> out;
    if (k < 0 || k > n_orbs) return out;
    if (k == 0) {
        out.push_back(0);
        return out;
    }
    uint64_t v = (k == 64) ? ~0ull : ((1ull << k) - 1);
    const uint64_t limit = (n_orbs == 64) ? ~0ull : ((1ull << n_orbs) - 1);
    while (v <= limit) {
        out.push_back(v);
        // Gosper's hack: next mask with the same popcount
        const uint64_t c = v & -v;
        const uint64_t r = v + c;
        if (r == 0) break;
        v = (((r ^ v) >> 2) / c) | r;
    }
    return out;
}

struct BasisKey {
    int n_orbs;
    int na;
    int nb;
    auto operator<=>(const BasisKey&) const = default;
};

std::map<BasisKey, std::weak_ptr<const DeterminantBasis>>& basis_cache() {
    static std::map<BasisKey, std::weak_ptr<const DeterminantBasis>> cache;
    return cache;
}
std::mutex& basis_cache_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

std::shared_ptr<const DeterminantBasis> DeterminantBasis::make(int n_orbs, Sector sector) {
    if (n_orbs < 1 || n_orbs > 63) throw DomainError("n_orbs outside supported range [1,63]");
    if (sector.n_alpha < 0 || sector.n_alpha > n_orbs || sector.n_beta < 0 ||
        sector.n_beta > n_orbs)
        throw DomainError("sector occupation outside [0, n_orbs]");

    const BasisKey key{n_orbs, sector.n_alpha, sector.n_beta};
    {
        std::lock_guard<std::mutex> lock(basis_cache_mutex());
        auto it = basis_cache().find(key);
        if (it != basis_cache().end())
            if (auto p = it->second.lock()) return p;
    }
    auto basis = std::shared_ptr<DeterminantBasis>(new DeterminantBasis());
    basis->n_orbs_ = n_orbs;
    basis->sector_ = sector;
    basis->alpha_strings_ = combinations_ascending(n_orbs, sector.n_alpha);
    basis->beta_strings_ = combinations_ascending(n_orbs, sector.n_beta);
    {
        std::lock_guard<std::mutex> lock(basis_cache_mutex());
        basis_cache()[key] = basis;
    }
    return basis;
}

std::shared_ptr<const DeterminantBasis> DeterminantBasis::null_basis(int n_orbs) {
    auto basis = std::shared_ptr<DeterminantBasis>(new DeterminantBasis());
    basis->n_orbs_ = n_orbs;
    basis->sector_ = Sector{-1, -1};
    basis->null_ = true;
    return basis;
}

std::size_t DeterminantBasis::alpha_rank(uint64_t mask) const {
    auto it = std::lower_bound(alpha_strings_.begin(), alpha_strings_.end(), mask);
    return static_cast<std::size_t>(it - alpha_strings_.begin());
}

std::size_t DeterminantBasis::beta_rank(uint64_t mask) const {
    auto it = std::lower_bound(beta_strings_.begin(), beta_strings_.end(), mask);
    return static_cast<std::size_t>(it - beta_strings_.begin());
}

std::size_t DeterminantBasis::index(uint64_t amask, uint64_t bmask) const {
    return alpha_rank(amask) * beta_strings_.size() + beta_rank(bmask);
}

BasisPtr enumerate_determinants(int n_orbs, Sector sector) {
    return DeterminantBasis::make(n_orbs, sector);
}

int jw_sign(uint64_t amask, uint64_t bmask, int m) {
    const int p = m >> 1;
    const uint64_t below_p = (1ull << p) - 1;
    int count = std::popcount(amask & below_p) + std::popcount(bmask & below_p);
    if (m & 1) count += static_cast<int>((amask >> p) & 1ull);
    return (count & 1) ? -1 : 1;
}

FockVector apply_ladder(int m, LadderKind kind, const FockVector& v) {
    const auto& basis = *v.basis;
    const int n_orbs = basis.n_orbs();
    if (m < 0 || m >= 2 * n_orbs) throw DomainError("spin-orbital index out of range");
    if (basis.is_null()) return FockVector::zero(v.basis);

    Sector target = basis.sector();
    const bool is_beta = (m & 1) != 0;
    const int dp = (kind == LadderKind::create) ? 1 : -1;
    (is_beta ? target.n_beta : target.n_alpha) += dp;
    if (target.n_alpha < 0 || target.n_alpha > n_orbs || target.n_beta < 0 ||
        target.n_beta > n_orbs)
        return FockVector::zero(DeterminantBasis::null_basis(n_orbs));

    auto tbasis = DeterminantBasis::make(n_orbs, target);
    FockVector out = FockVector::zero(tbasis);
    const int p = m >> 1;
    const uint64_t bit = 1ull << p;

    for (std::size_t i = 0; i < basis.size(); ++i) {
        const std::complex<double> amp = v.amps[static_cast<Eigen::Index>(i)];
        if (amp == 0.0) continue;
        auto [amask, bmask] = basis.det(i);
        uint64_t& mask = is_beta ? bmask : amask;
        const bool occ = (mask & bit) != 0;
        if (kind == LadderKind::create ? occ : !occ) continue;
        const int sign = jw_sign(amask, bmask, m);
        mask ^= bit;
        out.amps[static_cast<Eigen::Index>(tbasis->index(amask, bmask))] +=
            static_cast<double>(sign) * amp;
    }
    return out;
}

FockVector apply_excitation(int m1, int m2, const FockVector& v) {
    const auto& basis = *v.basis;
    const int n_orbs = basis.n_orbs();
    if (m1 < 0 || m1 >= 2 * n_orbs || m2 < 0 || m2 >= 2 * n_orbs)
        throw DomainError("spin-orbital index out of range");
    if (basis.is_null()) return FockVector::zero(v.basis);
    if (m1 == m2) return apply_number(orbital_of(m1), spin_of(m1), v);

    Sector target = basis.sector();
    ((m2 & 1) ? target.n_beta : target.n_alpha) -= 1;
    ((m1 & 1) ? target.n_beta : target.n_alpha) += 1;
    if (target.n_alpha < 0 || target.n_alpha > n_orbs || target.n_beta < 0 ||
        target.n_beta > n_orbs)
        return FockVector::zero(DeterminantBasis::null_basis(n_orbs));

    auto tbasis = DeterminantBasis::make(n_orbs, target);
    FockVector out = FockVector::zero(tbasis);
    const uint64_t bit1 = 1ull << (m1 >> 1);
    const uint64_t bit2 = 1ull << (m2 >> 1);

    for (std::size_t i = 0; i < basis.size(); ++i) {
        const std::complex<double> amp = v.amps[static_cast<Eigen::Index>(i)];
        if (amp == 0.0) continue;
        auto [amask, bmask] = basis.det(i);
        uint64_t& mask2 = (m2 & 1) ? bmask : amask;
        if (!(mask2 & bit2)) continue;
        int sign = jw_sign(amask, bmask, m2);
        mask2 ^= bit2;
        uint64_t& mask1 = (m1 & 1) ? bmask : amask;
        if (mask1 & bit1) continue;
        sign *= jw_sign(amask, bmask, m1);
        mask1 ^= bit1;
        out.amps[static_cast<Eigen::Index>(tbasis->index(amask, bmask))] +=
            static_cast<double>(sign) * amp;
    }
    return out;
}

FockVector apply_number(int p, Spin sigma, const FockVector& v) {
    const auto& basis = *v.basis;
    if (p < 0 || p >= basis.n_orbs()) throw DomainError("orbital index out of range");
    FockVector out = FockVector::zero(v.basis);
    if (basis.is_null()) return out;
    const uint64_t bit = 1ull << p;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        auto [amask, bmask] = basis.det(i);
        const uint64_t mask = (sigma == Spin::beta) ? bmask : amask;
        if (mask & bit) out.amps[static_cast<Eigen::Index>(i)] = v.amps[static_cast<Eigen::Index>(i)];
    }
    return out;
}

std::vector<FockVector> apply_spin(int p, SpinAxis j, const FockVector& v) {
    using namespace std::complex_literals;
    std::vector<FockVector> parts;
    if (j == SpinAxis::z) {
        FockVector out = FockVector::zero(v.basis);
        const uint64_t bit = 1ull << p;
        for (std::size_t i = 0; i < v.basis->size(); ++i) {
            auto [amask, bmask] = v.basis->det(i);
            const double occ_a = (amask & bit) ? 1.0 : 0.0;
            const double occ_b = (bmask & bit) ? 1.0 : 0.0;
            out.amps[static_cast<Eigen::Index>(i)] =
                0.5 * (occ_a - occ_b) * v.amps[static_cast<Eigen::Index>(i)];
        }
        parts.push_back(std::move(out));
        return parts;
    }
    const int ma = spin_orbital(p, Spin::alpha);
    const int mb = spin_orbital(p, Spin::beta);
    // s_x = (a+_pa a_pb + a+_pb a_pa)/2 ; s_y = (-i a+_pa a_pb + i a+_pb a_pa)/2
    const std::complex<double> c_up = (j == SpinAxis::x) ? 0.5 : std::complex<double>(0, -0.5);
    const std::complex<double> c_dn = (j == SpinAxis::x) ? 0.5 : std::complex<double>(0, 0.5);
    FockVector up = apply_excitation(ma, mb, v);    // raises n_alpha
    FockVector down = apply_excitation(mb, ma, v);  // raises n_beta
    if (!up.basis->is_null()) {
        up.amps *= c_up;
        parts.push_back(std::move(up));
    }
    if (!down.basis->is_null()) {
        down.amps *= c_dn;
        parts.push_back(std::move(down));
    }
    return parts;
}

FockVector apply_spatial_one_body(const Eigen::MatrixXd& mat, const FockVector& v) {
    const auto& basis = *v.basis;
    const int n = basis.n_orbs();
    if (mat.rows() != n || mat.cols() != n)
        throw DomainError("operator matrix size does not match n_orbs");
    FockVector out = FockVector::zero(v.basis);
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            const double c = mat(p, q);
            if (c == 0.0) continue;
            for (Spin s : {Spin::alpha, Spin::beta}) {
                FockVector piece = apply_excitation(spin_orbital(p, s), spin_orbital(q, s), v);
                if (!piece.basis->is_null()) out.amps += c * piece.amps;
            }
        }
    return out;
}

std::complex<double> inner(const FockVector& a, const FockVector& b) {
    if (a.basis->is_null() || b.basis->is_null()) return 0.0;
    if (a.basis->sector() != b.basis->sector()) return 0.0;
    return a.amps.dot(b.amps);  // Eigen dot conjugates the left factor
}

} // namespace qlr
