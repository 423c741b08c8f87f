#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace qlr {

enum class Spin : int { alpha = 0, beta = 1 };
enum class SpinAxis : int { x = 0, y = 1, z = 2 };
enum class LadderKind { create, annihilate };

// global spin-orbital index, orbital-major interleaving: m = 2p + s
inline int spin_orbital(int p, Spin s) { return 2 * p + static_cast<int>(s); }
inline int orbital_of(int m) { return m >> 1; }
inline Spin spin_of(int m) { return static_cast<Spin>(m & 1); }

struct Sector {
    int n_alpha = 0;
    int n_beta = 0;
    bool operator==(const Sector&) const = default;
    auto operator<=>(const Sector&) const = default;
    int n_electrons() const { return n_alpha + n_beta; }
};

// all Slater determinants of a (n_alpha, n_beta) sector, ordered
// lexicographically on (alpha mask, beta mask)
class DeterminantBasis {
  public:
    static std::shared_ptr<const DeterminantBasis> make(int n_orbs, Sector sector);
    // zero-dimensional sentinel used for out-of-range ladder results
    static std::shared_ptr<const DeterminantBasis> null_basis(int n_orbs);

    int n_orbs() const { return n_orbs_; }
    Sector sector() const { return sector_; }
    bool is_null() const { return null_; }

    std::size_t size() const { return alpha_strings_.size() * beta_strings_.size(); }
    std::size_t n_alpha_strings() const { return alpha_strings_.size(); }
    std::size_t n_beta_strings() const { return beta_strings_.size(); }

    uint64_t alpha_string(std::size_t i) const { return alpha_strings_[i]; }
    uint64_t beta_string(std::size_t i) const { return beta_strings_[i]; }

    std::pair<uint64_t, uint64_t> det(std::size_t i) const {
        const std::size_t nb = beta_strings_.size();
        return {alpha_strings_[i / nb], beta_strings_[i % nb]};
    }
    // position of (amask, bmask); determinants are guaranteed present for
    // in-sector masks
    std::size_t index(uint64_t amask, uint64_t bmask) const;

    std::size_t alpha_rank(uint64_t mask) const;
    std::size_t beta_rank(uint64_t mask) const;

  private:
    DeterminantBasis() = default;
    int n_orbs_ = 0;
    Sector sector_;
    bool null_ = false;
    std::vector<uint64_t> alpha_strings_;
    std::vector<uint64_t> beta_strings_;
};

using BasisPtr = std::shared_ptr<const DeterminantBasis>;

struct FockVector {
    BasisPtr basis;
    Eigen::VectorXcd amps;

    FockVector() = default;
    FockVector(BasisPtr b, Eigen::VectorXcd a) : basis(std::move(b)), amps(std::move(a)) {}
    static FockVector zero(BasisPtr b) {
        return {b, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b->size()))};
    }
    bool is_zero(double tol = 0.0) const { return amps.size() == 0 || amps.norm() <= tol; }
    double norm() const { return amps.norm(); }
};

BasisPtr enumerate_determinants(int n_orbs, Sector sector);

// fermionic sign of acting with a_m / a^dagger_m: parity of the occupied
// spin orbitals preceding m in the global interleaved order
int jw_sign(uint64_t amask, uint64_t bmask, int m);

FockVector apply_ladder(int m, LadderKind kind, const FockVector& v);

// a^dagger_{m1} a_{m2} in one pass (no intermediate sector vector)
FockVector apply_excitation(int m1, int m2, const FockVector& v);

FockVector apply_number(int p, Spin sigma, const FockVector& v);

// s_{p,x} and s_{p,y} map a fixed-(n_alpha,n_beta) vector into the two
// adjacent sectors; the result is a list of sector-tagged parts (zero parts
// for unreachable sectors are omitted). s_{p,z} stays in place.
std::vector<FockVector> apply_spin(int p, SpinAxis j, const FockVector& v);

// sum of O_{pq} a^dagger_{p sigma} a_{q sigma} over both spins for a
// spin-diagonal spatial operator; stays in the input sector
FockVector apply_spatial_one_body(const Eigen::MatrixXd& mat, const FockVector& v);

std::complex<double> inner(const FockVector& a, const FockVector& b);

} // namespace qlr
