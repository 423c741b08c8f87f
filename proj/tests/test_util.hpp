#pragma once

// brute-force oracles shared by the unit and acceptance suites; everything
// here is built from ladder operators and dense algebra only, independent of
// the production Slater-Condon / statevector paths it checks

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qlr/fci.hpp"
#include "qlr/fock.hpp"
#include "qlr/model.hpp"
#include "qlr/qubitsim.hpp"
#include "qlr/rng.hpp"

namespace qlr::testutil {

using cplx = std::complex<double>;

inline FockVector random_vector(const BasisPtr& basis, RngStream& rng, bool complex_amps = true) {
    FockVector v = FockVector::zero(basis);
    for (Eigen::Index i = 0; i < v.amps.size(); ++i)
        v.amps[i] = cplx(rng.next() - 0.5, complex_amps ? rng.next() - 0.5 : 0.0);
    if (v.amps.norm() > 0) v.amps /= v.amps.norm();
    return v;
}

inline FockVector basis_state(const BasisPtr& basis, std::size_t i) {
    FockVector v = FockVector::zero(basis);
    v.amps[static_cast<Eigen::Index>(i)] = 1.0;
    return v;
}

// H|v> assembled purely from ladder operators:
// H = e_core + sum h_pq a+_{p s} a_{q s} + 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s' t} a_{q s}
inline FockVector apply_hamiltonian_bruteforce(const Hamiltonian& H, const FockVector& v) {
    const int n = H.n_orbs;
    FockVector out = FockVector::zero(v.basis);
    out.amps = H.e_core * v.amps;
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            if (H.h(p, q) == 0.0) continue;
            for (Spin s : {Spin::alpha, Spin::beta}) {
                FockVector t = apply_ladder(spin_orbital(q, s), LadderKind::annihilate, v);
                if (t.basis->is_null()) continue;
                t = apply_ladder(spin_orbital(p, s), LadderKind::create, t);
                if (!t.basis->is_null()) out.amps += H.h(p, q) * t.amps;
            }
        }
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) {
                    const double g = H.eri(p, q, r, s);
                    if (g == 0.0) continue;
                    for (Spin s1 : {Spin::alpha, Spin::beta})
                        for (Spin s2 : {Spin::alpha, Spin::beta}) {
                            FockVector t =
                                apply_ladder(spin_orbital(q, s1), LadderKind::annihilate, v);
                            if (t.basis->is_null()) continue;
                            t = apply_ladder(spin_orbital(s, s2), LadderKind::annihilate, t);
                            if (t.basis->is_null()) continue;
                            t = apply_ladder(spin_orbital(r, s2), LadderKind::create, t);
                            if (t.basis->is_null()) continue;
                            t = apply_ladder(spin_orbital(p, s1), LadderKind::create, t);
                            if (!t.basis->is_null()) out.amps += 0.5 * g * t.amps;
                        }
                }
    return out;
}

inline Eigen::MatrixXd dense_sector_bruteforce(const Hamiltonian& H, const BasisPtr& basis) {
    const std::size_t dim = basis->size();
    Eigen::MatrixXd M(dim, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const FockVector col = apply_hamiltonian_bruteforce(H, basis_state(basis, j));
        for (std::size_t i = 0; i < dim; ++i)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                col.amps[static_cast<Eigen::Index>(i)].real();
    }
    return M;
}

inline Hamiltonian random_hamiltonian(int n_orbs, int n_electrons, RngStream& rng) {
    Hamiltonian H;
    H.n_orbs = n_orbs;
    H.n_electrons = n_electrons;
    H.e_core = rng.next() - 0.5;
    H.h = Eigen::MatrixXd::Zero(n_orbs, n_orbs);
    for (int p = 0; p < n_orbs; ++p)
        for (int q = 0; q <= p; ++q) H.h(p, q) = H.h(q, p) = rng.next() - 0.5;
    H.eri = EriTable(n_orbs);
    for (int p = 0; p < n_orbs; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r <= p; ++r)
                for (int s = 0; s <= ((r == p) ? q : r); ++s)
                    H.eri.set(p, q, r, s, rng.next() - 0.5);
    return H;
}

// full-register matrix of the map parts = op(|basis det>) over all sectors,
// in the 2^{2 n_orbs} JW computational basis
template <typename OpFn>
Eigen::MatrixXcd full_space_matrix(int n_orbs, OpFn&& op) {
    const int nq = 2 * n_orbs;
    const Eigen::Index dim = 1ll << nq;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
    for (int na = 0; na <= n_orbs; ++na)
        for (int nb = 0; nb <= n_orbs; ++nb) {
            auto basis = enumerate_determinants(n_orbs, Sector{na, nb});
            for (std::size_t i = 0; i < basis->size(); ++i) {
                const FockVector src = basis_state(basis, i);
                const QubitState src_q = prepare_register(src, 0);
                Eigen::Index col = 0;
                for (Eigen::Index b = 0; b < src_q.amps.size(); ++b)
                    if (src_q.amps[b] != cplx(0, 0)) col = b;
                const std::vector<FockVector> parts = op(src);
                for (const FockVector& part : parts) {
                    if (part.basis->is_null()) continue;
                    for (std::size_t k = 0; k < part.basis->size(); ++k) {
                        const cplx a = part.amps[static_cast<Eigen::Index>(k)];
                        if (a == cplx(0, 0)) continue;
                        FockVector unit = basis_state(part.basis, k);
                        const QubitState dst_q = prepare_register(unit, 0);
                        for (Eigen::Index b = 0; b < dst_q.amps.size(); ++b)
                            if (dst_q.amps[b] != cplx(0, 0)) M(b, col) += a;
                    }
                }
            }
        }
    return M;
}

// full 2^nq matrix of a (controlled) gate, built independently of the kernels
inline Eigen::MatrixXcd gate_matrix(const Gate& g, int nq) {
    const Eigen::Index dim = 1ll << nq;
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        QubitState s;
        s.n_qubits = nq;
        s.amps = Eigen::VectorXcd::Zero(dim);
        s.amps[col] = 1.0;
        apply_gate_inplace_serial(s, g);
        M.col(col) = s.amps;
    }
    return M;
}

inline Eigen::MatrixXcd haar_unitary(int dim, RngStream& rng) {
    Eigen::MatrixXcd a(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) a(r, c) = cplx(rng.next() - 0.5, rng.next() - 0.5);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ();
    return q;
}

// register-space vector of sector-tagged parts (unnormalized)
inline Eigen::VectorXcd parts_to_register(const std::vector<FockVector>& parts, int n_orbs) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(1ll << (2 * n_orbs));
    for (const auto& part : parts) {
        if (part.basis->is_null()) continue;
        for (std::size_t k = 0; k < part.basis->size(); ++k) {
            const cplx a = part.amps[static_cast<Eigen::Index>(k)];
            if (a == cplx(0, 0)) continue;
            FockVector unit = basis_state(part.basis, k);
            const QubitState q = prepare_register(unit, 0);
            for (Eigen::Index b = 0; b < q.amps.size(); ++b)
                if (q.amps[b] != cplx(0, 0)) out[b] += a;
        }
    }
    return out;
}

} // namespace qlr::testutil
