#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "qlr/constants.hpp"
#include "qlr/fci.hpp"
#include "qlr/fock.hpp"
#include "qlr/model.hpp"

namespace qlr {

using cplx = std::complex<double>;

// eigenpairs available per sector (already solved by the caller)
using EigenSet = std::map<Sector, const EigenSolution*>;

// energy levels merged across sectors; QPE resolves energies only, so all
// weights are accumulated per bin
struct EnergyBins {
    std::vector<double> energies;                 // ascending representatives
    std::map<Sector, std::vector<int>> bin_of;    // (sector, eig index) -> bin

    std::size_t size() const { return energies.size(); }
};

EnergyBins build_bins(const EigenSet& eigs, double tol = kDegeneracyTol);

// <Psi_lambda | O | gs> for every kept eigenstate, grouped by sector
struct OverlapSet {
    std::map<Sector, Eigen::VectorXcd> by_sector;
    double applied_norm2 = 0.0;  // ||O|gs>||^2, for sink accounting

    // per-bin weights  w_b = sum_{lambda in b} conj(a_lambda) * b_lambda
    static std::vector<cplx> weights(const OverlapSet& a, const OverlapSet& b,
                                     const EnergyBins& bins);
};

// parts landing in sectors absent from `eigs` either count as truncated-away
// mass (ignore: the QPE sink picks it up) or are a caller error (require)
enum class MissingSector { ignore, require };

OverlapSet op_overlaps(const std::vector<FockVector>& applied_parts, const EigenSet& eigs,
                       MissingSector missing = MissingSector::ignore);

// operator application helpers used throughout the response pipeline
std::vector<FockVector> parts_number(int p, Spin sigma, const FockVector& gs);
std::vector<FockVector> parts_spin(int p, SpinAxis j, const FockVector& gs);
std::vector<FockVector> parts_excitation(int m1, int m2, const FockVector& gs);

// spec-level transition matrix elements -------------------------------------

// N_{lambda p sigma, p' sigma'} for eigenpairs of the ground sector
std::vector<cplx> transition_charge(const FockVector& gs, const EigenSolution& eig, int p,
                                    Spin sigma, int pp, Spin sigmap);

// S_{lambda p j, p' j'} per energy bin (x/y need the adjacent sectors)
std::vector<cplx> transition_spin(const FockVector& gs, const EigenSet& eigs,
                                  const EnergyBins& bins, int p, SpinAxis j, int pp,
                                  SpinAxis jp);

// M_{lambda p j, p' sigma'} per energy bin
std::vector<cplx> transition_spin_charge(const FockVector& gs, const EigenSet& eigs,
                                         const EnergyBins& bins, int p, SpinAxis j, int pp,
                                         Spin sigmap);

// B_{lambda m1 m2, m3 m4} per energy bin
std::vector<cplx> transition_generic(const FockVector& gs, const EigenSet& eigs,
                                     const EnergyBins& bins, int m1, int m2, int m3, int m4);

// R(z) = sum_lambda w_lambda / (z - (E_lambda - E_gs))
cplx lehmann_sum(const std::vector<cplx>& weights, const std::vector<double>& energies,
                 double e_gs, cplx z);

// chi(omega) = R_{OO'}(omega + i delta) + R_{O'O}(-omega - i delta)
cplx chi(const std::vector<cplx>& weights_oo, const std::vector<cplx>& weights_oop,
         const std::vector<double>& energies, double e_gs, double omega, double delta);

// full exact transition data of a system (the ground truth for sampling)
struct TransitionSet {
    EnergyBins bins;
    // row index 2p + sigma over spin orbitals
    std::vector<Eigen::MatrixXcd> N;  // per bin, (2n)x(2n)
    // row index 3p + j over (orbital, axis x/y/z)
    std::vector<Eigen::MatrixXcd> S;  // per bin, (3n)x(3n)
    std::vector<Eigen::MatrixXcd> M;  // per bin, (3n)x(2n)
    std::map<std::string, double> sink;  // per diagonal channel label
};

TransitionSet build_transition_set(const FockVector& gs, const EigenSet& eigs);

// response tables -------------------------------------------------------------

enum class TmpChannel : int { alpha = 0, beta = 1, x = 2, y = 3 };
enum class OutChannel : int { n = 0, x = 1, y = 2, z = 3 };

const char* channel_name(OutChannel c);

// chi values per component pair on a frequency grid; rows and columns are
// (orbital, channel) labels
template <typename ChannelT>
struct ChiTable {
    int n_orbs = 0;
    std::vector<double> omegas;
    double delta = 0.0;
    std::vector<std::vector<cplx>> values;  // [row * 4n + col][i_omega]
    std::vector<uint8_t> filled;

    ChiTable() = default;
    ChiTable(int n, std::vector<double> om, double d)
        : n_orbs(n), omegas(std::move(om)), delta(d),
          values(static_cast<std::size_t>(4 * n) * (4 * n)),
          filled(static_cast<std::size_t>(4 * n) * (4 * n), 0) {}

    int label(int p, ChannelT c) const { return 4 * p + static_cast<int>(c); }
    std::size_t slot(int row, int col) const {
        return static_cast<std::size_t>(row) * (4 * n_orbs) + col;
    }
    std::vector<cplx>& at(int p, ChannelT a, int pp, ChannelT b) {
        const std::size_t s = slot(label(p, a), label(pp, b));
        if (values[s].empty()) values[s].assign(omegas.size(), cplx(0, 0));
        filled[s] = 1;
        return values[s];
    }
    const std::vector<cplx>* get(int p, ChannelT a, int pp, ChannelT b) const {
        const std::size_t s = slot(label(p, a), label(pp, b));
        return filled[s] ? &values[s] : nullptr;
    }
    bool is_filled(int p, ChannelT a, int pp, ChannelT b) const {
        return filled[slot(label(p, a), label(pp, b))] != 0;
    }
};

using ChiTmpTable = ChiTable<TmpChannel>;
using ResponseGrid = ChiTable<OutChannel>;

// the (alpha,beta,x,y) -> (n,x,y,z) linear map applied pointwise on the grid.
// Inputs that were never filled count as zero; an output component is marked
// complete only when every contributing block was present.
ResponseGrid assemble_components(const ChiTmpTable& tmp);

// exact chi-tmp table with every component filled, from operator-level
// transition weights
ChiTmpTable exact_chi_tmp(const FockVector& gs, double e_gs, const EigenSet& eigs,
                          const std::vector<double>& omegas, double delta);

// electric polarizability via the generic one-body route:
// alpha_{jj'}(omega) = -chi_{d_j d_{j'}}(omega), d = -sum d_{mm'} a+ a
struct PolarizabilityGrid {
    std::vector<double> omegas;
    double delta = 0.0;
    std::vector<Eigen::Matrix3cd> alpha;  // per omega
};

PolarizabilityGrid polarizability(const std::vector<OneBodyOperator>& dipoles,
                                  const FockVector& gs, double e_gs, const EigenSet& eigs,
                                  const std::vector<double>& omegas, double delta);

// sigma(omega) = (4 pi / c) * omega * Im Tr alpha(omega)
double cross_section(const Eigen::Matrix3cd& alpha, double omega);

} // namespace qlr
