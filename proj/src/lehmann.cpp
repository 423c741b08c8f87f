#include "qlr/lehmann.hpp"

#include <algorithm>
#include <cmath>

#include "qlr/errors.hpp"

namespace qlr {

EnergyBins build_bins(const EigenSet& eigs, double tol) {
    struct Entry {
        double e;
        Sector sec;
        int idx;
    };
    std::vector<Entry> entries;
    for (const auto& [sec, sol] : eigs)
        for (int i = 0; i < sol->k_kept; ++i) entries.push_back({sol->energies[i], sec, i});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.e < b.e; });

    EnergyBins bins;
    for (const auto& [sec, sol] : eigs)
        bins.bin_of[sec] = std::vector<int>(sol->k_kept, -1);
    for (const auto& ent : entries) {
        if (bins.energies.empty() || ent.e - bins.energies.back() > tol)
            bins.energies.push_back(ent.e);
        bins.bin_of[ent.sec][ent.idx] = static_cast<int>(bins.energies.size()) - 1;
    }
    return bins;
}

OverlapSet op_overlaps(const std::vector<FockVector>& applied_parts, const EigenSet& eigs,
                       MissingSector missing) {
    OverlapSet out;
    for (const auto& part : applied_parts) {
        if (part.basis->is_null()) continue;
        out.applied_norm2 += part.amps.squaredNorm();
        const Sector sec = part.basis->sector();
        auto it = eigs.find(sec);
        if (it == eigs.end()) {
            if (missing == MissingSector::require)
                throw DomainError("sector required: (" + std::to_string(sec.n_alpha) + "," +
                                  std::to_string(sec.n_beta) + ") has no eigenpairs");
            continue;  // mass outside the kept eigenspace
        }
        const EigenSolution& sol = *it->second;
        // <lambda|part> = vectors(:,lambda)^T * amps  (eigenvectors are real)
        Eigen::VectorXcd ov = sol.vectors.transpose() * part.amps;
        auto [slot, inserted] = out.by_sector.try_emplace(sec, std::move(ov));
        if (!inserted) slot->second += ov;
    }
    return out;
}

std::vector<cplx> OverlapSet::weights(const OverlapSet& a, const OverlapSet& b,
                                      const EnergyBins& bins) {
    std::vector<cplx> w(bins.size(), cplx(0, 0));
    for (const auto& [sec, ova] : a.by_sector) {
        auto itb = b.by_sector.find(sec);
        if (itb == b.by_sector.end()) continue;
        const auto& map = bins.bin_of.at(sec);
        const Eigen::VectorXcd& ovb = itb->second;
        for (Eigen::Index l = 0; l < ova.size(); ++l)
            w[map[static_cast<std::size_t>(l)]] += std::conj(ova[l]) * ovb[l];
    }
    return w;
}

std::vector<FockVector> parts_number(int p, Spin sigma, const FockVector& gs) {
    return {apply_number(p, sigma, gs)};
}

std::vector<FockVector> parts_spin(int p, SpinAxis j, const FockVector& gs) {
    return apply_spin(p, j, gs);
}

std::vector<FockVector> parts_excitation(int m1, int m2, const FockVector& gs) {
    FockVector v = apply_excitation(m1, m2, gs);
    if (v.basis->is_null()) return {};
    return {v};
}

std::vector<cplx> transition_charge(const FockVector& gs, const EigenSolution& eig, int p,
                                    Spin sigma, int pp, Spin sigmap) {
    if (eig.sector != gs.basis->sector())
        throw DomainError("eigen solution does not cover the ground sector");
    EigenSet set{{eig.sector, &eig}};
    const OverlapSet a = op_overlaps(parts_number(p, sigma, gs), set);
    const OverlapSet b = op_overlaps(parts_number(pp, sigmap, gs), set);
    const Eigen::VectorXcd& ua = a.by_sector.at(eig.sector);
    const Eigen::VectorXcd& ub = b.by_sector.at(eig.sector);
    std::vector<cplx> w(static_cast<std::size_t>(eig.k_kept));
    for (int l = 0; l < eig.k_kept; ++l) w[l] = std::conj(ua[l]) * ub[l];
    return w;
}

std::vector<cplx> transition_spin(const FockVector& gs, const EigenSet& eigs,
                                  const EnergyBins& bins, int p, SpinAxis j, int pp,
                                  SpinAxis jp) {
    const OverlapSet a = op_overlaps(parts_spin(p, j, gs), eigs, MissingSector::require);
    const OverlapSet b = op_overlaps(parts_spin(pp, jp, gs), eigs, MissingSector::require);
    return OverlapSet::weights(a, b, bins);
}

std::vector<cplx> transition_spin_charge(const FockVector& gs, const EigenSet& eigs,
                                         const EnergyBins& bins, int p, SpinAxis j, int pp,
                                         Spin sigmap) {
    const OverlapSet a = op_overlaps(parts_spin(p, j, gs), eigs);
    const OverlapSet b = op_overlaps(parts_number(pp, sigmap, gs), eigs);
    return OverlapSet::weights(a, b, bins);
}

std::vector<cplx> transition_generic(const FockVector& gs, const EigenSet& eigs,
                                     const EnergyBins& bins, int m1, int m2, int m3,
                                     int m4) {
    const OverlapSet a = op_overlaps(parts_excitation(m1, m2, gs), eigs);
    const OverlapSet b = op_overlaps(parts_excitation(m3, m4, gs), eigs);
    return OverlapSet::weights(a, b, bins);
}

cplx lehmann_sum(const std::vector<cplx>& weights, const std::vector<double>& energies,
                 double e_gs, cplx z) {
    cplx acc(0, 0);
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const cplx den = z - (energies[l] - e_gs);
        if (den == cplx(0, 0)) throw DomainError("Lehmann sum evaluated exactly on a pole");
        acc += weights[l] / den;
    }
    return acc;
}

cplx chi(const std::vector<cplx>& weights_oo, const std::vector<cplx>& weights_oop,
         const std::vector<double>& energies, double e_gs, double omega, double delta) {
    const cplx z(omega, delta);
    return lehmann_sum(weights_oo, energies, e_gs, z) +
           lehmann_sum(weights_oop, energies, e_gs, -z);
}

TransitionSet build_transition_set(const FockVector& gs, const EigenSet& eigs) {
    const int n = gs.basis->n_orbs();
    TransitionSet ts;
    ts.bins = build_bins(eigs);
    const std::size_t nb = ts.bins.size();

    std::vector<OverlapSet> u_charge;  // 2n entries, index 2p + sigma
    std::vector<OverlapSet> u_spin;    // 3n entries, index 3p + axis
    std::vector<double> charge_norm2, spin_norm2;
    for (int p = 0; p < n; ++p)
        for (Spin s : {Spin::alpha, Spin::beta}) {
            u_charge.push_back(op_overlaps(parts_number(p, s, gs), eigs));
            charge_norm2.push_back(u_charge.back().applied_norm2);
        }
    for (int p = 0; p < n; ++p)
        for (SpinAxis j : {SpinAxis::x, SpinAxis::y, SpinAxis::z}) {
            u_spin.push_back(op_overlaps(parts_spin(p, j, gs), eigs));
            spin_norm2.push_back(u_spin.back().applied_norm2);
        }

    auto accumulate = [&](const OverlapSet& a, const OverlapSet& b,
                          std::vector<Eigen::MatrixXcd>& dest, int r, int c) {
        const std::vector<cplx> w = OverlapSet::weights(a, b, ts.bins);
        for (std::size_t l = 0; l < nb; ++l) dest[l](r, c) = w[l];
    };

    ts.N.assign(nb, Eigen::MatrixXcd::Zero(2 * n, 2 * n));
    ts.S.assign(nb, Eigen::MatrixXcd::Zero(3 * n, 3 * n));
    ts.M.assign(nb, Eigen::MatrixXcd::Zero(3 * n, 2 * n));
    for (int r = 0; r < 2 * n; ++r)
        for (int c = 0; c < 2 * n; ++c) accumulate(u_charge[r], u_charge[c], ts.N, r, c);
    for (int r = 0; r < 3 * n; ++r)
        for (int c = 0; c < 3 * n; ++c) accumulate(u_spin[r], u_spin[c], ts.S, r, c);
    for (int r = 0; r < 3 * n; ++r)
        for (int c = 0; c < 2 * n; ++c) accumulate(u_spin[r], u_charge[c], ts.M, r, c);

    // sink mass per diagonal channel: weight outside the kept eigenspace
    for (int p = 0; p < n; ++p)
        for (Spin s : {Spin::alpha, Spin::beta}) {
            const int i = 2 * p + static_cast<int>(s);
            double kept = 0.0;
            for (std::size_t l = 0; l < nb; ++l) kept += ts.N[l](i, i).real();
            ts.sink["n_" + std::to_string(p) + (s == Spin::alpha ? "a" : "b")] =
                charge_norm2[i] - kept;
        }
    for (int p = 0; p < n; ++p)
        for (int j = 0; j < 3; ++j) {
            const int i = 3 * p + j;
            double kept = 0.0;
            for (std::size_t l = 0; l < nb; ++l) kept += ts.S[l](i, i).real();
            ts.sink["s_" + std::to_string(p) + "xyz"[j]] = spin_norm2[i] - kept;
        }
    return ts;
}

const char* channel_name(OutChannel c) {
    switch (c) {
        case OutChannel::n: return "n";
        case OutChannel::x: return "x";
        case OutChannel::y: return "y";
        case OutChannel::z: return "z";
    }
    return "?";
}

ResponseGrid assemble_components(const ChiTmpTable& tmp) {
    const int n = tmp.n_orbs;
    ResponseGrid out(n, tmp.omegas, tmp.delta);
    const std::size_t nw = tmp.omegas.size();

    auto block = [&](int p, TmpChannel a, int pp, TmpChannel b) -> const std::vector<cplx>* {
        return tmp.get(p, a, pp, b);
    };
    const cplx zero(0, 0);
    auto val = [&](const std::vector<cplx>* v, std::size_t iw) { return v ? (*v)[iw] : zero; };

    for (int p = 0; p < n; ++p)
        for (int pp = 0; pp < n; ++pp) {
            const auto* aa = block(p, TmpChannel::alpha, pp, TmpChannel::alpha);
            const auto* ab = block(p, TmpChannel::alpha, pp, TmpChannel::beta);
            const auto* ba = block(p, TmpChannel::beta, pp, TmpChannel::alpha);
            const auto* bb = block(p, TmpChannel::beta, pp, TmpChannel::beta);
            const bool complete = aa && ab && ba && bb;
            auto& nn = out.at(p, OutChannel::n, pp, OutChannel::n);
            auto& nz = out.at(p, OutChannel::n, pp, OutChannel::z);
            auto& zn = out.at(p, OutChannel::z, pp, OutChannel::n);
            auto& zz = out.at(p, OutChannel::z, pp, OutChannel::z);
            for (std::size_t w = 0; w < nw; ++w) {
                const cplx vaa = val(aa, w), vab = val(ab, w), vba = val(ba, w), vbb = val(bb, w);
                nn[w] = vaa + vab + vba + vbb;
                nz[w] = (vaa - vab + vba - vbb) / 2.0;
                zn[w] = (vaa + vab - vba - vbb) / 2.0;
                zz[w] = (vaa - vab - vba + vbb) / 4.0;
            }
            if (!complete) {
                out.filled[out.slot(out.label(p, OutChannel::n), out.label(pp, OutChannel::n))] = 2;
                out.filled[out.slot(out.label(p, OutChannel::n), out.label(pp, OutChannel::z))] = 2;
                out.filled[out.slot(out.label(p, OutChannel::z), out.label(pp, OutChannel::n))] = 2;
                out.filled[out.slot(out.label(p, OutChannel::z), out.label(pp, OutChannel::z))] = 2;
            }

            for (TmpChannel j : {TmpChannel::x, TmpChannel::y}) {
                const OutChannel oj = (j == TmpChannel::x) ? OutChannel::x : OutChannel::y;
                const auto* aj = block(p, TmpChannel::alpha, pp, j);
                const auto* bj = block(p, TmpChannel::beta, pp, j);
                auto& nj = out.at(p, OutChannel::n, pp, oj);
                auto& zj = out.at(p, OutChannel::z, pp, oj);
                for (std::size_t w = 0; w < nw; ++w) {
                    nj[w] = val(aj, w) + val(bj, w);
                    zj[w] = (val(aj, w) - val(bj, w)) / 2.0;
                }
                if (!(aj && bj)) {
                    out.filled[out.slot(out.label(p, OutChannel::n), out.label(pp, oj))] = 2;
                    out.filled[out.slot(out.label(p, OutChannel::z), out.label(pp, oj))] = 2;
                }
                const auto* ja = block(p, j, pp, TmpChannel::alpha);
                const auto* jb = block(p, j, pp, TmpChannel::beta);
                auto& jn = out.at(p, oj, pp, OutChannel::n);
                auto& jz = out.at(p, oj, pp, OutChannel::z);
                for (std::size_t w = 0; w < nw; ++w) {
                    jn[w] = val(ja, w) + val(jb, w);
                    jz[w] = (val(ja, w) - val(jb, w)) / 2.0;
                }
                if (!(ja && jb)) {
                    out.filled[out.slot(out.label(p, oj), out.label(pp, OutChannel::n))] = 2;
                    out.filled[out.slot(out.label(p, oj), out.label(pp, OutChannel::z))] = 2;
                }
            }
            for (TmpChannel j : {TmpChannel::x, TmpChannel::y})
                for (TmpChannel jp : {TmpChannel::x, TmpChannel::y}) {
                    const OutChannel oj = (j == TmpChannel::x) ? OutChannel::x : OutChannel::y;
                    const OutChannel ojp = (jp == TmpChannel::x) ? OutChannel::x : OutChannel::y;
                    const auto* jj = block(p, j, pp, jp);
                    auto& dst = out.at(p, oj, pp, ojp);
                    for (std::size_t w = 0; w < nw; ++w) dst[w] = val(jj, w);
                    if (!jj)
                        out.filled[out.slot(out.label(p, oj), out.label(pp, ojp))] = 2;
                }
        }
    return out;
}

ChiTmpTable exact_chi_tmp(const FockVector& gs, double e_gs, const EigenSet& eigs,
                          const std::vector<double>& omegas, double delta) {
    const int n = gs.basis->n_orbs();
    const EnergyBins bins = build_bins(eigs);
    ChiTmpTable tmp(n, omegas, delta);

    // overlaps for every label (p, channel)
    std::vector<OverlapSet> u(static_cast<std::size_t>(4 * n));
    for (int p = 0; p < n; ++p) {
        u[tmp.label(p, TmpChannel::alpha)] = op_overlaps(parts_number(p, Spin::alpha, gs), eigs);
        u[tmp.label(p, TmpChannel::beta)] = op_overlaps(parts_number(p, Spin::beta, gs), eigs);
        u[tmp.label(p, TmpChannel::x)] = op_overlaps(parts_spin(p, SpinAxis::x, gs), eigs);
        u[tmp.label(p, TmpChannel::y)] = op_overlaps(parts_spin(p, SpinAxis::y, gs), eigs);
    }

    for (int r = 0; r < 4 * n; ++r)
        for (int c = 0; c < 4 * n; ++c) {
            const std::vector<cplx> w = OverlapSet::weights(u[r], u[c], bins);
            auto& dst = tmp.at(r / 4, static_cast<TmpChannel>(r % 4), c / 4,
                               static_cast<TmpChannel>(c % 4));
            for (std::size_t iw = 0; iw < omegas.size(); ++iw) {
                const cplx zp(omegas[iw], delta);
                cplx acc(0, 0);
                for (std::size_t l = 0; l < bins.size(); ++l) {
                    const double de = bins.energies[l] - e_gs;
                    acc += w[l] / (zp - de) + std::conj(w[l]) / (-zp - de);
                }
                dst[iw] = acc;
            }
        }
    return tmp;
}

PolarizabilityGrid polarizability(const std::vector<OneBodyOperator>& dipoles,
                                  const FockVector& gs, double e_gs, const EigenSet& eigs,
                                  const std::vector<double>& omegas, double delta) {
    if (dipoles.size() != 3)
        throw DomainError("polarizability needs the three dipole components");
    const EnergyBins bins = build_bins(eigs);

    // d_j = -sum_{mm'} d_{mm'} a+_m a_m' ; the sign goes into the applied operator
    std::vector<OverlapSet> u(3);
    for (int j = 0; j < 3; ++j) {
        FockVector applied = apply_spatial_one_body(-dipoles[j].mat, gs);
        u[j] = op_overlaps({applied}, eigs);
    }

    PolarizabilityGrid grid;
    grid.omegas = omegas;
    grid.delta = delta;
    grid.alpha.assign(omegas.size(), Eigen::Matrix3cd::Zero());
    for (int j = 0; j < 3; ++j)
        for (int jp = 0; jp < 3; ++jp) {
            const std::vector<cplx> w = OverlapSet::weights(u[j], u[jp], bins);
            for (std::size_t iw = 0; iw < omegas.size(); ++iw) {
                const cplx zp(omegas[iw], delta);
                cplx acc(0, 0);
                for (std::size_t l = 0; l < bins.size(); ++l) {
                    const double de = bins.energies[l] - e_gs;
                    acc += w[l] / (zp - de) + std::conj(w[l]) / (-zp - de);
                }
                grid.alpha[iw](j, jp) = -acc;  // alpha = -chi
            }
        }
    return grid;
}

double cross_section(const Eigen::Matrix3cd& alpha, double omega) {
    return 4.0 * M_PI / kSpeedOfLightAu * omega * alpha.trace().imag();
}

} // namespace qlr
