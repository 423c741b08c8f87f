#include "qlr/sampling.hpp"

#include <array>
#include <algorithm>
#include <cmath>

#include "qlr/errors.hpp"

namespace qlr {

namespace {

const cplx kEip4 = std::exp(cplx(0, M_PI / 4));   // e^{+i pi/4}
const cplx kEmp4 = std::exp(cplx(0, -M_PI / 4));  // e^{-i pi/4}

// merge weighted part lists by sector
std::vector<FockVector> combine(std::initializer_list<std::pair<cplx, const std::vector<FockVector>*>> terms) {
    std::map<Sector, FockVector> by_sector;
    for (const auto& [coeff, parts] : terms) {
        for (const FockVector& part : *parts) {
            if (part.basis->is_null()) continue;
            auto it = by_sector.find(part.basis->sector());
            if (it == by_sector.end()) {
                FockVector v = part;
                v.amps *= coeff;
                by_sector.emplace(part.basis->sector(), std::move(v));
            } else {
                it->second.amps += coeff * part.amps;
            }
        }
    }
    std::vector<FockVector> out;
    out.reserve(by_sector.size());
    for (auto& [sec, v] : by_sector) out.push_back(std::move(v));
    return out;
}

std::vector<double> bin_probs(const std::vector<FockVector>& parts, const EigenSet& eigs,
                              const EnergyBins& bins, double* norm2_out) {
    const OverlapSet ov = op_overlaps(parts, eigs);
    std::vector<double> probs(bins.size(), 0.0);
    for (const auto& [sec, u] : ov.by_sector) {
        const auto& map = bins.bin_of.at(sec);
        for (Eigen::Index l = 0; l < u.size(); ++l)
            probs[map[static_cast<std::size_t>(l)]] += std::norm(u[l]);
    }
    if (norm2_out) *norm2_out = ov.applied_norm2;
    return probs;
}

} // namespace

std::vector<double> ChannelEstimates::estimates(int slot) const {
    if (!exact_est.empty()) return exact_est[slot];
    std::vector<double> est(counts[slot].size());
    const double f = estimate_scale / static_cast<double>(n_meas);
    for (std::size_t i = 0; i < est.size(); ++i)
        est[i] = static_cast<double>(counts[slot][i]) * f;
    return est;
}

double ChannelEstimates::sink_mass(int slot) const {
    if (!exact_sink.empty()) return exact_sink[slot];
    return static_cast<double>(sink_counts[slot]) / static_cast<double>(n_meas);
}

double ChannelDistribution::slot_prob(int slot) const {
    double s = 0.0;
    for (std::size_t b = 0; b <= n_bins; ++b) s += probs[slot * (n_bins + 1) + b];
    return s;
}

ChannelDistribution distribution_eigenbasis(const PreparedSlots& slots, const EigenSet& eigs,
                                            const EnergyBins& bins) {
    ChannelDistribution dist;
    dist.n_slots = static_cast<int>(slots.size());
    dist.n_bins = bins.size();
    dist.probs.assign(static_cast<std::size_t>(dist.n_slots) * (dist.n_bins + 1), 0.0);
    double total = 0.0;
    for (int s = 0; s < dist.n_slots; ++s) {
        double norm2 = 0.0;
        const std::vector<double> pb = bin_probs(slots[s], eigs, bins, &norm2);
        double kept = 0.0;
        for (std::size_t b = 0; b < dist.n_bins; ++b) {
            dist.probs[s * (dist.n_bins + 1) + b] = pb[b];
            kept += pb[b];
        }
        dist.probs[s * (dist.n_bins + 1) + dist.n_bins] = std::max(0.0, norm2 - kept);
        total += norm2;
    }
    dist.fail_prob = std::max(0.0, 1.0 - total);
    return dist;
}

ChannelDistribution distribution_circuit(const ResponseCircuit& circuit, const FockVector& gs,
                                         const EigenSet& eigs, const EnergyBins& bins) {
    ChannelDistribution dist;
    dist.n_slots = circuit.n_slots;
    dist.n_bins = bins.size();
    dist.probs.assign(static_cast<std::size_t>(dist.n_slots) * (dist.n_bins + 1), 0.0);

    QubitState input = circuit_input(circuit, gs);
    QubitState state = input;
    for (const auto& g : circuit.gates) apply_gate_inplace(state, g);

    double interest_total = 0.0;
    for (const auto& outcome : circuit.outcomes) {
        if (outcome.tally_slot < 0) continue;
        auto proj = project_branch(state, circuit.measured, outcome.bits);
        if (!proj.valid) continue;
        const int s = outcome.tally_slot;
        interest_total += proj.probability;

        // reduce to the register block (outcomes of interest are separable)
        const int R = circuit.register_qubits;
        const uint64_t reg_dim = 1ull << R;
        const uint64_t anc_dim = 1ull << circuit.ancilla_count;
        double best = -1.0;
        uint64_t best_pat = 0;
        for (uint64_t pat = 0; pat < anc_dim; ++pat) {
            double w = 0.0;
            for (uint64_t i = 0; i < reg_dim; ++i)
                w += std::norm(proj.state.amps[static_cast<Eigen::Index>((pat << R) | i)]);
            if (w > best) {
                best = w;
                best_pat = pat;
            }
        }
        QubitState reg;
        reg.n_qubits = R;
        reg.amps = proj.state.amps.segment(static_cast<Eigen::Index>(best_pat << R),
                                           static_cast<Eigen::Index>(reg_dim));

        double kept = 0.0;
        for (const auto& [sec, sol] : eigs) {
            const auto& map = bins.bin_of.at(sec);
            for (int l = 0; l < sol->k_kept; ++l) {
                FockVector lam{sol->basis, sol->vectors.col(l).cast<cplx>()};
                const double w = std::norm(register_overlap(lam, reg)) * proj.probability;
                dist.probs[s * (dist.n_bins + 1) + map[l]] += w;
                kept += w;
            }
        }
        dist.probs[s * (dist.n_bins + 1) + dist.n_bins] +=
            std::max(0.0, proj.probability - kept);
    }
    dist.fail_prob = std::max(0.0, 1.0 - interest_total);
    return dist;
}

int ideal_qpe_sample(const std::vector<FockVector>& state_parts, const EigenSet& eigs,
                     const EnergyBins& bins, RngStream& rng) {
    const std::vector<double> pb = bin_probs(state_parts, eigs, bins, nullptr);
    const double u = rng.next();
    double cum = 0.0;
    for (std::size_t b = 0; b < pb.size(); ++b) {
        cum += pb[b];
        if (u < cum) return static_cast<int>(b);
    }
    return -1;  // sink
}

ChannelEstimates run_channel(const ChannelDistribution& dist, double estimate_scale,
                             uint64_t n_meas, const CounterRng& stream) {
    // cumulative over [slot0 bins.., slot0 sink, slot1 bins.., ..., fail]
    std::vector<double> cum(dist.probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
        acc += dist.probs[i];
        cum[i] = acc;
    }

    ChannelEstimates est;
    est.n_meas = n_meas;
    est.estimate_scale = estimate_scale;
    est.counts.assign(dist.n_slots, std::vector<int64_t>(dist.n_bins, 0));
    est.sink_counts.assign(dist.n_slots, 0);

    const std::size_t stride = dist.n_bins + 1;
#ifdef QLR_USE_OPENMP
#pragma omp parallel
    {
        ChannelEstimates local;
        local.counts.assign(dist.n_slots, std::vector<int64_t>(dist.n_bins, 0));
        local.sink_counts.assign(dist.n_slots, 0);
#pragma omp for schedule(static)
        for (long long shot = 0; shot < static_cast<long long>(n_meas); ++shot) {
            const double u = stream.uniform_at(static_cast<uint64_t>(shot));
            const auto it = std::upper_bound(cum.begin(), cum.end(), u);
            if (it == cum.end()) {
                local.discarded += 1;
                continue;
            }
            const std::size_t cat = static_cast<std::size_t>(it - cum.begin());
            const int slot = static_cast<int>(cat / stride);
            const std::size_t bin = cat % stride;
            if (bin == dist.n_bins)
                local.sink_counts[slot] += 1;
            else
                local.counts[slot][bin] += 1;
        }
#pragma omp critical
        {
            for (int s = 0; s < dist.n_slots; ++s) {
                est.sink_counts[s] += local.sink_counts[s];
                for (std::size_t b = 0; b < dist.n_bins; ++b)
                    est.counts[s][b] += local.counts[s][b];
            }
            est.discarded += local.discarded;
        }
    }
#else
    for (uint64_t shot = 0; shot < n_meas; ++shot) {
        const double u = stream.uniform_at(shot);
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        if (it == cum.end()) {
            est.discarded += 1;
            continue;
        }
        const std::size_t cat = static_cast<std::size_t>(it - cum.begin());
        const int slot = static_cast<int>(cat / stride);
        const std::size_t bin = cat % stride;
        if (bin == dist.n_bins)
            est.sink_counts[slot] += 1;
        else
            est.counts[slot][bin] += 1;
    }
#endif
    return est;
}

uint64_t channel_stream_id(const std::string& tag) {
    uint64_t h = 0x43484E4Cull;  // arbitrary fixed base
    for (char c : tag) h = detail::splitmix64(h ^ static_cast<uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

PreparedSlots prepared_operator_slots(CircuitKind kind, const CircuitIndices& idx,
                                      const FockVector& gs) {
    switch (kind) {
        case CircuitKind::charge_diag:
            return {parts_number(idx.p, idx.sigma, gs)};
        case CircuitKind::charge_offdiag: {
            const auto na = parts_number(idx.p, idx.sigma, gs);
            const auto nb = parts_number(idx.pp, idx.sigmap, gs);
            // n^{+-} = (n_{p sigma} +- e^{i pi/4} n_{p' sigma'}) / 2
            return {combine({{0.5, &na}, {0.5 * kEip4, &nb}}),
                    combine({{0.5, &na}, {-0.5 * kEip4, &nb}})};
        }
        case CircuitKind::spin_diag: {
            const auto sp = parts_spin(idx.p, idx.j, gs);
            return {combine({{2.0, &sp}})};  // branch carries 2 s_{pj}
        }
        case CircuitKind::spin_offdiag: {
            const auto sa = parts_spin(idx.p, idx.j, gs);
            const auto sb = parts_spin(idx.pp, idx.jp, gs);
            // branches carry 2 s^{+-} = s_{pj} +- e^{i pi/4} s_{p'j'}
            return {combine({{1.0, &sa}, {kEip4, &sb}}),
                    combine({{1.0, &sa}, {-kEip4, &sb}})};
        }
        case CircuitKind::spin_charge: {
            const auto sp = parts_spin(idx.p, idx.j, gs);
            const auto np = parts_number(idx.pp, idx.sigmap, gs);
            // v^{+-} = s_{pj} + e^{+- i pi/4} n_{p' sigma'} / 2
            const cplx phase = (idx.nu >= 0) ? kEip4 : kEmp4;
            return {combine({{1.0, &sp}, {0.5 * phase, &np}})};
        }
        case CircuitKind::generic_diag:
            return {parts_excitation(idx.m[0], idx.m[1], gs)};
        case CircuitKind::generic_offdiag: {
            const auto fa = parts_excitation(idx.m[0], idx.m[1], gs);
            const auto fb = parts_excitation(idx.m[2], idx.m[3], gs);
            return {combine({{0.5, &fa}, {0.5 * kEip4, &fb}}),
                    combine({{0.5, &fa}, {-0.5 * kEip4, &fb}})};
        }
        case CircuitKind::lcu_generic:
            throw DomainError("no fock-level slots for the generic LCU circuit");
    }
    return {};
}

namespace {

ChannelEstimates run_with_mode(const FockVector& gs, const EigenSet& eigs, const EnergyBins& bins,
                               const SamplingConfig& cfg, CircuitKind kind,
                               const CircuitIndices& idx, double scale, const std::string& tag,
                               const std::string& cls) {
    ChannelDistribution dist;
    if (cfg.mode == SamplingConfig::Mode::circuit) {
        const ResponseCircuit circuit = build_response_circuit(kind, idx, gs.basis->n_orbs());
        dist = distribution_circuit(circuit, gs, eigs, bins);
    } else {
        dist = distribution_eigenbasis(prepared_operator_slots(kind, idx, gs), eigs, bins);
    }
    if (cfg.mode == SamplingConfig::Mode::exact_weights) {
        ChannelEstimates est;
        est.n_meas = 1;
        est.estimate_scale = scale;
        est.counts.assign(dist.n_slots, std::vector<int64_t>(dist.n_bins, 0));
        est.sink_counts.assign(dist.n_slots, 0);
        est.exact_est.resize(dist.n_slots);
        est.exact_sink.resize(dist.n_slots);
        for (int s = 0; s < dist.n_slots; ++s) {
            est.exact_est[s].resize(dist.n_bins);
            for (std::size_t b = 0; b < dist.n_bins; ++b)
                est.exact_est[s][b] = scale * dist.probs[s * (dist.n_bins + 1) + b];
            est.exact_sink[s] = dist.probs[s * (dist.n_bins + 1) + dist.n_bins];
        }
        return est;
    }
    const CounterRng stream(cfg.seed, channel_stream_id(tag));
    return run_channel(dist, scale, cfg.shots_for(cls), stream);
}

std::string spin_orb_tag(int p, Spin s) { return std::to_string(p) + (s == Spin::alpha ? "a" : "b"); }
std::string axis_tag(SpinAxis j) { return j == SpinAxis::x ? "x" : (j == SpinAxis::y ? "y" : "z"); }

} // namespace

ChannelEstimates sample_charge_diag(const FockVector& gs, const EigenSet& eigs,
                                    const EnergyBins& bins, int p, Spin sigma,
                                    const SamplingConfig& cfg) {
    CircuitIndices idx;
    idx.p = p;
    idx.sigma = sigma;
    return run_with_mode(gs, eigs, bins, cfg, CircuitKind::charge_diag, idx, 1.0,
                         "Nd:" + spin_orb_tag(p, sigma), "charge");
}

ChannelEstimates sample_charge_aux(const FockVector& gs, const EigenSet& eigs,
                                   const EnergyBins& bins, int p, Spin sigma, int pp,
                                   Spin sigmap, const SamplingConfig& cfg) {
    CircuitIndices idx;
    idx.p = p;
    idx.sigma = sigma;
    idx.pp = pp;
    idx.sigmap = sigmap;
    return run_with_mode(gs, eigs, bins, cfg, CircuitKind::charge_offdiag, idx, 1.0,
                         "Na:" + spin_orb_tag(p, sigma) + "," + spin_orb_tag(pp, sigmap),
                         "charge");
}

ChannelEstimates sample_spin_diag(const FockVector& gs, const EigenSet& eigs,
                                  const EnergyBins& bins, int p, SpinAxis j,
                                  const SamplingConfig& cfg) {
    CircuitIndices idx;
    idx.p = p;
    idx.j = j;
    return run_with_mode(gs, eigs, bins, cfg, CircuitKind::spin_diag, idx, 0.25,
                         "Sd:" + std::to_string(p) + axis_tag(j), "spin");
}

ChannelEstimates sample_spin_aux(const FockVector& gs, const EigenSet& eigs,
                                 const EnergyBins& bins, int p, SpinAxis j, int pp, SpinAxis jp,
                                 const SamplingConfig& cfg) {
    CircuitIndices idx;
    idx.p = p;
    idx.j = j;
    idx.pp = pp;
    idx.jp = jp;
    return run_with_mode(gs, eigs, bins, cfg, CircuitKind::spin_offdiag, idx, 0.25,
                         "Sa:" + std::to_string(p) + axis_tag(j) + "," + std::to_string(pp) +
                             axis_tag(jp),
                         "spin");
}

ChannelEstimates sample_spin_charge_aux(const FockVector& gs, const EigenSet& eigs,
                                        const EnergyBins& bins, int p, SpinAxis j, int pp,
                                        Spin sigmap, int nu, const SamplingConfig& cfg) {
    CircuitIndices idx;
    idx.p = p;
    idx.j = j;
    idx.pp = pp;
    idx.sigmap = sigmap;
    idx.nu = nu;
    return run_with_mode(gs, eigs, bins, cfg, CircuitKind::spin_charge, idx, 1.0,
                         "Ma:" + std::to_string(p) + axis_tag(j) + "," + spin_orb_tag(pp, sigmap) +
                             (nu >= 0 ? "+" : "-"),
                         "spin_charge");
}

ChannelEstimates sample_generic_diag(const FockVector& gs, const EigenSet& eigs,
                                     const EnergyBins& bins, int m1, int m2,
                                     const SamplingConfig& cfg) {
    CircuitIndices idx;
    idx.m[0] = m1;
    idx.m[1] = m2;
    return run_with_mode(gs, eigs, bins, cfg, CircuitKind::generic_diag, idx, 1.0,
                         "Bd:" + std::to_string(m1) + "," + std::to_string(m2), "generic");
}

ChannelEstimates sample_generic_aux(const FockVector& gs, const EigenSet& eigs,
                                    const EnergyBins& bins, int ma, int mb, int mc, int md,
                                    const SamplingConfig& cfg) {
    CircuitIndices idx;
    idx.m[0] = ma;
    idx.m[1] = mb;
    idx.m[2] = mc;
    idx.m[3] = md;
    return run_with_mode(gs, eigs, bins, cfg, CircuitKind::generic_offdiag, idx, 1.0,
                         "Ba:" + std::to_string(ma) + "," + std::to_string(mb) + "," +
                             std::to_string(mc) + "," + std::to_string(md),
                         "generic");
}

// ---- assemblers -------------------------------------------------------------

namespace {

std::vector<cplx> assemble_pairwise(const std::vector<double>& tp, const std::vector<double>& tm,
                                    const std::vector<double>& tpr,
                                    const std::vector<double>& tmr) {
    std::vector<cplx> out(tp.size());
    for (std::size_t l = 0; l < tp.size(); ++l)
        out[l] = kEmp4 * (tp[l] - tm[l]) + kEip4 * (tpr[l] - tmr[l]);
    return out;
}

} // namespace

std::vector<cplx> assemble_charge_offdiag(const std::vector<double>& tp,
                                          const std::vector<double>& tm,
                                          const std::vector<double>& tpr,
                                          const std::vector<double>& tmr) {
    return assemble_pairwise(tp, tm, tpr, tmr);
}

std::vector<cplx> assemble_spin_offdiag(const std::vector<double>& tp,
                                        const std::vector<double>& tm,
                                        const std::vector<double>& tpr,
                                        const std::vector<double>& tmr) {
    return assemble_pairwise(tp, tm, tpr, tmr);
}

std::vector<cplx> assemble_spin_charge(const std::vector<double>& tp,
                                       const std::vector<double>& tm,
                                       const std::vector<double>& s_diag,
                                       const std::vector<double>& n_diag) {
    const double sqrt2 = std::sqrt(2.0);
    std::vector<cplx> out(tp.size());
    for (std::size_t l = 0; l < tp.size(); ++l)
        out[l] = kEmp4 * tp[l] + kEip4 * tm[l] - sqrt2 * s_diag[l] - n_diag[l] / (2.0 * sqrt2);
    return out;
}

std::vector<cplx> assemble_generic_offdiag(const std::vector<double>& tp,
                                           const std::vector<double>& tm,
                                           const std::vector<double>& tpr,
                                           const std::vector<double>& tmr) {
    return assemble_pairwise(tp, tm, tpr, tmr);
}

// ---- Algorithm 1 ------------------------------------------------------------

SampledResponse calc_resp_funcs(const FockVector& gs, double e_gs, const EigenSet& eigs,
                                const SamplingConfig& cfg) {
    const int n = gs.basis->n_orbs();
    const EnergyBins bins = build_bins(eigs);
    const std::size_t nw = cfg.omegas.size();
    ChiTmpTable tmp(n, cfg.omegas, cfg.delta);
    SampledResponse out;

    // denominators d_{lambda +-}(omega)
    std::vector<std::vector<cplx>> inv_dp(bins.size()), inv_dm(bins.size());
    for (std::size_t l = 0; l < bins.size(); ++l) {
        inv_dp[l].resize(nw);
        inv_dm[l].resize(nw);
        const double de = bins.energies[l] - e_gs;
        for (std::size_t w = 0; w < nw; ++w) {
            const cplx zp(cfg.omegas[w], cfg.delta);
            inv_dp[l][w] = 1.0 / (zp - de);
            inv_dm[l][w] = 1.0 / (-zp - de);
        }
    }

    auto add_diag = [&](std::vector<cplx>& dst, const std::vector<double>& w) {
        for (std::size_t l = 0; l < w.size(); ++l) {
            if (w[l] == 0.0) continue;
            for (std::size_t iw = 0; iw < nw; ++iw)
                dst[iw] += w[l] * (inv_dp[l][iw] + inv_dm[l][iw]);
        }
    };
    auto add_offdiag = [&](std::vector<cplx>& fwd, std::vector<cplx>& rev,
                           const std::vector<cplx>& w) {
        for (std::size_t l = 0; l < w.size(); ++l) {
            if (w[l] == cplx(0, 0)) continue;
            const cplx wc = std::conj(w[l]);
            for (std::size_t iw = 0; iw < nw; ++iw) {
                fwd[iw] += w[l] * inv_dp[l][iw] + wc * inv_dm[l][iw];
                rev[iw] += wc * inv_dp[l][iw] + w[l] * inv_dm[l][iw];
            }
        }
    };
    auto note = [&](const std::string& tag, const ChannelEstimates& est) {
        double sink = 0.0;
        for (std::size_t s = 0; s < est.sink_counts.size(); ++s)
            sink += est.sink_mass(static_cast<int>(s));
        out.sink_mass[tag] = sink;
        out.shots[tag] = est.n_meas;
    };

    // diagonal components
    std::map<std::pair<int, int>, std::vector<double>> n_diag;  // (p, sigma)
    std::map<std::pair<int, int>, std::vector<double>> s_diag;  // (p, axis)
    for (int p = 0; p < n; ++p) {
        for (Spin s : {Spin::alpha, Spin::beta}) {
            const auto est = sample_charge_diag(gs, eigs, bins, p, s, cfg);
            n_diag[{p, static_cast<int>(s)}] = est.estimates(0);
            add_diag(tmp.at(p, s == Spin::alpha ? TmpChannel::alpha : TmpChannel::beta, p,
                            s == Spin::alpha ? TmpChannel::alpha : TmpChannel::beta),
                     n_diag[{p, static_cast<int>(s)}]);
            note("Nd:" + spin_orb_tag(p, s), est);
        }
        for (SpinAxis j : {SpinAxis::x, SpinAxis::y}) {
            const auto est = sample_spin_diag(gs, eigs, bins, p, j, cfg);
            s_diag[{p, static_cast<int>(j)}] = est.estimates(0);
            add_diag(tmp.at(p, j == SpinAxis::x ? TmpChannel::x : TmpChannel::y, p,
                            j == SpinAxis::x ? TmpChannel::x : TmpChannel::y),
                     s_diag[{p, static_cast<int>(j)}]);
            note("Sd:" + std::to_string(p) + axis_tag(j), est);
        }
    }

    auto tmp_channel_of = [](Spin s) {
        return s == Spin::alpha ? TmpChannel::alpha : TmpChannel::beta;
    };
    auto tmp_channel_of_axis = [](SpinAxis j) {
        return j == SpinAxis::x ? TmpChannel::x : TmpChannel::y;
    };

    // off-diagonal components, p >= p'
    for (int p = 0; p < n; ++p)
        for (int pp = 0; pp <= p; ++pp) {
            for (Spin s : {Spin::alpha, Spin::beta})
                for (Spin sp : {Spin::alpha, Spin::beta}) {
                    const bool run = (p > pp) || (p == pp && s == Spin::beta && sp == Spin::alpha);
                    if (!run) continue;
                    const auto fwd = sample_charge_aux(gs, eigs, bins, p, s, pp, sp, cfg);
                    const auto rev = sample_charge_aux(gs, eigs, bins, pp, sp, p, s, cfg);
                    const auto nvals = assemble_charge_offdiag(
                        fwd.estimates(0), fwd.estimates(1), rev.estimates(0), rev.estimates(1));
                    add_offdiag(tmp.at(p, tmp_channel_of(s), pp, tmp_channel_of(sp)),
                                tmp.at(pp, tmp_channel_of(sp), p, tmp_channel_of(s)), nvals);
                    note("Na:" + spin_orb_tag(p, s) + "," + spin_orb_tag(pp, sp), fwd);
                    note("Na:" + spin_orb_tag(pp, sp) + "," + spin_orb_tag(p, s), rev);
                }
            for (SpinAxis j : {SpinAxis::x, SpinAxis::y})
                for (SpinAxis jp : {SpinAxis::x, SpinAxis::y}) {
                    const bool run = (p > pp) || (p == pp && j == SpinAxis::y && jp == SpinAxis::x);
                    if (!run) continue;
                    const auto fwd = sample_spin_aux(gs, eigs, bins, p, j, pp, jp, cfg);
                    const auto rev = sample_spin_aux(gs, eigs, bins, pp, jp, p, j, cfg);
                    const auto svals = assemble_spin_offdiag(
                        fwd.estimates(0), fwd.estimates(1), rev.estimates(0), rev.estimates(1));
                    add_offdiag(tmp.at(p, tmp_channel_of_axis(j), pp, tmp_channel_of_axis(jp)),
                                tmp.at(pp, tmp_channel_of_axis(jp), p, tmp_channel_of_axis(j)),
                                svals);
                    note("Sa:" + std::to_string(p) + axis_tag(j) + "," + std::to_string(pp) +
                             axis_tag(jp),
                         fwd);
                    note("Sa:" + std::to_string(pp) + axis_tag(jp) + "," + std::to_string(p) +
                             axis_tag(j),
                         rev);
                }
            for (SpinAxis j : {SpinAxis::x, SpinAxis::y})
                for (Spin sp : {Spin::alpha, Spin::beta}) {
                    const auto tplus = sample_spin_charge_aux(gs, eigs, bins, p, j, pp, sp, +1, cfg);
                    const auto tminus = sample_spin_charge_aux(gs, eigs, bins, p, j, pp, sp, -1, cfg);
                    const auto mvals = assemble_spin_charge(
                        tplus.estimates(0), tminus.estimates(0),
                        s_diag[{p, static_cast<int>(j)}], n_diag[{pp, static_cast<int>(sp)}]);
                    add_offdiag(tmp.at(p, tmp_channel_of_axis(j), pp, tmp_channel_of(sp)),
                                tmp.at(pp, tmp_channel_of(sp), p, tmp_channel_of_axis(j)), mvals);
                    note("Ma:" + std::to_string(p) + axis_tag(j) + "," + spin_orb_tag(pp, sp) + "+",
                         tplus);
                    note("Ma:" + std::to_string(p) + axis_tag(j) + "," + spin_orb_tag(pp, sp) + "-",
                         tminus);
                }
        }

    out.grid = assemble_components(tmp);
    return out;
}

// ---- generic-operator pipeline ----------------------------------------------

SampledPolarizability sample_polarizability(const std::vector<OneBodyOperator>& dipoles,
                                            const FockVector& gs, double e_gs,
                                            const EigenSet& eigs, const SamplingConfig& cfg) {
    if (dipoles.size() != 3) throw DomainError("need the three dipole components");
    const int n = gs.basis->n_orbs();
    const EnergyBins bins = build_bins(eigs);

    // contributing spin-orbital pairs (same spin: position is spin-diagonal)
    struct Pair {
        int m1;
        int m2;
    };
    std::vector<Pair> pairs;
    std::vector<std::array<double, 3>> coeff;  // d^j_{m1 m2} with the electron-charge sign
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q)
            for (int s = 0; s < 2; ++s) {
                std::array<double, 3> c{};
                bool any = false;
                for (int j = 0; j < 3; ++j) {
                    c[j] = -dipoles[j].mat(p, q);
                    any = any || c[j] != 0.0;
                }
                if (!any) continue;
                pairs.push_back({2 * p + s, 2 * q + s});
                coeff.push_back(c);
            }

    // B estimates for every ordered pair of contributing pairs; Hermiticity
    // B_{m1m2,m3m4} = conj(B_{m4m3,m2m1}) halves the sampled channels
    const std::size_t np = pairs.size();
    std::vector<std::vector<cplx>> B(np * np);
    std::map<std::string, std::vector<double>> t_cache;  // per aux channel, slots flattened
    SampledPolarizability out;

    auto aux_estimates = [&](int ma, int mb, int mc, int md) {
        const std::string key = std::to_string(ma) + "." + std::to_string(mb) + "." +
                                std::to_string(mc) + "." + std::to_string(md);
        auto it = t_cache.find(key);
        if (it == t_cache.end()) {
            const auto est = sample_generic_aux(gs, eigs, bins, ma, mb, mc, md, cfg);
            std::vector<double> flat = est.estimates(0);
            const auto em = est.estimates(1);
            flat.insert(flat.end(), em.begin(), em.end());
            it = t_cache.emplace(key, std::move(flat)).first;
            out.channels_sampled += 1;
            double sink = est.sink_mass(0) + est.sink_mass(1);
            out.sink_mass["Ba:" + key] = sink;
        }
        return it->second;
    };

    for (std::size_t a = 0; a < np; ++a)
        for (std::size_t b = 0; b < np; ++b) {
            if (!B[a * np + b].empty()) continue;
            const int m1 = pairs[a].m1, m2 = pairs[a].m2;
            const int m3 = pairs[b].m1, m4 = pairs[b].m2;
            std::vector<cplx> val;
            if (m2 == m3 && m1 == m4) {
                // B_{m1 m2, m2 m1} = |<lambda| a+_{m2} a_{m1} |gs>|^2: diagonal circuit
                const auto est = sample_generic_diag(gs, eigs, bins, m2, m1, cfg);
                const auto e = est.estimates(0);
                val.assign(e.begin(), e.end());
                out.channels_sampled += 1;
                out.sink_mass["Bd:" + std::to_string(m2) + "," + std::to_string(m1)] =
                    est.sink_mass(0);
            } else {
                const auto t_fwd = aux_estimates(m2, m1, m3, m4);
                const auto t_rev = aux_estimates(m3, m4, m2, m1);
                const std::size_t nb = bins.size();
                std::vector<double> tp(t_fwd.begin(), t_fwd.begin() + nb);
                std::vector<double> tm(t_fwd.begin() + nb, t_fwd.end());
                std::vector<double> tpr(t_rev.begin(), t_rev.begin() + nb);
                std::vector<double> tmr(t_rev.begin() + nb, t_rev.end());
                val = assemble_generic_offdiag(tp, tm, tpr, tmr);
            }
            B[a * np + b] = val;
            // Hermitian partner: B_{m4 m3, m2 m1} = conj(B_{m1 m2, m3 m4})
            for (std::size_t ar = 0; ar < np; ++ar) {
                if (pairs[ar].m1 != m4 || pairs[ar].m2 != m3) continue;
                for (std::size_t br = 0; br < np; ++br) {
                    if (pairs[br].m1 != m2 || pairs[br].m2 != m1) continue;
                    if (B[ar * np + br].empty()) {
                        std::vector<cplx> conjv(val.size());
                        for (std::size_t l = 0; l < val.size(); ++l) conjv[l] = std::conj(val[l]);
                        B[ar * np + br] = std::move(conjv);
                    }
                }
            }
        }

    // L_{lambda j j'} = sum_{ab} c^j_a c^{j'}_b B_{ab}; alpha = -chi
    const std::size_t nw = cfg.omegas.size();
    out.omegas = cfg.omegas;
    out.delta = cfg.delta;
    out.alpha.assign(nw, Eigen::Matrix3cd::Zero());
    for (int j = 0; j < 3; ++j)
        for (int jp = 0; jp < 3; ++jp) {
            std::vector<cplx> L(bins.size(), cplx(0, 0));
            for (std::size_t a = 0; a < np; ++a) {
                if (coeff[a][j] == 0.0) continue;
                for (std::size_t b = 0; b < np; ++b) {
                    if (coeff[b][jp] == 0.0) continue;
                    const auto& Bab = B[a * np + b];
                    for (std::size_t l = 0; l < bins.size(); ++l)
                        L[l] += coeff[a][j] * coeff[b][jp] * Bab[l];
                }
            }
            for (std::size_t iw = 0; iw < nw; ++iw) {
                const cplx zp(cfg.omegas[iw], cfg.delta);
                cplx acc(0, 0);
                for (std::size_t l = 0; l < bins.size(); ++l) {
                    const double de = bins.energies[l] - e_gs;
                    acc += L[l] / (zp - de) + std::conj(L[l]) / (-zp - de);
                }
                out.alpha[iw](j, jp) = -acc;
            }
        }
    return out;
}

} // namespace qlr
