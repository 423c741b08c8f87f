#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qlr/circuits.hpp"
#include "qlr/fci.hpp"
#include "qlr/fock.hpp"
#include "qlr/lehmann.hpp"
#include "qlr/rng.hpp"

namespace qlr {

struct SamplingConfig {
    // exact_weights substitutes the exact outcome probabilities for the
    // tallies: the identity check that the assembly algebra is exact
    enum class Mode { eigenbasis, circuit, exact_weights };

    uint64_t n_meas = 10000;
    uint64_t seed = 1;
    Mode mode = Mode::eigenbasis;
    double delta = 0.01;
    std::vector<double> omegas;
    // optional per-channel-class shot overrides ("charge", "spin",
    // "spin_charge", "generic"); absent keys fall back to n_meas
    std::map<std::string, uint64_t> n_meas_by_class;

    uint64_t shots_for(const std::string& cls) const {
        auto it = n_meas_by_class.find(cls);
        return it == n_meas_by_class.end() ? n_meas : it->second;
    }
};

// tallies of one sampled channel; estimates are counts * scale / n_meas
struct ChannelEstimates {
    std::vector<std::vector<int64_t>> counts;  // [slot][bin]
    std::vector<int64_t> sink_counts;          // [slot]
    int64_t discarded = 0;                     // shots on outcomes of no interest
    uint64_t n_meas = 0;
    double estimate_scale = 1.0;
    // exact-substitution results (Mode::exact_weights); overrides the tallies
    std::vector<std::vector<double>> exact_est;
    std::vector<double> exact_sink;

    std::vector<double> estimates(int slot) const;
    double sink_mass(int slot) const;  // raw probability estimate of the sink
};

// joint distribution over (ancilla outcome of interest, energy bin); one
// categorical draw per shot is distributionally identical to measuring the
// ancillae and then running ideal QPE
struct ChannelDistribution {
    int n_slots = 0;
    std::size_t n_bins = 0;
    std::vector<double> probs;  // [slot * (n_bins+1) + bin], last entry = sink
    double fail_prob = 0.0;

    double slot_prob(int slot) const;
};

// prepared register states per slot (linear combinations may span sectors)
using PreparedSlots = std::vector<std::vector<FockVector>>;

// the operator each tally slot of a response circuit prepares, applied to gs
// at the fock level; slot order matches the circuit's outcome table
PreparedSlots prepared_operator_slots(CircuitKind kind, const CircuitIndices& idx,
                                      const FockVector& gs);

ChannelDistribution distribution_eigenbasis(const PreparedSlots& slots, const EigenSet& eigs,
                                            const EnergyBins& bins);

// full circuit execution: state vector once, Born weights per outcome of
// interest, QPE weights from register overlaps with the eigenvectors
ChannelDistribution distribution_circuit(const ResponseCircuit& circuit, const FockVector& gs,
                                         const EigenSet& eigs, const EnergyBins& bins);

// one ideal-QPE draw: energy bin with probability |<lambda|state>|^2, sink for
// the mass outside the kept eigenpairs. `state` need not be normalized; the
// residual probability is treated as sink as well.
int ideal_qpe_sample(const std::vector<FockVector>& state_parts, const EigenSet& eigs,
                     const EnergyBins& bins, RngStream& rng);

ChannelEstimates run_channel(const ChannelDistribution& dist, double estimate_scale,
                             uint64_t n_meas, const CounterRng& stream);

// deterministic RNG stream id per channel
uint64_t channel_stream_id(const std::string& tag);

// ---- per-channel samplers (Algorithms 2, 4, 6, 7, 8/9 aux parts) ----------

ChannelEstimates sample_charge_diag(const FockVector& gs, const EigenSet& eigs,
                                    const EnergyBins& bins, int p, Spin sigma,
                                    const SamplingConfig& cfg);

ChannelEstimates sample_charge_aux(const FockVector& gs, const EigenSet& eigs,
                                   const EnergyBins& bins, int p, Spin sigma, int pp,
                                   Spin sigmap, const SamplingConfig& cfg);

ChannelEstimates sample_spin_diag(const FockVector& gs, const EigenSet& eigs,
                                  const EnergyBins& bins, int p, SpinAxis j,
                                  const SamplingConfig& cfg);

ChannelEstimates sample_spin_aux(const FockVector& gs, const EigenSet& eigs,
                                 const EnergyBins& bins, int p, SpinAxis j, int pp, SpinAxis jp,
                                 const SamplingConfig& cfg);

ChannelEstimates sample_spin_charge_aux(const FockVector& gs, const EigenSet& eigs,
                                        const EnergyBins& bins, int p, SpinAxis j, int pp,
                                        Spin sigmap, int nu, const SamplingConfig& cfg);

ChannelEstimates sample_generic_diag(const FockVector& gs, const EigenSet& eigs,
                                     const EnergyBins& bins, int m1, int m2,
                                     const SamplingConfig& cfg);

ChannelEstimates sample_generic_aux(const FockVector& gs, const EigenSet& eigs,
                                    const EnergyBins& bins, int ma, int mb, int mc, int md,
                                    const SamplingConfig& cfg);

// ---- pure-algebra assemblers (Algorithms 3, 5, 7 and the generic variant) --

std::vector<cplx> assemble_charge_offdiag(const std::vector<double>& t_plus,
                                          const std::vector<double>& t_minus,
                                          const std::vector<double>& t_plus_rev,
                                          const std::vector<double>& t_minus_rev);

std::vector<cplx> assemble_spin_offdiag(const std::vector<double>& t_plus,
                                        const std::vector<double>& t_minus,
                                        const std::vector<double>& t_plus_rev,
                                        const std::vector<double>& t_minus_rev);

std::vector<cplx> assemble_spin_charge(const std::vector<double>& t_plus,
                                       const std::vector<double>& t_minus,
                                       const std::vector<double>& s_diag,
                                       const std::vector<double>& n_diag);

std::vector<cplx> assemble_generic_offdiag(const std::vector<double>& t_plus,
                                           const std::vector<double>& t_minus,
                                           const std::vector<double>& t_plus_rev,
                                           const std::vector<double>& t_minus_rev);

// ---- main procedure (Algorithm 1) ------------------------------------------

struct SampledResponse {
    ResponseGrid grid;
    std::map<std::string, double> sink_mass;  // per channel tag
    std::map<std::string, uint64_t> shots;    // per channel tag
};

SampledResponse calc_resp_funcs(const FockVector& gs, double e_gs, const EigenSet& eigs,
                                const SamplingConfig& cfg);

// ---- generic-operator pipeline for the photoabsorption cross section -------

struct SampledPolarizability {
    std::vector<double> omegas;
    double delta = 0.0;
    std::vector<Eigen::Matrix3cd> alpha;
    std::map<std::string, double> sink_mass;
    uint64_t channels_sampled = 0;
};

SampledPolarizability sample_polarizability(const std::vector<OneBodyOperator>& dipoles,
                                            const FockVector& gs, double e_gs,
                                            const EigenSet& eigs, const SamplingConfig& cfg);

} // namespace qlr
