#include "qlr/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qlr/constants.hpp"
#include "qlr/errors.hpp"
#include "qlr/fci.hpp"
#include "qlr/lehmann.hpp"
#include "qlr/model.hpp"
#include "qlr/qubitsim.hpp"
#include "qlr/sampling.hpp"

namespace qlr {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
    std::string hamiltonian;
    std::string dipoles;
    std::string model;
    double model_t = 1.0;
    double model_u = 4.0;
    std::string sector;  // "na,nb" override
    int k_eigen = 2000;
    double delta = 0.01;
    double omega_min = 0.0;
    double omega_max = 2.0;
    double omega_step = 1e-3;
    uint64_t n_meas = 10000;
    uint64_t seed = 1;
    std::string mode = "exact";  // exact | eigenbasis | circuit
    bool with_exact = false;
    std::string units = "ha";
    std::string out_dir = "qlr_out";
    std::string cache_dir;
    std::size_t budget_mb = 256;
};

Hamiltonian load_system(const RunConfig& cfg) {
    if (!cfg.model.empty()) {
        if (cfg.model == "hubbard-dimer") return build_hubbard_dimer(cfg.model_t, cfg.model_u);
        throw FormatError("unknown model: " + cfg.model);
    }
    if (cfg.hamiltonian.empty())
        throw FormatError("either --hamiltonian or --model is required");
    return load_fcidump(cfg.hamiltonian);
}

std::vector<double> omega_grid(const RunConfig& cfg) {
    if (cfg.omega_step <= 0) throw DomainError("omega step must be positive");
    if (cfg.delta <= 0) throw DomainError("delta must be positive");
    std::vector<double> om;
    for (double w = cfg.omega_min; w <= cfg.omega_max + 1e-12 * cfg.omega_step; w += cfg.omega_step)
        om.push_back(w);
    return om;
}

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--hamiltonian", cfg.hamiltonian, "FCIDUMP-style Hamiltonian file");
    cmd->add_option("--model", cfg.model, "built-in model (hubbard-dimer)");
    cmd->add_option("--t", cfg.model_t, "model hopping");
    cmd->add_option("--u", cfg.model_u, "model on-site repulsion");
    cmd->add_option("--sector", cfg.sector, "sector override na,nb");
    cmd->add_option("--k-eigen", cfg.k_eigen, "eigenpairs kept per sector");
    cmd->add_option("--delta", cfg.delta, "broadening (Hartree)");
    cmd->add_option("--omega-min", cfg.omega_min, "grid start (Hartree)");
    cmd->add_option("--omega-max", cfg.omega_max, "grid end (Hartree)");
    cmd->add_option("--omega-step", cfg.omega_step, "grid step (Hartree)");
    cmd->add_option("--n-meas", cfg.n_meas, "measurement shots per component");
    cmd->add_option("--seed", cfg.seed, "global RNG seed");
    cmd->add_option("--mode", cfg.mode, "exact | eigenbasis | circuit");
    cmd->add_flag("--with-exact", cfg.with_exact, "emit the exact curve next to sampled output");
    cmd->add_option("--units", cfg.units, "reported energy unit: ha | ev");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--cache-dir", cfg.cache_dir, "eigenpair disk cache directory");
    cmd->add_option("--budget-mb", cfg.budget_mb, "explicit-matrix memory budget (MiB)");
}

double report_energy(const RunConfig& cfg, double ha) {
    return cfg.units == "ev" ? ha_to_ev(ha) : ha;
}

Sector parse_sector(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw FormatError("sector must be na,nb");
    return Sector{std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw FormatError("cannot write " + p.string());
    out << text;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// shared ground-state setup used by respond and spectrum
struct Prepared {
    Hamiltonian H;
    GroundStateInfo info;
    FockVector gs;
    double e_gs = 0.0;
    SpectrumCache cache;

    Prepared(const RunConfig& cfg)
        : H(load_system(cfg)),
          cache(H, cfg.seed, cfg.budget_mb << 20, cfg.cache_dir) {
        info = ground_state(H, cfg.seed, cfg.budget_mb << 20);
        if (info.degenerate)
            throw DegenerateGroundState("ground state is degenerate (gap " +
                                        std::to_string(info.gap) + " Ha)");
        const EigenSolution& sol = cache.ensure(info.sector, 1);
        gs = FockVector{sol.basis, sol.vectors.col(0).cast<cplx>()};
        e_gs = sol.energies[0];
    }

    EigenSet eigen_set(const RunConfig& cfg, bool with_adjacent) {
        EigenSet eigs;
        const int k = cfg.k_eigen;
        eigs[info.sector] = &cache.ensure(info.sector, k);
        if (with_adjacent) {
            const int n = H.n_orbs;
            for (int d : {+1, -1}) {
                Sector adj{info.sector.n_alpha + d, info.sector.n_beta - d};
                if (adj.n_alpha < 0 || adj.n_beta < 0 || adj.n_alpha > n || adj.n_beta > n)
                    continue;
                eigs[adj] = &cache.ensure(adj, k);
            }
        }
        return eigs;
    }
};

std::string component_label(int p, OutChannel c) {
    return std::to_string(p + 1) + channel_name(c);
}

std::string grid_csv(const ResponseGrid& grid) {
    std::string out = "omega,component_row,component_col,re_chi,im_chi\n";
    char buf[160];
    const int n = grid.n_orbs;
    for (int r = 0; r < 4 * n; ++r)
        for (int c = 0; c < 4 * n; ++c) {
            const std::size_t s = grid.slot(r, c);
            if (!grid.filled[s]) continue;
            const auto row = component_label(r / 4, static_cast<OutChannel>(r % 4));
            const auto col = component_label(c / 4, static_cast<OutChannel>(c % 4));
            for (std::size_t w = 0; w < grid.omegas.size(); ++w) {
                std::snprintf(buf, sizeof(buf), "%.12e,%s,%s,%.12e,%.12e\n", grid.omegas[w],
                              row.c_str(), col.c_str(), grid.values[s][w].real(),
                              grid.values[s][w].imag());
                out += buf;
            }
        }
    return out;
}

json partial_components(const ResponseGrid& grid) {
    json arr = json::array();
    const int n = grid.n_orbs;
    for (int r = 0; r < 4 * n; ++r)
        for (int c = 0; c < 4 * n; ++c)
            if (grid.filled[grid.slot(r, c)] == 2)
                arr.push_back(component_label(r / 4, static_cast<OutChannel>(r % 4)) + "|" +
                              component_label(c / 4, static_cast<OutChannel>(c % 4)));
    return arr;
}

int cmd_fci(const RunConfig& cfg) {
    Timer timer;
    Hamiltonian H = load_system(cfg);
    SpectrumCache cache(H, cfg.seed, cfg.budget_mb << 20, cfg.cache_dir);

    json sectors = json::array();
    const int N = H.n_electrons;
    const int n = H.n_orbs;
    std::vector<std::pair<double, Sector>> lowest;
    if (!cfg.sector.empty()) {
        const Sector sec = parse_sector(cfg.sector);
        auto basis = enumerate_determinants(n, sec);
        const int k = static_cast<int>(
            std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.k_eigen, 2)), basis->size()));
        const EigenSolution& sol = cache.ensure(sec, k);
        for (int i = 0; i < sol.k_kept; ++i) lowest.emplace_back(sol.energies[i], sec);
        sectors.push_back({{"n_alpha", sec.n_alpha},
                           {"n_beta", sec.n_beta},
                           {"dim", basis->size()},
                           {"lowest_ha", sol.energies}});
    } else {
        for (int na = std::max(0, N - n); na <= std::min(n, N); ++na) {
            const int nb = N - na;
            if (na < nb) continue;
            const Sector sec{na, nb};
            auto basis = enumerate_determinants(n, sec);
            const int k = static_cast<int>(std::min<std::size_t>(2, basis->size()));
            const EigenSolution& sol = cache.ensure(sec, k);
            std::vector<double> lows(sol.energies.begin(), sol.energies.begin() + sol.k_kept);
            sectors.push_back({{"n_alpha", na},
                               {"n_beta", nb},
                               {"dim", basis->size()},
                               {"lowest_ha", lows}});
            for (double e : lows) {
                lowest.emplace_back(e, sec);
                if (na != nb) lowest.emplace_back(e, Sector{nb, na});
            }
        }
    }
    std::sort(lowest.begin(), lowest.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const Sector gs_sector = lowest[0].second;
    const double gap = lowest.size() > 1 ? lowest[1].first - lowest[0].first : 1e300;
    const bool degenerate = gap < kDegeneracyTol;

    auto basis = enumerate_determinants(n, gs_sector);
    const int k =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.k_eigen), basis->size()));
    const EigenSolution& sol = cache.ensure(gs_sector, k);

    std::vector<double> e_ev(sol.energies.size());
    for (std::size_t i = 0; i < e_ev.size(); ++i) e_ev[i] = ha_to_ev(sol.energies[i]);

    json doc{{"n_orbs", n},
             {"n_electrons", N},
             {"units", cfg.units},
             {"k", sol.k_kept},
             {"sectors", sectors},
             {"ground",
              {{"sector", {gs_sector.n_alpha, gs_sector.n_beta}},
               {"energy_ha", sol.energies[0]},
               {"energy_ev", ha_to_ev(sol.energies[0])},
               {"degenerate", degenerate},
               {"gap_ha", gap}}},
             {"energies_ha", sol.energies},
             {"energies_ev", e_ev},
             {"elapsed_s", timer.seconds()}};

    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "fci.json", doc.dump(2) + "\n");

    std::printf("ground sector (%d,%d)  E0 = %.7f %s%s\n", gs_sector.n_alpha, gs_sector.n_beta,
                report_energy(cfg, sol.energies[0]), cfg.units == "ev" ? "eV" : "Ha",
                degenerate ? "  [degenerate]" : "");
    for (int i = 0; i < std::min(sol.k_kept, 10); ++i)
        std::printf("  E%-3d %.7f %s\n", i, report_energy(cfg, sol.energies[i]),
                    cfg.units == "ev" ? "eV" : "Ha");
    return degenerate ? 4 : 0;
}

int cmd_respond(const RunConfig& cfg) {
    Timer timer;
    Prepared prep(cfg);
    const std::vector<double> omegas = omega_grid(cfg);
    fs::create_directories(cfg.out_dir);

    json meta{{"command", "respond"},
              {"mode", cfg.mode},
              {"delta", cfg.delta},
              {"seed", cfg.seed},
              {"n_meas", cfg.n_meas},
              {"k_eigen", cfg.k_eigen},
              {"omega", {{"min", cfg.omega_min}, {"max", cfg.omega_max}, {"step", cfg.omega_step}}},
              {"ground_sector", {prep.info.sector.n_alpha, prep.info.sector.n_beta}},
              {"e_gs_ha", prep.e_gs}};

    if (cfg.mode == "exact") {
        EigenSet eigs = prep.eigen_set(cfg, true);
        ChiTmpTable tmp = exact_chi_tmp(prep.gs, prep.e_gs, eigs, omegas, cfg.delta);
        ResponseGrid grid = assemble_components(tmp);
        write_text(fs::path(cfg.out_dir) / "response.csv", grid_csv(grid));
        meta["elapsed_s"] = timer.seconds();
        write_text(fs::path(cfg.out_dir) / "metadata.json", meta.dump(2) + "\n");
    } else if (cfg.mode == "eigenbasis" || cfg.mode == "circuit") {
        EigenSet eigs = prep.eigen_set(cfg, true);
        SamplingConfig scfg;
        scfg.n_meas = cfg.n_meas;
        scfg.seed = cfg.seed;
        scfg.mode = cfg.mode == "circuit" ? SamplingConfig::Mode::circuit
                                          : SamplingConfig::Mode::eigenbasis;
        scfg.delta = cfg.delta;
        scfg.omegas = omegas;
        SampledResponse res = calc_resp_funcs(prep.gs, prep.e_gs, eigs, scfg);
        write_text(fs::path(cfg.out_dir) / "response.csv", grid_csv(res.grid));
        meta["sink_mass"] = res.sink_mass;
        meta["shots"] = res.shots;
        meta["partial_components"] = partial_components(res.grid);
        if (cfg.with_exact) {
            ChiTmpTable tmp = exact_chi_tmp(prep.gs, prep.e_gs, eigs, omegas, cfg.delta);
            write_text(fs::path(cfg.out_dir) / "response_exact.csv",
                       grid_csv(assemble_components(tmp)));
        }
        meta["elapsed_s"] = timer.seconds();
        write_text(fs::path(cfg.out_dir) / "metadata.json", meta.dump(2) + "\n");
    } else {
        throw FormatError("unknown mode: " + cfg.mode);
    }
    std::printf("response written to %s (%zu grid points)\n", cfg.out_dir.c_str(), omegas.size());
    return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
    Timer timer;
    Prepared prep(cfg);
    if (cfg.dipoles.empty()) throw FormatError("spectrum requires --dipoles");
    const auto ops = load_onebody_operators(cfg.dipoles, prep.H.n_orbs);
    std::vector<OneBodyOperator> dip(3);
    bool have[3] = {false, false, false};
    for (const auto& op : ops) {
        if (op.label == "x") { dip[0] = op; have[0] = true; }
        if (op.label == "y") { dip[1] = op; have[1] = true; }
        if (op.label == "z") { dip[2] = op; have[2] = true; }
    }
    if (!have[0] && !have[1] && !have[2]) throw FormatError("no dipole data (labels x/y/z) found");
    for (int j = 0; j < 3; ++j)
        if (!have[j])
            dip[j] = OneBodyOperator{std::string(1, "xyz"[j]),
                                     Eigen::MatrixXd::Zero(prep.H.n_orbs, prep.H.n_orbs), true};

    const std::vector<double> omegas = omega_grid(cfg);
    EigenSet eigs = prep.eigen_set(cfg, false);

    PolarizabilityGrid exact = polarizability(dip, prep.gs, prep.e_gs, eigs, omegas, cfg.delta);
    std::vector<double> sigma_exact(omegas.size());
    for (std::size_t w = 0; w < omegas.size(); ++w)
        sigma_exact[w] = cross_section(exact.alpha[w], omegas[w]);

    json meta{{"command", "spectrum"},
              {"mode", cfg.mode},
              {"delta", cfg.delta},
              {"seed", cfg.seed},
              {"k_eigen", cfg.k_eigen},
              {"ground_sector", {prep.info.sector.n_alpha, prep.info.sector.n_beta}},
              {"e_gs_ha", prep.e_gs}};

    std::string csv;
    char buf[128];
    if (cfg.mode == "exact") {
        csv = "omega,sigma_exact\n";
        for (std::size_t w = 0; w < omegas.size(); ++w) {
            std::snprintf(buf, sizeof(buf), "%.12e,%.12e\n", omegas[w], sigma_exact[w]);
            csv += buf;
        }
    } else {
        SamplingConfig scfg;
        scfg.n_meas = cfg.n_meas;
        scfg.seed = cfg.seed;
        scfg.mode = cfg.mode == "circuit" ? SamplingConfig::Mode::circuit
                                          : SamplingConfig::Mode::eigenbasis;
        scfg.delta = cfg.delta;
        scfg.omegas = omegas;
        SampledPolarizability samp = sample_polarizability(dip, prep.gs, prep.e_gs, eigs, scfg);
        int negatives = 0;
        csv = "omega,sigma_exact,sigma_sampled\n";
        for (std::size_t w = 0; w < omegas.size(); ++w) {
            const double s = cross_section(samp.alpha[w], omegas[w]);
            if (s < 0) ++negatives;
            std::snprintf(buf, sizeof(buf), "%.12e,%.12e,%.12e\n", omegas[w], sigma_exact[w], s);
            csv += buf;
        }
        meta["n_meas"] = cfg.n_meas;
        meta["negative_sigma_points"] = negatives;
        meta["channels_sampled"] = samp.channels_sampled;
        meta["sink_mass"] = samp.sink_mass;
    }
    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "spectrum.csv", csv);
    meta["elapsed_s"] = timer.seconds();
    write_text(fs::path(cfg.out_dir) / "metadata.json", meta.dump(2) + "\n");
    std::printf("spectrum written to %s\n", cfg.out_dir.c_str());
    return 0;
}

// shared by the verify suites: random normalized FockVector with a seeded stream
FockVector random_fock_vector(const BasisPtr& basis, RngStream& rng) {
    FockVector v = FockVector::zero(basis);
    for (Eigen::Index i = 0; i < v.amps.size(); ++i)
        v.amps[i] = cplx(rng.next() - 0.5, rng.next() - 0.5);
    v.amps /= v.amps.norm();
    return v;
}

// map sector-tagged parts into the register space (unnormalized)
Eigen::VectorXcd parts_to_register(const std::vector<FockVector>& parts, int n_orbs) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(1ll << (2 * n_orbs));
    for (const auto& part : parts) {
        if (part.basis->is_null() || part.amps.size() == 0) continue;
        FockVector unit = part;
        const double nrm = unit.amps.norm();
        if (nrm == 0.0) continue;
        unit.amps /= nrm;
        const QubitState q = prepare_register(unit, 0);
        out += nrm * q.amps;
    }
    return out;
}

Eigen::MatrixXcd haar_unitary(int dim, RngStream& rng) {
    Eigen::MatrixXcd a(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) a(r, c) = cplx(rng.next() - 0.5, rng.next() - 0.5);
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    return qr.householderQ();
}

struct SuiteResult {
    std::string name;
    double tolerance;
    double worst;
    bool pass;
    std::string detail;
};

// every circuit kind against the fock-level operators, random inputs
SuiteResult suite_circuit_oracle(int trials, uint64_t seed) {
    SuiteResult res{"circuit_oracle", 1e-10, 0.0, true, ""};
    const int n_orbs = 2;
    RngStream rng(seed, channel_stream_id("verify_circuit"));
    auto basis = enumerate_determinants(n_orbs, Sector{1, 1});

    struct Case {
        CircuitKind kind;
        CircuitIndices idx;
    };
    std::vector<Case> cases;
    {
        CircuitIndices i;
        i.p = 0;
        i.sigma = Spin::alpha;
        cases.push_back({CircuitKind::charge_diag, i});
        i.pp = 1;
        i.sigmap = Spin::beta;
        cases.push_back({CircuitKind::charge_offdiag, i});
        CircuitIndices j;
        j.p = 0;
        j.j = SpinAxis::x;
        cases.push_back({CircuitKind::spin_diag, j});
        j.jp = SpinAxis::y;
        j.pp = 1;
        cases.push_back({CircuitKind::spin_offdiag, j});
        CircuitIndices k;
        k.p = 0;
        k.j = SpinAxis::y;
        k.pp = 1;
        k.sigmap = Spin::alpha;
        k.nu = +1;
        cases.push_back({CircuitKind::spin_charge, k});
        k.nu = -1;
        cases.push_back({CircuitKind::spin_charge, k});
        CircuitIndices g;
        g.m[0] = 1;
        g.m[1] = 2;
        cases.push_back({CircuitKind::generic_diag, g});
        g.m[2] = 3;
        g.m[3] = 0;
        cases.push_back({CircuitKind::generic_offdiag, g});
    }

    for (const auto& cse : cases) {
        const ResponseCircuit circuit = build_response_circuit(cse.kind, cse.idx, n_orbs);
        for (int t = 0; t < trials; ++t) {
            const FockVector v = random_fock_vector(basis, rng);
            const QubitState input = circuit_input(circuit, v);
            const PreparedSlots slots = prepared_operator_slots(cse.kind, cse.idx, v);
            for (const auto& outcome : circuit.outcomes) {
                if (outcome.tally_slot < 0) continue;
                const auto post = run_postselect(circuit, input, outcome.bits);
                const Eigen::VectorXcd oracle =
                    parts_to_register(slots[outcome.tally_slot], n_orbs);
                const double norm2 = oracle.squaredNorm();
                const double perr = std::abs(post.probability - norm2);
                res.worst = std::max(res.worst, perr);
                if (post.valid && norm2 > 1e-16) {
                    const Eigen::VectorXcd want = oracle / std::sqrt(norm2);
                    const double verr = (post.register_state.amps - want).norm();
                    res.worst = std::max(res.worst, verr);
                }
            }
        }
    }
    res.pass = res.worst <= res.tolerance;
    return res;
}

SuiteResult suite_lcu(int trials, uint64_t seed) {
    SuiteResult res{"lcu_generality", 1e-10, 0.0, true, ""};
    RngStream rng(seed, channel_stream_id("verify_lcu"));
    const int reg = 2;
    for (int n = 1; n <= 2; ++n) {
        for (int t = 0; t < trials; ++t) {
            const int nc = 1 << n;
            std::vector<double> c(nc);
            for (double& x : c) x = 2.0 * rng.next() - 1.0;
            c[0] = 1.0;  // paper's normalization convention
            std::vector<Gate> us;
            std::vector<Eigen::MatrixXcd> mats;
            for (int k = 0; k < nc; ++k) {
                mats.push_back(haar_unitary(1 << reg, rng));
                us.push_back(make_unitary({0, 1}, mats.back()));
            }
            const AngleTree tree = solve_lcu_angles(c);
            const ResponseCircuit circuit = build_lcu_circuit(tree, us, reg);

            QubitState input = QubitState::zero(reg + n);
            Eigen::VectorXcd psi(1 << reg);
            for (int i = 0; i < (1 << reg); ++i) psi[i] = cplx(rng.next() - 0.5, rng.next() - 0.5);
            psi /= psi.norm();
            input.amps.setZero();
            input.amps.segment(0, 1 << reg) = psi;

            const auto post = run_postselect(circuit, input, std::vector<int>(n, 0));
            Eigen::VectorXcd want = Eigen::VectorXcd::Zero(1 << reg);
            for (int k = 0; k < nc; ++k) want += c[k] * (mats[k] * psi);
            if (want.norm() < 1e-12) continue;
            want /= want.norm();
            const double err = (post.register_state.amps - want).norm();
            res.worst = std::max(res.worst, err);
        }
    }
    res.pass = res.worst <= res.tolerance;
    return res;
}

SuiteResult suite_jw_consistency(uint64_t seed) {
    SuiteResult res{"jw_consistency", 1e-12, 0.0, true, ""};
    RngStream rng(seed, channel_stream_id("verify_jw"));
    const int n_orbs = 2;
    for (int na = 0; na <= n_orbs; ++na)
        for (int nb = 0; nb <= n_orbs; ++nb) {
            auto basis = enumerate_determinants(n_orbs, Sector{na, nb});
            const FockVector v = random_fock_vector(basis, rng);
            for (int m = 0; m < 2 * n_orbs; ++m)
                for (int kappa = 0; kappa < 2; ++kappa) {
                    // fock side: a_m +- a+_m via ladder operators
                    FockVector ann = apply_ladder(m, LadderKind::annihilate, v);
                    FockVector cre = apply_ladder(m, LadderKind::create, v);
                    std::vector<FockVector> parts;
                    if (!ann.basis->is_null()) parts.push_back(ann);
                    if (!cre.basis->is_null()) {
                        if (kappa == 1) cre.amps *= -1.0;
                        parts.push_back(cre);
                    }
                    const Eigen::VectorXcd fock_side = parts_to_register(parts, n_orbs);
                    // qubit side: the Majorana Pauli string
                    const QubitState reg = prepare_register(v, 0);
                    QubitState mapped = apply_gate(reg, make_pauli(jw_majorana(m, kappa, 2 * n_orbs)));
                    const double err = (mapped.amps - fock_side).norm();
                    res.worst = std::max(res.worst, err);
                }
        }
    res.pass = res.worst <= res.tolerance;
    return res;
}

SuiteResult suite_unitarity(uint64_t seed) {
    SuiteResult res{"majorana_involution_norm", 1e-12, 0.0, true, ""};
    RngStream rng(seed, channel_stream_id("verify_unit"));
    const int nq = 4;
    QubitState s = QubitState::zero(nq);
    for (Eigen::Index i = 0; i < s.amps.size(); ++i) s.amps[i] = cplx(rng.next() - 0.5, rng.next() - 0.5);
    s.amps /= s.amps.norm();
    for (int m = 0; m < nq; ++m)
        for (int kappa = 0; kappa < 2; ++kappa) {
            const Gate g = make_pauli(jw_majorana(m, kappa, nq));
            QubitState twice = apply_gate(apply_gate(s, g), g);
            // U^2 = +-1: compare against both signs
            const double d1 = (twice.amps - s.amps).norm();
            const double d2 = (twice.amps + s.amps).norm();
            res.worst = std::max(res.worst, std::min(d1, d2));
            res.worst = std::max(res.worst, std::abs(apply_gate(s, g).norm() - 1.0));
        }
    res.pass = res.worst <= res.tolerance;
    return res;
}

SuiteResult suite_sum_rules() {
    SuiteResult res{"sum_rules", 1e-10, 0.0, true, ""};
    const Hamiltonian H = build_hubbard_dimer(1.0, 4.0);
    SpectrumCache cache(H, 7);
    EigenSet eigs;
    for (int na = 0; na <= 2; ++na)
        for (int nb = 0; nb <= 2; ++nb) {
            if (na + nb != 2) continue;
            auto basis = enumerate_determinants(2, Sector{na, nb});
            eigs[Sector{na, nb}] = &cache.ensure(Sector{na, nb}, static_cast<int>(basis->size()));
        }
    const EigenSolution& gsol = cache.ensure(Sector{1, 1}, 4);
    const FockVector gs{gsol.basis, gsol.vectors.col(0).cast<cplx>()};
    const TransitionSet ts = build_transition_set(gs, eigs);

    for (int p = 0; p < 2; ++p)
        for (Spin s : {Spin::alpha, Spin::beta}) {
            const int i = 2 * p + static_cast<int>(s);
            double total = 0.0;
            for (const auto& nmat : ts.N) total += nmat(i, i).real();
            const FockVector nv = apply_number(p, s, gs);
            const double expect = inner(gs, nv).real();
            res.worst = std::max(res.worst, std::abs(total - expect));
        }
    for (int p = 0; p < 2; ++p)
        for (int j = 0; j < 3; ++j) {
            const int i = 3 * p + j;
            double total = 0.0;
            for (const auto& smat : ts.S) total += smat(i, i).real();
            const auto parts = apply_spin(p, static_cast<SpinAxis>(j), gs);
            double expect = 0.0;
            for (const auto& part : parts) expect += part.amps.squaredNorm();
            res.worst = std::max(res.worst, std::abs(total - expect));
        }
    res.pass = res.worst <= res.tolerance;
    return res;
}

SuiteResult suite_hermiticity() {
    SuiteResult res{"transition_hermiticity", 1e-12, 0.0, true, ""};
    const Hamiltonian H = build_hubbard_dimer(1.3, 2.7);
    SpectrumCache cache(H, 7);
    EigenSet eigs;
    for (int na = 0; na <= 2; ++na) {
        const int nb = 2 - na;
        auto basis = enumerate_determinants(2, Sector{na, nb});
        eigs[Sector{na, nb}] = &cache.ensure(Sector{na, nb}, static_cast<int>(basis->size()));
    }
    const EigenSolution& gsol = cache.ensure(Sector{1, 1}, 4);
    const FockVector gs{gsol.basis, gsol.vectors.col(0).cast<cplx>()};
    const TransitionSet ts = build_transition_set(gs, eigs);
    for (const auto& m : ts.N) res.worst = std::max(res.worst, (m - m.adjoint()).norm());
    for (const auto& m : ts.S) res.worst = std::max(res.worst, (m - m.adjoint()).norm());
    for (const auto& m : ts.N)
        for (int i = 0; i < m.rows(); ++i)
            res.worst = std::max(res.worst, std::max(0.0, -m(i, i).real()));
    res.pass = res.worst <= res.tolerance;
    return res;
}

SuiteResult suite_symmetry() {
    SuiteResult res{"chi_symmetry_sigma_positivity", 1e-12, 0.0, true, ""};
    const Hamiltonian H = build_hubbard_dimer(1.0, 4.0);
    SpectrumCache cache(H, 7);
    EigenSet eigs;
    for (int na = 0; na <= 2; ++na) {
        const int nb = 2 - na;
        eigs[Sector{na, nb}] = &cache.ensure(
            Sector{na, nb},
            static_cast<int>(enumerate_determinants(2, Sector{na, nb})->size()));
    }
    const EigenSolution& gsol = cache.ensure(Sector{1, 1}, 4);
    const FockVector gs{gsol.basis, gsol.vectors.col(0).cast<cplx>()};
    const double e_gs = gsol.energies[0];

    std::vector<double> omegas;
    for (double w = -2.0; w <= 2.0 + 1e-9; w += 0.05) omegas.push_back(w);
    const ChiTmpTable tmp = exact_chi_tmp(gs, e_gs, eigs, omegas, 0.01);
    const ResponseGrid grid = assemble_components(tmp);
    const std::size_t nw = omegas.size();
    for (int lab = 0; lab < 8; ++lab) {
        const auto* v = grid.get(lab / 4, static_cast<OutChannel>(lab % 4), lab / 4,
                                 static_cast<OutChannel>(lab % 4));
        for (std::size_t w = 0; w < nw; ++w) {
            const std::size_t wm = nw - 1 - w;  // omega -> -omega on the symmetric grid
            res.worst = std::max(res.worst, std::abs((*v)[w] - std::conj((*v)[wm])));
        }
    }

    // positivity of the exact cross section, dipole along the dimer axis
    std::vector<OneBodyOperator> dip(3);
    for (int j = 0; j < 3; ++j)
        dip[j] = OneBodyOperator{std::string(1, "xyz"[j]), Eigen::MatrixXd::Zero(2, 2), true};
    dip[0].mat(0, 0) = -0.5;
    dip[0].mat(1, 1) = 0.5;
    std::vector<double> wpos;
    for (double w = 0.0; w <= 8.0 + 1e-9; w += 0.01) wpos.push_back(w);
    const PolarizabilityGrid pol = polarizability(dip, gs, e_gs, eigs, wpos, 0.01);
    for (std::size_t w = 0; w < wpos.size(); ++w)
        res.worst = std::max(res.worst, -cross_section(pol.alpha[w], wpos[w]));
    res.pass = res.worst <= res.tolerance;
    return res;
}

int cmd_verify(const RunConfig& cfg) {
    Timer timer;
    std::vector<SuiteResult> suites;
    suites.push_back(suite_jw_consistency(cfg.seed));
    suites.push_back(suite_circuit_oracle(30, cfg.seed));
    suites.push_back(suite_lcu(30, cfg.seed));
    suites.push_back(suite_unitarity(cfg.seed));
    suites.push_back(suite_sum_rules());
    suites.push_back(suite_hermiticity());
    suites.push_back(suite_symmetry());

    bool all = true;
    json arr = json::array();
    for (const auto& s : suites) {
        all = all && s.pass;
        std::printf("[%s] %-32s worst %.3e  tol %.1e\n", s.pass ? "PASS" : "FAIL", s.name.c_str(),
                    s.worst, s.tolerance);
        arr.push_back({{"name", s.name}, {"pass", s.pass}, {"tolerance", s.tolerance},
                       {"worst", s.worst}});
    }
    json doc{{"command", "verify"}, {"pass", all}, {"suites", arr}, {"elapsed_s", timer.seconds()}};
    fs::create_directories(cfg.out_dir);
    write_text(fs::path(cfg.out_dir) / "verify.json", doc.dump(2) + "\n");
    return all ? 0 : 3;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"exact and sampled linear-response functions of small fermionic systems"};
    app.set_config("--config", "", "key=value configuration file; flags override it");
    RunConfig cfg;

    CLI::App* fci = app.add_subcommand("fci", "diagonalize and report eigenvalues");
    add_common(fci, cfg);
    CLI::App* respond = app.add_subcommand("respond", "charge/spin response functions");
    add_common(respond, cfg);
    CLI::App* spectrum = app.add_subcommand("spectrum", "photoabsorption cross section");
    add_common(spectrum, cfg);
    spectrum->add_option("--dipoles", cfg.dipoles, "one-body position matrix element file");
    CLI::App* verify = app.add_subcommand("verify", "run the invariant suites");
    add_common(verify, cfg);
    app.require_subcommand(1);

    std::vector<const char*> argv;
    argv.push_back("qlr");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (fci->parsed()) return cmd_fci(cfg);
        if (respond->parsed()) return cmd_respond(cfg);
        if (spectrum->parsed()) return cmd_spectrum(cfg);
        if (verify->parsed()) return cmd_verify(cfg);
    } catch (const DegenerateGroundState& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ResourceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}

} // namespace qlr
