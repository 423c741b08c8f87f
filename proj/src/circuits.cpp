#include "qlr/circuits.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "qlr/errors.hpp"

namespace qlr {

AngleTree solve_lcu_angles(const std::vector<double>& c) {
    const std::size_t size = c.size();
    if (size == 0 || (size & (size - 1)) != 0)
        throw DomainError("coefficient count must be a power of two");
    bool any = false;
    for (double v : c) any = any || v != 0.0;
    if (!any) throw DomainError("all-zero coefficient vector");

    int n = 0;
    while ((1ull << n) < size) ++n;

    AngleTree tree;
    tree.n = n;
    tree.levels.resize(n);
    std::vector<double> cur = c;  // subtree amplitudes, leaf level
    for (int j = 1; j <= n; ++j) {
        const std::size_t m = cur.size() / 2;
        std::vector<double> parent(m);
        std::vector<double> angles(m);
        for (std::size_t t = 0; t < m; ++t) {
            // branch (cos, sin) reproduces (cur[2t], cur[2t+1]) with radius >= 0
            angles[t] = std::atan2(cur[2 * t + 1], cur[2 * t]);
            parent[t] = std::hypot(cur[2 * t], cur[2 * t + 1]);
        }
        tree.levels[j - 1] = std::move(angles);
        cur = std::move(parent);
    }
    return tree;
}

const char* kind_name(CircuitKind k) {
    switch (k) {
        case CircuitKind::charge_diag: return "charge_diag";
        case CircuitKind::charge_offdiag: return "charge_offdiag";
        case CircuitKind::spin_diag: return "spin_diag";
        case CircuitKind::spin_offdiag: return "spin_offdiag";
        case CircuitKind::spin_charge: return "spin_charge";
        case CircuitKind::generic_diag: return "generic_diag";
        case CircuitKind::generic_offdiag: return "generic_offdiag";
        case CircuitKind::lcu_generic: return "lcu_generic";
    }
    return "?";
}

int ancilla_count_for(CircuitKind k) {
    switch (k) {
        case CircuitKind::charge_diag: return 2;
        case CircuitKind::charge_offdiag: return 3;
        case CircuitKind::spin_diag: return 1;
        case CircuitKind::spin_offdiag: return 2;
        case CircuitKind::spin_charge: return 3;
        case CircuitKind::generic_diag: return 2;
        case CircuitKind::generic_offdiag: return 3;
        case CircuitKind::lcu_generic: return -1;  // depends on the tree
    }
    return 0;
}

const OutcomeInfo* ResponseCircuit::find_outcome(const std::vector<int>& bits) const {
    for (const auto& o : outcomes)
        if (o.bits == bits) return &o;
    return nullptr;
}

std::string ResponseCircuit::dump() const {
    std::ostringstream oss;
    oss << "# " << kind_name(kind) << " register=" << register_qubits
        << " ancillae=" << ancilla_count << "\n";
    for (const auto& g : gates) oss << g.to_string() << "\n";
    oss << "measure:";
    for (int q : measured) oss << " q" << q;
    oss << "\n";
    for (const auto& o : outcomes) {
        oss << "outcome";
        for (int b : o.bits) oss << " " << b;
        oss << " -> " << o.op_label << (o.tally_slot >= 0 ? "" : " (discard)") << "\n";
    }
    return oss.str();
}

namespace {

// U^{(m1 m2)}_{kk'} = U_{k m1} U_{k' m2}
PauliString pair_unitary(int m1, int m2, int k, int kp, int n_reg) {
    return jw_majorana(m1, k, n_reg) * jw_majorana(m2, kp, n_reg);
}

// the four spin unitaries U^{(p)}_{0x}, U^{(p)}_{1x}, U^{(p)}_{0y}, U^{(p)}_{1y}
PauliString spin_unitary(int p, SpinAxis j, int k, int n_reg) {
    const int ma = spin_orbital(p, Spin::alpha);
    const int mb = spin_orbital(p, Spin::beta);
    if (j == SpinAxis::x) {
        if (k == 0) return jw_majorana(ma, 0, n_reg) * jw_majorana(mb, 1, n_reg);
        return -(jw_majorana(ma, 1, n_reg) * jw_majorana(mb, 0, n_reg));
    }
    if (j == SpinAxis::y) {
        PauliString s = (k == 0) ? jw_majorana(ma, 0, n_reg) * jw_majorana(mb, 0, n_reg)
                                 : jw_majorana(ma, 1, n_reg) * jw_majorana(mb, 1, n_reg);
        s.phase *= (k == 0) ? cplx(0, -1) : cplx(0, 1);
        return s;
    }
    throw DomainError("spin circuits exist for the x and y axes only");
}

// dashed-block of the diagonal circuits: the four controlled pair unitaries
void emit_pair_block(std::vector<Gate>& gates, int m1, int m2, int q_hi, int q_lo, int n_reg,
                     std::vector<std::pair<int, int>> extra_controls) {
    for (int k = 0; k < 2; ++k)
        for (int kp = 0; kp < 2; ++kp) {
            auto controls = extra_controls;
            controls.emplace_back(q_hi, k);
            controls.emplace_back(q_lo, kp);
            gates.push_back(make_pauli(pair_unitary(m1, m2, k, kp, n_reg), std::move(controls)));
        }
}

// dashed-block of the spin circuits: two controlled spin unitaries
void emit_spin_block(std::vector<Gate>& gates, int p, SpinAxis j, int q, int n_reg,
                     std::vector<std::pair<int, int>> extra_controls) {
    for (int k = 0; k < 2; ++k) {
        auto controls = extra_controls;
        controls.emplace_back(q, k);
        gates.push_back(make_pauli(spin_unitary(p, j, k, n_reg), std::move(controls)));
    }
}

std::string spin_orb_name(int p, Spin s) {
    return std::to_string(p) + (s == Spin::alpha ? "a" : "b");
}
std::string axis_name(SpinAxis j) { return j == SpinAxis::x ? "x" : (j == SpinAxis::y ? "y" : "z"); }

} // namespace

ResponseCircuit build_response_circuit(CircuitKind kind, const CircuitIndices& idx, int n_orbs) {
    ResponseCircuit c;
    c.kind = kind;
    c.register_qubits = 2 * n_orbs;
    c.ancilla_count = ancilla_count_for(kind);
    const int R = c.register_qubits;
    const int q0 = R, q1 = R + 1, q2 = R + 2;

    auto all_h = [&](std::initializer_list<int> qs) {
        for (int q : qs) c.gates.push_back(make_h(q));
    };

    switch (kind) {
        case CircuitKind::charge_diag: {
            const int m = spin_orbital(idx.p, idx.sigma);
            all_h({q1, q0});
            emit_pair_block(c.gates, m, m, q1, q0, R, {});
            all_h({q1, q0});
            c.measured = {q0};
            c.outcomes = {
                {{0}, "n_" + spin_orb_name(idx.p, idx.sigma), 1.0, 0},
                {{1}, "nt_" + spin_orb_name(idx.p, idx.sigma), 1.0, -1},
            };
            c.n_slots = 1;
            break;
        }
        case CircuitKind::charge_offdiag: {
            if (idx.p == idx.pp && idx.sigma == idx.sigmap)
                throw DomainError("off-diagonal circuit needs two different (p, sigma)");
            const int m = spin_orbital(idx.p, idx.sigma);
            const int mp = spin_orbital(idx.pp, idx.sigmap);
            all_h({q2, q1, q0});
            emit_pair_block(c.gates, m, m, q1, q0, R, {{q2, 0}});
            emit_pair_block(c.gates, mp, mp, q1, q0, R, {{q2, 1}});
            c.gates.push_back(make_phasez(q2, M_PI / 4));
            all_h({q2, q1, q0});
            c.measured = {q2, q1};
            const std::string tag =
                spin_orb_name(idx.p, idx.sigma) + "," + spin_orb_name(idx.pp, idx.sigmap);
            c.outcomes = {
                {{0, 1}, "n+_" + tag, 1.0, 0},
                {{1, 1}, "n-_" + tag, 1.0, 1},
                {{0, 0}, "nt+_" + tag, 1.0, -1},
                {{1, 0}, "nt-_" + tag, 1.0, -1},
            };
            c.n_slots = 2;
            break;
        }
        case CircuitKind::spin_diag: {
            all_h({q0});
            emit_spin_block(c.gates, idx.p, idx.j, q0, R, {});
            all_h({q0});
            c.measured = {q0};
            const std::string tag = std::to_string(idx.p) + axis_name(idx.j);
            c.outcomes = {
                {{0}, "2s_" + tag, 0.25, 0},
                {{1}, "2st_" + tag, 0.25, -1},
            };
            c.n_slots = 1;
            break;
        }
        case CircuitKind::spin_offdiag: {
            if (idx.p == idx.pp && idx.j == idx.jp)
                throw DomainError("off-diagonal circuit needs two different (p, j)");
            all_h({q1, q0});
            emit_spin_block(c.gates, idx.p, idx.j, q0, R, {{q1, 0}});
            emit_spin_block(c.gates, idx.pp, idx.jp, q0, R, {{q1, 1}});
            c.gates.push_back(make_phasez(q1, M_PI / 4));
            all_h({q1, q0});
            c.measured = {q1, q0};
            const std::string tag =
                std::to_string(idx.p) + axis_name(idx.j) + "," + std::to_string(idx.pp) + axis_name(idx.jp);
            c.outcomes = {
                {{0, 0}, "2s+_" + tag, 0.25, 0},
                {{1, 0}, "2s-_" + tag, 0.25, 1},
                {{0, 1}, "2st+_" + tag, 0.25, -1},
                {{1, 1}, "2st-_" + tag, 0.25, -1},
            };
            c.n_slots = 2;
            break;
        }
        case CircuitKind::spin_charge: {
            all_h({q2, q1, q0});
            emit_spin_block(c.gates, idx.p, idx.j, q0, R, {{q2, 0}});
            emit_pair_block(c.gates, spin_orbital(idx.pp, idx.sigmap),
                            spin_orbital(idx.pp, idx.sigmap), q1, q0, R, {{q2, 1}});
            c.gates.push_back(make_phasez(q2, (idx.nu >= 0 ? 1.0 : -1.0) * M_PI / 4));
            c.gates.push_back(make_h(q1));
            c.gates.push_back(make_h(q0));
            c.gates.push_back(make_x(q1, {{q2, 1}}));
            c.gates.push_back(make_h(q2));
            c.measured = {q2, q0};
            const std::string tag = std::to_string(idx.p) + axis_name(idx.j) + "," +
                                    spin_orb_name(idx.pp, idx.sigmap) +
                                    (idx.nu >= 0 ? "+" : "-");
            c.outcomes = {
                {{0, 0}, "v_" + tag, 1.0, 0},
                {{1, 0}, "rest_" + tag, 1.0, -1},
                {{0, 1}, "rest1_" + tag, 1.0, -1},
                {{1, 1}, "rest2_" + tag, 1.0, -1},
            };
            c.n_slots = 1;
            break;
        }
        case CircuitKind::generic_diag: {
            all_h({q1, q0});
            emit_pair_block(c.gates, idx.m[0], idx.m[1], q1, q0, R, {});
            all_h({q1, q0});
            c.measured = {q1, q0};
            const std::string tag = std::to_string(idx.m[0]) + "," + std::to_string(idx.m[1]);
            c.outcomes = {
                {{1, 0}, "a+a_" + tag, 1.0, 0},
                {{0, 1}, "aa+_" + tag, 1.0, -1},
                {{0, 0}, "aa_" + tag, 1.0, -1},
                {{1, 1}, "a+a+_" + tag, 1.0, -1},
            };
            c.n_slots = 1;
            break;
        }
        case CircuitKind::generic_offdiag: {
            if (idx.m[0] == idx.m[2] && idx.m[1] == idx.m[3])
                throw DomainError("off-diagonal circuit needs two different index pairs");
            all_h({q2, q1, q0});
            emit_pair_block(c.gates, idx.m[0], idx.m[1], q1, q0, R, {{q2, 0}});
            emit_pair_block(c.gates, idx.m[2], idx.m[3], q1, q0, R, {{q2, 1}});
            c.gates.push_back(make_phasez(q2, M_PI / 4));
            all_h({q2, q1, q0});
            c.measured = {q2, q1, q0};
            const std::string tag = std::to_string(idx.m[0]) + std::to_string(idx.m[1]) + "," +
                                    std::to_string(idx.m[2]) + std::to_string(idx.m[3]);
            c.outcomes = {
                {{0, 1, 0}, "f+_" + tag, 1.0, 0},
                {{1, 1, 0}, "f-_" + tag, 1.0, 1},
            };
            // the remaining six outcomes are recorded as discards so that
            // probability accounting over the full ancilla space closes
            for (int b2 = 0; b2 < 2; ++b2)
                for (int b1 = 0; b1 < 2; ++b1)
                    for (int b0 = 0; b0 < 2; ++b0) {
                        const std::vector<int> bits{b2, b1, b0};
                        if (!c.find_outcome(bits))
                            c.outcomes.push_back({bits, "other_" + tag, 1.0, -1});
                    }
            c.n_slots = 2;
            break;
        }
        case CircuitKind::lcu_generic:
            throw DomainError("use build_lcu_circuit for the generic LCU construction");
    }
    return c;
}

ResponseCircuit build_lcu_circuit(const AngleTree& tree, const std::vector<Gate>& unitaries,
                                  int register_qubits) {
    const int n = tree.n;
    if (unitaries.size() != (1ull << n))
        throw ConfigError("need one unitary per coefficient");
    for (const auto& u : unitaries) {
        for (int t : u.targets)
            if (t >= register_qubits) throw ConfigError("LCU unitaries must act on the register only");
        if (!u.controls.empty()) throw ConfigError("LCU unitaries must be uncontrolled");
    }

    ResponseCircuit c;
    c.kind = CircuitKind::lcu_generic;
    c.register_qubits = register_qubits;
    c.ancilla_count = n;
    const int R = register_qubits;

    for (int j = n - 1; j >= 0; --j) c.gates.push_back(make_h(R + j));

    // depth-first expansion of the recursive partial circuits: every U_k is
    // controlled on the full bit string k, every level-j rotation on the bits
    // above it
    auto controls_for = [&](uint64_t prefix, int bits) {
        // prefix bit (bits-1-i) corresponds to ancilla (n-1-i)
        std::vector<std::pair<int, int>> controls;
        for (int i = 0; i < bits; ++i) {
            const int anc = n - 1 - i;
            const int pol = static_cast<int>((prefix >> (bits - 1 - i)) & 1ull);
            controls.emplace_back(R + anc, pol);
        }
        return controls;
    };

    std::function<void(int, uint64_t)> emit = [&](int j, uint64_t prefix) {
        if (j == 0) {
            Gate g = unitaries[prefix];
            g.controls = controls_for(prefix, n);
            c.gates.push_back(std::move(g));
            return;
        }
        emit(j - 1, (prefix << 1) | 0);
        emit(j - 1, (prefix << 1) | 1);
        c.gates.push_back(
            make_ry(R + j - 1, -2.0 * tree.angle(j, prefix), controls_for(prefix, n - j)));
    };
    emit(n, 0);

    c.measured.resize(n);
    for (int i = 0; i < n; ++i) c.measured[i] = R + (n - 1 - i);  // high ancilla first
    OutcomeInfo ok;
    ok.bits.assign(n, 0);
    ok.op_label = "lcu_sum";
    ok.estimate_scale = 1.0;
    ok.tally_slot = 0;
    c.outcomes.push_back(std::move(ok));
    c.n_slots = 1;
    return c;
}

QubitState circuit_input(const ResponseCircuit& c, const FockVector& reg) {
    return prepare_register(reg, c.ancilla_count);
}

PostselectResult run_postselect(const ResponseCircuit& c, const QubitState& input,
                                const std::vector<int>& outcome) {
    if (input.n_qubits != c.total_qubits())
        throw ConfigError("input state size does not match the circuit");
    if (!c.find_outcome(outcome)) throw DomainError("outcome not present in the outcome table");

    QubitState s = input;
    for (const auto& g : c.gates) apply_gate_inplace(s, g);

    auto proj = project_branch(s, c.measured, outcome);
    PostselectResult res;
    res.probability = proj.probability;
    res.valid = proj.valid;
    if (!proj.valid) return res;

    // the measured ancillae are fixed by the projection; if the unmeasured
    // ones also end up in a definite pattern (true for every outcome of
    // interest here) the register block can be sliced out directly
    const int R = c.register_qubits;
    const uint64_t reg_dim = 1ull << R;
    const uint64_t anc_dim = 1ull << c.ancilla_count;
    double best = -1.0;
    uint64_t best_pat = 0;
    for (uint64_t pat = 0; pat < anc_dim; ++pat) {
        double w = 0.0;
        const uint64_t base = pat << R;
        for (uint64_t i = 0; i < reg_dim; ++i)
            w += std::norm(proj.state.amps[static_cast<Eigen::Index>(base | i)]);
        if (w > best) {
            best = w;
            best_pat = pat;
        }
    }
    res.register_pure = best >= 1.0 - 1e-9;
    if (res.register_pure) {
        res.register_state.n_qubits = R;
        res.register_state.amps = proj.state.amps.segment(
            static_cast<Eigen::Index>(best_pat << R), static_cast<Eigen::Index>(reg_dim));
        const double nrm = res.register_state.amps.norm();
        if (nrm > 0) res.register_state.amps /= nrm;
    }
    return res;
}

} // namespace qlr
