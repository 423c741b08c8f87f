#pragma once

#include <string>
#include <vector>

#include "qlr/fock.hpp"
#include "qlr/qubitsim.hpp"

namespace qlr {

// rotation angles of the linear-combination-of-unitaries circuit; level j
// (1-based, bottom = 1) holds 2^{n-j} angles indexed by the bit path above it
struct AngleTree {
    int n = 0;
    std::vector<std::vector<double>> levels;  // levels[j-1][prefix]

    double angle(int j, uint64_t prefix) const { return levels[j - 1][prefix]; }
    std::size_t total() const {
        std::size_t t = 0;
        for (const auto& l : levels) t += l.size();
        return t;
    }
};

// coefficients are indexed by ancilla bit strings, most significant bit =
// highest ancilla; zero denominators are absorbed by atan2 on subtree norms
AngleTree solve_lcu_angles(const std::vector<double>& coefficients);

enum class CircuitKind {
    charge_diag,
    charge_offdiag,
    spin_diag,
    spin_offdiag,
    spin_charge,
    generic_diag,
    generic_offdiag,
    lcu_generic,
};

const char* kind_name(CircuitKind k);
int ancilla_count_for(CircuitKind k);

struct OutcomeInfo {
    std::vector<int> bits;   // over `measured`, same order
    std::string op_label;    // prepared operator on the register
    double estimate_scale;   // tally/N_meas multiplier to reach the target weight
    int tally_slot;          // >=0 for outcomes of interest, -1 for discards
};

struct ResponseCircuit {
    CircuitKind kind;
    int register_qubits = 0;
    int ancilla_count = 0;
    std::vector<Gate> gates;
    std::vector<int> measured;  // absolute qubit indices
    std::vector<OutcomeInfo> outcomes;
    int n_slots = 0;

    int total_qubits() const { return register_qubits + ancilla_count; }
    const OutcomeInfo* find_outcome(const std::vector<int>& bits) const;
    std::string dump() const;  // one gate per line
};

// index payload for build_response_circuit; fields used depend on the kind
struct CircuitIndices {
    int p = 0;
    Spin sigma = Spin::alpha;
    int pp = 0;
    Spin sigmap = Spin::alpha;
    SpinAxis j = SpinAxis::x;
    SpinAxis jp = SpinAxis::x;
    int nu = +1;       // spin_charge: which of the +/- circuits
    int m[4] = {0, 0, 0, 0};  // generic kinds
};

ResponseCircuit build_response_circuit(CircuitKind kind, const CircuitIndices& idx, int n_orbs);

// the generic LCU circuit of the angle tree; `unitaries` are register-only
// gates, one per coefficient
ResponseCircuit build_lcu_circuit(const AngleTree& tree, const std::vector<Gate>& unitaries,
                                  int register_qubits);

struct PostselectResult {
    bool valid = false;         // false when the branch has zero probability
    bool register_pure = false; // register separable from unmeasured ancillae
    QubitState register_state;  // reduced to the register, renormalized
    double probability = 0.0;
};

// run the circuit on `input` (register (x) ancillae, ancillae low bits of the
// high block) and project the measured ancillae onto `outcome`
PostselectResult run_postselect(const ResponseCircuit& c, const QubitState& input,
                                const std::vector<int>& outcome);

// convenience: all-ancilla-zero input from a register vector
QubitState circuit_input(const ResponseCircuit& c, const FockVector& reg);

} // namespace qlr
