#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qlr/fock.hpp"
#include "qlr/rng.hpp"

namespace qlr {

using cplx = std::complex<double>;

// Pauli operator with a unit phase: phase * (letter_0 (x) letter_1 (x) ...)
struct PauliString {
    cplx phase{1.0, 0.0};
    std::vector<uint8_t> letters;  // 0=I 1=X 2=Y 3=Z, index = qubit

    static PauliString identity(int n_qubits) { return {cplx(1, 0), std::vector<uint8_t>(n_qubits, 0)}; }

    // operator product: (a * b)|psi> = a (b |psi>)
    PauliString operator*(const PauliString& rhs) const;
    PauliString operator-() const {
        PauliString p = *this;
        p.phase = -p.phase;
        return p;
    }
    Eigen::MatrixXcd to_matrix() const;
    std::string to_string() const;
};

// Majorana-type unitary for spin orbital m under the Jordan-Wigner map:
// kappa=0 -> a_m + a^dagger_m = Z...Z X_m
// kappa=1 -> a_m - a^dagger_m = i * Z...Z Y_m
PauliString jw_majorana(int m, int kappa, int n_qubits);

namespace testing {
// corrupts the JW tail sign; exists so the verify suite can prove the
// JW-consistency check actually detects such a bug
extern bool flip_jw_tail;
} // namespace testing

struct Gate {
    enum class Kind { H, X, Ry, PhaseZ, Pauli, Unitary };
    Kind kind;
    std::vector<int> targets;
    std::vector<std::pair<int, int>> controls;  // (qubit, polarity 0/1)
    double angle = 0.0;       // Ry theta / PhaseZ phi
    PauliString pauli;        // Kind::Pauli (letters sized to full width)
    Eigen::MatrixXcd matrix;  // Kind::Unitary, 2^k x 2^k over `targets`

    std::string to_string() const;
};

Gate make_h(int q);
Gate make_x(int q, std::vector<std::pair<int, int>> controls = {});
Gate make_ry(int q, double theta, std::vector<std::pair<int, int>> controls = {});
Gate make_phasez(int q, double phi, std::vector<std::pair<int, int>> controls = {});
Gate make_pauli(PauliString p, std::vector<std::pair<int, int>> controls = {});
Gate make_unitary(std::vector<int> targets, Eigen::MatrixXcd u,
                  std::vector<std::pair<int, int>> controls = {});

// register qubits occupy the low indices, ancillae the high ones
struct QubitState {
    int n_qubits = 0;
    Eigen::VectorXcd amps;

    static QubitState zero(int n_qubits);
    double norm() const { return amps.norm(); }
};

// register block = determinant amplitudes under the JW basis map, ancillae |0>
QubitState prepare_register(const FockVector& v, int ancilla_count);

// amplitudes of the register block read back as a FockVector on `basis`
FockVector read_register(const QubitState& s, const BasisPtr& basis);

// overlap <v|s_register> of a sector vector with the register block
cplx register_overlap(const FockVector& v, const QubitState& s);

QubitState apply_gate(const QubitState& s, const Gate& g);
void apply_gate_inplace(QubitState& s, const Gate& g);
// reference kernel without OpenMP, kept for equivalence tests and benchmarks
void apply_gate_inplace_serial(QubitState& s, const Gate& g);

struct MeasureResult {
    std::vector<int> bits;  // outcome per measured qubit, same order as input
    QubitState state;       // collapsed and renormalized
    double probability;     // exact Born weight of the outcome
};

MeasureResult measure(const QubitState& s, const std::vector<int>& qubits, RngStream& rng);

struct ProjectResult {
    bool valid = false;  // false when the branch has zero probability
    QubitState state;
    double probability = 0.0;
};

// deterministic post-selection on one outcome
ProjectResult project_branch(const QubitState& s, const std::vector<int>& qubits,
                             const std::vector<int>& outcome);

} // namespace qlr
