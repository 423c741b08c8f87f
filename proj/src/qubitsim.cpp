#include "qlr/qubitsim.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "qlr/errors.hpp"

namespace qlr {

namespace testing {
bool flip_jw_tail = false;
} // namespace testing

PauliString PauliString::operator*(const PauliString& rhs) const {
    if (letters.size() != rhs.letters.size())
        throw DomainError("Pauli string width mismatch");
    // single-qubit products: entry [a][b] = (phase, letter) of sigma_a sigma_b
    static const uint8_t letter_tab[4][4] = {
        {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
    static const cplx phase_tab[4][4] = {
        {{1, 0}, {1, 0}, {1, 0}, {1, 0}},
        {{1, 0}, {1, 0}, {0, 1}, {0, -1}},
        {{1, 0}, {0, -1}, {1, 0}, {0, 1}},
        {{1, 0}, {0, 1}, {0, -1}, {1, 0}}};
    PauliString out;
    out.letters.resize(letters.size());
    out.phase = phase * rhs.phase;
    for (std::size_t q = 0; q < letters.size(); ++q) {
        out.letters[q] = letter_tab[letters[q]][rhs.letters[q]];
        out.phase *= phase_tab[letters[q]][rhs.letters[q]];
    }
    return out;
}

Eigen::MatrixXcd PauliString::to_matrix() const {
    const int n = static_cast<int>(letters.size());
    static const Eigen::Matrix2cd sig[4] = {
        (Eigen::Matrix2cd() << 1, 0, 0, 1).finished(),
        (Eigen::Matrix2cd() << 0, 1, 1, 0).finished(),
        (Eigen::Matrix2cd() << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
        (Eigen::Matrix2cd() << 1, 0, 0, -1).finished()};
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1) * phase;
    // qubit 0 is the least significant bit, so it sits rightmost in the kron
    for (int q = n - 1; q >= 0; --q) {
        Eigen::MatrixXcd next(m.rows() * 2, m.cols() * 2);
        const Eigen::Matrix2cd& s = sig[letters[q]];
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) next.block(r * m.rows(), c * m.cols(), m.rows(), m.cols()) = s(r, c) * m;
        m = std::move(next);
    }
    return m;
}

std::string PauliString::to_string() const {
    std::ostringstream oss;
    oss << "(" << phase.real() << (phase.imag() >= 0 ? "+" : "") << phase.imag() << "i)";
    const char* names = "IXYZ";
    for (std::size_t q = 0; q < letters.size(); ++q)
        if (letters[q]) oss << " " << names[letters[q]] << q;
    return oss.str();
}

PauliString jw_majorana(int m, int kappa, int n_qubits) {
    if (m < 0 || m >= n_qubits) throw DomainError("spin orbital outside register");
    PauliString p = PauliString::identity(n_qubits);
    for (int q = 0; q < m; ++q) p.letters[q] = 3;  // Z tail
    if (kappa == 0) {
        p.letters[m] = 1;  // X
    } else {
        p.letters[m] = 2;  // Y
        p.phase = cplx(0, 1);
    }
    if (testing::flip_jw_tail && m >= 2) p.phase = -p.phase;
    return p;
}

Gate make_h(int q) { return Gate{Gate::Kind::H, {q}, {}, 0.0, {}, {}}; }
Gate make_x(int q, std::vector<std::pair<int, int>> controls) {
    return Gate{Gate::Kind::X, {q}, std::move(controls), 0.0, {}, {}};
}
Gate make_ry(int q, double theta, std::vector<std::pair<int, int>> controls) {
    return Gate{Gate::Kind::Ry, {q}, std::move(controls), theta, {}, {}};
}
Gate make_phasez(int q, double phi, std::vector<std::pair<int, int>> controls) {
    return Gate{Gate::Kind::PhaseZ, {q}, std::move(controls), phi, {}, {}};
}
Gate make_pauli(PauliString p, std::vector<std::pair<int, int>> controls) {
    Gate g{Gate::Kind::Pauli, {}, std::move(controls), 0.0, std::move(p), {}};
    for (std::size_t q = 0; q < g.pauli.letters.size(); ++q)
        if (g.pauli.letters[q]) g.targets.push_back(static_cast<int>(q));
    return g;
}
Gate make_unitary(std::vector<int> targets, Eigen::MatrixXcd u,
                  std::vector<std::pair<int, int>> controls) {
    return Gate{Gate::Kind::Unitary, std::move(targets), std::move(controls), 0.0, {}, std::move(u)};
}

std::string Gate::to_string() const {
    std::ostringstream oss;
    switch (kind) {
        case Kind::H: oss << "H q" << targets[0]; break;
        case Kind::X: oss << "X q" << targets[0]; break;
        case Kind::Ry: oss << "Ry(" << angle << ") q" << targets[0]; break;
        case Kind::PhaseZ: oss << "Z(" << angle << ") q" << targets[0]; break;
        case Kind::Pauli: oss << "P " << pauli.to_string(); break;
        case Kind::Unitary: {
            oss << "U" << matrix.rows() << "x" << matrix.cols() << " on";
            for (int t : targets) oss << " q" << t;
            break;
        }
    }
    for (const auto& [q, pol] : controls) oss << (pol ? " @q" : " !q") << q;
    return oss.str();
}

QubitState QubitState::zero(int n_qubits) {
    QubitState s;
    s.n_qubits = n_qubits;
    s.amps = Eigen::VectorXcd::Zero(1ll << n_qubits);
    s.amps[0] = 1.0;
    return s;
}

namespace {

uint64_t det_to_bits(uint64_t amask, uint64_t bmask, int n_orbs) {
    uint64_t bits = 0;
    for (int p = 0; p < n_orbs; ++p) {
        if ((amask >> p) & 1ull) bits |= 1ull << (2 * p);
        if ((bmask >> p) & 1ull) bits |= 1ull << (2 * p + 1);
    }
    return bits;
}

} // namespace

QubitState prepare_register(const FockVector& v, int ancilla_count) {
    if (std::abs(v.norm() - 1.0) > 1e-10)
        throw DomainError("register preparation requires a normalized state");
    const int n_orbs = v.basis->n_orbs();
    const int nq = 2 * n_orbs + ancilla_count;
    if (nq > 26) throw DomainError("statevector register too large");
    QubitState s;
    s.n_qubits = nq;
    s.amps = Eigen::VectorXcd::Zero(1ll << nq);
    for (std::size_t i = 0; i < v.basis->size(); ++i) {
        auto [amask, bmask] = v.basis->det(i);
        s.amps[static_cast<Eigen::Index>(det_to_bits(amask, bmask, n_orbs))] =
            v.amps[static_cast<Eigen::Index>(i)];
    }
    return s;
}

FockVector read_register(const QubitState& s, const BasisPtr& basis) {
    FockVector v = FockVector::zero(basis);
    const int n_orbs = basis->n_orbs();
    for (std::size_t i = 0; i < basis->size(); ++i) {
        auto [amask, bmask] = basis->det(i);
        v.amps[static_cast<Eigen::Index>(i)] =
            s.amps[static_cast<Eigen::Index>(det_to_bits(amask, bmask, n_orbs))];
    }
    return v;
}

cplx register_overlap(const FockVector& v, const QubitState& s) {
    const int n_orbs = v.basis->n_orbs();
    cplx acc(0, 0);
    for (std::size_t i = 0; i < v.basis->size(); ++i) {
        auto [amask, bmask] = v.basis->det(i);
        acc += std::conj(v.amps[static_cast<Eigen::Index>(i)]) *
               s.amps[static_cast<Eigen::Index>(det_to_bits(amask, bmask, n_orbs))];
    }
    return acc;
}

namespace {

struct ControlMask {
    uint64_t mask = 0;  // bits that must match
    uint64_t want = 0;  // required values on those bits
    bool pass(uint64_t idx) const { return (idx & mask) == want; }
};

ControlMask control_mask(const Gate& g) {
    ControlMask cm;
    for (const auto& [q, pol] : g.controls) {
        cm.mask |= 1ull << q;
        if (pol) cm.want |= 1ull << q;
    }
    return cm;
}

void validate(const QubitState& s, const Gate& g) {
    uint64_t tmask = 0;
    for (int t : g.targets) {
        if (t < 0 || t >= s.n_qubits) throw ConfigError("gate target outside register");
        tmask |= 1ull << t;
    }
    for (const auto& [q, pol] : g.controls) {
        if (q < 0 || q >= s.n_qubits) throw ConfigError("gate control outside register");
        if (tmask & (1ull << q)) throw ConfigError("gate control overlaps a target");
        if (pol != 0 && pol != 1) throw ConfigError("control polarity must be 0 or 1");
    }
}

template <bool Parallel>
void apply_2x2(QubitState& s, int target, const Eigen::Matrix2cd& m, const ControlMask& cm) {
    const uint64_t dim = 1ull << s.n_qubits;
    const uint64_t tbit = 1ull << target;
    cplx* a = s.amps.data();
    const cplx m00 = m(0, 0), m01 = m(0, 1), m10 = m(1, 0), m11 = m(1, 1);
#ifdef QLR_USE_OPENMP
#pragma omp parallel for schedule(static) if (Parallel && s.n_qubits > 12)
#endif
    for (long long i = 0; i < static_cast<long long>(dim); ++i) {
        const uint64_t ii = static_cast<uint64_t>(i);
        if (ii & tbit) continue;
        if (!cm.pass(ii)) continue;
        const uint64_t jj = ii | tbit;
        const cplx lo = a[ii], hi = a[jj];
        a[ii] = m00 * lo + m01 * hi;
        a[jj] = m10 * lo + m11 * hi;
    }
}

template <bool Parallel>
void apply_pauli(QubitState& s, const PauliString& p, const ControlMask& cm) {
    uint64_t flip = 0, zmask = 0, ymask = 0;
    for (std::size_t q = 0; q < p.letters.size(); ++q) {
        switch (p.letters[q]) {
            case 1: flip |= 1ull << q; break;
            case 2: flip |= 1ull << q; ymask |= 1ull << q; break;
            case 3: zmask |= 1ull << q; break;
            default: break;
        }
    }
    const uint64_t dim = 1ull << s.n_qubits;
    const Eigen::VectorXcd src = s.amps;
    cplx* dst = s.amps.data();
    const cplx base = p.phase;
    const int ny = std::popcount(ymask);
    // i^ny from the Y letters' fixed factor, sign from Z and Y bit values
    cplx ypow(1, 0);
    for (int t = 0; t < (ny & 3); ++t) ypow *= cplx(0, 1);
#ifdef QLR_USE_OPENMP
#pragma omp parallel for schedule(static) if (Parallel && s.n_qubits > 12)
#endif
    for (long long j = 0; j < static_cast<long long>(dim); ++j) {
        const uint64_t jj = static_cast<uint64_t>(j);
        if (!cm.pass(jj)) continue;
        const uint64_t ii = jj ^ flip;  // source index
        // Y_q |b> = i(-1)^b |1-b>; Z_q |b> = (-1)^b |b>
        const int minus = std::popcount(ii & (zmask | ymask)) & 1;
        cplx f = base * ypow;
        if (minus) f = -f;
        dst[jj] = f * src[static_cast<Eigen::Index>(ii)];
    }
}

template <bool Parallel>
void apply_kqubit(QubitState& s, const std::vector<int>& targets, const Eigen::MatrixXcd& m,
                  const ControlMask& cm) {
    const int k = static_cast<int>(targets.size());
    if (k > 6) throw ConfigError("dense unitaries support at most 6 targets");
    const uint64_t dim = 1ull << s.n_qubits;
    const int sub = 1 << k;
    if (m.rows() != sub || m.cols() != sub) throw ConfigError("unitary size does not match targets");
    uint64_t tmask = 0;
    for (int t : targets) tmask |= 1ull << t;
    cplx* a = s.amps.data();
#ifdef QLR_USE_OPENMP
#pragma omp parallel for schedule(static) if (Parallel && s.n_qubits > 12)
#endif
    for (long long base = 0; base < static_cast<long long>(dim); ++base) {
        const uint64_t bb = static_cast<uint64_t>(base);
        if (bb & tmask) continue;  // one representative per group
        if (!cm.pass(bb)) continue;
        uint64_t idx[64];
        cplx vec[64];
        for (int pat = 0; pat < sub; ++pat) {
            uint64_t ix = bb;
            for (int t = 0; t < k; ++t)
                if ((pat >> t) & 1) ix |= 1ull << targets[t];
            idx[pat] = ix;
            vec[pat] = a[ix];
        }
        for (int r = 0; r < sub; ++r) {
            cplx acc(0, 0);
            for (int c = 0; c < sub; ++c) acc += m(r, c) * vec[c];
            a[idx[r]] = acc;
        }
    }
}

template <bool Parallel>
void apply_dispatch(QubitState& s, const Gate& g) {
    validate(s, g);
    const ControlMask cm = control_mask(g);
    switch (g.kind) {
        case Gate::Kind::H: {
            static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
            Eigen::Matrix2cd m;
            m << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
            apply_2x2<Parallel>(s, g.targets[0], m, cm);
            break;
        }
        case Gate::Kind::X: {
            Eigen::Matrix2cd m;
            m << 0, 1, 1, 0;
            apply_2x2<Parallel>(s, g.targets[0], m, cm);
            break;
        }
        case Gate::Kind::Ry: {
            const double c = std::cos(g.angle / 2), d = std::sin(g.angle / 2);
            Eigen::Matrix2cd m;
            m << c, -d, d, c;
            apply_2x2<Parallel>(s, g.targets[0], m, cm);
            break;
        }
        case Gate::Kind::PhaseZ: {
            Eigen::Matrix2cd m;
            m << 1, 0, 0, std::exp(cplx(0, g.angle));
            apply_2x2<Parallel>(s, g.targets[0], m, cm);
            break;
        }
        case Gate::Kind::Pauli:
            apply_pauli<Parallel>(s, g.pauli, cm);
            break;
        case Gate::Kind::Unitary:
            apply_kqubit<Parallel>(s, g.targets, g.matrix, cm);
            break;
    }
}

} // namespace

void apply_gate_inplace(QubitState& s, const Gate& g) { apply_dispatch<true>(s, g); }
void apply_gate_inplace_serial(QubitState& s, const Gate& g) { apply_dispatch<false>(s, g); }

QubitState apply_gate(const QubitState& s, const Gate& g) {
    QubitState out = s;
    apply_gate_inplace(out, g);
    return out;
}

MeasureResult measure(const QubitState& s, const std::vector<int>& qubits, RngStream& rng) {
    const std::size_t nq = qubits.size();
    for (std::size_t i = 0; i < nq; ++i)
        for (std::size_t j = i + 1; j < nq; ++j)
            if (qubits[i] == qubits[j]) throw ConfigError("measured qubits must be distinct");
    const uint64_t dim = 1ull << s.n_qubits;
    std::vector<double> probs(1ull << nq, 0.0);
    for (uint64_t i = 0; i < dim; ++i) {
        const double w = std::norm(s.amps[static_cast<Eigen::Index>(i)]);
        if (w == 0.0) continue;
        uint64_t o = 0;
        for (std::size_t b = 0; b < nq; ++b)
            if ((i >> qubits[b]) & 1ull) o |= 1ull << b;
        probs[o] += w;
    }
    double total = 0.0;
    for (double p : probs) total += p;
    if (total <= 0.0) throw DomainError("cannot measure a zero state");

    const double u = rng.next() * total;
    double cum = 0.0;
    uint64_t outcome = probs.size() - 1;
    for (std::size_t o = 0; o < probs.size(); ++o) {
        cum += probs[o];
        if (u < cum) {
            outcome = o;
            break;
        }
    }
    std::vector<int> bits(nq);
    for (std::size_t b = 0; b < nq; ++b) bits[b] = static_cast<int>((outcome >> b) & 1ull);
    auto proj = project_branch(s, qubits, bits);
    return {bits, std::move(proj.state), proj.probability};
}

ProjectResult project_branch(const QubitState& s, const std::vector<int>& qubits,
                             const std::vector<int>& outcome) {
    if (qubits.size() != outcome.size()) throw ConfigError("outcome length mismatch");
    uint64_t mask = 0, want = 0;
    for (std::size_t b = 0; b < qubits.size(); ++b) {
        mask |= 1ull << qubits[b];
        if (outcome[b]) want |= 1ull << qubits[b];
    }
    ProjectResult res;
    res.state.n_qubits = s.n_qubits;
    res.state.amps = Eigen::VectorXcd::Zero(s.amps.size());
    double p = 0.0;
    const uint64_t dim = 1ull << s.n_qubits;
    for (uint64_t i = 0; i < dim; ++i) {
        if ((i & mask) != want) continue;
        const cplx a = s.amps[static_cast<Eigen::Index>(i)];
        res.state.amps[static_cast<Eigen::Index>(i)] = a;
        p += std::norm(a);
    }
    res.probability = p;
    if (p > 0.0) {
        res.state.amps /= std::sqrt(p);
        res.valid = true;
    }
    return res;
}

} // namespace qlr
