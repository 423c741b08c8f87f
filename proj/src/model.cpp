#include "qlr/model.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "qlr/errors.hpp"
#include "qlr/rng.hpp"

namespace qlr {

EriTable::EriTable(int n_orbs) : n_(n_orbs) {
    const std::size_t npair = static_cast<std::size_t>(n_) * (n_ + 1) / 2;
    vals_.assign(npair * (npair + 1) / 2, 0.0);
}

std::size_t EriTable::index(int p, int q, int r, int s) const {
    auto tri = [](std::size_t a, std::size_t b) { return a * (a + 1) / 2 + b; };
    const std::size_t pq = p >= q ? tri(p, q) : tri(q, p);
    const std::size_t rs = r >= s ? tri(r, s) : tri(s, r);
    return pq >= rs ? tri(pq, rs) : tri(rs, pq);
}

namespace {

bool is_blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

// pull an integer field like "NORB=10" out of free-form header text
bool header_field(const std::string& header, const std::string& name, long& out) {
    std::size_t pos = 0;
    while ((pos = header.find(name, pos)) != std::string::npos) {
        std::size_t i = pos + name.size();
        while (i < header.size() && std::isspace(static_cast<unsigned char>(header[i]))) ++i;
        if (i < header.size() && header[i] == '=') {
            ++i;
            while (i < header.size() && std::isspace(static_cast<unsigned char>(header[i]))) ++i;
            char* end = nullptr;
            const long v = std::strtol(header.c_str() + i, &end, 10);
            if (end != header.c_str() + i) {
                out = v;
                return true;
            }
        }
        pos += name.size();
    }
    return false;
}

} // namespace

Hamiltonian load_fcidump(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open FCIDUMP file: " + path);

    std::string line;
    std::string header;
    long lineno = 0;
    bool in_header = false;
    bool have_header = false;

    // header block: &FCI ... &END (may span several lines)
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank_or_comment(line)) continue;
        std::string upper = line;
        for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (!in_header) {
            if (upper.find("&FCI") != std::string::npos) {
                in_header = true;
                header += upper + " ";
                if (upper.find("&END") != std::string::npos || upper.find('/') != std::string::npos) {
                    have_header = true;
                    break;
                }
                continue;
            }
            throw FormatError(path + ": expected &FCI header, got line " + std::to_string(lineno));
        }
        header += upper + " ";
        if (upper.find("&END") != std::string::npos || upper.find('/') != std::string::npos) {
            have_header = true;
            break;
        }
    }
    if (!have_header) throw FormatError(path + ": unterminated or missing &FCI header");

    long norb = 0, nelec = 0;
    if (!header_field(header, "NORB", norb))
        throw FormatError(path + ": header is missing NORB");
    if (!header_field(header, "NELEC", nelec))
        throw FormatError(path + ": header is missing NELEC");
    if (norb < 1 || norb > 63)
        throw BoundsError(path + ": NORB=" + std::to_string(norb) + " outside supported range [1,63]");
    if (nelec < 1 || nelec > 2 * norb)
        throw BoundsError(path + ": NELEC=" + std::to_string(nelec) + " outside (0, 2*NORB]");

    Hamiltonian H;
    H.n_orbs = static_cast<int>(norb);
    H.n_electrons = static_cast<int>(nelec);
    H.h = Eigen::MatrixXd::Zero(norb, norb);
    H.eri = EriTable(static_cast<int>(norb));

    std::vector<bool> eri_set(H.eri.size(), false);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> h_set =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(norb, norb, false);
    bool core_set = false;

    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank_or_comment(line)) continue;
        std::istringstream iss(line);
        double v;
        long i, j, k, l;
        if (!(iss >> v >> i >> j >> k >> l))
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected `value i j k l`");
        auto check = [&](long idx) {
            if (idx < 0 || idx > norb)
                throw BoundsError(path + ":" + std::to_string(lineno) + ": orbital index " +
                                  std::to_string(idx) + " outside [1," + std::to_string(norb) + "]");
        };
        check(i); check(j); check(k); check(l);
        if (i == 0 && j == 0 && k == 0 && l == 0) {
            if (core_set && H.e_core != v)
                throw ConflictError(path + ":" + std::to_string(lineno) + ": conflicting core energy");
            H.e_core = v;
            core_set = true;
        } else if (k == 0 && l == 0 && i > 0 && j > 0) {
            const int a = static_cast<int>(i) - 1, b = static_cast<int>(j) - 1;
            if (h_set(a, b) && H.h(a, b) != v)
                throw ConflictError(path + ":" + std::to_string(lineno) + ": conflicting value for h(" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
            H.h(a, b) = H.h(b, a) = v;
            h_set(a, b) = h_set(b, a) = true;
        } else if (i > 0 && j > 0 && k > 0 && l > 0) {
            const std::size_t idx = H.eri.index(static_cast<int>(i) - 1, static_cast<int>(j) - 1,
                                                static_cast<int>(k) - 1, static_cast<int>(l) - 1);
            if (eri_set[idx] && H.eri.raw()[idx] != v)
                throw ConflictError(path + ":" + std::to_string(lineno) + ": conflicting value for (" +
                                    std::to_string(i) + std::to_string(j) + "|" + std::to_string(k) +
                                    std::to_string(l) + ")");
            H.eri.set(static_cast<int>(i) - 1, static_cast<int>(j) - 1,
                      static_cast<int>(k) - 1, static_cast<int>(l) - 1, v);
            eri_set[idx] = true;
        } else {
            throw FormatError(path + ":" + std::to_string(lineno) +
                              ": unsupported index pattern (one-electron lines need k=l=0)");
        }
    }
    return H;
}

void write_fcidump(const Hamiltonian& H, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    const int n = H.n_orbs;
    out << "&FCI NORB=" << n << ",NELEC=" << H.n_electrons << ",MS2=0,\n ORBSYM=";
    for (int i = 0; i < n; ++i) out << "1,";
    out << "\n ISYM=1,\n&END\n";
    char buf[64];
    auto emit = [&](double v, int i, int j, int k, int l) {
        std::snprintf(buf, sizeof(buf), "%.17g %d %d %d %d\n", v, i, j, k, l);
        out << buf;
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            for (int k = 0; k <= i; ++k) {
                const int lmax = (k == i) ? j : k;
                for (int l = 0; l <= lmax; ++l) {
                    const double v = H.eri(i, j, k, l);
                    if (v != 0.0) emit(v, i + 1, j + 1, k + 1, l + 1);
                }
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            if (H.h(i, j) != 0.0) emit(H.h(i, j), i + 1, j + 1, 0, 0);
    emit(H.e_core, 0, 0, 0, 0);
}

std::vector<OneBodyOperator> load_onebody_operators(const std::string& path, int n_orbs) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open operator file: " + path);

    std::vector<OneBodyOperator> ops;
    std::map<std::string, std::size_t> by_label;
    // remember which entries were explicitly given, per label, to detect conflicts
    std::map<std::string, Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> given;

    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank_or_comment(line)) continue;
        std::istringstream iss(line);
        std::string label;
        long p, q;
        double v;
        if (!(iss >> label >> p >> q >> v))
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected `label p p' value`");
        for (char c : label)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
                throw FormatError(path + ":" + std::to_string(lineno) + ": bad label character in '" +
                                  label + "'");
        if (p < 1 || p > n_orbs || q < 1 || q > n_orbs)
            throw BoundsError(path + ":" + std::to_string(lineno) + ": orbital index outside [1," +
                              std::to_string(n_orbs) + "]");
        auto it = by_label.find(label);
        if (it == by_label.end()) {
            by_label[label] = ops.size();
            ops.push_back({label, Eigen::MatrixXd::Zero(n_orbs, n_orbs), true});
            given[label] =
                Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_orbs, n_orbs, false);
            it = by_label.find(label);
        }
        OneBodyOperator& op = ops[it->second];
        auto& g = given[label];
        const int a = static_cast<int>(p) - 1, b = static_cast<int>(q) - 1;
        if ((g(a, b) || g(b, a)) && op.mat(a, b) != v)
            throw ConflictError(path + ":" + std::to_string(lineno) + ": conflicting value for " +
                                label + "(" + std::to_string(p) + "," + std::to_string(q) + ")");
        op.mat(a, b) = op.mat(b, a) = v;
        g(a, b) = g(b, a) = true;
    }
    return ops;
}

Hamiltonian build_hubbard_dimer(double t, double u) {
    Hamiltonian H;
    H.n_orbs = 2;
    H.n_electrons = 2;
    H.e_core = 0.0;
    H.h = Eigen::MatrixXd::Zero(2, 2);
    H.h(0, 1) = H.h(1, 0) = -t;
    H.eri = EriTable(2);
    H.eri.set(0, 0, 0, 0, u);
    H.eri.set(1, 1, 1, 1, u);
    return H;
}

uint64_t content_hash(const Hamiltonian& H) {
    uint64_t h = detail::splitmix64(0x716C72ull);
    auto mix = [&h](uint64_t v) { h = detail::splitmix64(h ^ v); };
    auto mixd = [&](double d) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(d));
        std::memcpy(&bits, &d, sizeof(bits));
        mix(bits);
    };
    mix(static_cast<uint64_t>(H.n_orbs));
    mix(static_cast<uint64_t>(H.n_electrons));
    mixd(H.e_core);
    for (int i = 0; i < H.n_orbs; ++i)
        for (int j = 0; j <= i; ++j) mixd(H.h(i, j));
    for (double v : H.eri.raw()) mixd(v);
    return h;
}

} // namespace qlr
