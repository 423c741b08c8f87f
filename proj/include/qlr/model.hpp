#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qlr {

// two-electron integrals (pq|rs) in chemists' notation, canonical 8-fold storage
class EriTable {
  public:
    EriTable() = default;
    explicit EriTable(int n_orbs);

    int n_orbs() const { return n_; }

    double operator()(int p, int q, int r, int s) const { return vals_[index(p, q, r, s)]; }
    void set(int p, int q, int r, int s, double v) { vals_[index(p, q, r, s)] = v; }

    // flat canonical index; identical for all 8 equivalent permutations
    std::size_t index(int p, int q, int r, int s) const;
    std::size_t size() const { return vals_.size(); }
    const std::vector<double>& raw() const { return vals_; }

  private:
    int n_ = 0;
    std::vector<double> vals_;
};

struct Hamiltonian {
    int n_orbs = 0;
    int n_electrons = 0;
    double e_core = 0.0;
    Eigen::MatrixXd h;  // one-electron integrals, symmetric
    EriTable eri;

    int n_spin_orbitals() const { return 2 * n_orbs; }
};

struct OneBodyOperator {
    std::string label;
    Eigen::MatrixXd mat;        // spatial-orbital matrix elements O_{pp'}
    bool spin_diagonal = true;  // same matrix for both spins, no spin flip
};

Hamiltonian load_fcidump(const std::string& path);
void write_fcidump(const Hamiltonian& H, const std::string& path);

std::vector<OneBodyOperator> load_onebody_operators(const std::string& path, int n_orbs);

// two-site Hubbard model mapped onto the same Hamiltonian container:
// h = [[0,-t],[-t,0]], (11|11) = (22|22) = U, half filling
Hamiltonian build_hubbard_dimer(double t, double u);

// stable content hash (used to key the eigenpair cache)
uint64_t content_hash(const Hamiltonian& H);

} // namespace qlr
