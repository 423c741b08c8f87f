#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qlr/fock.hpp"
#include "qlr/model.hpp"

namespace qlr {

struct EigenSolution {
    Sector sector;
    BasisPtr basis;
    std::vector<double> energies;  // ascending, includes e_core
    Eigen::MatrixXd vectors;       // dim x k, column per eigenpair
    int k_kept = 0;
    std::size_t dim = 0;
};

// symmetric sector Hamiltonian; explicit CSR when it fits the memory budget,
// otherwise rows are regenerated on the fly from the Slater-Condon rules
class SectorOperator {
  public:
    SectorOperator(const Hamiltonian& H, BasisPtr basis,
                   std::size_t memory_budget_bytes = kDefaultBudget);

    static constexpr std::size_t kDefaultBudget = 256ull << 20;

    std::size_t dim() const { return basis_->size(); }
    bool explicit_matrix() const { return explicit_; }
    const BasisPtr& basis() const { return basis_; }
    const Eigen::VectorXd& diagonal() const { return diag_; }

    void apply(const double* x, double* y) const;
    void apply_serial(const double* x, double* y) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

    // visit the nonzeros of one row (used by both kernels and by tests)
    void enumerate_row(std::size_t row,
                       const std::function<void(std::size_t, double)>& emit) const;

    // explicit-matrix size estimate used for the budget decision
    std::size_t estimated_bytes() const { return estimated_bytes_; }

  private:
    void build_csr();
    void row_kernel(std::size_t row, const double* x, double& acc) const;

    const Hamiltonian* H_;
    BasisPtr basis_;
    bool explicit_ = false;
    std::size_t estimated_bytes_ = 0;
    Eigen::VectorXd diag_;

    // per-spin single-excitation tables: for each string, (p, q, sign-less
    // target string); signs are recomputed against the full determinant since
    // the global interleaved ordering makes them depend on both spins
    struct StringSingle {
        int p;
        int q;
        uint32_t target;
    };
    std::vector<std::vector<StringSingle>> alpha_singles_;
    std::vector<std::vector<StringSingle>> beta_singles_;

    // CSR storage
    std::vector<std::size_t> row_ptr_;
    std::vector<uint32_t> cols_;
    std::vector<double> vals_;
};

SectorOperator build_sector_matrix(const Hamiltonian& H, BasisPtr basis,
                                   std::size_t memory_budget_bytes = SectorOperator::kDefaultBudget);

// k lowest eigenpairs; dense below a threshold, thick-restart Lanczos above
EigenSolution solve_eigen(const SectorOperator& A, int k, uint64_t seed);

struct GroundStateInfo {
    Sector sector;
    double energy = 0.0;
    bool degenerate = false;
    double gap = 0.0;  // global E1 - E0 over all sectors
};

GroundStateInfo ground_state(const Hamiltonian& H, uint64_t seed = 1,
                             std::size_t memory_budget_bytes = SectorOperator::kDefaultBudget);

// lazily solves sectors on demand and memoizes the results; optional binary
// disk cache keyed by Hamiltonian content hash
class SpectrumCache {
  public:
    SpectrumCache(const Hamiltonian& H, uint64_t seed,
                  std::size_t memory_budget_bytes = SectorOperator::kDefaultBudget,
                  std::string cache_dir = "");

    const EigenSolution& ensure(Sector sector, int k);
    bool has(Sector sector) const { return solved_.count(sector) != 0; }
    const Hamiltonian& hamiltonian() const { return *H_; }
    uint64_t seed() const { return seed_; }

  private:
    std::string cache_path(Sector sector, int k) const;
    std::optional<EigenSolution> load_cached(Sector sector, int k) const;
    void store_cached(const EigenSolution& sol) const;

    const Hamiltonian* H_;
    uint64_t seed_;
    std::size_t budget_;
    std::string cache_dir_;
    uint64_t hash_;
    std::map<Sector, EigenSolution> solved_;
};

} // namespace qlr
