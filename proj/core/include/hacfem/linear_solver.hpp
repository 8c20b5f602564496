#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "hacfem/assembly.hpp"

namespace hacfem {

/// Direct sparse solver for reduced systems. The symbolic analysis is reused
/// while the sparsity pattern stays the same.
class LinearSolver {
public:
    LinearSolver();
    ~LinearSolver();

    /// Solves the system with its Dirichlet values imposed. Returns the
    /// full-length solution. Throws SolverError on a failed factorization or
    /// when the relative residual exceeds `tolerance`.
    Eigen::VectorXd solve(const SparseSystem& system, double tolerance = 1e-10);

    /// Solves an already reduced system; returns the free-dof values.
    Eigen::VectorXd solve_reduced(const ReducedSystem& reduced, bool symmetric,
                                  double tolerance = 1e-10);

private:
    bool same_pattern(const Eigen::SparseMatrix<double>& a, bool symmetric) const;
    void remember_pattern(const Eigen::SparseMatrix<double>& a, bool symmetric);

    struct Symmetric;
    std::unique_ptr<Symmetric> sym_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    bool analyzed_ = false;
    bool analyzed_symmetric_ = false;
    std::vector<int> outer_;
    std::vector<int> inner_;
};

/// One-shot direct solve with the residual check ||Ax - b|| / ||b|| < 1e-10.
Eigen::VectorXd solve_linear(const SparseSystem& system);

} // namespace hacfem
