#include "hacfem/linear_solver.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

namespace hacfem {

struct LinearSolver::Symmetric {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor;
    Eigen::VectorXd scale;

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
        return scale.cwiseProduct(factor.solve(scale.cwiseProduct(b)));
    }

    void check() const {
        if (factor.info() != Eigen::Success) {
            throw SolverError("sparse LDLT factorization failed (singular matrix)");
        }
        const Eigen::VectorXd d = factor.vectorD();
        const double dmax = d.cwiseAbs().maxCoeff();
        Eigen::Index where = 0;
        const double dmin = d.cwiseAbs().minCoeff(&where);
        if (!(dmin > 1e-300) || !(dmin > 1e-13 * dmax)) {
            std::ostringstream msg;
            msg << "singular or ill-conditioned matrix: pivot " << where << " = " << d(where)
                << " (largest |pivot| " << dmax << ")";
            throw SolverError(msg.str());
        }
    }
};

LinearSolver::LinearSolver() : sym_(std::make_unique<Symmetric>()) {}
LinearSolver::~LinearSolver() = default;

bool LinearSolver::same_pattern(const Eigen::SparseMatrix<double>& a, bool symmetric) const {
    if (!analyzed_ || symmetric != analyzed_symmetric_) {
        return false;
    }
    if (static_cast<std::size_t>(a.outerSize() + 1) != outer_.size() ||
        static_cast<std::size_t>(a.nonZeros()) != inner_.size()) {
        return false;
    }
    return std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr()) &&
           std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr());
}

void LinearSolver::remember_pattern(const Eigen::SparseMatrix<double>& a, bool symmetric) {
    outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1);
    inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    analyzed_ = true;
    analyzed_symmetric_ = symmetric;
}

Eigen::VectorXd LinearSolver::solve_reduced(const ReducedSystem& reduced, bool symmetric,
                                            double tolerance) {
    const auto& a = reduced.matrix;
    const auto& b = reduced.rhs;
    if (a.rows() == 0) {
        return Eigen::VectorXd();
    }
    const double b_norm = b.norm();
    if (b_norm == 0.0) {
        return Eigen::VectorXd::Zero(b.size());
    }

    Eigen::VectorXd x;
    if (symmetric) {
        // Symmetric Jacobi scaling: coefficients such as exp(w) span many
        // decades, and the pivot check is only meaningful on the scaled matrix.
        // There a rigid-body mode leaves pivots near 1e-15 while fully broken
        // elements (stiffness floor 1e-7) stay above 1e-11.
        sym_->scale = a.diagonal().cwiseAbs().unaryExpr(
            [](double d) { return d > 0.0 ? 1.0 / std::sqrt(d) : 1.0; });
        const Eigen::SparseMatrix<double> as = sym_->scale.asDiagonal() * a * sym_->scale.asDiagonal();
        if (!same_pattern(as, true)) {
            sym_->factor.analyzePattern(as);
            remember_pattern(as, true);
        }
        sym_->factor.factorize(as);
        sym_->check();
        x = sym_->solve(b);
    } else {
        if (!same_pattern(a, false)) {
            lu_.analyzePattern(a);
            remember_pattern(a, false);
        }
        lu_.factorize(a);
        if (lu_.info() != Eigen::Success) {
            throw SolverError("sparse LU factorization failed: " + lu_.lastErrorMessage());
        }
        x = lu_.solve(b);
    }

    Eigen::VectorXd r = b - a * x;
    double rel = r.norm() / b_norm;
    if (rel >= tolerance && std::isfinite(rel)) {
        // One step of iterative refinement before giving up.
        x += symmetric ? sym_->solve(r) : Eigen::VectorXd(lu_.solve(r));
        r = b - a * x;
        rel = r.norm() / b_norm;
    }
    if (!(rel < tolerance)) {
        std::ostringstream msg;
        msg << "linear solve residual check failed: ||Ax-b||/||b|| = " << rel;
        throw SolverError(msg.str());
    }
    return x;
}

Eigen::VectorXd LinearSolver::solve(const SparseSystem& system, double tolerance) {
    const ReducedSystem reduced = reduce(system);
    const Eigen::VectorXd free = solve_reduced(reduced, system.symmetric, tolerance);
    Eigen::VectorXd x = reduced.prescribed;
    for (std::size_t k = 0; k < reduced.free_dofs.size(); ++k) {
        x(reduced.free_dofs[k]) = free(static_cast<Eigen::Index>(k));
    }
    return x;
}

Eigen::VectorXd solve_linear(const SparseSystem& system) {
    LinearSolver solver;
    return solver.solve(system);
}

} // namespace hacfem
