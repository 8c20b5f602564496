#pragma once

// Staggered time stepping of the coupled displacement / phase-field /
// hydrogen-transport problem.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hacfem/assembly.hpp"
#include "hacfem/core.hpp"
#include "hacfem/linear_solver.hpp"
#include "hacfem/mesh.hpp"

namespace hacfem {

struct SolverSettings {
    double dt = 1.0;   // s
    double t_end = 1.0; // s
    int staggered_passes = 1;
    double staggered_tol = 1e-4;
    double newton_tol = 1e-8;
    int max_newton_iters = 10;
    /// A rejected increment is retried with dt scaled by dt_cut_factor, down
    /// to dt * dt_cut_factor^max_cuts; the step grows back one level per
    /// clean increment.
    double dt_cut_factor = 0.5;
    int max_cuts = 4;
    /// Replace transient transport by its steady state (solved for
    /// c exp(-V_H sigma_h / RT), see element_equilibrium_diffusion).
    bool equilibrium_hydrogen = false;
    StressMeasure sigma_h_stress = StressMeasure::Undamaged;
    /// An increment whose nodal phase change exceeds this is retried with a
    /// smaller step while cuts remain (values >= 1 disable the check). The
    /// smallest step is always accepted.
    double max_phase_increment = 1.0;
    /// Stop once the reaction drops below this fraction of its peak (0 = off).
    double stop_reaction_fraction = 0.0;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;

    bool operator==(const SolverSettings&) const = default;
};

struct IncrementRecord {
    double time = 0.0;
    double prescribed = 0.0;
    double reaction = 0.0; // N per unit thickness
    double max_phi = 0.0;
    double min_c = 0.0;
    double max_c = 0.0;
    int passes = 0;
    int cuts = 0;
    double strain_energy = 0.0;
    double surface_energy = 0.0;
};

/// Dirichlet data resolved to dofs. The load program drives `load_dofs`.
struct BoundaryConditions {
    std::vector<DirichletCondition> displacement;
    std::vector<DirichletCondition> phase;
    std::vector<DirichletCondition> concentration;
    std::vector<int> load_dofs;
    std::function<double(double)> load = [](double) { return 0.0; };
    Eigen::VectorXd traction; // global external force (2 per node), may be empty
    Eigen::VectorXd flux;     // global diffusion flux vector F, may be empty
};

/// Sub-problem nonconvergence; the caller may retry with a smaller step.
class StepRejected : public SolverError {
public:
    using SolverError::SolverError;
};

/// Concentration undershoot beyond the allowed fraction; not retried.
class UndershootError : public SolverError {
public:
    using SolverError::SolverError;
};

struct IncrementStats {
    int passes = 0;
    double raw_phi_min = 0.0; // before clamping
    double raw_phi_max = 0.0;
    std::vector<double> pass_changes; // max relative field change per pass (from pass 2)
};

class StaggeredSolver {
public:
    StaggeredSolver(std::shared_ptr<const Mesh> mesh, MaterialParams params, SolverSettings settings,
                    BoundaryConditions bcs);

    const Discretization& discretization() const { return disc_; }
    const Mesh& mesh() const { return disc_.mesh(); }
    const MaterialParams& params() const { return params_; }
    const SolverSettings& settings() const { return settings_; }
    const BoundaryConditions& boundary_conditions() const { return bcs_; }

    /// Zero fields with concentration c0 and Dirichlet values applied.
    FieldState initial_state(double c0) const;

    /// Solves the phase field for the current history (used after seeding
    /// defects) and recovers sigma_h.
    void initialize(FieldState& state);

    /// Advances `state` by dt. On any exception the state is left unchanged.
    /// With `limit_phase_jump`, an increment exceeding max_phase_increment
    /// throws StepRejected.
    IncrementStats staggered_increment(FieldState& state, double dt, bool limit_phase_jump = true);

    IncrementRecord record(const FieldState& state, const IncrementStats& stats) const;

    /// Sum of internal nodal forces over the set in one direction. Throws
    /// SolverError if none of those dofs is constrained.
    double reaction_force(const FieldState& state, const std::string& node_set, int component) const;
    /// Reaction summed over the load dofs.
    double load_reaction(const FieldState& state) const;

    /// Coverage theta at every Gauss point for the given concentration.
    std::vector<double> coverage(const Eigen::VectorXd& concentration) const;

private:
    void solve_displacement(FieldState& state, double time);
    void solve_phase(FieldState& state, const std::vector<double>& theta, IncrementStats& stats);
    void solve_concentration(FieldState& state, const Eigen::VectorXd& c_old, double dt);
    std::vector<DirichletCondition> displacement_constraints(double time) const;
    // Throws StepRejected once any nodal phase value has moved further than
    // max_phase_increment within the increment; later passes only add damage.
    void check_phase_jump(const Eigen::VectorXd& before, const Eigen::VectorXd& after) const;

    Discretization disc_;
    MaterialParams params_;
    SolverSettings settings_;
    BoundaryConditions bcs_;
    physics::PlaneStrainElasticity elasticity_;
    LinearSolver u_solver_;
    LinearSolver phi_solver_;
    LinearSolver c_solver_;
};

} // namespace hacfem
