#include "hacfem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hacfem {

void SolverSettings::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("solver settings: " + what); };
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) fail("t_end must be > 0");
    if (staggered_passes < 1) fail("staggered_passes must be >= 1");
    if (!(staggered_tol > 0.0 && staggered_tol < 1.0)) fail("staggered_tol must lie in (0, 1)");
    if (!(newton_tol > 0.0 && newton_tol < 1.0)) fail("newton_tol must lie in (0, 1)");
    if (max_newton_iters < 1) fail("max_newton_iters must be >= 1");
    if (!(dt_cut_factor > 0.0 && dt_cut_factor < 1.0)) fail("dt_cut_factor must lie in (0, 1)");
    if (max_cuts < 0) fail("max_cuts must be >= 0");
    if (!(max_phase_increment > 0.0)) fail("max_phase_increment must be > 0");
    if (!(stop_reaction_fraction >= 0.0 && stop_reaction_fraction < 1.0))
        fail("stop_reaction_fraction must lie in [0, 1)");
}

namespace {

double relative_change(const Eigen::VectorXd& now, const Eigen::VectorXd& before) {
    const double scale = std::max(now.norm(), before.norm());
    if (scale == 0.0) {
        return 0.0;
    }
    return (now - before).norm() / scale;
}

// Newton on a sub-problem whose residual is affine in the unknown: after
// each solve the new residual is r + K dx, which is exact, so a second
// assembly is needed only if that estimate misses the tolerance.
template <class Assemble>
void newton_solve(Eigen::VectorXd& x, const std::vector<DirichletCondition>& targets,
                  const SolverSettings& settings, LinearSolver& linear, Assemble&& assemble,
                  const char* name) {
    double reference = -1.0;
    for (int iter = 0; iter < settings.max_newton_iters; ++iter) {
        SparseSystem sys = assemble(x); // rhs = -residual
        sys.dirichlet.clear();
        for (const auto& bc : targets) {
            sys.dirichlet.push_back({bc.dof, bc.value - x(bc.dof)});
        }
        const bool moved = std::any_of(sys.dirichlet.begin(), sys.dirichlet.end(),
                                       [](const DirichletCondition& bc) { return bc.value != 0.0; });
        const ReducedSystem red = reduce(sys);
        const double norm = red.rhs.norm();
        if (reference < 0.0) {
            reference = norm;
        }
        if (!moved && (norm == 0.0 || norm <= settings.newton_tol * reference)) {
            return;
        }
        Eigen::VectorXd dx = red.prescribed;
        const Eigen::VectorXd free = linear.solve_reduced(red, sys.symmetric);
        for (std::size_t k = 0; k < red.free_dofs.size(); ++k) {
            dx(red.free_dofs[k]) = free(static_cast<Eigen::Index>(k));
        }
        x += dx;
        for (const auto& bc : targets) {
            x(bc.dof) = bc.value;
        }
        const Eigen::VectorXd r_new = sys.matrix * dx - sys.rhs;
        double free_norm = 0.0;
        for (int dof : red.free_dofs) {
            free_norm += r_new(dof) * r_new(dof);
        }
        if (std::sqrt(free_norm) <= settings.newton_tol * reference) {
            return;
        }
    }
    std::ostringstream msg;
    msg << name << " sub-problem did not converge in " << settings.max_newton_iters << " Newton iterations";
    throw StepRejected(msg.str());
}

} // namespace

StaggeredSolver::StaggeredSolver(std::shared_ptr<const Mesh> mesh, MaterialParams params,
                                 SolverSettings settings, BoundaryConditions bcs)
    : disc_(std::move(mesh)),
      params_(params),
      settings_(settings),
      bcs_(std::move(bcs)),
      elasticity_(physics::plane_strain_stiffness(params.young_modulus, params.poisson_ratio)) {
    params_.validate();
    settings_.validate();
    const auto nn = static_cast<Eigen::Index>(disc_.num_nodes());
    auto check = [](const std::vector<DirichletCondition>& list, Eigen::Index size, const char* field) {
        for (const auto& bc : list) {
            if (bc.dof < 0 || bc.dof >= size) {
                throw Error(std::string("boundary condition on ") + field + " dof " + std::to_string(bc.dof) +
                            " is outside the mesh");
            }
        }
    };
    check(bcs_.displacement, 2 * nn, "displacement");
    check(bcs_.phase, nn, "phase");
    check(bcs_.concentration, nn, "concentration");
    for (int dof : bcs_.load_dofs) {
        if (dof < 0 || dof >= 2 * nn) {
            throw Error("load dof " + std::to_string(dof) + " is outside the mesh");
        }
    }
    if (bcs_.traction.size() != 0 && bcs_.traction.size() != 2 * nn) {
        throw Error("traction vector does not match the displacement dof count");
    }
    if (bcs_.flux.size() != 0 && bcs_.flux.size() != nn) {
        throw Error("flux vector does not match the node count");
    }
}

FieldState StaggeredSolver::initial_state(double c0) const {
    FieldState state = FieldState::zeros(disc_.num_nodes(), disc_.num_gauss_points());
    state.concentration.setConstant(c0);
    for (const auto& bc : bcs_.concentration) {
        state.concentration(bc.dof) = bc.value;
    }
    for (const auto& bc : bcs_.phase) {
        state.phase(bc.dof) = bc.value;
    }
    return state;
}

std::vector<double> StaggeredSolver::coverage(const Eigen::VectorXd& concentration) const {
    std::vector<double> theta(disc_.num_gauss_points(), 0.0);
    const std::size_t ngp = disc_.gauss_per_element();
    for (std::size_t e = 0; e < disc_.num_elements(); ++e) {
        const Eigen::VectorXd c_e = disc_.gather(concentration, e, FieldKind::Concentration);
        const auto& geom = disc_.geometry(e);
        for (std::size_t q = 0; q < ngp; ++q) {
            theta[e * ngp + q] = physics::coverage_from_wtppm(geom.points[q].n.dot(c_e), params_);
        }
    }
    return theta;
}

std::vector<DirichletCondition> StaggeredSolver::displacement_constraints(double time) const {
    std::vector<DirichletCondition> out = bcs_.displacement;
    const double value = bcs_.load(time);
    for (int dof : bcs_.load_dofs) {
        out.push_back({dof, value});
    }
    return out;
}

void StaggeredSolver::solve_displacement(FieldState& state, double time) {
    const auto targets = displacement_constraints(time);
    const Eigen::VectorXd& phi = state.phase;
    auto assemble = [&](const Eigen::VectorXd& u) {
        SparseSystem sys = assemble_global(
            disc_, FieldKind::Displacement,
            [&](std::size_t e) {
                const ElementSystem es =
                    element_displacement(disc_.geometry(e), disc_.gather(u, e, FieldKind::Displacement),
                                         disc_.gather(phi, e, FieldKind::Phase), params_, elasticity_);
                return ElementContribution{es.tangent, -es.residual};
            },
            targets, true);
        if (bcs_.traction.size() != 0) {
            sys.rhs += bcs_.traction;
        }
        return sys;
    };
    newton_solve(state.displacement, targets, settings_, u_solver_, assemble, "displacement");
}

void StaggeredSolver::solve_phase(FieldState& state, const std::vector<double>& theta,
                                  IncrementStats& stats) {
    const std::size_t ngp = disc_.gauss_per_element();
    std::vector<GaussPointData> gauss(disc_.num_gauss_points());
    for (std::size_t k = 0; k < gauss.size(); ++k) {
        gauss[k].history = state.history[k];
        gauss[k].theta = theta[k];
    }
    auto assemble = [&](const Eigen::VectorXd& phi) {
        return assemble_global(
            disc_, FieldKind::Phase,
            [&](std::size_t e) {
                const ElementSystem es =
                    element_phase(disc_.geometry(e), disc_.gather(phi, e, FieldKind::Phase),
                                  std::span<const GaussPointData>(gauss.data() + e * ngp, ngp), params_);
                return ElementContribution{es.tangent, -es.residual};
            },
            bcs_.phase, true);
    };
    newton_solve(state.phase, bcs_.phase, settings_, phi_solver_, assemble, "phase-field");
    stats.raw_phi_min = state.phase.minCoeff();
    stats.raw_phi_max = state.phase.maxCoeff();
    state.phase = state.phase.cwiseMax(0.0).cwiseMin(1.0);
}

void StaggeredSolver::solve_concentration(FieldState& state, const Eigen::VectorXd& c_old, double dt) {
    const bool steady = settings_.equilibrium_hydrogen;
    const double drift = params_.molar_volume / (params_.gas_constant * params_.temperature);
    // In equilibrium the unknown is psi = c exp(-w); see element_equilibrium_diffusion.
    std::vector<DirichletCondition> dirichlet = bcs_.concentration;
    if (steady) {
        for (auto& bc : dirichlet) {
            bc.value *= std::exp(-drift * state.sigma_h_nodal(bc.dof));
        }
    }
    const double inv_dt = steady ? 0.0 : 1.0 / dt;
    SparseSystem sys = assemble_global(
        disc_, FieldKind::Concentration,
        [&](std::size_t e) {
            const Eigen::VectorXd s_e = disc_.gather(state.sigma_h_nodal, e, FieldKind::Concentration);
            if (steady) {
                return ElementContribution{element_equilibrium_diffusion_nodal(
                                               disc_.mesh().kind(), disc_.mesh().element_coords(e), s_e, params_),
                                           Eigen::VectorXd()};
            }
            const Eigen::VectorXd c_e = disc_.gather(c_old, e, FieldKind::Concentration);
            const DiffusionSystem ds = element_diffusion(disc_.geometry(e), c_e, s_e, params_);
            return ElementContribution{ds.stiffness + inv_dt * ds.capacity, inv_dt * ds.capacity * c_e};
        },
        std::move(dirichlet), steady);
    if (bcs_.flux.size() != 0) {
        sys.rhs += bcs_.flux;
    }
    const ReducedSystem red = reduce(sys);
    Eigen::VectorXd c = red.prescribed;
    if (red.rhs.size() > 0 && red.rhs.norm() != 0.0) {
        try {
            const Eigen::VectorXd free = c_solver_.solve_reduced(red, steady);
            for (std::size_t k = 0; k < red.free_dofs.size(); ++k) {
                c(red.free_dofs[k]) = free(static_cast<Eigen::Index>(k));
            }
        } catch (const SolverError& e) {
            throw StepRejected(std::string("hydrogen transport: ") + e.what());
        }
    }
    if (steady) {
        c.array() *= (drift * state.sigma_h_nodal.array()).exp();
    }
    state.concentration = std::move(c);
}

void StaggeredSolver::initialize(FieldState& state) {
    const bool seeded = std::any_of(state.history.begin(), state.history.end(), [](double h) { return h > 0.0; });
    if (seeded || !bcs_.phase.empty()) {
        IncrementStats stats;
        solve_phase(state, coverage(state.concentration), stats);
    }
    state.sigma_h_nodal =
        recover_sigma_h(disc_, state.displacement, state.phase, params_, settings_.sigma_h_stress);
}

void StaggeredSolver::check_phase_jump(const Eigen::VectorXd& before, const Eigen::VectorXd& after) const {
    if (settings_.max_phase_increment >= 1.0) {
        return;
    }
    const double jump = (after - before).cwiseAbs().maxCoeff();
    if (jump > settings_.max_phase_increment) {
        std::ostringstream msg;
        msg << "phase increment " << jump << " exceeds " << settings_.max_phase_increment;
        throw StepRejected(msg.str());
    }
}

IncrementStats StaggeredSolver::staggered_increment(FieldState& state, double dt, bool limit_phase_jump) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw SolverError("time step must be positive");
    }
    FieldState trial = state;
    trial.time = state.time + dt;
    const std::size_t ngp = disc_.gauss_per_element();
    IncrementStats stats;

    for (int pass = 1; pass <= settings_.staggered_passes; ++pass) {
        const Eigen::VectorXd u_before = trial.displacement;
        const Eigen::VectorXd phi_before = trial.phase;
        const Eigen::VectorXd c_before = trial.concentration;

        try {
            solve_displacement(trial, trial.time);
        } catch (const StepRejected&) {
            throw;
        } catch (const SolverError& e) {
            throw StepRejected(std::string("displacement: ") + e.what());
        }

        // History restarts from the last accepted increment on every pass.
        trial.history = state.history;
        for (std::size_t e = 0; e < disc_.num_elements(); ++e) {
            const auto& geom = disc_.geometry(e);
            const Eigen::VectorXd u_e = disc_.gather(trial.displacement, e, FieldKind::Displacement);
            for (std::size_t q = 0; q < ngp; ++q) {
                const physics::Voigt strain = strain_displacement(geom.points[q].bs) * u_e;
                double& h = trial.history[e * ngp + q];
                h = std::max(h, physics::strain_energy_density(strain, elasticity_));
            }
        }

        try {
            solve_phase(trial, coverage(trial.concentration), stats);
        } catch (const StepRejected&) {
            throw;
        } catch (const SolverError& e) {
            throw StepRejected(std::string("phase field: ") + e.what());
        }

        if (limit_phase_jump) {
            check_phase_jump(state.phase, trial.phase);
        }

        trial.sigma_h_nodal =
            recover_sigma_h(disc_, trial.displacement, trial.phase, params_, settings_.sigma_h_stress);
        solve_concentration(trial, state.concentration, dt);
        stats.passes = pass;

        if (pass > 1) {
            const double change = std::max({relative_change(trial.displacement, u_before),
                                             relative_change(trial.phase, phi_before),
                                             relative_change(trial.concentration, c_before)});
            stats.pass_changes.push_back(change);
            if (change < settings_.staggered_tol) {
                break;
            }
        }
    }

    const double c_max = trial.concentration.maxCoeff();
    const double c_min = trial.concentration.minCoeff();
    if (c_min < 0.0 && c_min < -1e-3 * std::max(c_max, 0.0) && (c_max > 0.0 || c_min < -1e-12)) {
        std::ostringstream msg;
        msg << "concentration undershoot: min " << c_min << " below -1e-3 * max " << c_max;
        throw UndershootError(msg.str());
    }

    state = std::move(trial);
    return stats;
}

double StaggeredSolver::load_reaction(const FieldState& state) const {
    const Eigen::VectorXd f = internal_force(disc_, state.displacement, state.phase, params_);
    double sum = 0.0;
    for (int dof : bcs_.load_dofs) {
        sum += f(dof);
    }
    return sum;
}

double StaggeredSolver::reaction_force(const FieldState& state, const std::string& node_set,
                                       int component) const {
    if (component < 0 || component > 1) {
        throw Error("reaction_force: component must be 0 (x) or 1 (y)");
    }
    std::set<int> constrained(bcs_.load_dofs.begin(), bcs_.load_dofs.end());
    for (const auto& bc : bcs_.displacement) {
        constrained.insert(bc.dof);
    }
    const auto& nodes = disc_.mesh().node_set(node_set);
    std::vector<int> dofs;
    for (int node : nodes) {
        const int dof = 2 * node + component;
        if (constrained.contains(dof)) {
            dofs.push_back(dof);
        }
    }
    if (dofs.empty()) {
        throw SolverError("reaction_force: node set '" + node_set + "' has no constrained dofs in direction " +
                          (component == 0 ? "x" : "y"));
    }
    const Eigen::VectorXd f = internal_force(disc_, state.displacement, state.phase, params_);
    double sum = 0.0;
    for (int dof : dofs) {
        sum += f(dof);
    }
    return sum;
}

IncrementRecord StaggeredSolver::record(const FieldState& state, const IncrementStats& stats) const {
    IncrementRecord rec;
    rec.time = state.time;
    rec.prescribed = bcs_.load(state.time);
    rec.reaction = bcs_.load_dofs.empty() ? 0.0 : load_reaction(state);
    rec.max_phi = state.phase.size() ? state.phase.maxCoeff() : 0.0;
    rec.min_c = state.concentration.size() ? state.concentration.minCoeff() : 0.0;
    rec.max_c = state.concentration.size() ? state.concentration.maxCoeff() : 0.0;
    rec.passes = stats.passes;
    const auto theta = coverage(state.concentration);
    const EnergySplit en = energies(disc_, state.displacement, state.phase, theta, params_);
    rec.strain_energy = en.strain;
    rec.surface_energy = en.surface;
    return rec;
}

} // namespace hacfem
