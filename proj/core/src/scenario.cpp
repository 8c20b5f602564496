#include "hacfem/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hacfem/output.hpp"

namespace hacfem {

double RampProgram::operator()(double t) const {
    if (knots.empty()) {
        return 0.0;
    }
    if (t <= knots.front().first) {
        return knots.front().second;
    }
    for (std::size_t k = 1; k < knots.size(); ++k) {
        const auto [t0, v0] = knots[k - 1];
        const auto [t1, v1] = knots[k];
        if (t <= t1) {
            return t1 > t0 ? v0 + (v1 - v0) * (t - t0) / (t1 - t0) : v1;
        }
    }
    return knots.back().second;
}

double DirichletSpec::at(double t) const {
    if (!ramp.knots.empty()) {
        return ramp(t);
    }
    return value + rate.value_or(0.0) * t;
}

bool DefectSpec::contains(const Point2& p) const {
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2& a = polygon[i];
        const Point2& b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
            inside = !inside;
        }
    }
    return inside;
}

double defect_history(const MaterialParams& params) {
    return 1e3 * params.gc0 / params.length_scale;
}

std::shared_ptr<Mesh> build_mesh(const ScenarioConfig& config) {
    auto mesh = std::make_shared<Mesh>(config.mesh.file.empty() ? generate_rect_mesh(config.mesh.rect)
                                                                 : read_mesh(config.mesh.file));
    for (std::size_t d = 0; d < config.defects.size(); ++d) {
        std::vector<int> ids;
        for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
            if (config.defects[d].contains(mesh->nodes()[i])) {
                ids.push_back(static_cast<int>(i));
            }
        }
        mesh->set_node_set("defect_" + std::to_string(d + 1), std::move(ids));
    }

    auto require = [&](const std::string& set, const std::string& where) {
        if (!mesh->has_node_set(set)) {
            throw ConfigError(where + ": node set '" + set + "' does not exist in the mesh");
        }
    };
    for (std::size_t k = 0; k < config.dirichlet.size(); ++k) {
        require(config.dirichlet[k].set, "[dirichlet] block " + std::to_string(k + 1));
    }
    for (std::size_t k = 0; k < config.neumann.size(); ++k) {
        require(config.neumann[k].set, "[neumann] block " + std::to_string(k + 1));
    }
    if (config.boundary_concentration) {
        if (config.boundary_sets.empty()) {
            require("boundary", "[hydrogen] boundary_sets");
        }
        for (const auto& set : config.boundary_sets) {
            require(set, "[hydrogen] boundary_sets");
        }
    }
    return mesh;
}

BoundaryConditions resolve_boundary_conditions(const ScenarioConfig& config, const Mesh& mesh) {
    BoundaryConditions bcs;
    const auto nn = static_cast<Eigen::Index>(mesh.num_nodes());
    const DirichletSpec* program = nullptr;
    for (const auto& spec : config.dirichlet) {
        const auto& nodes = mesh.node_set(spec.set);
        const int per = dofs_per_node(spec.field);
        if (spec.component < 0 || spec.component >= per) {
            throw ConfigError("[dirichlet] on '" + spec.set + "': component out of range for " +
                              std::string(to_string(spec.field)));
        }
        if (spec.is_program()) {
            if (program) {
                throw ConfigError("exactly one loading program is allowed; found a second one on '" + spec.set + "'");
            }
            if (spec.field != FieldKind::Displacement) {
                throw ConfigError("the loading program must prescribe a displacement");
            }
            program = &spec;
            for (int node : nodes) {
                bcs.load_dofs.push_back(2 * node + spec.component);
            }
            continue;
        }
        auto& list = spec.field == FieldKind::Displacement ? bcs.displacement
                     : spec.field == FieldKind::Phase      ? bcs.phase
                                                           : bcs.concentration;
        for (int node : nodes) {
            list.push_back({node * per + spec.component, spec.value});
        }
    }
    if (!program) {
        throw ConfigError("no loading program: one [dirichlet] block needs a rate or a ramp");
    }
    const DirichletSpec load_spec = *program;
    bcs.load = [load_spec](double t) { return load_spec.at(t); };

    if (config.boundary_concentration) {
        const std::vector<std::string> sets =
            config.boundary_sets.empty() ? std::vector<std::string>{"boundary"} : config.boundary_sets;
        for (const auto& set : sets) {
            for (int node : mesh.node_set(set)) {
                bcs.concentration.push_back({node, *config.boundary_concentration});
            }
        }
    }

    for (const auto& spec : config.neumann) {
        if (spec.field == FieldKind::Displacement) {
            if (bcs.traction.size() == 0) {
                bcs.traction = Eigen::VectorXd::Zero(2 * nn);
            }
            bcs.traction += apply_neumann_traction(mesh, spec.set, {spec.traction_x, spec.traction_y});
        } else if (spec.field == FieldKind::Concentration) {
            if (bcs.flux.size() == 0) {
                bcs.flux = Eigen::VectorXd::Zero(nn);
            }
            bcs.flux += apply_neumann_flux(mesh, spec.set, spec.flux, config.material.diffusivity);
        } else {
            throw ConfigError("[neumann] on '" + spec.set + "': phase-field Neumann data is not supported");
        }
    }

    // Duplicate entries on shared corner nodes are fine; contradicting
    // values are not.
    auto dedupe = [](std::vector<DirichletCondition>& list, const char* field) {
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.dof < b.dof; });
        std::vector<DirichletCondition> out;
        for (const auto& bc : list) {
            if (!out.empty() && out.back().dof == bc.dof) {
                if (out.back().value != bc.value) {
                    std::ostringstream msg;
                    msg << "conflicting " << field << " Dirichlet values " << out.back().value << " and "
                        << bc.value << " on dof " << bc.dof;
                    throw ConfigError(msg.str());
                }
                continue;
            }
            out.push_back(bc);
        }
        list = std::move(out);
    };
    dedupe(bcs.displacement, "displacement");
    dedupe(bcs.phase, "phase");
    dedupe(bcs.concentration, "concentration");
    std::sort(bcs.load_dofs.begin(), bcs.load_dofs.end());
    bcs.load_dofs.erase(std::unique(bcs.load_dofs.begin(), bcs.load_dofs.end()), bcs.load_dofs.end());
    for (const auto& bc : bcs.displacement) {
        if (std::binary_search(bcs.load_dofs.begin(), bcs.load_dofs.end(), bc.dof)) {
            throw ConfigError("dof " + std::to_string(bc.dof) + " is both fixed and driven by the loading program");
        }
    }
    return bcs;
}

namespace {

std::filesystem::path snapshot_path(const OutputSpec& out, std::size_t index) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%04zu.vtk", index);
    return out.directory / name;
}

} // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, const IncrementObserver& observer,
                            ScenarioResult* partial) {
    const std::shared_ptr<const Mesh> mesh = build_mesh(config);
    StaggeredSolver solver(mesh, config.material, config.solver, resolve_boundary_conditions(config, *mesh));
    const SolverSettings& settings = solver.settings();
    const Discretization& disc = solver.discretization();

    ScenarioResult result;
    result.mesh = mesh;
    FieldState state = solver.initial_state(config.initial_concentration);

    if (!config.defects.empty()) {
        const double seed = defect_history(config.material);
        const std::size_t ngp = disc.gauss_per_element();
        for (std::size_t e = 0; e < disc.num_elements(); ++e) {
            for (std::size_t q = 0; q < ngp; ++q) {
                const Point2& x = disc.geometry(e).points[q].x;
                for (const auto& defect : config.defects) {
                    if (defect.contains(x)) {
                        state.history[e * ngp + q] = seed;
                    }
                }
            }
        }
    }
    solver.initialize(state);

    const bool snapshots = config.output.vtk && (config.output.every > 0 || !config.output.times.empty());
    auto snapshot = [&](const FieldState& s) {
        const auto path = snapshot_path(config.output, result.snapshots.size());
        write_vtk(path, *mesh, s);
        result.snapshots.push_back(path);
    };
    if (snapshots) {
        std::filesystem::create_directories(config.output.directory);
        snapshot(state);
    }
    std::vector<double> times = config.output.times;
    std::sort(times.begin(), times.end());
    std::size_t next_time = 0;

    const double t_end = settings.t_end;
    double peak = 0.0;
    std::size_t increment = 0;
    // Step level k means dt = settings.dt * cut_factor^k. A rejected attempt
    // goes one level down; each clean increment climbs one level back.
    int level = 0;
    auto step_at = [&](int k) { return settings.dt * std::pow(settings.dt_cut_factor, k); };
    try {
        while (state.time < t_end * (1.0 - 1e-12)) {
            ++increment;
            int cuts = 0;
            IncrementStats stats;
            for (;;) {
                const double dt = std::min(step_at(level), t_end - state.time);
                try {
                    stats = solver.staggered_increment(state, dt, level < settings.max_cuts);
                    break;
                } catch (const UndershootError&) {
                    throw;
                } catch (const SolverError& e) {
                    if (level >= settings.max_cuts) {
                        std::ostringstream msg;
                        msg << e.what() << " (after " << cuts << " time-step cuts at dt = " << dt << ")";
                        throw SolverError(msg.str());
                    }
                    ++level;
                    ++cuts;
                }
            }
            if (cuts == 0 && level > 0) {
                --level;
            }
            IncrementRecord rec = solver.record(state, stats);
            rec.cuts = cuts;
            result.records.push_back(rec);
            if (observer) {
                observer(state, rec);
            }

            bool due = config.output.every > 0 && increment % static_cast<std::size_t>(config.output.every) == 0;
            while (next_time < times.size() && times[next_time] <= state.time * (1.0 + 1e-12)) {
                due = true;
                ++next_time;
            }
            if (snapshots && due) {
                snapshot(state);
            }

            peak = std::max(peak, std::abs(rec.reaction));
            if (settings.stop_reaction_fraction > 0.0 && peak > 0.0 &&
                std::abs(rec.reaction) < settings.stop_reaction_fraction * peak) {
                break;
            }
        }
    } catch (const SolverError& e) {
        if (partial) {
            partial->mesh = mesh;
            partial->final_state = state;
            partial->records = result.records;
            partial->snapshots = result.snapshots;
        }
        std::ostringstream msg;
        msg << "increment " << increment << " (t = " << state.time << "): " << e.what();
        throw SolverError(msg.str());
    }
    result.final_state = std::move(state);
    return result;
}

} // namespace hacfem
