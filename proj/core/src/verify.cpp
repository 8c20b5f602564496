#include "hacfem/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "hacfem/physics.hpp"

namespace hacfem::verify {

OracleReport compare(std::string name, double computed, double reference, double tolerance) {
    OracleReport r{std::move(name), computed, reference, 0.0, tolerance, false};
    const double diff = std::abs(computed - reference);
    r.error = reference != 0.0 ? diff / std::abs(reference) : diff;
    r.pass = std::isfinite(r.error) && r.error <= tolerance;
    return r;
}

OracleReport bound(std::string name, double error, double tolerance) {
    OracleReport r{std::move(name), error, 0.0, error, tolerance, false};
    r.pass = std::isfinite(error) && error <= tolerance;
    return r;
}

double gamma_functional(const Mesh& mesh, const Eigen::VectorXd& phi, double ell, double crack_length) {
    // Own quadrature (one order above the element default) rather than the
    // assembly geometry cache.
    const QuadratureRule rule = gauss_rule(mesh.kind() == ElementKind::Quad8 ? 4 : 3);
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const Eigen::MatrixXd coords = mesh.element_coords(e);
        const auto nodes = mesh.element(e);
        Eigen::VectorXd phi_e(static_cast<Eigen::Index>(nodes.size()));
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            phi_e(static_cast<Eigen::Index>(i)) = phi(nodes[i]);
        }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const PointOperators op = bmatrices(mesh.kind(), coords, rule.points[q][0], rule.points[q][1], e);
            const double p = op.n.dot(phi_e);
            const Eigen::Vector2d grad = op.bs * phi_e;
            total += rule.weights[q] * op.det_j * (p * p / (2.0 * ell) + 0.5 * ell * grad.squaredNorm());
        }
    }
    return total / crack_length;
}

double diffusion_1d_oracle(double x, double t, double c_boundary, double diffusivity) {
    return c_boundary * std::erfc(x / (2.0 * std::sqrt(diffusivity * t)));
}

double steady_enrichment_oracle(double sigma_h, double c_far, const MaterialParams& params) {
    return c_far * std::exp(params.molar_volume * sigma_h / (params.gas_constant * params.temperature));
}

HomogeneousRun homogeneous_run(MaterialParams params, double c_wtppm, int steps, double max_strain_factor,
                               int staggered_passes, double staggered_tol) {
    params.poisson_ratio = 0.0;
    HomogeneousRun run;
    run.theta = physics::coverage_from_wtppm(c_wtppm, params);
    run.gc = physics::gc_degraded(run.theta, params);
    const double eps_c = physics::critical_strain(params.young_modulus, run.gc, params.length_scale);

    ScenarioConfig cfg;
    cfg.mesh.rect = RectMeshSpec{};
    cfg.material = params;
    cfg.solver.dt = 1.0;
    cfg.solver.t_end = steps;
    cfg.solver.staggered_passes = staggered_passes;
    cfg.solver.staggered_tol = staggered_tol;
    cfg.solver.equilibrium_hydrogen = true;
    cfg.initial_concentration = c_wtppm;
    cfg.boundary_concentration = c_wtppm;
    cfg.output.vtk = false;
    DirichletSpec left{FieldKind::Displacement, "left", 0, 0.0, std::nullopt, {}};
    DirichletSpec lateral{FieldKind::Displacement, "boundary", 1, 0.0, std::nullopt, {}};
    DirichletSpec pull{FieldKind::Displacement, "right", 0, 0.0, max_strain_factor * eps_c / steps, {}};
    cfg.dirichlet = {left, lateral, pull};

    std::vector<double> last_history;
    double last_phi = 0.0;
    auto observer = [&](const FieldState& s, const IncrementRecord& rec) {
        if (!last_history.empty()) {
            for (std::size_t k = 0; k < s.history.size(); ++k) {
                if (s.history[k] < last_history[k]) run.history_monotone = false;
            }
        }
        if (rec.max_phi < last_phi) run.phi_monotone = false;
        last_history = s.history;
        last_phi = rec.max_phi;
    };
    const ScenarioResult result = run_scenario(cfg, observer);
    run.records = result.records;
    for (const auto& rec : result.records) {
        run.strain.push_back(rec.prescribed); // unit width
        run.stress.push_back(rec.reaction);   // unit height
    }

    const auto it = std::max_element(run.stress.begin(), run.stress.end());
    const auto i = static_cast<std::size_t>(it - run.stress.begin());
    run.peak_strain = run.strain[i];
    run.peak_stress = run.stress[i];
    if (i > 0 && i + 1 < run.stress.size()) {
        const double y0 = run.stress[i - 1], y1 = run.stress[i], y2 = run.stress[i + 1];
        const double h = run.strain[i + 1] - run.strain[i];
        const double curvature = y0 - 2.0 * y1 + y2;
        if (curvature < 0.0) {
            const double delta = 0.5 * (y0 - y2) / curvature;
            run.peak_strain = run.strain[i] + delta * h;
            run.peak_stress = y1 - 0.25 * (y0 - y2) * delta;
        }
    }
    return run;
}

double homogeneous_curve_error(const HomogeneousRun& run, const MaterialParams& params, double strain_limit) {
    double worst = 0.0;
    for (std::size_t k = 0; k < run.strain.size(); ++k) {
        if (run.strain[k] > strain_limit * (1.0 + 1e-12)) {
            continue;
        }
        const double ref =
            physics::homogeneous_stress(run.strain[k], params.young_modulus, run.gc, params.length_scale);
        worst = std::max(worst, std::abs(run.stress[k] - ref) / std::abs(ref));
    }
    return worst;
}

namespace {

Mesh translated(const Mesh& mesh, double dx, double dy) {
    std::vector<Point2> nodes = mesh.nodes();
    for (auto& p : nodes) {
        p.x += dx;
        p.y += dy;
    }
    Mesh out(mesh.kind(), std::move(nodes), mesh.connectivity());
    for (const auto& [name, ids] : mesh.node_sets()) {
        out.set_node_set(name, ids);
    }
    return out;
}

std::vector<DirichletCondition> all_dofs_fixed(const Mesh& mesh) {
    std::vector<DirichletCondition> out;
    for (std::size_t k = 0; k < 2 * mesh.num_nodes(); ++k) {
        out.push_back({static_cast<int>(k), 0.0});
    }
    return out;
}

Eigen::MatrixXd distorted_coords(ElementKind kind, std::mt19937& rng) {
    std::uniform_real_distribution<double> jitter(-0.12, 0.12);
    const auto ref = reference_nodes(kind);
    for (;;) {
        Eigen::MatrixXd coords(static_cast<Eigen::Index>(ref.size()), 2);
        for (std::size_t i = 0; i < ref.size(); ++i) {
            coords(static_cast<Eigen::Index>(i), 0) = 0.5 * (ref[i][0] + 1.0) + jitter(rng);
            coords(static_cast<Eigen::Index>(i), 1) = 0.5 * (ref[i][1] + 1.0) + jitter(rng);
        }
        try {
            element_geometry(kind, coords);
            return coords;
        } catch (const MeshError&) {
        }
    }
}

double relative_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).norm() / b.norm();
}

} // namespace

double gamma_strip(double h_over_ell, double ell) {
    const int nx = static_cast<int>(std::lround(20.0 / h_over_ell));
    const double h = 20.0 * ell / nx;
    const Mesh mesh = translated(generate_rect_mesh(20.0 * ell, h, nx, 1, ElementKind::Quad8), -10.0 * ell, 0.0);
    Eigen::VectorXd phi(static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        phi(static_cast<Eigen::Index>(i)) = std::exp(-std::abs(mesh.nodes()[i].x) / ell);
    }
    return gamma_functional(mesh, phi, ell, h);
}

double transient_bar_error(int elements, int steps, const MaterialParams& params) {
    const double length = 1.0;
    const double t_final = std::pow(length / 6.0, 2) / params.diffusivity;
    auto mesh = std::make_shared<Mesh>(
        generate_rect_mesh(length, length / elements, elements, 1, ElementKind::Quad4));
    BoundaryConditions bcs;
    bcs.displacement = all_dofs_fixed(*mesh);
    for (int node : mesh->node_set("left")) {
        bcs.concentration.push_back({node, 1.0});
    }
    SolverSettings settings;
    settings.dt = t_final / steps;
    settings.t_end = t_final;
    StaggeredSolver solver(mesh, params, settings, bcs);
    FieldState state = solver.initial_state(0.0);
    solver.initialize(state);
    for (int s = 0; s < steps; ++s) {
        solver.staggered_increment(state, settings.dt);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
        const double exact = diffusion_1d_oracle(mesh->nodes()[i].x, state.time, 1.0, params.diffusivity);
        worst = std::max(worst, std::abs(state.concentration(static_cast<Eigen::Index>(i)) - exact));
    }
    return worst;
}

double stressed_bar_error(int elements, double sigma_max, const MaterialParams& params) {
    const Discretization disc(generate_rect_mesh(1.0, 1.0 / elements, elements, 1, ElementKind::Quad4));
    const Mesh& mesh = disc.mesh();
    Eigen::VectorXd sigma_h(static_cast<Eigen::Index>(mesh.num_nodes()));
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        sigma_h(static_cast<Eigen::Index>(i)) = sigma_max * mesh.nodes()[i].x;
    }
    std::vector<DirichletCondition> fixed;
    for (int node : mesh.node_set("left")) {
        fixed.push_back({node, 1.0});
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    const SparseSystem sys = assemble_global(
        disc, FieldKind::Concentration,
        [&](std::size_t e) {
            const DiffusionSystem ds = element_diffusion(disc.geometry(e), disc.gather(zero, e, FieldKind::Concentration),
                                                         disc.gather(sigma_h, e, FieldKind::Concentration), params);
            return ElementContribution{ds.stiffness, Eigen::VectorXd()};
        },
        fixed, false);
    const Eigen::VectorXd c = solve_linear(sys);
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const double exact = steady_enrichment_oracle(sigma_h(static_cast<Eigen::Index>(i)), 1.0, params);
        worst = std::max(worst, std::abs(c(static_cast<Eigen::Index>(i)) / exact - 1.0));
    }
    return worst;
}

double displacement_tangent_error(ElementKind kind, unsigned seed) {
    std::mt19937 rng(seed);
    const MaterialParams params;
    const auto elasticity = physics::plane_strain_stiffness(params.young_modulus, params.poisson_ratio);
    const ElementGeometry geom = element_geometry(kind, distorted_coords(kind, rng));
    const int n = nodes_per_element(kind);
    std::uniform_real_distribution<double> u_dist(-1e-3, 1e-3), phi_dist(0.0, 0.95);
    Eigen::VectorXd u(2 * n), phi(n);
    for (int i = 0; i < 2 * n; ++i) u(i) = u_dist(rng);
    for (int i = 0; i < n; ++i) phi(i) = phi_dist(rng);

    const Eigen::MatrixXd k = element_displacement(geom, u, phi, params, elasticity).tangent;
    Eigen::MatrixXd fd(2 * n, 2 * n);
    const double step = 1e-6;
    for (int j = 0; j < 2 * n; ++j) {
        Eigen::VectorXd up = u, um = u;
        up(j) += step;
        um(j) -= step;
        fd.col(j) = (element_displacement(geom, up, phi, params, elasticity).residual -
                     element_displacement(geom, um, phi, params, elasticity).residual) /
                    (2.0 * step);
    }
    return relative_frobenius(fd, k);
}

double phase_tangent_error(ElementKind kind, unsigned seed) {
    std::mt19937 rng(seed);
    const MaterialParams params;
    const ElementGeometry geom = element_geometry(kind, distorted_coords(kind, rng));
    const int n = nodes_per_element(kind);
    std::uniform_real_distribution<double> phi_dist(0.0, 1.0), h_dist(0.0, 2e3), theta_dist(0.0, 1.0);
    Eigen::VectorXd phi(n);
    for (int i = 0; i < n; ++i) phi(i) = phi_dist(rng);
    std::vector<GaussPointData> gauss(geom.points.size());
    for (auto& g : gauss) {
        g.history = h_dist(rng);
        g.theta = theta_dist(rng);
    }
    const Eigen::MatrixXd k = element_phase(geom, phi, gauss, params).tangent;
    Eigen::MatrixXd fd(n, n);
    const double step = 1e-6;
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd pp = phi, pm = phi;
        pp(j) += step;
        pm(j) -= step;
        fd.col(j) = (element_phase(geom, pp, gauss, params).residual - element_phase(geom, pm, gauss, params).residual) /
                    (2.0 * step);
    }
    return relative_frobenius(fd, k);
}

double patch_test_error(ElementKind kind) {
    Mesh base = generate_rect_mesh(1.0, 1.0, 3, 3, kind);
    std::vector<Point2> nodes = base.nodes();
    const auto& boundary = base.node_set("boundary");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (std::find(boundary.begin(), boundary.end(), static_cast<int>(i)) == boundary.end()) {
            nodes[i].x += 0.06 * std::sin(7.0 * nodes[i].y + 1.0);
            nodes[i].y += 0.05 * std::cos(5.0 * nodes[i].x);
        }
    }
    Mesh mesh(kind, nodes, base.connectivity());
    mesh.set_node_set("boundary", boundary);
    const Discretization disc(mesh);

    const MaterialParams params;
    const auto elasticity = physics::plane_strain_stiffness(params.young_modulus, params.poisson_ratio);
    auto exact = [](const Point2& p) {
        return Eigen::Vector2d(1e-3 + 2e-3 * p.x - 1e-3 * p.y, -5e-4 + 5e-4 * p.x + 3e-3 * p.y);
    };
    const physics::Voigt strain(2e-3, 3e-3, -1e-3 + 5e-4);
    const physics::Voigt stress = elasticity.stress(strain);

    std::vector<DirichletCondition> fixed;
    for (int node : boundary) {
        const Eigen::Vector2d u = exact(mesh.nodes()[static_cast<std::size_t>(node)]);
        fixed.push_back({2 * node, u(0)});
        fixed.push_back({2 * node + 1, u(1)});
    }
    const Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(mesh.num_nodes()));
    const SparseSystem sys = assemble_global(
        disc, FieldKind::Displacement,
        [&](std::size_t e) {
            const ElementSystem es = element_displacement(disc.geometry(e), disc.gather(u0, e, FieldKind::Displacement),
                                                          disc.gather(phi, e, FieldKind::Phase), params, elasticity);
            return ElementContribution{es.tangent, -es.residual};
        },
        fixed, true);
    const Eigen::VectorXd u = solve_linear(sys);

    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const Eigen::Vector2d ref = exact(mesh.nodes()[i]);
        worst = std::max(worst, (u.segment<2>(2 * static_cast<Eigen::Index>(i)) - ref).norm() / 3e-3);
    }
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        const Eigen::VectorXd u_e = disc.gather(u, e, FieldKind::Displacement);
        for (const auto& gp : disc.geometry(e).points) {
            const physics::Voigt s = elasticity.stress(strain_displacement(gp.bs) * u_e);
            worst = std::max(worst, (s - stress).norm() / stress.norm());
        }
    }
    return worst;
}

double closed_domain_mass_drift(int steps) {
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(1.0, 1.0, 6, 6, ElementKind::Quad4));
    const MaterialParams params;
    BoundaryConditions bcs;
    for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
        const Point2& p = mesh->nodes()[i];
        bcs.displacement.push_back({2 * static_cast<int>(i), 1e-3 * p.x * p.x});
        bcs.displacement.push_back({2 * static_cast<int>(i) + 1, 1e-3 * p.x * p.y});
    }
    SolverSettings settings;
    settings.dt = 0.02 / params.diffusivity;
    settings.t_end = steps * settings.dt;
    StaggeredSolver solver(mesh, params, settings, bcs);
    FieldState state = solver.initial_state(0.0);
    for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
        state.concentration(static_cast<Eigen::Index>(i)) = 1.0 + mesh->nodes()[i].x;
    }
    solver.initialize(state);

    const Discretization& disc = solver.discretization();
    auto content = [&](const Eigen::VectorXd& c) {
        double total = 0.0;
        for (std::size_t e = 0; e < disc.num_elements(); ++e) {
            const Eigen::VectorXd c_e = disc.gather(c, e, FieldKind::Concentration);
            for (const auto& gp : disc.geometry(e).points) {
                total += gp.weight * gp.n.dot(c_e);
            }
        }
        return total;
    };
    double worst = 0.0;
    double before = content(state.concentration);
    for (int s = 0; s < steps; ++s) {
        solver.staggered_increment(state, settings.dt);
        const double after = content(state.concentration);
        worst = std::max(worst, std::abs(after - before) / std::abs(before));
        before = after;
    }
    return worst;
}

std::vector<OracleReport> run_verification_suite(std::string_view level) {
    const bool full = level == "full";
    std::vector<OracleReport> out;
    const MaterialParams iron = default_iron_params();
    auto guarded = [&](const std::string& name, auto&& check) {
        try {
            check();
        } catch (const std::exception& e) {
            OracleReport r{name + " (" + e.what() + ")", NAN, NAN, NAN, 0.0, false};
            out.push_back(r);
        }
    };

    guarded("homogeneous", [&] {
        const int steps = full ? 2000 : 600;
        const HomogeneousRun run = homogeneous_run(iron, 0.0, steps, 2.0);
        const double eps_c = physics::critical_strain(iron.young_modulus, iron.gc0, iron.length_scale);
        out.push_back(bound("homogeneous stress-strain curve", homogeneous_curve_error(run, iron, 2.0 * eps_c), 1e-6));
        out.push_back(compare("homogeneous peak stress",
                              run.peak_stress, physics::critical_stress(iron.young_modulus, iron.gc0, iron.length_scale),
                              1e-3));
        out.push_back(compare("homogeneous peak strain", run.peak_strain, eps_c, 1e-3));
        out.push_back(bound("homogeneous irreversibility violations",
                            (run.history_monotone && run.phi_monotone) ? 0.0 : 1.0, 0.0));

        const HomogeneousRun wet = homogeneous_run(iron, 1.0, steps, 2.0);
        out.push_back(compare("hydrogen strength ratio at 1 wt ppm", wet.peak_stress / run.peak_stress,
                              std::sqrt(1.0 - iron.damage_coeff * wet.theta), 1e-3));
    });

    guarded("gamma", [&] {
        std::vector<double> ladder = {0.2, 0.1, 0.05};
        if (full) ladder.push_back(0.025);
        double previous = INFINITY;
        bool monotone = true;
        for (double r : ladder) {
            const double g = gamma_strip(r);
            char name[64];
            std::snprintf(name, sizeof name, "crack functional, h/l = %g", r);
            out.push_back(compare(name, g, 1.0, r <= 0.1 ? 0.02 : 0.05));
            monotone = monotone && std::abs(g - 1.0) < previous;
            previous = std::abs(g - 1.0);
        }
        out.push_back(bound("crack functional error monotone", monotone ? 0.0 : 1.0, 0.0));
    });

    guarded("transport", [&] {
        out.push_back(compare("erfc oracle at x = 2 sqrt(Dt)",
                              diffusion_1d_oracle(2.0 * std::sqrt(iron.diffusivity * 10.0), 10.0, 1.0, iron.diffusivity),
                              0.157299207050285, 1e-12));
        std::vector<std::pair<int, int>> ladder = {{50, 50}, {100, 100}, {200, 200}};
        if (full) ladder.push_back({400, 400});
        double previous = INFINITY;
        bool monotone = true;
        for (const auto& [ne, ns] : ladder) {
            const double err = transient_bar_error(ne, ns, iron);
            char name[64];
            std::snprintf(name, sizeof name, "transient bar, %d elements / %d steps", ne, ns);
            if (ne >= 200) out.push_back(bound(name, err, 0.01));
            monotone = monotone && err < previous;
            previous = err;
        }
        out.push_back(bound("transient bar error monotone under refinement", monotone ? 0.0 : 1.0, 0.0));
        out.push_back(compare("enrichment oracle at 100 MPa", steady_enrichment_oracle(100.0, 1.0, iron),
                              1.08348861204038, 1e-12));
        out.push_back(bound("stressed bar steady state, 100 MPa", stressed_bar_error(50, 100.0, iron), 5e-3));
    });

    guarded("tangents", [&] {
        for (ElementKind kind : {ElementKind::Quad4, ElementKind::Quad8}) {
            double ku = 0.0, kphi = 0.0;
            for (unsigned seed = 1; seed <= (full ? 20u : 5u); ++seed) {
                ku = std::max(ku, displacement_tangent_error(kind, seed));
                kphi = std::max(kphi, phase_tangent_error(kind, seed));
            }
            const std::string k(to_string(kind));
            out.push_back(bound("displacement tangent, " + k, ku, 1e-5));
            out.push_back(bound("phase-field tangent, " + k, kphi, 1e-5));
            out.push_back(bound("patch test, " + k, patch_test_error(kind), 1e-9));
        }
    });

    guarded("conservation", [&] {
        out.push_back(bound("closed-domain hydrogen content", closed_domain_mass_drift(full ? 20 : 5), 1e-8));
    });

    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

std::string format_report_table(std::span<const OracleReport> reports) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-52s %14s %14s %10s %10s  %s\n", "check", "computed", "reference", "error",
                  "tolerance", "result");
    out += line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-52s %14.7g %14.7g %10.3e %10.3e  %s\n", r.name.c_str(), r.computed,
                      r.reference, r.error, r.tolerance, r.pass ? "PASS" : "FAIL");
        out += line;
    }
    return out;
}

std::string format_report_csv(std::span<const OracleReport> reports) {
    std::string out = "name,computed,reference,error,tolerance,pass\n";
    char line[320];
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "\"%s\",%.9e,%.9e,%.9e,%.9e,%d\n", r.name.c_str(), r.computed, r.reference,
                      r.error, r.tolerance, r.pass ? 1 : 0);
        out += line;
    }
    return out;
}

} // namespace hacfem::verify
