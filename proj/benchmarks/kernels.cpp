#include <benchmark/benchmark.h>

#include <vector>

#include "hacfem/linear_solver.hpp"
#include "hacfem/scenario.hpp"

using namespace hacfem;

namespace {

ElementKind kind_of(const benchmark::State& state) {
    return state.range(0) == 4 ? ElementKind::Quad4 : ElementKind::Quad8;
}

void shape_functions_eval(benchmark::State& state) {
    const ElementKind kind = kind_of(state);
    double xi = -0.9;
    for (auto _ : state) {
        benchmark::DoNotOptimize(shape_functions(kind, xi, 0.3));
        xi = xi > 0.9 ? -0.9 : xi + 1e-3;
    }
}
BENCHMARK(shape_functions_eval)->Arg(4)->Arg(8);

void displacement_element(benchmark::State& state) {
    const ElementKind kind = kind_of(state);
    const Mesh mesh = generate_rect_mesh(1.0, 1.0, 1, 1, kind);
    const ElementGeometry geom = element_geometry(mesh, 0);
    const MaterialParams p = default_iron_params();
    const auto elasticity = physics::plane_strain_stiffness(p.young_modulus, p.poisson_ratio);
    const auto n = static_cast<Eigen::Index>(mesh.num_nodes());
    const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(2 * n, 0.0, 1e-3);
    const Eigen::VectorXd phi = Eigen::VectorXd::Constant(n, 0.2);
    for (auto _ : state) benchmark::DoNotOptimize(element_displacement(geom, u, phi, p, elasticity));
}
BENCHMARK(displacement_element)->Arg(4)->Arg(8);

void phase_element(benchmark::State& state) {
    const ElementKind kind = kind_of(state);
    const Mesh mesh = generate_rect_mesh(1.0, 1.0, 1, 1, kind);
    const ElementGeometry geom = element_geometry(mesh, 0);
    const MaterialParams p = default_iron_params();
    std::vector<GaussPointData> gauss(geom.points.size());
    for (auto& g : gauss) g.history = 5.0;
    const Eigen::VectorXd phi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(mesh.num_nodes()), 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(element_phase(geom, phi, gauss, p));
}
BENCHMARK(phase_element)->Arg(4)->Arg(8);

// Laplacian on an n x n quad4 grid, edges held at zero, unit load.
SparseSystem poisson(const Discretization& disc) {
    const Mesh& mesh = disc.mesh();
    std::vector<DirichletCondition> fixed;
    for (int node : mesh.node_set("boundary")) fixed.push_back({node, 0.0});
    return assemble_global(
        disc, FieldKind::Phase,
        [&](std::size_t e) {
            const auto& g = disc.geometry(e);
            Eigen::MatrixXd k = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
            Eigen::VectorXd f = Eigen::VectorXd::Zero(g.num_nodes());
            for (const auto& gp : g.points) {
                k.noalias() += gp.weight * gp.bs.transpose() * gp.bs;
                f += gp.weight * gp.n;
            }
            return ElementContribution{k, f};
        },
        fixed);
}

void global_assembly(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const Discretization disc(generate_rect_mesh(1.0, 1.0, n, n, ElementKind::Quad4));
    for (auto _ : state) benchmark::DoNotOptimize(poisson(disc));
    state.SetComplexityN(n * n);
}
BENCHMARK(global_assembly)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void sparse_solve(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    const Discretization disc(generate_rect_mesh(1.0, 1.0, n, n, ElementKind::Quad4));
    const SparseSystem sys = poisson(disc);
    LinearSolver solver;
    for (auto _ : state) benchmark::DoNotOptimize(solver.solve(sys));
    state.SetComplexityN(n * n);
}
BENCHMARK(sparse_solve)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void plate_increment(benchmark::State& state) {
    ScenarioConfig cfg;
    cfg.mesh.rect.nx = cfg.mesh.rect.ny = static_cast<int>(state.range(0));
    cfg.material.length_scale = 0.05;
    cfg.solver.equilibrium_hydrogen = true;
    cfg.initial_concentration = 1.0;
    cfg.boundary_concentration = 1.0;
    cfg.dirichlet.push_back({FieldKind::Displacement, "bottom", 0, 0.0, std::nullopt, {}});
    cfg.dirichlet.push_back({FieldKind::Displacement, "bottom", 1, 0.0, std::nullopt, {}});
    cfg.dirichlet.push_back({FieldKind::Displacement, "top", 1, 0.0, 1e-3, {}});
    const auto mesh = build_mesh(cfg);
    StaggeredSolver solver(mesh, cfg.material, cfg.solver, resolve_boundary_conditions(cfg, *mesh));
    FieldState start = solver.initial_state(1.0);
    solver.initialize(start);
    for (auto _ : state) {
        FieldState s = start;
        benchmark::DoNotOptimize(solver.staggered_increment(s, 1.0));
    }
}
BENCHMARK(plate_increment)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
