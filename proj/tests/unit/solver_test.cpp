#include <doctest.h>

#include <cmath>

#include "hacfem/scenario.hpp"
#include "hacfem/verify.hpp"

using namespace hacfem;
using doctest::Approx;

namespace {

// Small plate: bottom clamped, top pulled in y, hydrogen held on the boundary.
ScenarioConfig small_plate(double top_rate) {
    ScenarioConfig cfg;
    cfg.mesh.rect.width = 1.0;
    cfg.mesh.rect.height = 1.0;
    cfg.mesh.rect.nx = 4;
    cfg.mesh.rect.ny = 4;
    cfg.material.length_scale = 0.2;
    cfg.solver.dt = 1.0;
    cfg.solver.t_end = 3.0;
    cfg.solver.staggered_passes = 5;
    cfg.initial_concentration = 0.5;
    cfg.boundary_concentration = 0.5;
    cfg.dirichlet.push_back({FieldKind::Displacement, "bottom", 0, 0.0, std::nullopt, {}});
    cfg.dirichlet.push_back({FieldKind::Displacement, "bottom", 1, 0.0, std::nullopt, {}});
    cfg.dirichlet.push_back({FieldKind::Displacement, "top", 1, 0.0, top_rate, {}});
    cfg.output.vtk = false;
    return cfg;
}

} // namespace

TEST_CASE("solver settings validation") {
    SolverSettings s;
    CHECK_NOTHROW(s.validate());
    s.dt = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.staggered_passes = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.dt_cut_factor = 1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("homogeneous element follows the closed-form law") {
    const MaterialParams p = default_iron_params();
    const auto run = verify::homogeneous_run(p, 0.0, 100, 2.0);
    CHECK(verify::homogeneous_curve_error(run, p, 2.0 * physics::critical_strain(p.young_modulus, p.gc0, p.length_scale)) <
          1e-6);
    CHECK(run.peak_stress == Approx(2823.72758955250).epsilon(1e-3));
    CHECK(run.peak_strain == Approx(0.0239045721866879).epsilon(1e-3));
    CHECK(run.history_monotone);
    CHECK(run.phi_monotone);
}

TEST_CASE("hydrogen lowers the homogeneous peak by sqrt(1 - chi theta)") {
    const MaterialParams p = default_iron_params();
    const auto dry = verify::homogeneous_run(p, 0.0, 60, 1.5);
    const auto wet = verify::homogeneous_run(p, 1.0, 60, 1.5);
    CHECK(wet.theta == Approx(0.902651667997886).epsilon(1e-10));
    CHECK(wet.peak_stress / dry.peak_stress == Approx(0.443441107117824).epsilon(1e-3));
}

TEST_CASE("zero load leaves the state unchanged") {
    const ScenarioConfig cfg = small_plate(0.0);
    const ScenarioResult r = run_scenario(cfg);
    REQUIRE(r.records.size() == 3);
    CHECK(r.final_state.displacement.cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.final_state.phase.cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.final_state.concentration.array() - 0.5).abs().maxCoeff() < 1e-12);
    for (const auto& rec : r.records) CHECK(rec.reaction == 0.0);
}

TEST_CASE("reactions on top and bottom balance") {
    // converged staggering, so the reactions see the final phase field
    ScenarioConfig cfg = small_plate(1e-4);
    cfg.solver.staggered_passes = 50;
    cfg.solver.staggered_tol = 1e-10;
    auto mesh = build_mesh(cfg);
    StaggeredSolver solver(mesh, cfg.material, cfg.solver, resolve_boundary_conditions(cfg, *mesh));
    FieldState s = solver.initial_state(cfg.initial_concentration);
    solver.initialize(s);
    solver.staggered_increment(s, 1.0);
    const double top = solver.reaction_force(s, "top", 1);
    const double bottom = solver.reaction_force(s, "bottom", 1);
    CHECK(top > 0.0);
    CHECK(top == Approx(-bottom).epsilon(1e-7));
    CHECK(solver.load_reaction(s) == Approx(top));
    CHECK_THROWS_AS(solver.reaction_force(s, "top", 0), Error);
}

TEST_CASE("history and damage never decrease; equilibrium hydrogen follows sigma_h") {
    ScenarioConfig cfg = small_plate(2e-3);
    cfg.solver.t_end = 6.0;
    cfg.solver.equilibrium_hydrogen = true;
    std::vector<double> last_history;
    double last_phi = 0.0;
    bool monotone = true;
    const ScenarioResult r = run_scenario(cfg, [&](const FieldState& s, const IncrementRecord& rec) {
        if (!last_history.empty()) {
            for (std::size_t k = 0; k < s.history.size(); ++k) monotone = monotone && s.history[k] >= last_history[k];
        }
        monotone = monotone && rec.max_phi >= last_phi;
        last_history = s.history;
        last_phi = rec.max_phi;
    });
    CHECK(monotone);
    CHECK(r.records.back().max_phi > 0.0);
    // psi = c exp(-w) is discretely harmonic: bounded by its boundary values
    const MaterialParams& p = cfg.material;
    const double drift = p.molar_volume / (p.gas_constant * p.temperature);
    const auto& c = r.final_state.concentration;
    const auto& sh = r.final_state.sigma_h_nodal;
    const auto& bnd = r.mesh->node_set("boundary");
    double lo = 1e300, hi = -1e300;
    for (int n : bnd) {
        CHECK(c(n) == Approx(0.5));
        lo = std::min(lo, c(n) * std::exp(-drift * sh(n)));
        hi = std::max(hi, c(n) * std::exp(-drift * sh(n)));
    }
    double spread = 0.0;
    for (Eigen::Index n = 0; n < c.size(); ++n) {
        const double psi = c(n) * std::exp(-drift * sh(n));
        CHECK(psi >= lo * (1 - 1e-12));
        CHECK(psi <= hi * (1 + 1e-12));
        spread = std::max(spread, std::abs(c(n) - 0.5));
    }
    CHECK(spread > 1e-4);
}

TEST_CASE("closed domain conserves hydrogen") {
    CHECK(verify::closed_domain_mass_drift(5) < 1e-8);
}

TEST_CASE("a failed increment leaves the state untouched") {
    ScenarioConfig cfg = small_plate(1e-3);
    cfg.dirichlet.erase(cfg.dirichlet.begin()); // x is now free: singular
    auto mesh = build_mesh(cfg);
    StaggeredSolver solver(mesh, cfg.material, cfg.solver, resolve_boundary_conditions(cfg, *mesh));
    FieldState s = solver.initial_state(cfg.initial_concentration);
    solver.initialize(s);
    const FieldState before = s;
    CHECK_THROWS_AS(solver.staggered_increment(s, 1.0), StepRejected);
    CHECK(s.time == before.time);
    CHECK(s.displacement == before.displacement);
    ScenarioResult partial;
    CHECK_THROWS_AS(run_scenario(cfg, {}, &partial), SolverError);
    CHECK(partial.records.empty());
}

TEST_CASE("seeded defects start fully broken") {
    ScenarioConfig cfg = small_plate(0.0);
    cfg.mesh.rect.nx = cfg.mesh.rect.ny = 8;
    cfg.defects.push_back({{{0.4, 0.4}, {0.6, 0.4}, {0.6, 0.6}, {0.4, 0.6}}});
    cfg.solver.t_end = 1.0;
    const ScenarioResult r = run_scenario(cfg);
    CHECK(r.mesh->has_node_set("defect_1"));
    double inside = 1.0;
    for (int n : r.mesh->node_set("defect_1")) inside = std::min(inside, r.final_state.phase(n));
    CHECK(inside > 0.9);
    CHECK(r.final_state.phase(r.mesh->node_set("left").front()) < 0.5);
}
