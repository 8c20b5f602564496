#include <doctest.h>

#include <cmath>

#include "hacfem/assembly.hpp"
#include "hacfem/linear_solver.hpp"
#include "hacfem/verify.hpp"

using namespace hacfem;
using doctest::Approx;

namespace {

Eigen::MatrixXd skewed_quad8() {
    Eigen::MatrixXd xy(8, 2);
    xy << 0.0, 0.0, 1.2, 0.1, 1.3, 0.9, -0.1, 1.1, 0.6, 0.05, 1.25, 0.5, 0.6, 1.0, -0.05, 0.55;
    return xy;
}

} // namespace

TEST_CASE("element stiffness is symmetric and blind to rigid motion") {
    const MaterialParams p = default_iron_params();
    const auto c = physics::plane_strain_stiffness(p.young_modulus, p.poisson_ratio);
    const ElementGeometry g = element_geometry(ElementKind::Quad8, skewed_quad8());
    const Eigen::VectorXd phi = Eigen::VectorXd::Constant(8, 0.3);
    const ElementSystem s = element_displacement(g, Eigen::VectorXd::Zero(16), phi, p, c);
    CHECK((s.tangent - s.tangent.transpose()).norm() < 1e-9 * s.tangent.norm());

    const Eigen::MatrixXd xy = skewed_quad8();
    Eigen::VectorXd rigid(16);
    for (int i = 0; i < 8; ++i) {
        // translation plus a small rotation
        rigid(2 * i) = 0.1 - 0.02 * xy(i, 1);
        rigid(2 * i + 1) = -0.3 + 0.02 * xy(i, 0);
    }
    const ElementSystem moved = element_displacement(g, rigid, phi, p, c);
    CHECK(moved.residual.norm() < 1e-8 * s.tangent.norm() * rigid.norm());
}

TEST_CASE("element tangents match finite differences") {
    for (auto kind : {ElementKind::Quad4, ElementKind::Quad8}) {
        for (unsigned seed : {1u, 7u, 42u}) {
            CHECK(verify::displacement_tangent_error(kind, seed) < 1e-5);
            CHECK(verify::phase_tangent_error(kind, seed) < 1e-5);
        }
    }
}

TEST_CASE("phase residual vanishes in the intact, unloaded state") {
    const ElementGeometry g = element_geometry(ElementKind::Quad4, skewed_quad8().topRows(4));
    std::vector<GaussPointData> gauss(g.points.size());
    const ElementSystem s = element_phase(g, Eigen::VectorXd::Zero(4), gauss, default_iron_params());
    CHECK(s.residual.norm() == Approx(0.0));
}

TEST_CASE("diffusion operators") {
    MaterialParams p = default_iron_params();
    p.diffusivity = 2.0;
    const ElementGeometry g = element_geometry(ElementKind::Quad8, skewed_quad8());
    const DiffusionSystem d = element_diffusion(g, Eigen::VectorXd::Ones(8), Eigen::VectorXd::Zero(8), p);
    // constants are in the kernel without stress; the capacity integrates to area / D
    CHECK(d.residual.norm() < 1e-12);
    CHECK(d.capacity.sum() == Approx(g.area() / 2.0));
    const Eigen::MatrixXd k0 = element_equilibrium_diffusion(g, Eigen::VectorXd::Zero(8), p);
    CHECK((k0 - d.stiffness).norm() < 1e-12);

    p.diffusivity = 0.0;
    CHECK_THROWS_AS(element_diffusion(g, Eigen::VectorXd::Ones(8), Eigen::VectorXd::Zero(8), p), ParameterError);
}

TEST_CASE("drift and exponential-fitted forms share the steady state") {
    // Strip 1 x 0.1 with sigma_h linear in x, c = 1 at x = 0, no flux elsewhere.
    MaterialParams p = default_iron_params();
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(1.0, 0.1, 40, 1, ElementKind::Quad8));
    const Discretization disc(mesh);
    Eigen::VectorXd sigma(static_cast<Eigen::Index>(mesh->num_nodes()));
    for (std::size_t k = 0; k < mesh->num_nodes(); ++k) sigma(static_cast<Eigen::Index>(k)) = 300.0 * mesh->nodes()[k].x;
    std::vector<DirichletCondition> left;
    for (int n : mesh->node_set("left")) left.push_back({n, 1.0});

    const auto drift = assemble_global(
        disc, FieldKind::Concentration,
        [&](std::size_t e) {
            const auto ds = element_diffusion(disc.geometry(e), Eigen::VectorXd::Zero(8),
                                              disc.gather(sigma, e, FieldKind::Concentration), p);
            return ElementContribution{ds.stiffness, Eigen::VectorXd()};
        },
        left, false);
    const Eigen::VectorXd c_drift = solve_linear(drift);

    const auto fitted = assemble_global(
        disc, FieldKind::Concentration,
        [&](std::size_t e) {
            return ElementContribution{
                element_equilibrium_diffusion(disc.geometry(e), disc.gather(sigma, e, FieldKind::Concentration), p),
                Eigen::VectorXd()};
        },
        left, true);
    const Eigen::VectorXd psi = solve_linear(fitted);

    for (std::size_t k = 0; k < mesh->num_nodes(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double exact = std::exp(drift_exponent(p, sigma(i)));
        CHECK(psi(i) * std::exp(drift_exponent(p, sigma(i))) == Approx(exact).epsilon(1e-10));
        CHECK(c_drift(i) == Approx(exact).epsilon(1e-3));
    }
}

TEST_CASE("sigma_h recovery is exact for a uniform strain") {
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(1.0, 1.0, 3, 2, ElementKind::Quad8));
    const Discretization disc(mesh);
    const MaterialParams p = default_iron_params();
    Eigen::VectorXd u(2 * static_cast<Eigen::Index>(mesh->num_nodes()));
    for (std::size_t k = 0; k < mesh->num_nodes(); ++k) {
        u(2 * static_cast<Eigen::Index>(k)) = 1e-3 * mesh->nodes()[k].x;
        u(2 * static_cast<Eigen::Index>(k) + 1) = -2e-4 * mesh->nodes()[k].y;
    }
    const Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->num_nodes()));
    const Eigen::VectorXd sh = recover_sigma_h(disc, u, phi, p);
    const auto c = physics::plane_strain_stiffness(p.young_modulus, p.poisson_ratio);
    const double exact = physics::hydrostatic_stress(c.stress(physics::Voigt(1e-3, -2e-4, 0.0)), p.poisson_ratio);
    CHECK((sh.array() - exact).abs().maxCoeff() < 1e-9 * std::abs(exact));

    // the degraded measure scales with g(phi)
    const Eigen::VectorXd half = Eigen::VectorXd::Constant(phi.size(), 0.5);
    const Eigen::VectorXd shd = recover_sigma_h(disc, u, half, p, StressMeasure::Degraded);
    CHECK(shd(0) == Approx(exact * physics::degradation(0.5, p.stiffness_floor)));
}

TEST_CASE("patch tests pass on distorted meshes") {
    CHECK(verify::patch_test_error(ElementKind::Quad4) < 1e-10);
    CHECK(verify::patch_test_error(ElementKind::Quad8) < 1e-10);
}

TEST_CASE("global equilibrium of the internal forces") {
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(1.0, 1.0, 3, 3, ElementKind::Quad4));
    const Discretization disc(mesh);
    Eigen::VectorXd u = Eigen::VectorXd::Random(2 * static_cast<Eigen::Index>(mesh->num_nodes())) * 1e-3;
    const Eigen::VectorXd phi = Eigen::VectorXd::Random(static_cast<Eigen::Index>(mesh->num_nodes())).cwiseAbs();
    const Eigen::VectorXd f = internal_force(disc, u, phi, default_iron_params());
    double fx = 0.0, fy = 0.0, scale = 0.0;
    for (Eigen::Index k = 0; k < f.size() / 2; ++k) {
        fx += f(2 * k);
        fy += f(2 * k + 1);
        scale += std::abs(f(2 * k)) + std::abs(f(2 * k + 1));
    }
    CHECK(std::abs(fx) < 1e-9 * scale);
    CHECK(std::abs(fy) < 1e-9 * scale);
}

TEST_CASE("assembly with Dirichlet elimination on a 1D chain") {
    // Two Quad4 in a row, scalar Laplacian, phi = 0 left, 1 right: linear.
    auto mesh = std::make_shared<Mesh>(generate_rect_mesh(2.0, 1.0, 2, 1, ElementKind::Quad4));
    const Discretization disc(mesh);
    std::vector<DirichletCondition> bcs;
    for (int n : mesh->node_set("left")) bcs.push_back({n, 0.0});
    for (int n : mesh->node_set("right")) bcs.push_back({n, 1.0});
    const auto sys = assemble_global(
        disc, FieldKind::Phase,
        [&](std::size_t e) {
            Eigen::MatrixXd k = Eigen::MatrixXd::Zero(4, 4);
            for (const auto& gp : disc.geometry(e).points) k += gp.weight * gp.bs.transpose() * gp.bs;
            return ElementContribution{k, Eigen::VectorXd::Zero(4)};
        },
        bcs);
    const ReducedSystem red = reduce(sys);
    CHECK(red.free_dofs.size() == 2);
    const Eigen::VectorXd x = solve_linear(sys);
    for (std::size_t k = 0; k < mesh->num_nodes(); ++k) {
        CHECK(x(static_cast<Eigen::Index>(k)) == Approx(mesh->nodes()[k].x / 2.0));
    }
    std::vector<DirichletCondition> out_of_range{{99, 0.0}};
    CHECK_THROWS_AS(assemble_global(
                        disc, FieldKind::Phase,
                        [](std::size_t) { return ElementContribution{Eigen::MatrixXd::Zero(4, 4), Eigen::VectorXd()}; },
                        out_of_range),
                    Error);
}

TEST_CASE("Neumann traction is consistent") {
    const Mesh mesh = generate_rect_mesh(2.0, 1.0, 4, 2, ElementKind::Quad8);
    const Eigen::VectorXd f = apply_neumann_traction(mesh, "top", Eigen::Vector2d(0.0, 5.0));
    double fy = 0.0;
    for (Eigen::Index k = 0; k < f.size() / 2; ++k) fy += f(2 * k + 1);
    CHECK(fy == Approx(10.0));
    CHECK_THROWS_AS(apply_neumann_traction(mesh, "nope", Eigen::Vector2d(0.0, 1.0)), MeshError);
}

TEST_CASE("nodal equilibrium operator is an M-matrix on stretched rectangles") {
    const MaterialParams p = default_iron_params();
    Eigen::MatrixXd coords(4, 2);
    coords << 0.0, 0.0, 5.0, 0.0, 5.0, 0.2, 0.0, 0.2;
    Eigen::VectorXd s(4);
    s << 0.0, 2500.0, -800.0, 1200.0;
    const Eigen::MatrixXd k = element_equilibrium_diffusion_nodal(ElementKind::Quad4, coords, s, p);
    CHECK((k - k.transpose()).norm() < 1e-12 * k.norm());
    CHECK(k.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12 * k.norm());
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j) CHECK(k(i, j) <= 1e-14 * k.norm());
    // Gauss points give the stretched element positive cross couplings
    const Eigen::MatrixXd g = element_equilibrium_diffusion(element_geometry(ElementKind::Quad4, coords), s, p);
    CHECK(std::max(g(0, 1), g(2, 3)) > 0.0);
}
