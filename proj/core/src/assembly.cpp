#include "hacfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Dense>

namespace hacfem {

int dofs_per_node(FieldKind field) {
    return field == FieldKind::Displacement ? 2 : 1;
}

std::string_view to_string(FieldKind field) {
    switch (field) {
    case FieldKind::Displacement:
        return "displacement";
    case FieldKind::Phase:
        return "phase";
    case FieldKind::Concentration:
        return "concentration";
    }
    return "unknown";
}

double ElementGeometry::area() const {
    double a = 0.0;
    for (const auto& gp : points) {
        a += gp.weight;
    }
    return a;
}

ElementGeometry element_geometry(ElementKind kind, const Eigen::MatrixXd& coords,
                                 std::size_t element_id) {
    const QuadratureRule rule = default_rule(kind);
    ElementGeometry geom;
    geom.kind = kind;
    geom.points.reserve(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto& p = rule.points[q];
        PointOperators op = bmatrices(kind, coords, p[0], p[1], element_id);
        GaussPoint gp;
        gp.weight = rule.weights[q] * op.det_j;
        gp.x = {op.n.dot(coords.col(0)), op.n.dot(coords.col(1))};
        gp.n = std::move(op.n);
        gp.bs = std::move(op.bs);
        geom.points.push_back(std::move(gp));
    }
    return geom;
}

ElementGeometry element_geometry(const Mesh& mesh, std::size_t element) {
    return element_geometry(mesh.kind(), mesh.element_coords(element), element);
}

Eigen::MatrixXd strain_displacement(const Eigen::MatrixXd& bs) {
    const auto n = bs.cols();
    Eigen::MatrixXd bu = Eigen::MatrixXd::Zero(3, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        bu(0, 2 * i) = bs(0, i);
        bu(1, 2 * i + 1) = bs(1, i);
        bu(2, 2 * i) = bs(1, i);
        bu(2, 2 * i + 1) = bs(0, i);
    }
    return bu;
}

Discretization::Discretization(Mesh mesh)
    : mesh_(std::make_shared<const Mesh>(std::move(mesh))) {
    build();
}

Discretization::Discretization(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
    build();
}

void Discretization::build() {
    geometry_.clear();
    geometry_.reserve(mesh_->num_elements());
    for (std::size_t e = 0; e < mesh_->num_elements(); ++e) {
        geometry_.push_back(element_geometry(*mesh_, e));
    }
    gauss_per_element_ = default_rule(mesh_->kind()).size();
}

std::vector<int> Discretization::element_dofs(std::size_t e, FieldKind field) const {
    const auto nodes = mesh_->element(e);
    const int per = dofs_per_node(field);
    std::vector<int> dofs;
    dofs.reserve(nodes.size() * static_cast<std::size_t>(per));
    for (int node : nodes) {
        for (int c = 0; c < per; ++c) {
            dofs.push_back(node * per + c);
        }
    }
    return dofs;
}

Eigen::VectorXd Discretization::gather(const Eigen::VectorXd& global, std::size_t e,
                                       FieldKind field) const {
    const auto dofs = element_dofs(e, field);
    Eigen::VectorXd local(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        local(static_cast<Eigen::Index>(k)) = global(dofs[k]);
    }
    return local;
}

ElementSystem element_displacement(const ElementGeometry& geom, const Eigen::VectorXd& u_e,
                                   const Eigen::VectorXd& phi_e, const MaterialParams& params,
                                   const physics::PlaneStrainElasticity& elasticity,
                                   const Eigen::Vector2d& body_force) {
    const Eigen::Index n = geom.num_nodes();
    ElementSystem out{Eigen::VectorXd::Zero(2 * n), Eigen::MatrixXd::Zero(2 * n, 2 * n)};
    for (const auto& gp : geom.points) {
        const Eigen::MatrixXd bu = strain_displacement(gp.bs);
        const physics::Voigt strain = bu * u_e;
        const physics::Voigt stress = elasticity.stress(strain);
        const double g = physics::degradation(gp.n.dot(phi_e), params.stiffness_floor);
        out.residual.noalias() += gp.weight * g * bu.transpose() * stress;
        out.tangent.noalias() += gp.weight * g * bu.transpose() * elasticity.c0 * bu;
        if (body_force.squaredNorm() > 0.0) {
            for (Eigen::Index i = 0; i < n; ++i) {
                out.residual(2 * i) -= gp.weight * gp.n(i) * body_force(0);
                out.residual(2 * i + 1) -= gp.weight * gp.n(i) * body_force(1);
            }
        }
    }
    return out;
}

ElementSystem element_phase(const ElementGeometry& geom, const Eigen::VectorXd& phi_e,
                            std::span<const GaussPointData> gauss, const MaterialParams& params) {
    const Eigen::Index n = geom.num_nodes();
    const double ell = params.length_scale;
    ElementSystem out{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
    for (std::size_t q = 0; q < geom.points.size(); ++q) {
        const auto& gp = geom.points[q];
        const double h = gauss[q].history;
        const double gc = physics::gc_degraded(gauss[q].theta, params);
        const double phi = gp.n.dot(phi_e);
        const Eigen::Vector2d grad = gp.bs * phi_e;
        out.residual.noalias() +=
            gp.weight * (physics::degradation_derivative(phi) * h * gp.n +
                         gc * (phi / ell * gp.n + ell * gp.bs.transpose() * grad));
        out.tangent.noalias() += gp.weight * ((2.0 * h + gc / ell) * gp.n * gp.n.transpose() +
                                              gc * ell * gp.bs.transpose() * gp.bs);
    }
    return out;
}

void update_history(const ElementGeometry& geom, const Eigen::VectorXd& u_e,
                    const physics::PlaneStrainElasticity& elasticity,
                    std::span<GaussPointData> gauss) {
    for (std::size_t q = 0; q < geom.points.size(); ++q) {
        const physics::Voigt strain = strain_displacement(geom.points[q].bs) * u_e;
        gauss[q].strain = strain;
        gauss[q].history = std::max(gauss[q].history, physics::strain_energy_density(strain, elasticity));
    }
}

DiffusionSystem element_diffusion(const ElementGeometry& geom, const Eigen::VectorXd& c_e,
                                  const Eigen::VectorXd& sigma_h_e, const MaterialParams& params) {
    if (!(params.diffusivity > 0.0)) {
        throw ParameterError("element_diffusion: diffusivity must be > 0 for the capacity matrix");
    }
    const Eigen::Index n = geom.num_nodes();
    const double drift = params.molar_volume / (params.gas_constant * params.temperature);
    DiffusionSystem out{Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd()};
    for (const auto& gp : geom.points) {
        const Eigen::Vector2d grad_sh = gp.bs * sigma_h_e;
        const Eigen::VectorXd b_dot_grad = gp.bs.transpose() * grad_sh;
        out.stiffness.noalias() +=
            gp.weight * (gp.bs.transpose() * gp.bs - drift * b_dot_grad * gp.n.transpose());
        out.capacity.noalias() += gp.weight / params.diffusivity * gp.n * gp.n.transpose();
    }
    out.residual = out.stiffness * c_e;
    return out;
}

Eigen::MatrixXd element_equilibrium_diffusion(const ElementGeometry& geom, const Eigen::VectorXd& sigma_h_e,
                                              const MaterialParams& params) {
    const double drift = params.molar_volume / (params.gas_constant * params.temperature);
    const Eigen::Index n = geom.num_nodes();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (const auto& gp : geom.points) {
        k.noalias() += gp.weight * std::exp(drift * gp.n.dot(sigma_h_e)) * gp.bs.transpose() * gp.bs;
    }
    return k;
}

Eigen::MatrixXd element_equilibrium_diffusion_nodal(ElementKind kind, const Eigen::MatrixXd& coords,
                                                    const Eigen::VectorXd& sigma_h_e, const MaterialParams& params) {
    if (kind != ElementKind::Quad4) {
        return element_equilibrium_diffusion(element_geometry(kind, coords), sigma_h_e, params);
    }
    const double drift = params.molar_volume / (params.gas_constant * params.temperature);
    const auto corners = reference_nodes(kind);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(4, 4);
    for (Eigen::Index i = 0; i < 4; ++i) {
        const auto& r = corners[static_cast<std::size_t>(i)];
        const PointOperators op = bmatrices(kind, coords, r[0], r[1]);
        k.noalias() += op.det_j * std::exp(drift * sigma_h_e(i)) * op.bs.transpose() * op.bs;
    }
    return k;
}

Eigen::MatrixXd gauss_to_node_extrapolation(ElementKind kind) {
    const QuadratureRule rule = default_rule(kind);
    const int n = nodes_per_element(kind);
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rule.size()), n);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        a.row(static_cast<Eigen::Index>(q)) =
            shape_functions(kind, rule.points[q][0], rule.points[q][1]).values.transpose();
    }
    return a.completeOrthogonalDecomposition().pseudoInverse();
}

Eigen::VectorXd recover_sigma_h(const Discretization& disc, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& phi, const MaterialParams& params,
                                StressMeasure measure) {
    const Mesh& mesh = disc.mesh();
    const auto elasticity = physics::plane_strain_stiffness(params.young_modulus, params.poisson_ratio);
    const Eigen::MatrixXd extrap = gauss_to_node_extrapolation(mesh.kind());
    const auto nn = static_cast<Eigen::Index>(mesh.num_nodes());
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(nn);
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(nn);
    Eigen::VectorXd at_gauss(static_cast<Eigen::Index>(disc.gauss_per_element()));
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        const ElementGeometry& geom = disc.geometry(e);
        const Eigen::VectorXd u_e = disc.gather(u, e, FieldKind::Displacement);
        const Eigen::VectorXd phi_e = disc.gather(phi, e, FieldKind::Phase);
        for (std::size_t q = 0; q < geom.points.size(); ++q) {
            const auto& gp = geom.points[q];
            physics::Voigt stress = elasticity.stress(strain_displacement(gp.bs) * u_e);
            if (measure == StressMeasure::Degraded) {
                stress *= physics::degradation(gp.n.dot(phi_e), params.stiffness_floor);
            }
            at_gauss(static_cast<Eigen::Index>(q)) = physics::hydrostatic_stress(stress, params.poisson_ratio);
        }
        const Eigen::VectorXd nodal = extrap * at_gauss;
        const double area = geom.area();
        const auto nodes = mesh.element(e);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            sum(nodes[i]) += area * nodal(static_cast<Eigen::Index>(i));
            weight(nodes[i]) += area;
        }
    }
    for (Eigen::Index k = 0; k < nn; ++k) {
        if (weight(k) > 0.0) {
            sum(k) /= weight(k);
        }
    }
    return sum;
}

SparseSystem assemble_global(const Discretization& disc, FieldKind field,
                             const std::function<ElementContribution(std::size_t)>& contribution,
                             std::vector<DirichletCondition> dirichlet, bool symmetric) {
    SparseSystem sys;
    sys.dof_map = DofMap{field, disc.num_nodes()};
    sys.symmetric = symmetric;
    const auto ndof = static_cast<Eigen::Index>(sys.dof_map.size());
    sys.rhs = Eigen::VectorXd::Zero(ndof);

    std::vector<Eigen::Triplet<double>> triplets;
    const std::size_t local = static_cast<std::size_t>(disc.mesh().nodes_per_element() * dofs_per_node(field));
    triplets.reserve(disc.num_elements() * local * local);
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        const ElementContribution c = contribution(e);
        const auto dofs = disc.element_dofs(e, field);
        const auto m = static_cast<Eigen::Index>(dofs.size());
        const bool has_matrix = c.matrix.size() > 0;
        const bool has_vector = c.vector.size() > 0;
        if ((has_matrix && (c.matrix.rows() != m || c.matrix.cols() != m)) ||
            (has_vector && c.vector.size() != m)) {
            throw Error("assemble_global: element " + std::to_string(e + 1) +
                        " contribution does not match the " + std::string(to_string(field)) + " dof map");
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            if (has_vector) {
                sys.rhs(dofs[static_cast<std::size_t>(i)]) += c.vector(i);
            }
            if (has_matrix) {
                for (Eigen::Index j = 0; j < m; ++j) {
                    triplets.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)],
                                          c.matrix(i, j));
                }
            }
        }
    }
    sys.matrix.resize(ndof, ndof);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.matrix.makeCompressed();

    std::map<int, double> unique;
    for (const auto& bc : dirichlet) {
        if (bc.dof < 0 || bc.dof >= ndof) {
            throw Error("assemble_global: Dirichlet dof " + std::to_string(bc.dof) +
                        " outside the " + std::string(to_string(field)) + " dof map");
        }
        const auto [it, inserted] = unique.emplace(bc.dof, bc.value);
        if (!inserted && it->second != bc.value) {
            std::ostringstream msg;
            msg << "assemble_global: conflicting Dirichlet values " << it->second << " and " << bc.value
                << " on dof " << bc.dof;
            throw Error(msg.str());
        }
    }
    sys.dirichlet.clear();
    for (const auto& [dof, value] : unique) {
        sys.dirichlet.push_back({dof, value});
    }
    return sys;
}

ReducedSystem reduce(const SparseSystem& system) {
    const auto n = system.matrix.rows();
    ReducedSystem red;
    red.prescribed = Eigen::VectorXd::Zero(n);
    std::vector<int> index(static_cast<std::size_t>(n), 0);
    for (const auto& bc : system.dirichlet) {
        index[static_cast<std::size_t>(bc.dof)] = -1;
        red.prescribed(bc.dof) = bc.value;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        if (index[static_cast<std::size_t>(k)] == 0) {
            index[static_cast<std::size_t>(k)] = static_cast<int>(red.free_dofs.size());
            red.free_dofs.push_back(static_cast<int>(k));
        } else {
            index[static_cast<std::size_t>(k)] = -1;
        }
    }
    const auto nf = static_cast<Eigen::Index>(red.free_dofs.size());
    red.rhs.resize(nf);
    for (Eigen::Index k = 0; k < nf; ++k) {
        red.rhs(k) = system.rhs(red.free_dofs[static_cast<std::size_t>(k)]);
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(system.matrix.nonZeros()));
    for (Eigen::Index col = 0; col < system.matrix.outerSize(); ++col) {
        const int cj = index[static_cast<std::size_t>(col)];
        for (Eigen::SparseMatrix<double>::InnerIterator it(system.matrix, col); it; ++it) {
            const int ri = index[static_cast<std::size_t>(it.row())];
            if (ri < 0) {
                continue;
            }
            if (cj >= 0) {
                triplets.emplace_back(ri, cj, it.value());
            } else {
                red.rhs(ri) -= it.value() * red.prescribed(col);
            }
        }
    }
    red.matrix.resize(nf, nf);
    red.matrix.setFromTriplets(triplets.begin(), triplets.end());
    red.matrix.makeCompressed();
    return red;
}

std::vector<std::vector<int>> boundary_edges(const Mesh& mesh, const std::vector<int>& node_set) {
    const auto local_edges = element_edges(mesh.kind());
    std::map<std::pair<int, int>, int> count;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto nodes = mesh.element(e);
        for (const auto& edge : local_edges) {
            const int a = nodes[static_cast<std::size_t>(edge[0])];
            const int b = nodes[static_cast<std::size_t>(edge[1])];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    }
    const std::set<int> members(node_set.begin(), node_set.end());
    std::vector<std::vector<int>> out;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto nodes = mesh.element(e);
        for (const auto& edge : local_edges) {
            std::vector<int> global;
            for (int local : edge) {
                global.push_back(nodes[static_cast<std::size_t>(local)]);
            }
            const std::pair<int, int> key{std::min(global[0], global[1]), std::max(global[0], global[1])};
            if (count[key] != 1) {
                continue;
            }
            if (std::all_of(global.begin(), global.end(), [&](int id) { return members.contains(id); })) {
                out.push_back(std::move(global));
            }
        }
    }
    return out;
}

namespace {

// Integrates a uniform unit load along each edge; calls sink(node, weight).
template <class Sink>
void integrate_edges(const Mesh& mesh, const std::string& node_set, Sink&& sink) {
    const auto edges = boundary_edges(mesh, mesh.node_set(node_set));
    if (edges.empty()) {
        throw MeshError("node set '" + node_set + "' contains no boundary edges");
    }
    const bool quadratic = mesh.kind() == ElementKind::Quad8;
    const auto [pts, wts] = gauss_1d(quadratic ? 3 : 2);
    for (const auto& edge : edges) {
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const double s = pts[q];
            std::vector<double> n, dn;
            if (quadratic) {
                n = {0.5 * s * (s - 1.0), 0.5 * s * (s + 1.0), 1.0 - s * s};
                dn = {s - 0.5, s + 0.5, -2.0 * s};
            } else {
                n = {0.5 * (1.0 - s), 0.5 * (1.0 + s)};
                dn = {-0.5, 0.5};
            }
            double dx = 0.0, dy = 0.0;
            for (std::size_t i = 0; i < edge.size(); ++i) {
                const Point2& p = mesh.nodes()[static_cast<std::size_t>(edge[i])];
                dx += dn[i] * p.x;
                dy += dn[i] * p.y;
            }
            const double jac = std::hypot(dx, dy);
            for (std::size_t i = 0; i < edge.size(); ++i) {
                sink(edge[i], wts[q] * jac * n[i]);
            }
        }
    }
}

} // namespace

Eigen::VectorXd apply_neumann_traction(const Mesh& mesh, const std::string& node_set,
                                       const Eigen::Vector2d& traction) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(mesh.num_nodes()));
    integrate_edges(mesh, node_set, [&](int node, double w) {
        f(2 * node) += w * traction(0);
        f(2 * node + 1) += w * traction(1);
    });
    return f;
}

Eigen::VectorXd apply_neumann_flux(const Mesh& mesh, const std::string& node_set, double flux,
                                   double diffusivity) {
    if (!(diffusivity > 0.0)) {
        throw ParameterError("apply_neumann_flux: diffusivity must be > 0");
    }
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()));
    integrate_edges(mesh, node_set, [&](int node, double w) { f(node) -= w * flux / diffusivity; });
    return f;
}

Eigen::VectorXd internal_force(const Discretization& disc, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& phi, const MaterialParams& params) {
    const auto elasticity = physics::plane_strain_stiffness(params.young_modulus, params.poisson_ratio);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(u.size());
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        const ElementGeometry& geom = disc.geometry(e);
        const Eigen::VectorXd u_e = disc.gather(u, e, FieldKind::Displacement);
        const Eigen::VectorXd phi_e = disc.gather(phi, e, FieldKind::Phase);
        const auto dofs = disc.element_dofs(e, FieldKind::Displacement);
        // Residual only; the tangent is not needed here.
        for (const auto& gp : geom.points) {
            const Eigen::MatrixXd bu = strain_displacement(gp.bs);
            const physics::Voigt stress = elasticity.stress(bu * u_e);
            const double g = physics::degradation(gp.n.dot(phi_e), params.stiffness_floor);
            const Eigen::VectorXd local = gp.weight * g * bu.transpose() * stress;
            for (std::size_t k = 0; k < dofs.size(); ++k) {
                f(dofs[k]) += local(static_cast<Eigen::Index>(k));
            }
        }
    }
    return f;
}

EnergySplit energies(const Discretization& disc, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& phi, std::span<const double> theta,
                     const MaterialParams& params) {
    const auto elasticity = physics::plane_strain_stiffness(params.young_modulus, params.poisson_ratio);
    const double ell = params.length_scale;
    EnergySplit out;
    for (std::size_t e = 0; e < disc.num_elements(); ++e) {
        const ElementGeometry& geom = disc.geometry(e);
        const Eigen::VectorXd u_e = disc.gather(u, e, FieldKind::Displacement);
        const Eigen::VectorXd phi_e = disc.gather(phi, e, FieldKind::Phase);
        for (std::size_t q = 0; q < geom.points.size(); ++q) {
            const auto& gp = geom.points[q];
            const physics::Voigt strain = strain_displacement(gp.bs) * u_e;
            out.strain += gp.weight * physics::strain_energy_density(strain, elasticity);
            const double th = theta.empty() ? 0.0 : theta[e * geom.points.size() + q];
            const double p = gp.n.dot(phi_e);
            const Eigen::Vector2d grad = gp.bs * phi_e;
            out.surface += gp.weight * physics::gc_degraded(th, params) *
                           (p * p / (2.0 * ell) + 0.5 * ell * grad.squaredNorm());
        }
    }
    return out;
}

} // namespace hacfem
