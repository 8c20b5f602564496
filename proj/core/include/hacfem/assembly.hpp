#pragma once

// Element kernels for the three sub-problems (displacement, phase field,
// hydrogen transport), hydrostatic-stress recovery and global assembly with
// symmetric Dirichlet elimination.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "hacfem/core.hpp"
#include "hacfem/mesh.hpp"
#include "hacfem/physics.hpp"

namespace hacfem {

enum class FieldKind { Displacement, Phase, Concentration };

int dofs_per_node(FieldKind field);
std::string_view to_string(FieldKind field);

/// Quadrature point of a mapped element; `weight` already includes detJ.
struct GaussPoint {
    Eigen::VectorXd n;  // shape values
    Eigen::MatrixXd bs; // 2 x n physical gradients
    double weight = 0.0;
    Point2 x;
};

struct ElementGeometry {
    ElementKind kind = ElementKind::Quad4;
    std::vector<GaussPoint> points;

    int num_nodes() const { return nodes_per_element(kind); }
    double area() const;
};

ElementGeometry element_geometry(ElementKind kind, const Eigen::MatrixXd& coords,
                                 std::size_t element_id = 0);
ElementGeometry element_geometry(const Mesh& mesh, std::size_t element);

/// 3 x 2n strain-displacement matrix assembled from scalar gradients.
Eigen::MatrixXd strain_displacement(const Eigen::MatrixXd& bs);

/// Mesh plus cached element geometry.
class Discretization {
public:
    explicit Discretization(Mesh mesh);
    explicit Discretization(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const { return *mesh_; }
    std::size_t num_elements() const { return geometry_.size(); }
    std::size_t num_nodes() const { return mesh_->num_nodes(); }
    std::size_t gauss_per_element() const { return gauss_per_element_; }
    std::size_t num_gauss_points() const { return gauss_per_element_ * geometry_.size(); }
    const ElementGeometry& geometry(std::size_t e) const { return geometry_[e]; }

    /// Global dof ids of element e for a field (interleaved for displacement).
    std::vector<int> element_dofs(std::size_t e, FieldKind field) const;
    Eigen::VectorXd gather(const Eigen::VectorXd& global, std::size_t e, FieldKind field) const;

private:
    void build();

    std::shared_ptr<const Mesh> mesh_;
    std::vector<ElementGeometry> geometry_;
    std::size_t gauss_per_element_ = 0;
};

struct GaussPointData {
    double history = 0.0; // H, MPa
    double theta = 0.0;   // hydrogen coverage
    double sigma_h = 0.0; // MPa
    physics::Voigt strain = physics::Voigt::Zero();
};

struct ElementSystem {
    Eigen::VectorXd residual;
    Eigen::MatrixXd tangent;
};

/// r_u = int g(phi) Bu^T sigma_0 - N^T b,  K_u = int g(phi) Bu^T C0 Bu.
ElementSystem element_displacement(const ElementGeometry& geom, const Eigen::VectorXd& u_e,
                                   const Eigen::VectorXd& phi_e, const MaterialParams& params,
                                   const physics::PlaneStrainElasticity& elasticity,
                                   const Eigen::Vector2d& body_force = Eigen::Vector2d::Zero());

/// r_phi = int [-2 (1 - phi) N H + Gc(theta) (N phi / l + l B^T grad phi)]
/// K_phi = int [(2 H + Gc / l) N N^T + Gc l B^T B]
ElementSystem element_phase(const ElementGeometry& geom, const Eigen::VectorXd& phi_e,
                            std::span<const GaussPointData> gauss, const MaterialParams& params);

/// H <- max(H, psi_0(eps(u))) at every point; also stores the strain.
void update_history(const ElementGeometry& geom, const Eigen::VectorXd& u_e,
                    const physics::PlaneStrainElasticity& elasticity,
                    std::span<GaussPointData> gauss);

struct DiffusionSystem {
    Eigen::MatrixXd stiffness; // K_c, including the stress-driven drift
    Eigen::MatrixXd capacity;  // M = int N N^T / D
    Eigen::VectorXd residual;  // K_c c (the transient term is added by the integrator)
};

/// Throws ParameterError when the diffusivity is not positive.
DiffusionSystem element_diffusion(const ElementGeometry& geom, const Eigen::VectorXd& c_e,
                                  const Eigen::VectorXd& sigma_h_e, const MaterialParams& params);

/// Steady transport written for psi = c exp(-w), w = V_H sigma_h / (R T):
/// int exp(w) grad N . grad N. The flux c grad w - grad c becomes
/// -exp(w) grad psi, so the operator is symmetric and the Dirichlet data
/// maps as psi = c exp(-w) at the node.
Eigen::MatrixXd element_equilibrium_diffusion(const ElementGeometry& geom, const Eigen::VectorXd& sigma_h_e,
                                              const MaterialParams& params);

/// Same operator with corner-node quadrature for Quad4 (Quad8 falls back to
/// Gauss). On rectangles every neighbour coupling is non-positive, so psi
/// obeys a discrete maximum principle and c cannot undershoot.
Eigen::MatrixXd element_equilibrium_diffusion_nodal(ElementKind kind, const Eigen::MatrixXd& coords,
                                                    const Eigen::VectorXd& sigma_h_e, const MaterialParams& params);

enum class StressMeasure { Undamaged, Degraded };

/// Nodal hydrostatic stress: Gauss values extrapolated per element and
/// area-weighted over the elements sharing each node.
Eigen::VectorXd recover_sigma_h(const Discretization& disc, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& phi, const MaterialParams& params,
                                StressMeasure measure = StressMeasure::Undamaged);

/// n x n_gauss matrix mapping Gauss-point values to element nodes (exact
/// inverse for Quad4, least squares for Quad8).
Eigen::MatrixXd gauss_to_node_extrapolation(ElementKind kind);

struct DirichletCondition {
    int dof = 0;
    double value = 0.0;
};

struct DofMap {
    FieldKind field = FieldKind::Phase;
    std::size_t num_nodes = 0;

    int per_node() const { return dofs_per_node(field); }
    std::size_t size() const { return num_nodes * static_cast<std::size_t>(per_node()); }
    int dof(int node, int component = 0) const { return node * per_node() + component; }
};

struct SparseSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    DofMap dof_map;
    std::vector<DirichletCondition> dirichlet;
    bool symmetric = true;
};

struct ElementContribution {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd vector;
};

/// Scatter-adds matrix and vector contributions of every element.
/// Throws Error when a contribution or a Dirichlet dof does not fit the map.
SparseSystem assemble_global(const Discretization& disc, FieldKind field,
                             const std::function<ElementContribution(std::size_t)>& contribution,
                             std::vector<DirichletCondition> dirichlet, bool symmetric = true);

/// System restricted to the free dofs with the constrained columns moved to
/// the right-hand side.
struct ReducedSystem {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd rhs;
    std::vector<int> free_dofs;
    Eigen::VectorXd prescribed; // full-length vector holding the Dirichlet values
};

ReducedSystem reduce(const SparseSystem& system);

/// Consistent nodal loads of a uniform traction on the boundary edges whose
/// nodes all belong to `node_set`. Throws MeshError when there are none.
Eigen::VectorXd apply_neumann_traction(const Mesh& mesh, const std::string& node_set,
                                       const Eigen::Vector2d& traction);

/// F_i = -(1 / D) int N_i q dS over the boundary edges of `node_set`.
Eigen::VectorXd apply_neumann_flux(const Mesh& mesh, const std::string& node_set, double flux,
                                   double diffusivity);

/// Boundary edges (local node lists mapped to global ids) fully inside a set.
std::vector<std::vector<int>> boundary_edges(const Mesh& mesh, const std::vector<int>& node_set);

/// Global internal force vector (degraded residual without external loads).
Eigen::VectorXd internal_force(const Discretization& disc, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& phi, const MaterialParams& params);

struct EnergySplit {
    double strain = 0.0;  // int psi_0
    double surface = 0.0; // int Gc(theta) gamma_l
};

EnergySplit energies(const Discretization& disc, const Eigen::VectorXd& u,
                     const Eigen::VectorXd& phi, std::span<const double> theta,
                     const MaterialParams& params);

} // namespace hacfem
