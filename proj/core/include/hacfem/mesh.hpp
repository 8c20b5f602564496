#pragma once

// Quadrilateral element technology, quadrature, structured generation and
// the plain-text mesh format.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hacfem/core.hpp"

namespace hacfem {

enum class ElementKind { Quad4, Quad8 };

int nodes_per_element(ElementKind kind);
std::string_view to_string(ElementKind kind);
/// Accepts "quad4" / "quad8"; throws MeshError otherwise.
ElementKind element_kind_from_string(std::string_view name);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

struct QuadratureRule {
    std::vector<std::array<double, 2>> points; // (xi, eta) in [-1, 1]^2
    std::vector<double> weights;
    int order = 0; // exact for polynomials of degree <= order in each variable

    std::size_t size() const { return weights.size(); }
};

/// Tensor-product Gauss-Legendre rule with n points per direction (n = 1..3).
QuadratureRule gauss_rule(int points_per_direction);
/// 2x2 for Quad4, 3x3 for Quad8.
QuadratureRule default_rule(ElementKind kind);
/// 1D Gauss-Legendre points and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_1d(int n);

struct ShapeEval {
    Eigen::VectorXd values;    // n
    Eigen::MatrixXd gradients; // n x 2, d/dxi and d/deta
};

ShapeEval shape_functions(ElementKind kind, double xi, double eta);

/// Reference coordinates of the element nodes (corners CCW, then mid-sides).
std::vector<std::array<double, 2>> reference_nodes(ElementKind kind);

/// Spatial operators at one point of one element.
struct PointOperators {
    Eigen::VectorXd n;  // shape values
    Eigen::MatrixXd bu; // 3 x 2n strain-displacement (engineering shear)
    Eigen::MatrixXd bs; // 2 x n scalar gradient
    double det_j = 0.0;
};

class Mesh {
public:
    Mesh() = default;
    Mesh(ElementKind kind, std::vector<Point2> nodes, std::vector<int> connectivity);

    ElementKind kind() const { return kind_; }
    int nodes_per_element() const { return hacfem::nodes_per_element(kind_); }
    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_elements() const;

    const std::vector<Point2>& nodes() const { return nodes_; }
    const std::vector<int>& connectivity() const { return connectivity_; }
    std::span<const int> element(std::size_t e) const;
    /// n x 2 matrix of nodal coordinates.
    Eigen::MatrixXd element_coords(std::size_t e) const;

    const std::map<std::string, std::vector<int>>& node_sets() const { return node_sets_; }
    const std::map<std::string, std::vector<int>>& element_sets() const { return element_sets_; }
    void set_node_set(const std::string& name, std::vector<int> ids);
    void set_element_set(const std::string& name, std::vector<int> ids);
    bool has_node_set(const std::string& name) const { return node_sets_.contains(name); }
    /// Throws MeshError naming the set when absent.
    const std::vector<int>& node_set(const std::string& name) const;

    /// Connectivity range, set ranges and detJ > 0 at every quadrature point.
    void validate() const;

    bool operator==(const Mesh&) const = default;

private:
    ElementKind kind_ = ElementKind::Quad4;
    std::vector<Point2> nodes_;
    std::vector<int> connectivity_; // 0-based, nodes_per_element stride
    std::map<std::string, std::vector<int>> node_sets_;
    std::map<std::string, std::vector<int>> element_sets_;
};

/// Operators for an element with nodal coordinates `coords` (n x 2).
/// Throws MeshError naming `element_id` when detJ <= 0.
PointOperators bmatrices(ElementKind kind, const Eigen::MatrixXd& coords, double xi, double eta,
                         std::size_t element_id = 0);
PointOperators bmatrices(const Mesh& mesh, std::size_t element, double xi, double eta);

/// Local edges as node positions within the element: 2 (Quad4) or 3 (Quad8,
/// end, end, mid) entries each.
std::vector<std::vector<int>> element_edges(ElementKind kind);

struct RefinementBand {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    double h = 0.0; // target maximum element edge inside the band
    bool operator==(const RefinementBand&) const = default;
};

/// Horizontal cut at height y from x0 to x1: nodes on the cut with x < x1
/// are duplicated so the two faces separate. The node at x1 is the tip.
struct Slit {
    double x0 = 0.0, x1 = 0.0, y = 0.0;
    bool operator==(const Slit&) const = default;
};

struct RectMeshSpec {
    double width = 1.0;
    double height = 1.0;
    int nx = 1;
    int ny = 1;
    ElementKind kind = ElementKind::Quad4;
    std::vector<RefinementBand> bands;
    std::optional<Slit> slit;
    double grading = 1.3; // max size ratio between neighbouring cells outside bands
    /// With levels > 0 the grid is no longer a tensor product: the single
    /// band is meshed uniformly and, above and below it, the element size
    /// triples across each of `transition_levels` 3:1 transition layers,
    /// with `rows_per_level` plain rows before each layer.
    int transition_levels = 0;
    int rows_per_level = 1;
    bool operator==(const RectMeshSpec&) const = default;
};

/// Structured rectangle [0, width] x [0, height]. Node sets: left, right,
/// top, bottom, boundary (plus slit_lower / slit_upper with a slit). Element
/// set "band" holds the elements inside any refinement band.
Mesh generate_rect_mesh(const RectMeshSpec& spec);
Mesh generate_rect_mesh(double width, double height, int nx, int ny, ElementKind kind,
                        const std::vector<RefinementBand>& bands = {});

Mesh read_mesh(const std::filesystem::path& path);
Mesh parse_mesh(std::string_view text);
void write_mesh(const std::filesystem::path& path, const Mesh& mesh);
std::string format_mesh(const Mesh& mesh);

struct MeshQuality {
    double min_det_j = 0.0;
    double min_edge = 0.0;
    double max_edge = 0.0;
    Point2 lower, upper; // bounding box
};

MeshQuality mesh_quality(const Mesh& mesh);
/// Longest edge over a subset of elements (all elements when ids is empty).
double max_edge_length(const Mesh& mesh, std::span<const int> element_ids = {});

} // namespace hacfem
