#include "hacfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

namespace hacfem {

int nodes_per_element(ElementKind kind) {
    return kind == ElementKind::Quad4 ? 4 : 8;
}

std::string_view to_string(ElementKind kind) {
    return kind == ElementKind::Quad4 ? "quad4" : "quad8";
}

ElementKind element_kind_from_string(std::string_view name) {
    if (name == "quad4") {
        return ElementKind::Quad4;
    }
    if (name == "quad8") {
        return ElementKind::Quad8;
    }
    throw MeshError("unknown element kind '" + std::string(name) + "'");
}

std::pair<std::vector<double>, std::vector<double>> gauss_1d(int n) {
    switch (n) {
    case 1:
        return {{0.0}, {2.0}};
    case 2: {
        const double a = 1.0 / std::sqrt(3.0);
        return {{-a, a}, {1.0, 1.0}};
    }
    case 3: {
        const double a = std::sqrt(0.6);
        return {{-a, 0.0, a}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
    }
    case 4: {
        const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
        const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
        const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
        const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
        return {{-b, -a, a, b}, {wb, wa, wa, wb}};
    }
    default:
        throw MeshError("gauss_1d: unsupported point count " + std::to_string(n));
    }
}

QuadratureRule gauss_rule(int points_per_direction) {
    const auto [x, w] = gauss_1d(points_per_direction);
    QuadratureRule rule;
    rule.order = 2 * points_per_direction - 1;
    for (std::size_t j = 0; j < x.size(); ++j) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            rule.points.push_back({x[i], x[j]});
            rule.weights.push_back(w[i] * w[j]);
        }
    }
    return rule;
}

QuadratureRule default_rule(ElementKind kind) {
    return gauss_rule(kind == ElementKind::Quad4 ? 2 : 3);
}

std::vector<std::array<double, 2>> reference_nodes(ElementKind kind) {
    std::vector<std::array<double, 2>> nodes{{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}};
    if (kind == ElementKind::Quad8) {
        nodes.insert(nodes.end(), {{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}});
    }
    return nodes;
}

ShapeEval shape_functions(ElementKind kind, double xi, double eta) {
    const auto ref = reference_nodes(kind);
    const auto n = static_cast<Eigen::Index>(ref.size());
    ShapeEval s{Eigen::VectorXd(n), Eigen::MatrixXd(n, 2)};
    if (kind == ElementKind::Quad4) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double xi_i = ref[i][0];
            const double eta_i = ref[i][1];
            s.values(i) = 0.25 * (1.0 + xi * xi_i) * (1.0 + eta * eta_i);
            s.gradients(i, 0) = 0.25 * xi_i * (1.0 + eta * eta_i);
            s.gradients(i, 1) = 0.25 * eta_i * (1.0 + xi * xi_i);
        }
        return s;
    }
    for (Eigen::Index i = 0; i < 4; ++i) {
        const double xi_i = ref[i][0];
        const double eta_i = ref[i][1];
        const double a = 1.0 + xi * xi_i;
        const double b = 1.0 + eta * eta_i;
        const double c = xi * xi_i + eta * eta_i - 1.0;
        s.values(i) = 0.25 * a * b * c;
        s.gradients(i, 0) = 0.25 * xi_i * b * (c + a);
        s.gradients(i, 1) = 0.25 * eta_i * a * (c + b);
    }
    for (Eigen::Index i = 4; i < 8; ++i) {
        const double xi_i = ref[i][0];
        const double eta_i = ref[i][1];
        if (xi_i == 0.0) {
            s.values(i) = 0.5 * (1.0 - xi * xi) * (1.0 + eta * eta_i);
            s.gradients(i, 0) = -xi * (1.0 + eta * eta_i);
            s.gradients(i, 1) = 0.5 * eta_i * (1.0 - xi * xi);
        } else {
            s.values(i) = 0.5 * (1.0 + xi * xi_i) * (1.0 - eta * eta);
            s.gradients(i, 0) = 0.5 * xi_i * (1.0 - eta * eta);
            s.gradients(i, 1) = -eta * (1.0 + xi * xi_i);
        }
    }
    return s;
}

std::vector<std::vector<int>> element_edges(ElementKind kind) {
    if (kind == ElementKind::Quad4) {
        return {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    }
    return {{0, 1, 4}, {1, 2, 5}, {2, 3, 6}, {3, 0, 7}};
}

PointOperators bmatrices(ElementKind kind, const Eigen::MatrixXd& coords, double xi, double eta,
                         std::size_t element_id) {
    const ShapeEval s = shape_functions(kind, xi, eta);
    const Eigen::Matrix2d jac = s.gradients.transpose() * coords; // J(a,b) = dx_b / dxi_a
    const double det = jac.determinant();
    if (!(det > 0.0)) {
        std::ostringstream msg;
        msg << "element " << element_id + 1 << ": non-positive Jacobian determinant " << det
            << " at (" << xi << ", " << eta << ")";
        throw MeshError(msg.str());
    }
    const auto n = s.values.size();
    PointOperators op;
    op.n = s.values;
    op.det_j = det;
    op.bs = jac.inverse() * s.gradients.transpose();
    op.bu = Eigen::MatrixXd::Zero(3, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double dx = op.bs(0, i);
        const double dy = op.bs(1, i);
        op.bu(0, 2 * i) = dx;
        op.bu(1, 2 * i + 1) = dy;
        op.bu(2, 2 * i) = dy;
        op.bu(2, 2 * i + 1) = dx;
    }
    return op;
}

PointOperators bmatrices(const Mesh& mesh, std::size_t element, double xi, double eta) {
    return bmatrices(mesh.kind(), mesh.element_coords(element), xi, eta, element);
}

Mesh::Mesh(ElementKind kind, std::vector<Point2> nodes, std::vector<int> connectivity)
    : kind_(kind), nodes_(std::move(nodes)), connectivity_(std::move(connectivity)) {
    if (connectivity_.size() % static_cast<std::size_t>(hacfem::nodes_per_element(kind_)) != 0) {
        throw MeshError("connectivity length is not a multiple of the element node count");
    }
}

std::size_t Mesh::num_elements() const {
    return connectivity_.size() / static_cast<std::size_t>(nodes_per_element());
}

std::span<const int> Mesh::element(std::size_t e) const {
    const auto npe = static_cast<std::size_t>(nodes_per_element());
    return {connectivity_.data() + e * npe, npe};
}

Eigen::MatrixXd Mesh::element_coords(std::size_t e) const {
    const auto ids = element(e);
    Eigen::MatrixXd xy(static_cast<Eigen::Index>(ids.size()), 2);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Point2& p = nodes_[static_cast<std::size_t>(ids[i])];
        xy(static_cast<Eigen::Index>(i), 0) = p.x;
        xy(static_cast<Eigen::Index>(i), 1) = p.y;
    }
    return xy;
}

void Mesh::set_node_set(const std::string& name, std::vector<int> ids) {
    node_sets_[name] = std::move(ids);
}

void Mesh::set_element_set(const std::string& name, std::vector<int> ids) {
    element_sets_[name] = std::move(ids);
}

const std::vector<int>& Mesh::node_set(const std::string& name) const {
    const auto it = node_sets_.find(name);
    if (it == node_sets_.end()) {
        throw MeshError("node set '" + name + "' does not exist");
    }
    return it->second;
}

void Mesh::validate() const {
    const auto nn = static_cast<int>(nodes_.size());
    for (std::size_t k = 0; k < connectivity_.size(); ++k) {
        const int id = connectivity_[k];
        if (id < 0 || id >= nn) {
            std::ostringstream msg;
            msg << "element " << k / static_cast<std::size_t>(nodes_per_element()) + 1
                << " references node " << id + 1 << " outside 1.." << nn;
            throw MeshError(msg.str());
        }
    }
    for (const auto& [name, ids] : node_sets_) {
        for (int id : ids) {
            if (id < 0 || id >= nn) {
                throw MeshError("node set '" + name + "' references node " + std::to_string(id + 1) +
                                " which does not exist");
            }
        }
    }
    const auto ne = static_cast<int>(num_elements());
    for (const auto& [name, ids] : element_sets_) {
        for (int id : ids) {
            if (id < 0 || id >= ne) {
                throw MeshError("element set '" + name + "' references element " +
                                std::to_string(id + 1) + " which does not exist");
            }
        }
    }
    const QuadratureRule rule = default_rule(kind_);
    for (std::size_t e = 0; e < num_elements(); ++e) {
        const Eigen::MatrixXd xy = element_coords(e);
        for (const auto& p : rule.points) {
            bmatrices(kind_, xy, p[0], p[1], e);
        }
    }
}

MeshQuality mesh_quality(const Mesh& mesh) {
    MeshQuality q;
    q.min_det_j = std::numeric_limits<double>::infinity();
    q.min_edge = std::numeric_limits<double>::infinity();
    q.max_edge = 0.0;
    if (mesh.num_nodes() > 0) {
        q.lower = q.upper = mesh.nodes().front();
    }
    for (const Point2& p : mesh.nodes()) {
        q.lower.x = std::min(q.lower.x, p.x);
        q.lower.y = std::min(q.lower.y, p.y);
        q.upper.x = std::max(q.upper.x, p.x);
        q.upper.y = std::max(q.upper.y, p.y);
    }
    const QuadratureRule rule = default_rule(mesh.kind());
    const auto edges = element_edges(mesh.kind());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const Eigen::MatrixXd xy = mesh.element_coords(e);
        for (const auto& p : rule.points) {
            const ShapeEval s = shape_functions(mesh.kind(), p[0], p[1]);
            const Eigen::Matrix2d jac = s.gradients.transpose() * xy;
            q.min_det_j = std::min(q.min_det_j, jac.determinant());
        }
        for (const auto& edge : edges) {
            const double len = (xy.row(edge[1]) - xy.row(edge[0])).norm();
            q.min_edge = std::min(q.min_edge, len);
            q.max_edge = std::max(q.max_edge, len);
        }
    }
    return q;
}

double max_edge_length(const Mesh& mesh, std::span<const int> element_ids) {
    const auto edges = element_edges(mesh.kind());
    double longest = 0.0;
    auto visit = [&](std::size_t e) {
        const Eigen::MatrixXd xy = mesh.element_coords(e);
        for (const auto& edge : edges) {
            longest = std::max(longest, (xy.row(edge[1]) - xy.row(edge[0])).norm());
        }
    };
    if (element_ids.empty()) {
        for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
            visit(e);
        }
    } else {
        for (int e : element_ids) {
            visit(static_cast<std::size_t>(e));
        }
    }
    return longest;
}

} // namespace hacfem
