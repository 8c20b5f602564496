#include "hacfem/output.hpp"

#include <cstdio>
#include <fstream>

namespace hacfem {

namespace {

void append(std::string& out, const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    out += buf;
}

} // namespace

std::string format_vtk(const Mesh& mesh, const FieldState& state) {
    const std::size_t nn = mesh.num_nodes();
    if (static_cast<std::size_t>(state.phase.size()) != nn ||
        static_cast<std::size_t>(state.displacement.size()) != 2 * nn ||
        static_cast<std::size_t>(state.concentration.size()) != nn ||
        static_cast<std::size_t>(state.sigma_h_nodal.size()) != nn) {
        throw Error("write_vtk: state is not sized to the mesh");
    }
    std::string out;
    out.reserve(nn * 160);
    out += "# vtk DataFile Version 3.0\nhacfem snapshot\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out += "POINTS " + std::to_string(nn) + " double\n";
    for (const auto& p : mesh.nodes()) {
        append(out, "%.9e ", p.x);
        append(out, "%.9e ", p.y);
        out += "0.000000000e+00\n";
    }
    const std::size_t ne = mesh.num_elements();
    const int npe = mesh.nodes_per_element();
    out += "CELLS " + std::to_string(ne) + " " + std::to_string(ne * static_cast<std::size_t>(npe + 1)) + "\n";
    for (std::size_t e = 0; e < ne; ++e) {
        out += std::to_string(npe);
        // VTK quadratic quads share the corner-then-midside ordering.
        for (int id : mesh.element(e)) {
            out += ' ';
            out += std::to_string(id);
        }
        out += '\n';
    }
    out += "CELL_TYPES " + std::to_string(ne) + "\n";
    const char* type = mesh.kind() == ElementKind::Quad8 ? "23\n" : "9\n";
    for (std::size_t e = 0; e < ne; ++e) {
        out += type;
    }
    out += "POINT_DATA " + std::to_string(nn) + "\n";
    out += "VECTORS displacement double\n";
    for (std::size_t i = 0; i < nn; ++i) {
        append(out, "%.9e ", state.displacement(static_cast<Eigen::Index>(2 * i)));
        append(out, "%.9e ", state.displacement(static_cast<Eigen::Index>(2 * i + 1)));
        out += "0.000000000e+00\n";
    }
    auto scalars = [&](const char* name, const Eigen::VectorXd& v) {
        out += "SCALARS ";
        out += name;
        out += " double 1\nLOOKUP_TABLE default\n";
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            append(out, "%.9e\n", v(i));
        }
    };
    scalars("phi", state.phase);
    scalars("concentration", state.concentration);
    scalars("sigma_h", state.sigma_h_nodal);
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    file << text;
    file.close();
    if (!file) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const FieldState& state) {
    write_text_file(path, format_vtk(mesh, state));
}

std::string format_history_csv(std::span<const IncrementRecord> records) {
    std::string out = "time,prescribed,reaction,max_phi,min_c,max_c,passes\n";
    for (const auto& r : records) {
        for (double v : {r.time, r.prescribed, r.reaction, r.max_phi, r.min_c, r.max_c}) {
            append(out, "%.9e,", v);
        }
        out += std::to_string(r.passes);
        out += '\n';
    }
    return out;
}

void write_history_csv(const std::filesystem::path& path, std::span<const IncrementRecord> records) {
    write_text_file(path, format_history_csv(records));
}

} // namespace hacfem
