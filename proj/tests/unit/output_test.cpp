#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hacfem/output.hpp"
#include "hacfem/scenario.hpp"

using namespace hacfem;

namespace {

FieldState sample_state(const Mesh& mesh) {
    FieldState s = FieldState::zeros(mesh.num_nodes(), 0);
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        s.displacement(2 * i) = 1e-3 * mesh.nodes()[k].x;
        s.phase(i) = 0.1 * static_cast<double>(k);
        s.concentration(i) = 1.0 / 3.0;
        s.sigma_h_nodal(i) = -12.5;
    }
    return s;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

} // namespace

TEST_CASE("VTK legacy layout for quad4") {
    const Mesh mesh = generate_rect_mesh(2.0, 1.0, 2, 1, ElementKind::Quad4);
    const std::string text = format_vtk(mesh, sample_state(mesh));
    const auto lines = lines_of(text);
    CHECK(lines[0] == "# vtk DataFile Version 3.0");
    CHECK(lines[2] == "ASCII");
    CHECK(lines[3] == "DATASET UNSTRUCTURED_GRID");
    CHECK(lines[4] == "POINTS 6 double");
    CHECK(lines[5] == "0.000000000e+00 0.000000000e+00 0.000000000e+00");
    CHECK(lines[11] == "CELLS 2 10");
    CHECK(lines[12] == "4 0 1 4 3");
    CHECK(lines[14] == "CELL_TYPES 2");
    CHECK(lines[15] == "9");
    CHECK(text.find("POINT_DATA 6\nVECTORS displacement double\n") != std::string::npos);
    CHECK(text.find("SCALARS phi double 1\nLOOKUP_TABLE default\n") != std::string::npos);
    CHECK(text.find("SCALARS concentration double 1\nLOOKUP_TABLE default\n3.333333333e-01\n") != std::string::npos);
    CHECK(text.find("SCALARS sigma_h double 1\nLOOKUP_TABLE default\n-1.250000000e+01\n") != std::string::npos);
}

TEST_CASE("VTK quad8 cells and determinism") {
    const Mesh mesh = generate_rect_mesh(1.0, 1.0, 2, 2, ElementKind::Quad8);
    const FieldState s = sample_state(mesh);
    const std::string a = format_vtk(mesh, s);
    CHECK(a == format_vtk(mesh, s));
    CHECK(a.find("CELLS 4 36\n8 ") != std::string::npos);
    CHECK(a.find("CELL_TYPES 4\n23\n23\n23\n23\n") != std::string::npos);

    const auto dir = std::filesystem::temp_directory_path() / "hacfem_vtk_test";
    std::filesystem::create_directories(dir);
    write_vtk(dir / "a.vtk", mesh, s);
    std::ifstream in(dir / "a.vtk", std::ios::binary);
    std::stringstream back;
    back << in.rdbuf();
    CHECK(back.str() == a);
    std::filesystem::remove_all(dir);
}

TEST_CASE("VTK rejects a mis-sized state") {
    const Mesh mesh = generate_rect_mesh(1.0, 1.0, 1, 1, ElementKind::Quad4);
    FieldState s = sample_state(mesh);
    s.phase.resize(2);
    CHECK_THROWS_AS(format_vtk(mesh, s), Error);
    CHECK_THROWS_AS(write_vtk("/nonexistent/dir/a.vtk", mesh, sample_state(mesh)), Error);
}

TEST_CASE("history CSV") {
    IncrementRecord r;
    r.time = 0.5;
    r.prescribed = 1e-4;
    r.reaction = 12.25;
    r.max_phi = 0.125;
    r.min_c = 0.0;
    r.max_c = 1.5;
    r.passes = 3;
    const std::vector<IncrementRecord> recs{r};
    CHECK(format_history_csv(recs) ==
          "time,prescribed,reaction,max_phi,min_c,max_c,passes\n"
          "5.000000000e-01,1.000000000e-04,1.225000000e+01,1.250000000e-01,0.000000000e+00,1.500000000e+00,3\n");
    CHECK(format_history_csv({}) == "time,prescribed,reaction,max_phi,min_c,max_c,passes\n");
}

TEST_CASE("scenario snapshots follow the schedule") {
    ScenarioConfig cfg;
    cfg.mesh.rect.nx = cfg.mesh.rect.ny = 2;
    cfg.solver.dt = 1.0;
    cfg.solver.t_end = 4.0;
    cfg.dirichlet.push_back({FieldKind::Displacement, "bottom", 0, 0.0, std::nullopt, {}});
    cfg.dirichlet.push_back({FieldKind::Displacement, "bottom", 1, 0.0, std::nullopt, {}});
    cfg.dirichlet.push_back({FieldKind::Displacement, "top", 1, 0.0, 1e-4, {}});
    cfg.output.directory = std::filesystem::temp_directory_path() / "hacfem_snap_test";
    cfg.output.every = 2;
    std::filesystem::remove_all(cfg.output.directory);
    const ScenarioResult r = run_scenario(cfg);
    // t = 0, then after increments 2 and 4
    CHECK(r.snapshots.size() == 3);
    for (const auto& p : r.snapshots) CHECK(std::filesystem::exists(p));
    std::filesystem::remove_all(cfg.output.directory);
}
