#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hacfem/cli.hpp"
#include "hacfem/mesh.hpp"

using namespace hacfem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = 0;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "hacfem");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hacfem_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
}

const char* kTinyRun = R"([mesh]
nx = 3
ny = 3
[material]
length_scale = 0.3
[solver]
dt = 1
t_end = 2
[dirichlet]
field = u
set = bottom
component = x
[dirichlet]
field = u
set = bottom
component = y
[dirichlet]
field = u
set = top
component = y
rate = 1e-4
[output]
vtk = false
)";

} // namespace

TEST_CASE("usage errors exit with 64") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"run"}).code == kExitUsage);
    CHECK(run({"verify", "--level", "extreme"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("config problems exit with 65") {
    const fs::path dir = scratch("config");
    CHECK(run({"run", (dir / "missing.cfg").string()}).code == kExitConfig);
    write(dir / "bad.cfg", "[mesh]\nnx = 2\nwhat = 3\n");
    const Outcome o = run({"run", (dir / "bad.cfg").string()});
    CHECK(o.code == kExitConfig);
    CHECK(o.err.find("line 3") != std::string::npos);
    CHECK(run({"mesh-info", (dir / "missing.mesh").string()}).code == kExitConfig);
    fs::remove_all(dir);
}

TEST_CASE("run writes the resolved config and the history") {
    const fs::path dir = scratch("run");
    write(dir / "tiny.cfg", kTinyRun);
    const Outcome o = run({"run", (dir / "tiny.cfg").string(), "-o", (dir / "out").string(), "-q"});
    CHECK(o.code == kExitOk);
    CHECK(fs::exists(dir / "out" / "resolved.cfg"));
    std::ifstream in(dir / "out" / "history.csv");
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "time,prescribed,reaction,max_phi,min_c,max_c,passes");
    int rows = 0;
    while (std::getline(in, row)) ++rows;
    CHECK(rows == 2);
    fs::remove_all(dir);
}

TEST_CASE("solver failure exits with 2 and keeps the partial history") {
    const fs::path dir = scratch("fail");
    std::string text = kTinyRun;
    // without the x support the displacement problem is singular
    text.erase(text.find("[dirichlet]\nfield = u\nset = bottom\ncomponent = x\n"),
               std::string("[dirichlet]\nfield = u\nset = bottom\ncomponent = x\n").size());
    write(dir / "fail.cfg", text);
    const Outcome o = run({"run", (dir / "fail.cfg").string(), "-o", (dir / "out").string(), "-q"});
    CHECK(o.code == kExitSolverFailure);
    CHECK(o.err.find("increment 1") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "history.csv"));
    fs::remove_all(dir);
}

TEST_CASE("homog prints sigma_c, epsilon_c and the curve") {
    const Outcome o = run({"homog", "--samples", "4"});
    CHECK(o.code == kExitOk);
    CHECK(o.out.find("sigma_c,2.823727590e+03\n") == 0);
    CHECK(o.out.find("epsilon_c,2.390457219e-02\n") != std::string::npos);
    CHECK(o.out.find("strain,phi,stress\n0.000000000e+00,0.000000000e+00,0.000000000e+00\n") != std::string::npos);

    const Outcome h = run({"homog", "--theta", "1", "--chi", "0.89"});
    // sqrt(0.11) * 2823.7276
    CHECK(h.out.find("sigma_c,9.365244925e+02\n") == 0);
    CHECK(run({"homog", "--theta", "2"}).code == kExitUsage);
}

TEST_CASE("mesh-info warns about an under-resolved band") {
    const fs::path dir = scratch("meshinfo");
    Mesh coarse = generate_rect_mesh(1.0, 1.0, 10, 10, ElementKind::Quad4);
    coarse.set_element_set("band", {0, 1, 2});
    write_mesh(dir / "coarse.mesh", coarse);
    const Outcome o = run({"mesh-info", (dir / "coarse.mesh").string()});
    CHECK(o.code == kExitOk);
    CHECK(o.out.find("elements: 100") != std::string::npos);
    CHECK(o.out.find("warning:") != std::string::npos);
    CHECK(o.out.find("refinement band") != std::string::npos);

    const Mesh fine = generate_rect_mesh(0.01, 0.01, 10, 10, ElementKind::Quad4);
    write_mesh(dir / "fine.mesh", fine);
    const Outcome f = run({"mesh-info", (dir / "fine.mesh").string()});
    CHECK(f.code == kExitOk);
    CHECK(f.out.find("warning:") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("verify exits 0 when every check passes") {
    const fs::path dir = scratch("verify");
    const Outcome o = run({"verify", "--csv", (dir / "v.csv").string()});
    CHECK(o.code == kExitOk);
    CHECK(o.out.find("checks passed") != std::string::npos);
    CHECK(fs::exists(dir / "v.csv"));
    fs::remove_all(dir);
}
