#pragma once

// Scenario description (mesh, material, boundary programs, output schedule),
// its text format, and the time-marching driver.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hacfem/solver.hpp"

namespace hacfem {

/// Piecewise-linear program through (time, value) knots; held constant
/// outside the knot range.
struct RampProgram {
    std::vector<std::pair<double, double>> knots;

    double operator()(double t) const;
    bool operator==(const RampProgram&) const = default;
};

struct DirichletSpec {
    FieldKind field = FieldKind::Displacement;
    std::string set;
    int component = 0;
    double value = 0.0;
    /// Loading program: value + rate * t, or the ramp when it has knots.
    std::optional<double> rate;
    RampProgram ramp;

    bool is_program() const { return rate.has_value() || !ramp.knots.empty(); }
    double at(double t) const;
    bool operator==(const DirichletSpec&) const = default;
};

struct NeumannSpec {
    FieldKind field = FieldKind::Displacement;
    std::string set;
    double traction_x = 0.0; // MPa
    double traction_y = 0.0;
    double flux = 0.0; // outward normal flux of the transport equation

    bool operator==(const NeumannSpec&) const = default;
};

struct DefectSpec {
    std::vector<Point2> polygon;

    bool contains(const Point2& p) const;
    bool operator==(const DefectSpec&) const = default;
};

struct MeshSource {
    std::filesystem::path file; // empty: generate from `rect`
    RectMeshSpec rect;

    bool operator==(const MeshSource&) const = default;
};

struct OutputSpec {
    std::filesystem::path directory = "output";
    int every = 0; // snapshot every n accepted increments (0 = off)
    std::vector<double> times;
    bool vtk = true;

    bool operator==(const OutputSpec&) const = default;
};

struct ScenarioConfig {
    MeshSource mesh;
    MaterialParams material = default_iron_params();
    SolverSettings solver;
    double initial_concentration = 0.0; // C0, wt ppm
    std::optional<double> boundary_concentration; // C_b, wt ppm
    std::vector<std::string> boundary_sets;        // where C_b is prescribed
    std::vector<DirichletSpec> dirichlet;
    std::vector<NeumannSpec> neumann;
    std::vector<DefectSpec> defects;
    OutputSpec output;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Parses the `key = value` / `[section]` format. Throws ConfigError with the
/// line number or key on any problem; mesh set references are checked
/// separately by build_mesh().
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig parse_config_file(const std::filesystem::path& path);

/// Canonical text of a config with every default spelled out; parsing it
/// yields an equal config.
std::string format_config(const ScenarioConfig& config);

/// Mesh from file or generator, with node sets "defect_1", ... for the
/// defect polygons. Throws ConfigError naming a missing set.
std::shared_ptr<Mesh> build_mesh(const ScenarioConfig& config);

/// Resolves the config's boundary data against a mesh.
BoundaryConditions resolve_boundary_conditions(const ScenarioConfig& config, const Mesh& mesh);

/// History value that drives phi to 1 inside seeded defects.
double defect_history(const MaterialParams& params);

struct ScenarioResult {
    std::shared_ptr<const Mesh> mesh;
    FieldState final_state;
    std::vector<IncrementRecord> records;
    std::vector<std::filesystem::path> snapshots;
};

using IncrementObserver = std::function<void(const FieldState&, const IncrementRecord&)>;

/// Marches the scenario to t_end. Writes snapshots when output.vtk is set
/// and the schedule is non-empty. A solver failure is rethrown as
/// SolverError naming the increment; `partial` (if given) then holds the
/// records accepted so far.
ScenarioResult run_scenario(const ScenarioConfig& config, const IncrementObserver& observer = {},
                            ScenarioResult* partial = nullptr);

} // namespace hacfem
