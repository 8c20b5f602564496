#include "hacfem/cli.hpp"

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hacfem/output.hpp"
#include "hacfem/physics.hpp"
#include "hacfem/scenario.hpp"
#include "hacfem/verify.hpp"

namespace hacfem {

namespace {

std::string printf_line(const char* fmt, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, a);
    return buf;
}

int run_command(const std::string& config_path, const std::string& output_override, bool quiet, std::ostream& out,
                std::ostream& err) {
    ScenarioConfig cfg;
    try {
        cfg = parse_config_file(config_path);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (!output_override.empty()) {
        cfg.output.directory = output_override;
    }
    try {
        std::filesystem::create_directories(cfg.output.directory);
        write_text_file(cfg.output.directory / "resolved.cfg", format_config(cfg));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    auto progress = [&](const FieldState&, const IncrementRecord& rec) {
        if (!quiet) {
            char line[200];
            std::snprintf(line, sizeof line, "t=%.6e  load=%.6e  reaction=%.6e  max_phi=%.4f  c=[%.4e, %.4e]  passes=%d%s\n",
                          rec.time, rec.prescribed, rec.reaction, rec.max_phi, rec.min_c, rec.max_c, rec.passes,
                          rec.cuts ? " (cut)" : "");
            out << line << std::flush;
        }
    };
    const auto history = cfg.output.directory / "history.csv";
    ScenarioResult partial;
    try {
        const ScenarioResult result = run_scenario(cfg, progress, &partial);
        write_history_csv(history, result.records);
        out << "completed " << result.records.size() << " increments; history in " << history.string() << "\n";
        return kExitOk;
    } catch (const SolverError& e) {
        write_history_csv(history, partial.records);
        err << "solver failure: " << e.what() << "\n";
        return kExitSolverFailure;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const MeshError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitSolverFailure;
    }
}

int verify_command(const std::string& level, const std::string& csv, std::ostream& out, std::ostream& err) {
    const auto reports = verify::run_verification_suite(level);
    out << verify::format_report_table(reports);
    if (!csv.empty()) {
        try {
            write_text_file(csv, verify::format_report_csv(reports));
        } catch (const Error& e) {
            err << "error: " << e.what() << "\n";
            return kExitConfig;
        }
    }
    const auto failed = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.pass; });
    out << reports.size() - static_cast<std::size_t>(failed) << "/" << reports.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitCheckFailed;
}

int mesh_info_command(const std::string& path, const MaterialParams& params, std::ostream& out, std::ostream& err) {
    Mesh mesh;
    try {
        mesh = read_mesh(path);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    const MeshQuality q = mesh_quality(mesh);
    out << "elements: " << mesh.num_elements() << " (" << to_string(mesh.kind()) << ")\n";
    out << "nodes: " << mesh.num_nodes() << "\n";
    out << "bounding box: [" << q.lower.x << ", " << q.upper.x << "] x [" << q.lower.y << ", " << q.upper.y << "]\n";
    out << "min detJ: " << q.min_det_j << "\n";
    out << "edge length: min " << q.min_edge << ", max " << q.max_edge << "\n";
    for (const auto& [name, ids] : mesh.node_sets()) {
        out << "node set " << name << ": " << ids.size() << "\n";
    }
    for (const auto& [name, ids] : mesh.element_sets()) {
        out << "element set " << name << ": " << ids.size() << "\n";
    }

    const double sigma_c = physics::critical_stress(params.young_modulus, params.gc0, params.length_scale);
    const double h_max = physics::cohesive_mesh_bound(params.young_modulus, params.gc0, sigma_c);
    const auto band = mesh.element_sets().find("band");
    const bool has_band = band != mesh.element_sets().end() && !band->second.empty();
    const double h = has_band ? max_edge_length(mesh, band->second) : q.max_edge;
    const std::string where = has_band ? "refinement band" : "mesh";
    out << "max edge in " << where << ": " << h << "; bound h_max = " << h_max << " (l / "
        << params.length_scale / h_max << ", l = " << params.length_scale << ")\n";
    if (h > h_max) {
        out << "warning: element size " << h << " in the " << where << " exceeds h_max = " << h_max
            << " (must be at least " << printf_line("%.2f", params.length_scale / h_max)
            << " times smaller than l); the crack band is under-resolved\n";
    }
    return kExitOk;
}

int homog_command(const MaterialParams& params, double theta, int samples, double max_factor, std::ostream& out,
                  std::ostream& err) {
    double gc = 0.0;
    try {
        params.validate();
        gc = physics::gc_degraded(theta, params);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    const double sigma_c = physics::critical_stress(params.young_modulus, gc, params.length_scale);
    const double eps_c = physics::critical_strain(params.young_modulus, gc, params.length_scale);
    out << printf_line("sigma_c,%.9e\n", sigma_c);
    out << printf_line("epsilon_c,%.9e\n", eps_c);
    out << "strain,phi,stress\n";
    for (int k = 0; k <= samples; ++k) {
        const double eps = max_factor * eps_c * k / samples;
        char line[128];
        std::snprintf(line, sizeof line, "%.9e,%.9e,%.9e\n", eps,
                      physics::homogeneous_phi(eps, params.young_modulus, gc, params.length_scale),
                      physics::homogeneous_stress(eps, params.young_modulus, gc, params.length_scale));
        out << line;
    }
    return kExitOk;
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Phase-field fracture with hydrogen transport (plane strain)", "hacfem"};
    app.require_subcommand(1);

    std::string config_path, output_dir;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run a scenario config");
    run->add_option("config", config_path, "Scenario config file")->required();
    run->add_option("-o,--output", output_dir, "Override the output directory");
    run->add_flag("-q,--quiet", quiet, "No per-increment progress");

    std::string level = "fast", csv;
    auto* ver = app.add_subcommand("verify", "Run the verification suite");
    ver->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    ver->add_option("--csv", csv, "Also write the reports as CSV");

    std::string mesh_path;
    MaterialParams params = default_iron_params();
    auto* info = app.add_subcommand("mesh-info", "Mesh statistics and resolution check");
    info->add_option("mesh", mesh_path, "Mesh file")->required();
    info->add_option("--ell", params.length_scale, "Length scale l [mm]");
    info->add_option("--young", params.young_modulus, "Young's modulus [MPa]");
    info->add_option("--gc0", params.gc0, "Fracture energy [N/mm]");

    double theta = 0.0, max_factor = 3.0;
    int samples = 60;
    auto* homog = app.add_subcommand("homog", "Homogeneous 1D response: sigma_c, epsilon_c and the curve as CSV");
    homog->add_option("--young", params.young_modulus, "Young's modulus [MPa]");
    homog->add_option("--gc0", params.gc0, "Fracture energy [N/mm]");
    homog->add_option("--ell", params.length_scale, "Length scale l [mm]");
    homog->add_option("--chi", params.damage_coeff, "Damage coefficient");
    homog->add_option("--theta", theta, "Hydrogen coverage")->check(CLI::Range(0.0, 1.0));
    homog->add_option("--samples", samples, "Number of curve intervals")->check(CLI::PositiveNumber);
    homog->add_option("--max-strain", max_factor, "Largest strain as a multiple of epsilon_c")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    if (run->parsed()) return run_command(config_path, output_dir, quiet, out, err);
    if (ver->parsed()) return verify_command(level, csv, out, err);
    if (info->parsed()) return mesh_info_command(mesh_path, params, out, err);
    if (homog->parsed()) return homog_command(params, theta, samples, max_factor, out, err);
    err << app.help();
    return kExitUsage;
}

int cli_main(int argc, const char* const* argv) {
    return cli_main(argc, argv, std::cout, std::cerr);
}

} // namespace hacfem
