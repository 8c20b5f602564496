#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hacfem/scenario.hpp"

namespace hacfem {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

std::vector<std::string_view> words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

// Context for error messages: line number and key.
struct Where {
    int line = 0;
    std::string key;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config line " + std::to_string(line) + " ('" + key + "'): " + what);
    }
};

double to_double(std::string_view s, const Where& at) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        at.fail("expected a number, got '" + std::string(s) + "'");
    }
    return v;
}

int to_int(std::string_view s, const Where& at) {
    int v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || ptr != end) {
        at.fail("expected an integer, got '" + std::string(s) + "'");
    }
    return v;
}

bool to_bool(std::string_view s, const Where& at) {
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    at.fail("expected true or false, got '" + std::string(s) + "'");
}

std::vector<double> numbers(std::string_view s, std::size_t expected, const Where& at) {
    std::vector<double> out;
    for (auto w : words(s)) {
        out.push_back(to_double(w, at));
    }
    if (expected && out.size() != expected) {
        at.fail("expected " + std::to_string(expected) + " numbers");
    }
    return out;
}

FieldKind to_field(std::string_view s, const Where& at) {
    if (s == "displacement" || s == "u") return FieldKind::Displacement;
    if (s == "phase" || s == "phi") return FieldKind::Phase;
    if (s == "concentration" || s == "c") return FieldKind::Concentration;
    at.fail("unknown field '" + std::string(s) + "'");
}

int to_component(std::string_view s, const Where& at) {
    if (s == "x" || s == "0") return 0;
    if (s == "y" || s == "1") return 1;
    at.fail("component must be x or y");
}

// "a b, c d, ..." -> list of pairs
std::vector<std::pair<double, double>> pairs(std::string_view s, const Where& at) {
    std::vector<std::pair<double, double>> out;
    for (auto item : split(s, ',')) {
        const auto v = numbers(item, 2, at);
        out.emplace_back(v[0], v[1]);
    }
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

enum class Section { None, Mesh, Material, Solver, Hydrogen, Dirichlet, Neumann, Defect, Output };

} // namespace

ScenarioConfig parse_config(std::string_view text) {
    ScenarioConfig cfg;
    Section section = Section::None;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
            }
            const auto name = trim(line.substr(1, line.size() - 2));
            if (name == "mesh") section = Section::Mesh;
            else if (name == "material") section = Section::Material;
            else if (name == "solver") section = Section::Solver;
            else if (name == "hydrogen") section = Section::Hydrogen;
            else if (name == "output") section = Section::Output;
            else if (name == "dirichlet") {
                section = Section::Dirichlet;
                cfg.dirichlet.emplace_back();
                cfg.dirichlet.back().set.clear();
            } else if (name == "neumann") {
                section = Section::Neumann;
                cfg.neumann.emplace_back();
            } else if (name == "defect") {
                section = Section::Defect;
                cfg.defects.emplace_back();
            } else {
                throw ConfigError("config line " + std::to_string(line_no) + ": unknown section [" +
                                  std::string(name) + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const Where at{line_no, std::string(key)};
        if (value.empty()) {
            at.fail("missing value");
        }
        auto unknown = [&]() { at.fail("unknown key"); };

        switch (section) {
        case Section::None:
            at.fail("key outside of any section");
        case Section::Mesh: {
            auto& r = cfg.mesh.rect;
            if (key == "file") cfg.mesh.file = std::string(value);
            else if (key == "width") r.width = to_double(value, at);
            else if (key == "height") r.height = to_double(value, at);
            else if (key == "nx") r.nx = to_int(value, at);
            else if (key == "ny") r.ny = to_int(value, at);
            else if (key == "grading") r.grading = to_double(value, at);
            else if (key == "transition_levels") r.transition_levels = to_int(value, at);
            else if (key == "rows_per_level") r.rows_per_level = to_int(value, at);
            else if (key == "element") {
                try {
                    r.kind = element_kind_from_string(value);
                } catch (const MeshError&) {
                    at.fail("element must be quad4 or quad8");
                }
            } else if (key == "band") {
                const auto v = numbers(value, 5, at);
                r.bands.push_back({v[0], v[1], v[2], v[3], v[4]});
            } else if (key == "slit") {
                const auto v = numbers(value, 3, at);
                r.slit = Slit{v[0], v[1], v[2]};
            } else unknown();
            break;
        }
        case Section::Material: {
            auto& m = cfg.material;
            double* target = nullptr;
            if (key == "young_modulus") target = &m.young_modulus;
            else if (key == "poisson_ratio") target = &m.poisson_ratio;
            else if (key == "gc0") target = &m.gc0;
            else if (key == "length_scale") target = &m.length_scale;
            else if (key == "stiffness_floor") target = &m.stiffness_floor;
            else if (key == "damage_coeff") target = &m.damage_coeff;
            else if (key == "diffusivity") target = &m.diffusivity;
            else if (key == "molar_volume") target = &m.molar_volume;
            else if (key == "binding_energy") target = &m.binding_energy;
            else if (key == "temperature") target = &m.temperature;
            else if (key == "gas_constant") target = &m.gas_constant;
            else if (key == "host_molar_mass") target = &m.host_molar_mass;
            else if (key == "impurity_molar_mass") target = &m.impurity_molar_mass;
            else if (key == "gc_floor_fraction") target = &m.gc_floor_fraction;
            else unknown();
            *target = to_double(value, at);
            break;
        }
        case Section::Solver: {
            auto& s = cfg.solver;
            if (key == "dt") s.dt = to_double(value, at);
            else if (key == "t_end") s.t_end = to_double(value, at);
            else if (key == "staggered_passes") s.staggered_passes = to_int(value, at);
            else if (key == "staggered_tol") s.staggered_tol = to_double(value, at);
            else if (key == "newton_tol") s.newton_tol = to_double(value, at);
            else if (key == "max_newton_iters") s.max_newton_iters = to_int(value, at);
            else if (key == "dt_cut_factor") s.dt_cut_factor = to_double(value, at);
            else if (key == "max_cuts") s.max_cuts = to_int(value, at);
            else if (key == "equilibrium_hydrogen") s.equilibrium_hydrogen = to_bool(value, at);
            else if (key == "max_phase_increment") s.max_phase_increment = to_double(value, at);
            else if (key == "stop_reaction_fraction") s.stop_reaction_fraction = to_double(value, at);
            else if (key == "sigma_h_stress") {
                if (value == "undamaged") s.sigma_h_stress = StressMeasure::Undamaged;
                else if (value == "degraded") s.sigma_h_stress = StressMeasure::Degraded;
                else at.fail("sigma_h_stress must be undamaged or degraded");
            } else unknown();
            break;
        }
        case Section::Hydrogen:
            if (key == "initial_concentration") cfg.initial_concentration = to_double(value, at);
            else if (key == "boundary_concentration") cfg.boundary_concentration = to_double(value, at);
            else if (key == "boundary_sets") {
                cfg.boundary_sets.clear();
                for (auto w : words(value)) cfg.boundary_sets.emplace_back(w);
            } else unknown();
            break;
        case Section::Dirichlet: {
            auto& d = cfg.dirichlet.back();
            if (key == "field") d.field = to_field(value, at);
            else if (key == "set") d.set = std::string(value);
            else if (key == "component") d.component = to_component(value, at);
            else if (key == "value") d.value = to_double(value, at);
            else if (key == "rate") d.rate = to_double(value, at);
            else if (key == "ramp") {
                d.ramp.knots = pairs(value, at);
                for (std::size_t k = 1; k < d.ramp.knots.size(); ++k) {
                    if (d.ramp.knots[k].first < d.ramp.knots[k - 1].first) {
                        at.fail("ramp time knots must be non-decreasing");
                    }
                }
            } else unknown();
            if (d.rate && !d.ramp.knots.empty()) {
                at.fail("a block takes either rate or ramp, not both");
            }
            break;
        }
        case Section::Neumann: {
            auto& n = cfg.neumann.back();
            if (key == "field") n.field = to_field(value, at);
            else if (key == "set") n.set = std::string(value);
            else if (key == "traction") {
                const auto v = numbers(value, 2, at);
                n.traction_x = v[0];
                n.traction_y = v[1];
            } else if (key == "flux") n.flux = to_double(value, at);
            else unknown();
            break;
        }
        case Section::Defect:
            if (key == "polygon") {
                for (const auto& [x, y] : pairs(value, at)) {
                    cfg.defects.back().polygon.push_back({x, y});
                }
                if (cfg.defects.back().polygon.size() < 3) {
                    at.fail("a polygon needs at least 3 vertices");
                }
            } else unknown();
            break;
        case Section::Output:
            if (key == "directory") cfg.output.directory = std::string(value);
            else if (key == "every") cfg.output.every = to_int(value, at);
            else if (key == "times") cfg.output.times = numbers(value, 0, at);
            else if (key == "vtk") cfg.output.vtk = to_bool(value, at);
            else unknown();
            break;
        }
    }

    for (std::size_t k = 0; k < cfg.dirichlet.size(); ++k) {
        if (cfg.dirichlet[k].set.empty()) {
            throw ConfigError("[dirichlet] block " + std::to_string(k + 1) + ": missing 'set'");
        }
    }
    for (std::size_t k = 0; k < cfg.neumann.size(); ++k) {
        if (cfg.neumann[k].set.empty()) {
            throw ConfigError("[neumann] block " + std::to_string(k + 1) + ": missing 'set'");
        }
    }
    for (std::size_t k = 0; k < cfg.defects.size(); ++k) {
        if (cfg.defects[k].polygon.empty()) {
            throw ConfigError("[defect] block " + std::to_string(k + 1) + ": missing 'polygon'");
        }
    }
    int programs = 0;
    for (const auto& d : cfg.dirichlet) {
        if (d.is_program() && d.field != FieldKind::Displacement) {
            throw ConfigError("a loading program must drive a displacement component (set '" + d.set + "')");
        }
        programs += d.is_program() ? 1 : 0;
    }
    if (programs != 1) {
        throw ConfigError("exactly one loading program ([dirichlet] with rate or ramp) is required, found " +
                          std::to_string(programs));
    }
    if (cfg.output.every < 0) {
        throw ConfigError("[output] every must be >= 0");
    }
    if (cfg.initial_concentration < 0.0 || cfg.boundary_concentration.value_or(0.0) < 0.0) {
        throw ConfigError("[hydrogen] concentrations must be >= 0");
    }
    if (cfg.mesh.file.empty() && (cfg.mesh.rect.nx < 1 || cfg.mesh.rect.ny < 1 || !(cfg.mesh.rect.width > 0.0) ||
                                  !(cfg.mesh.rect.height > 0.0))) {
        throw ConfigError("[mesh] needs a file or positive width, height, nx and ny");
    }
    try {
        cfg.material.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("[material] ") + e.what());
    }
    cfg.solver.validate();
    return cfg;
}

ScenarioConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    std::ostringstream text;
    text << file.rdbuf();
    ScenarioConfig cfg = parse_config(text.str());
    if (!cfg.mesh.file.empty() && cfg.mesh.file.is_relative()) {
        cfg.mesh.file = std::filesystem::absolute(path).parent_path() / cfg.mesh.file;
    }
    try {
        build_mesh(cfg);
    } catch (const MeshError& e) {
        throw ConfigError(std::string("mesh: ") + e.what());
    }
    return cfg;
}

std::string format_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    out << "[mesh]\n";
    if (!cfg.mesh.file.empty()) {
        out << "file = " << cfg.mesh.file.string() << "\n";
    }
    const auto& r = cfg.mesh.rect;
    out << "width = " << fmt(r.width) << "\nheight = " << fmt(r.height) << "\nnx = " << r.nx << "\nny = " << r.ny
        << "\nelement = " << to_string(r.kind) << "\ngrading = " << fmt(r.grading)
        << "\ntransition_levels = " << r.transition_levels << "\nrows_per_level = " << r.rows_per_level << "\n";
    for (const auto& b : r.bands) {
        out << "band = " << fmt(b.x0) << " " << fmt(b.x1) << " " << fmt(b.y0) << " " << fmt(b.y1) << " " << fmt(b.h)
            << "\n";
    }
    if (r.slit) {
        out << "slit = " << fmt(r.slit->x0) << " " << fmt(r.slit->x1) << " " << fmt(r.slit->y) << "\n";
    }

    const auto& m = cfg.material;
    out << "\n[material]\n"
        << "young_modulus = " << fmt(m.young_modulus) << "\npoisson_ratio = " << fmt(m.poisson_ratio)
        << "\ngc0 = " << fmt(m.gc0) << "\nlength_scale = " << fmt(m.length_scale)
        << "\nstiffness_floor = " << fmt(m.stiffness_floor) << "\ndamage_coeff = " << fmt(m.damage_coeff)
        << "\ndiffusivity = " << fmt(m.diffusivity) << "\nmolar_volume = " << fmt(m.molar_volume)
        << "\nbinding_energy = " << fmt(m.binding_energy) << "\ntemperature = " << fmt(m.temperature)
        << "\ngas_constant = " << fmt(m.gas_constant) << "\nhost_molar_mass = " << fmt(m.host_molar_mass)
        << "\nimpurity_molar_mass = " << fmt(m.impurity_molar_mass)
        << "\ngc_floor_fraction = " << fmt(m.gc_floor_fraction) << "\n";

    const auto& s = cfg.solver;
    out << "\n[solver]\n"
        << "dt = " << fmt(s.dt) << "\nt_end = " << fmt(s.t_end) << "\nstaggered_passes = " << s.staggered_passes
        << "\nstaggered_tol = " << fmt(s.staggered_tol) << "\nnewton_tol = " << fmt(s.newton_tol)
        << "\nmax_newton_iters = " << s.max_newton_iters << "\ndt_cut_factor = " << fmt(s.dt_cut_factor)
        << "\nmax_cuts = " << s.max_cuts << "\nequilibrium_hydrogen = " << (s.equilibrium_hydrogen ? "true" : "false")
        << "\nsigma_h_stress = " << (s.sigma_h_stress == StressMeasure::Degraded ? "degraded" : "undamaged")
        << "\nmax_phase_increment = " << fmt(s.max_phase_increment)
        << "\nstop_reaction_fraction = " << fmt(s.stop_reaction_fraction) << "\n";

    out << "\n[hydrogen]\ninitial_concentration = " << fmt(cfg.initial_concentration) << "\n";
    if (cfg.boundary_concentration) {
        out << "boundary_concentration = " << fmt(*cfg.boundary_concentration) << "\n";
    }
    if (!cfg.boundary_sets.empty()) {
        out << "boundary_sets =";
        for (const auto& set : cfg.boundary_sets) out << " " << set;
        out << "\n";
    }

    for (const auto& d : cfg.dirichlet) {
        out << "\n[dirichlet]\nfield = " << to_string(d.field) << "\nset = " << d.set
            << "\ncomponent = " << (d.component == 0 ? "x" : "y") << "\nvalue = " << fmt(d.value) << "\n";
        if (d.rate) {
            out << "rate = " << fmt(*d.rate) << "\n";
        }
        if (!d.ramp.knots.empty()) {
            out << "ramp =";
            for (std::size_t k = 0; k < d.ramp.knots.size(); ++k) {
                out << (k ? ", " : " ") << fmt(d.ramp.knots[k].first) << " " << fmt(d.ramp.knots[k].second);
            }
            out << "\n";
        }
    }
    for (const auto& n : cfg.neumann) {
        out << "\n[neumann]\nfield = " << to_string(n.field) << "\nset = " << n.set << "\ntraction = "
            << fmt(n.traction_x) << " " << fmt(n.traction_y) << "\nflux = " << fmt(n.flux) << "\n";
    }
    for (const auto& d : cfg.defects) {
        out << "\n[defect]\npolygon =";
        for (std::size_t k = 0; k < d.polygon.size(); ++k) {
            out << (k ? ", " : " ") << fmt(d.polygon[k].x) << " " << fmt(d.polygon[k].y);
        }
        out << "\n";
    }

    out << "\n[output]\ndirectory = " << cfg.output.directory.string() << "\nevery = " << cfg.output.every
        << "\nvtk = " << (cfg.output.vtk ? "true" : "false") << "\n";
    if (!cfg.output.times.empty()) {
        out << "times =";
        for (double t : cfg.output.times) out << " " << fmt(t);
        out << "\n";
    }
    return out.str();
}

} // namespace hacfem
