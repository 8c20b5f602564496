#include <cstdio>
#include <fstream>
#include <sstream>

#include "hacfem/mesh.hpp"

namespace hacfem {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw MeshError("mesh line " + std::to_string(line) + ": " + what);
}

long parse_id(const std::string& token, std::size_t line) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(token, &used);
    } catch (const std::exception&) {
        parse_fail(line, "expected an integer id, got '" + token + "'");
    }
    if (used != token.size()) {
        parse_fail(line, "expected an integer id, got '" + token + "'");
    }
    return value;
}

double parse_real(const std::string& token, std::size_t line) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        parse_fail(line, "expected a number, got '" + token + "'");
    }
    if (used != token.size()) {
        parse_fail(line, "expected a number, got '" + token + "'");
    }
    return value;
}

std::vector<std::string> split(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) {
        out.push_back(tok);
    }
    return out;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_id_block(std::ostringstream& out, const std::vector<int>& ids) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
        out << ids[k] + 1 << ((k + 1) % 10 == 0 || k + 1 == ids.size() ? '\n' : ' ');
    }
}

} // namespace

Mesh parse_mesh(std::string_view text) {
    enum class Section { None, Nodes, Elements, NodeSet, ElementSet, End };
    Section section = Section::None;
    std::string set_name;
    std::optional<ElementKind> kind;
    std::vector<Point2> nodes;
    std::vector<int> conn;
    std::map<std::string, std::vector<int>> node_sets, element_sets;
    std::size_t element_count = 0;

    std::istringstream in{std::string(text)};
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const auto tokens = split(line);
        if (tokens.empty()) {
            continue;
        }
        if (section == Section::End) {
            parse_fail(line_no, "content after $end");
        }
        if (tokens[0][0] == '$') {
            const std::string& head = tokens[0];
            if (head == "$nodes" && tokens.size() == 1) {
                section = Section::Nodes;
            } else if (head == "$elements" && tokens.size() == 2) {
                if (kind) {
                    parse_fail(line_no, "duplicate $elements section");
                }
                try {
                    kind = element_kind_from_string(tokens[1]);
                } catch (const MeshError& e) {
                    parse_fail(line_no, e.what());
                }
                section = Section::Elements;
            } else if ((head == "$nodeset" || head == "$elementset") && tokens.size() == 2) {
                set_name = tokens[1];
                auto& sets = head == "$nodeset" ? node_sets : element_sets;
                if (sets.contains(set_name)) {
                    parse_fail(line_no, "duplicate set '" + set_name + "'");
                }
                sets[set_name];
                section = head == "$nodeset" ? Section::NodeSet : Section::ElementSet;
            } else if (head == "$end" && tokens.size() == 1) {
                section = Section::End;
            } else {
                parse_fail(line_no, "unknown or malformed section header '" + line + "'");
            }
            continue;
        }
        switch (section) {
        case Section::None:
            parse_fail(line_no, "data before the first section header");
        case Section::Nodes: {
            if (tokens.size() != 3) {
                parse_fail(line_no, "node line needs '<id> <x> <y>'");
            }
            const long id = parse_id(tokens[0], line_no);
            if (id != static_cast<long>(nodes.size()) + 1) {
                parse_fail(line_no, "node ids must be contiguous from 1; expected " +
                                        std::to_string(nodes.size() + 1));
            }
            nodes.push_back({parse_real(tokens[1], line_no), parse_real(tokens[2], line_no)});
            break;
        }
        case Section::Elements: {
            const auto npe = static_cast<std::size_t>(nodes_per_element(*kind));
            if (tokens.size() != npe + 1) {
                parse_fail(line_no, "element line needs an id and " + std::to_string(npe) + " node ids");
            }
            const long id = parse_id(tokens[0], line_no);
            if (id != static_cast<long>(element_count) + 1) {
                parse_fail(line_no, "element ids must be contiguous from 1; expected " +
                                        std::to_string(element_count + 1));
            }
            for (std::size_t k = 1; k < tokens.size(); ++k) {
                conn.push_back(static_cast<int>(parse_id(tokens[k], line_no) - 1));
            }
            ++element_count;
            break;
        }
        case Section::NodeSet:
        case Section::ElementSet: {
            auto& ids = (section == Section::NodeSet ? node_sets : element_sets)[set_name];
            for (const auto& tok : tokens) {
                ids.push_back(static_cast<int>(parse_id(tok, line_no) - 1));
            }
            break;
        }
        case Section::End:
            break;
        }
    }
    if (section != Section::End) {
        throw MeshError("mesh file is missing the $end marker");
    }
    if (!kind) {
        throw MeshError("mesh file has no $elements section");
    }
    Mesh mesh(*kind, std::move(nodes), std::move(conn));
    for (auto& [name, ids] : node_sets) {
        mesh.set_node_set(name, std::move(ids));
    }
    for (auto& [name, ids] : element_sets) {
        mesh.set_element_set(name, std::move(ids));
    }
    mesh.validate();
    return mesh;
}

Mesh read_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MeshError("cannot open mesh file '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mesh(buf.str());
}

std::string format_mesh(const Mesh& mesh) {
    std::ostringstream out;
    out << "$nodes\n";
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
        const Point2& p = mesh.nodes()[k];
        out << k + 1 << ' ' << format_real(p.x) << ' ' << format_real(p.y) << '\n';
    }
    out << "$elements " << to_string(mesh.kind()) << '\n';
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        out << e + 1;
        for (int id : mesh.element(e)) {
            out << ' ' << id + 1;
        }
        out << '\n';
    }
    for (const auto& [name, ids] : mesh.node_sets()) {
        out << "$nodeset " << name << '\n';
        write_id_block(out, ids);
    }
    for (const auto& [name, ids] : mesh.element_sets()) {
        out << "$elementset " << name << '\n';
        write_id_block(out, ids);
    }
    out << "$end\n";
    return out.str();
}

void write_mesh(const std::filesystem::path& path, const Mesh& mesh) {
    std::ofstream out(path);
    if (!out) {
        throw MeshError("cannot write mesh file '" + path.string() + "'");
    }
    out << format_mesh(mesh);
    if (!out) {
        throw MeshError("failed writing mesh file '" + path.string() + "'");
    }
}

} // namespace hacfem
