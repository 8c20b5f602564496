#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "hacfem/mesh.hpp"

namespace hacfem {

namespace {

struct Interval {
    double lo, hi, h;
};

// Node coordinates along one axis. Inside refinement intervals the spacing is
// uniform and <= h; elsewhere it grows geometrically (ratio ~grading) from
// the neighbouring fine spacing up to the global spacing.
std::vector<double> axis_coordinates(double length, int n_global, const std::vector<Interval>& fine,
                                     const std::vector<double>& forced, double grading) {
    const double h_global = length / n_global;
    const double eps = 1e-12 * length;

    std::vector<double> breaks{0.0, length};
    for (const auto& f : fine) {
        breaks.push_back(std::clamp(f.lo, 0.0, length));
        breaks.push_back(std::clamp(f.hi, 0.0, length));
    }
    for (double p : forced) {
        breaks.push_back(std::clamp(p, 0.0, length));
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [eps](double a, double b) { return std::abs(a - b) <= eps; }),
                 breaks.end());

    const std::size_t segments = breaks.size() - 1;
    std::vector<double> band_h(segments, 0.0); // 0 => not refined
    for (std::size_t s = 0; s < segments; ++s) {
        const double mid = 0.5 * (breaks[s] + breaks[s + 1]);
        for (const auto& f : fine) {
            if (mid > f.lo && mid < f.hi) {
                band_h[s] = band_h[s] == 0.0 ? f.h : std::min(band_h[s], f.h);
            }
        }
    }

    std::vector<double> coords{0.0};
    for (std::size_t s = 0; s < segments; ++s) {
        const double a = breaks[s];
        const double b = breaks[s + 1];
        const double len = b - a;
        if (band_h[s] > 0.0) {
            const int n = std::max(1, static_cast<int>(std::ceil(len / band_h[s] - 1e-9)));
            for (int k = 1; k <= n; ++k) {
                coords.push_back(k == n ? b : a + len * k / n);
            }
            continue;
        }
        const double hl = (s > 0 && band_h[s - 1] > 0.0) ? band_h[s - 1] : h_global;
        const double hr = (s + 1 < segments && band_h[s + 1] > 0.0) ? band_h[s + 1] : h_global;
        auto size_at = [&](double x) {
            return std::min({h_global, hl + (grading - 1.0) * (x - a), hr + (grading - 1.0) * (b - x)});
        };
        std::vector<double> local{a};
        double x = a;
        while (x < b - eps) {
            double step = size_at(x);
            step = std::min(step, size_at(std::min(x + step, b)));
            x += step;
            local.push_back(x);
        }
        // Shrink uniformly so the last node lands on b; spacings only decrease.
        const double scale = len / (local.back() - a);
        for (std::size_t k = 1; k < local.size(); ++k) {
            coords.push_back(k + 1 == local.size() ? b : a + (local[k] - a) * scale);
        }
    }
    return coords;
}

std::size_t index_of(const std::vector<double>& coords, double value) {
    const auto it = std::min_element(coords.begin(), coords.end(), [value](double a, double b) {
        return std::abs(a - value) < std::abs(b - value);
    });
    return static_cast<std::size_t>(it - coords.begin());
}


// Quad4 connectivity (corner ids) plus coordinates, before slit handling and
// promotion to Quad8.
struct QuadSoup {
    std::vector<Point2> nodes;
    std::vector<std::array<int, 4>> quads;
    std::map<std::pair<long long, long long>, int> index;
    double quantum = 1e-12;

    int node(double x, double y) {
        const std::pair<long long, long long> key{std::llround(x / quantum), std::llround(y / quantum)};
        const auto [it, inserted] = index.emplace(key, static_cast<int>(nodes.size()));
        if (inserted) {
            nodes.push_back({x, y});
        }
        return it->second;
    }

    void quad(int a, int b, int c, int d) {
        const auto& p = nodes;
        auto cross = [&](int i, int j, int k) {
            return (p[j].x - p[i].x) * (p[k].y - p[i].y) - (p[j].y - p[i].y) * (p[k].x - p[i].x);
        };
        const double area2 = cross(a, b, c) + cross(a, c, d);
        if (area2 < 0.0) {
            quads.push_back({a, d, c, b});
        } else {
            quads.push_back({a, b, c, d});
        }
    }
};

Mesh generate_transition_mesh(const RectMeshSpec& spec) {
    if (spec.bands.size() != 1) {
        throw MeshError("transition meshing needs exactly one refinement band");
    }
    if (spec.rows_per_level < 1) {
        throw MeshError("rows_per_level must be >= 1");
    }
    const RefinementBand& band = spec.bands.front();
    const double tol = 1e-9 * std::max(spec.width, spec.height);
    const int levels = spec.transition_levels;
    int factor = 1;
    for (int k = 0; k < levels; ++k) factor *= 3;

    // Uniform band columns, a multiple of 3^levels so every layer coarsens evenly.
    const double band_width = band.x1 - band.x0;
    const int n0 = factor * static_cast<int>(std::ceil(band_width / (band.h * factor) - 1e-9));
    const double h = band_width / n0;

    std::vector<double> forced_x;
    if (spec.slit) {
        forced_x = {spec.slit->x0, spec.slit->x1};
    }
    std::vector<double> side_x;
    for (double x : axis_coordinates(spec.width, spec.nx, {{band.x0, band.x1, h}}, forced_x, spec.grading)) {
        if (x < band.x0 - tol || x > band.x1 + tol) side_x.push_back(x);
    }
    auto line_x = [&](int level) {
        std::vector<double> xs;
        for (double x : side_x) {
            if (x < band.x0) xs.push_back(x);
        }
        int cells = n0;
        for (int k = 0; k < level; ++k) cells /= 3;
        for (int i = 0; i <= cells; ++i) {
            xs.push_back(i == cells ? band.x1 : band.x0 + band_width * i / cells);
        }
        for (double x : side_x) {
            if (x > band.x1) xs.push_back(x);
        }
        return xs;
    };

    const int band_rows = std::max(1, static_cast<int>(std::ceil((band.y1 - band.y0) / band.h - 1e-9)));
    const double row_h = (band.y1 - band.y0) / band_rows;

    QuadSoup soup;
    soup.quantum = 1e-9 * h;

    auto plain_row = [&](const std::vector<double>& xs, double ya, double yb) {
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            soup.quad(soup.node(xs[i], ya), soup.node(xs[i + 1], ya), soup.node(xs[i + 1], yb), soup.node(xs[i], yb));
        }
    };
    // Fine line at y_f (level k spacing s), coarse line at y_c.
    auto transition_row = [&](int level, double s, double y_f, double y_c) {
        const auto fine = line_x(level);
        const double y_m = 0.5 * (y_f + y_c);
        for (std::size_t i = 0; i + 1 < fine.size(); ++i) {
            const double xa = fine[i];
            if (xa < band.x0 - tol || xa >= band.x1 - tol) {
                soup.quad(soup.node(xa, y_f), soup.node(fine[i + 1], y_f), soup.node(fine[i + 1], y_c),
                          soup.node(xa, y_c));
                continue;
            }
            // Three fine cells starting at xa collapse into one coarse cell.
            const int b0 = soup.node(xa, y_f), b1 = soup.node(xa + s, y_f), b2 = soup.node(xa + 2 * s, y_f);
            const int b3 = soup.node(fine[i + 3], y_f);
            const int t0 = soup.node(xa, y_c), t1 = soup.node(fine[i + 3], y_c);
            const int a = soup.node(xa + s, y_m), b = soup.node(xa + 2 * s, y_m);
            soup.quad(b0, b1, a, t0);
            soup.quad(b1, b2, b, a);
            soup.quad(b2, b3, t1, b);
            soup.quad(a, b, t1, t0);
            i += 2;
        }
    };

    const auto xs0 = line_x(0);
    for (int r = 0; r < band_rows; ++r) {
        const double ya = r == 0 ? band.y0 : band.y0 + row_h * r;
        const double yb = r + 1 == band_rows ? band.y1 : band.y0 + row_h * (r + 1);
        plain_row(xs0, ya, yb);
    }
    // Grow outwards from the band in direction dir (+1 up, -1 down).
    for (int dir : {1, -1}) {
        double y = dir > 0 ? band.y1 : band.y0;
        const double limit = dir > 0 ? spec.height : 0.0;
        double s = h;
        for (int k = 0; k < levels; ++k) {
            const auto xs = line_x(k);
            for (int r = 0; r < spec.rows_per_level; ++r) {
                plain_row(xs, y, y + dir * s);
                y += dir * s;
            }
            if (dir * (limit - y) < 2.0 * s + 3.0 * s - tol) {
                std::ostringstream msg;
                msg << "refinement band is too close to the boundary for " << levels << " transition levels";
                throw MeshError(msg.str());
            }
            transition_row(k, s, y, y + dir * 2.0 * s);
            y += dir * 2.0 * s;
            s *= 3.0;
        }
        const auto xs = line_x(levels);
        const double remaining = dir * (limit - y);
        if (remaining > tol) {
            const int rows = std::max(1, static_cast<int>(std::lround(remaining / s)));
            const double start = y;
            for (int r = 0; r < rows; ++r) {
                const double ya = start + dir * remaining * r / rows;
                const double yb = r + 1 == rows ? limit : start + dir * remaining * (r + 1) / rows;
                plain_row(xs, ya, yb);
            }
        }
    }

    // Slit: elements above the cut get copies of the nodes on it (tip excluded).
    std::vector<Point2> nodes = soup.nodes;
    std::vector<int> lower, upper;
    if (spec.slit) {
        const Slit& sl = *spec.slit;
        bool tip_found = false;
        std::map<int, int> copy;
        for (std::size_t k = 0; k < soup.nodes.size(); ++k) {
            const Point2& p = soup.nodes[k];
            if (std::abs(p.y - sl.y) > tol) continue;
            if (std::abs(p.x - sl.x1) <= tol) tip_found = true;
            if (p.x >= sl.x0 - tol && p.x < sl.x1 - tol) {
                copy[static_cast<int>(k)] = static_cast<int>(nodes.size());
                nodes.push_back(p);
            }
        }
        if (!tip_found || copy.empty()) {
            throw MeshError("slit does not lie on a grid line of the transition mesh");
        }
        for (auto& q : soup.quads) {
            double yc = 0.0;
            for (int id : q) yc += 0.25 * soup.nodes[static_cast<std::size_t>(id)].y;
            if (yc <= sl.y) continue;
            for (int& id : q) {
                const auto it = copy.find(id);
                if (it != copy.end()) id = it->second;
            }
        }
        for (const auto& [orig, dup] : copy) {
            lower.push_back(orig);
            upper.push_back(dup);
        }
        const int tip = soup.index.at({std::llround(sl.x1 / soup.quantum), std::llround(sl.y / soup.quantum)});
        lower.push_back(tip);
        upper.push_back(tip);
        std::sort(lower.begin(), lower.end());
        std::sort(upper.begin(), upper.end());
    }

    std::vector<int> conn;
    const bool quadratic = spec.kind == ElementKind::Quad8;
    std::map<std::pair<int, int>, int> mids;
    for (const auto& q : soup.quads) {
        conn.insert(conn.end(), q.begin(), q.end());
        if (!quadratic) continue;
        for (int e = 0; e < 4; ++e) {
            const int a = q[static_cast<std::size_t>(e)], b = q[static_cast<std::size_t>((e + 1) % 4)];
            const auto key = std::minmax(a, b);
            auto it = mids.find(key);
            if (it == mids.end()) {
                const Point2& pa = nodes[static_cast<std::size_t>(a)];
                const Point2& pb = nodes[static_cast<std::size_t>(b)];
                it = mids.emplace(key, static_cast<int>(nodes.size())).first;
                nodes.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
            }
            conn.push_back(it->second);
        }
    }
    Mesh mesh(spec.kind, std::move(nodes), std::move(conn));

    std::vector<int> left, right, bottom, top, band_elems;
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
        const Point2& p = mesh.nodes()[k];
        const int id = static_cast<int>(k);
        if (std::abs(p.x) <= tol) left.push_back(id);
        if (std::abs(p.x - spec.width) <= tol) right.push_back(id);
        if (std::abs(p.y) <= tol) bottom.push_back(id);
        if (std::abs(p.y - spec.height) <= tol) top.push_back(id);
    }
    std::set<int> boundary(left.begin(), left.end());
    boundary.insert(right.begin(), right.end());
    boundary.insert(bottom.begin(), bottom.end());
    boundary.insert(top.begin(), top.end());
    if (spec.slit) {
        // Slit mid-side nodes of Quad8 faces belong to the faces as well.
        for (const auto& [key, mid] : mids) {
            const bool lo = std::binary_search(lower.begin(), lower.end(), key.first) &&
                            std::binary_search(lower.begin(), lower.end(), key.second);
            const bool up = std::binary_search(upper.begin(), upper.end(), key.first) &&
                            std::binary_search(upper.begin(), upper.end(), key.second);
            if (lo) lower.push_back(mid);
            if (up) upper.push_back(mid);
        }
        std::sort(lower.begin(), lower.end());
        std::sort(upper.begin(), upper.end());
        boundary.insert(lower.begin(), lower.end());
        boundary.insert(upper.begin(), upper.end());
        mesh.set_node_set("slit_lower", lower);
        mesh.set_node_set("slit_upper", upper);
    }
    mesh.set_node_set("left", left);
    mesh.set_node_set("right", right);
    mesh.set_node_set("bottom", bottom);
    mesh.set_node_set("top", top);
    mesh.set_node_set("boundary", std::vector<int>(boundary.begin(), boundary.end()));
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        double xc = 0.0, yc = 0.0;
        for (int id : mesh.element(e).first(4)) {
            xc += 0.25 * mesh.nodes()[static_cast<std::size_t>(id)].x;
            yc += 0.25 * mesh.nodes()[static_cast<std::size_t>(id)].y;
        }
        if (xc > band.x0 && xc < band.x1 && yc > band.y0 && yc < band.y1) {
            band_elems.push_back(static_cast<int>(e));
        }
    }
    mesh.set_element_set("band", std::move(band_elems));
    mesh.validate();
    return mesh;
}

} // namespace

Mesh generate_rect_mesh(const RectMeshSpec& spec) {
    if (!(spec.width > 0.0 && spec.height > 0.0)) {
        throw MeshError("rectangle dimensions must be positive");
    }
    if (spec.nx < 1 || spec.ny < 1) {
        throw MeshError("nx and ny must be >= 1");
    }
    if (!(spec.grading >= 1.0)) {
        throw MeshError("grading ratio must be >= 1");
    }
    if (spec.transition_levels < 0) {
        throw MeshError("transition_levels must be >= 0");
    }
    const double hx = spec.width / spec.nx;
    const double hy = spec.height / spec.ny;
    const double tol = 1e-9 * std::max(spec.width, spec.height);

    std::vector<Interval> fine_x, fine_y;
    for (const auto& band : spec.bands) {
        if (!(band.h > 0.0)) {
            throw MeshError("refinement band h must be positive");
        }
        if (band.h > std::min(hx, hy)) {
            std::ostringstream msg;
            msg << "refinement band h = " << band.h << " is larger than the global element size "
                << std::min(hx, hy);
            throw MeshError(msg.str());
        }
        if (band.x0 < -tol || band.x1 > spec.width + tol || band.y0 < -tol ||
            band.y1 > spec.height + tol || !(band.x1 > band.x0) || !(band.y1 > band.y0)) {
            throw MeshError("refinement band lies outside the domain or is empty");
        }
        fine_x.push_back({band.x0, band.x1, band.h});
        fine_y.push_back({band.y0, band.y1, band.h});
    }

    if (spec.transition_levels > 0) {
        return generate_transition_mesh(spec);
    }

    std::vector<double> forced_x, forced_y;
    if (spec.slit) {
        const Slit& s = *spec.slit;
        if (!(s.x1 > s.x0) || s.x0 < -tol || s.x1 > spec.width - tol || s.y <= tol ||
            s.y >= spec.height - tol) {
            throw MeshError("slit must be a proper interior horizontal segment");
        }
        forced_x = {s.x0, s.x1};
        forced_y = {s.y};
    }

    const std::vector<double> xs = axis_coordinates(spec.width, spec.nx, fine_x, forced_x, spec.grading);
    const std::vector<double> ys = axis_coordinates(spec.height, spec.ny, fine_y, forced_y, spec.grading);
    const std::size_t cx = xs.size() - 1; // element columns
    const std::size_t cy = ys.size() - 1; // element rows
    const bool quadratic = spec.kind == ElementKind::Quad8;

    std::vector<Point2> nodes;
    auto corner = [&](std::size_t i, std::size_t j) { return static_cast<int>(j * (cx + 1) + i); };
    for (std::size_t j = 0; j <= cy; ++j) {
        for (std::size_t i = 0; i <= cx; ++i) {
            nodes.push_back({xs[i], ys[j]});
        }
    }
    const std::size_t h_mid_base = nodes.size();
    auto h_mid = [&](std::size_t i, std::size_t j) { return static_cast<int>(h_mid_base + j * cx + i); };
    std::size_t v_mid_base = 0;
    auto v_mid = [&](std::size_t i, std::size_t j) {
        return static_cast<int>(v_mid_base + j * (cx + 1) + i);
    };
    if (quadratic) {
        for (std::size_t j = 0; j <= cy; ++j) {
            for (std::size_t i = 0; i < cx; ++i) {
                nodes.push_back({0.5 * (xs[i] + xs[i + 1]), ys[j]});
            }
        }
        v_mid_base = nodes.size();
        for (std::size_t j = 0; j < cy; ++j) {
            for (std::size_t i = 0; i <= cx; ++i) {
                nodes.push_back({xs[i], 0.5 * (ys[j] + ys[j + 1])});
            }
        }
    }

    // Slit: duplicate the nodes on the cut line (excluding the tip).
    std::map<int, int> upper_copy;
    std::size_t slit_row = 0, slit_i0 = 0, slit_i1 = 0;
    if (spec.slit) {
        slit_row = index_of(ys, spec.slit->y);
        slit_i0 = index_of(xs, spec.slit->x0);
        slit_i1 = index_of(xs, spec.slit->x1);
        for (std::size_t i = slit_i0; i < slit_i1; ++i) {
            const int id = corner(i, slit_row);
            upper_copy[id] = static_cast<int>(nodes.size());
            nodes.push_back(nodes[static_cast<std::size_t>(id)]);
            if (quadratic) {
                const int mid = h_mid(i, slit_row);
                upper_copy[mid] = static_cast<int>(nodes.size());
                nodes.push_back(nodes[static_cast<std::size_t>(mid)]);
            }
        }
    }

    std::vector<int> conn;
    conn.reserve(cx * cy * (quadratic ? 8 : 4));
    for (std::size_t j = 0; j < cy; ++j) {
        for (std::size_t i = 0; i < cx; ++i) {
            std::vector<int> el{corner(i, j), corner(i + 1, j), corner(i + 1, j + 1), corner(i, j + 1)};
            if (quadratic) {
                el.insert(el.end(), {h_mid(i, j), v_mid(i + 1, j), h_mid(i, j + 1), v_mid(i, j)});
            }
            const bool above_slit = spec.slit && j == slit_row && i >= slit_i0 && i < slit_i1;
            if (above_slit) {
                for (int local : {0, 1, 4}) {
                    if (local >= static_cast<int>(el.size())) {
                        continue;
                    }
                    const auto it = upper_copy.find(el[static_cast<std::size_t>(local)]);
                    if (it != upper_copy.end()) {
                        el[static_cast<std::size_t>(local)] = it->second;
                    }
                }
            }
            conn.insert(conn.end(), el.begin(), el.end());
        }
    }

    Mesh mesh(spec.kind, std::move(nodes), std::move(conn));

    std::vector<int> left, right, bottom, top;
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
        const Point2& p = mesh.nodes()[k];
        const int id = static_cast<int>(k);
        if (std::abs(p.x) <= tol) left.push_back(id);
        if (std::abs(p.x - spec.width) <= tol) right.push_back(id);
        if (std::abs(p.y) <= tol) bottom.push_back(id);
        if (std::abs(p.y - spec.height) <= tol) top.push_back(id);
    }
    std::set<int> boundary;
    boundary.insert(left.begin(), left.end());
    boundary.insert(right.begin(), right.end());
    boundary.insert(bottom.begin(), bottom.end());
    boundary.insert(top.begin(), top.end());
    if (spec.slit) {
        std::vector<int> lower, upper;
        for (const auto& [orig, copy] : upper_copy) {
            lower.push_back(orig);
            upper.push_back(copy);
        }
        const int tip = corner(slit_i1, slit_row);
        lower.push_back(tip);
        upper.push_back(tip);
        std::sort(lower.begin(), lower.end());
        std::sort(upper.begin(), upper.end());
        boundary.insert(lower.begin(), lower.end());
        boundary.insert(upper.begin(), upper.end());
        mesh.set_node_set("slit_lower", lower);
        mesh.set_node_set("slit_upper", upper);
    }
    mesh.set_node_set("left", left);
    mesh.set_node_set("right", right);
    mesh.set_node_set("bottom", bottom);
    mesh.set_node_set("top", top);
    mesh.set_node_set("boundary", std::vector<int>(boundary.begin(), boundary.end()));

    if (!spec.bands.empty()) {
        std::vector<int> band_elems;
        for (std::size_t j = 0; j < cy; ++j) {
            for (std::size_t i = 0; i < cx; ++i) {
                const double xc = 0.5 * (xs[i] + xs[i + 1]);
                const double yc = 0.5 * (ys[j] + ys[j + 1]);
                for (const auto& band : spec.bands) {
                    if (xc > band.x0 && xc < band.x1 && yc > band.y0 && yc < band.y1) {
                        band_elems.push_back(static_cast<int>(j * cx + i));
                        break;
                    }
                }
            }
        }
        mesh.set_element_set("band", std::move(band_elems));
    }
    return mesh;
}

Mesh generate_rect_mesh(double width, double height, int nx, int ny, ElementKind kind,
                        const std::vector<RefinementBand>& bands) {
    RectMeshSpec spec;
    spec.width = width;
    spec.height = height;
    spec.nx = nx;
    spec.ny = ny;
    spec.kind = kind;
    spec.bands = bands;
    return generate_rect_mesh(spec);
}

} // namespace hacfem
