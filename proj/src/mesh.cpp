#include "biwave/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string_view>

#include "biwave/error.hpp"

namespace biwave {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey make_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

}  // namespace

EdgeFrame make_edge_frame(Point2 from, Point2 to) {
    const Point2 d = to - from;
    const double len = norm(d);
    if (!(len > 0.0)) {
        throw MeshError("degenerate edge: coincident end points");
    }
    EdgeFrame f;
    f.tau = (1.0 / len) * d;
    f.n = {f.tau.y, -f.tau.x};
    f.nbar = reflect(f.n);
    f.beta = std::clamp(dot(f.tau, f.nbar), -1.0, 1.0);
    return f;
}

EdgeKind classify_edge(Point2 p, Point2 q, double tol) {
    const EdgeFrame f = make_edge_frame(p, q);
    return std::abs(std::abs(f.tau.x) - std::abs(f.tau.y)) <= tol ? EdgeKind::TypeI : EdgeKind::TypeII;
}

Mesh::Mesh(std::vector<Point2> vertices, const std::vector<std::array<int, 3>>& triangles)
    : vertices_(std::move(vertices)) {
    const int nv = num_vertices();
    for (const Point2& p : vertices_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw MeshError("vertex with non-finite coordinates");
        }
    }

    std::set<std::array<int, 3>> seen;
    std::map<EdgeKey, int> edge_index;
    triangles_.reserve(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        std::array<int, 3> v = triangles[t];
        for (int id : v) {
            if (id < 0 || id >= nv) {
                throw MeshError("triangle " + std::to_string(t) + " references unknown vertex id " +
                                std::to_string(id));
            }
        }
        std::array<int, 3> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        if (sorted[0] == sorted[1] || sorted[1] == sorted[2]) {
            throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
        }
        if (!seen.insert(sorted).second) {
            throw MeshError("duplicate triangle " + std::to_string(t));
        }
        double area = signed_area(vertex(v[0]), vertex(v[1]), vertex(v[2]));
        if (area == 0.0) {
            throw MeshError("triangle " + std::to_string(t) + " has zero area");
        }
        if (area < 0.0) {
            std::swap(v[1], v[2]);
            area = -area;
        }

        Triangle tri;
        tri.vertex_ids = v;
        tri.area = area;
        tri.diameter = std::max({distance(vertex(v[0]), vertex(v[1])), distance(vertex(v[1]), vertex(v[2])),
                                 distance(vertex(v[2]), vertex(v[0]))});
        for (int i = 0; i < 3; ++i) {
            const int a = v[(i + 1) % 3];
            const int b = v[(i + 2) % 3];
            const EdgeKey key = make_key(a, b);
            auto it = edge_index.find(key);
            if (it == edge_index.end()) {
                Edge e;
                e.vertex_ids = {key.first, key.second};
                e.triangle_ids = {static_cast<int>(t), -1};
                e.frame = make_edge_frame(vertex(key.first), vertex(key.second));
                e.kind = classify_edge(vertex(key.first), vertex(key.second));
                e.midpoint = 0.5 * (vertex(key.first) + vertex(key.second));
                it = edge_index.emplace(key, static_cast<int>(edges_.size())).first;
                edges_.push_back(e);
            } else {
                Edge& e = edges_[static_cast<std::size_t>(it->second)];
                if (e.triangle_ids[1] >= 0) {
                    throw MeshError("edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                                    ") is shared by more than two triangles");
                }
                e.triangle_ids[1] = static_cast<int>(t);
            }
            tri.edge_ids[static_cast<std::size_t>(i)] = it->second;
        }
        triangles_.push_back(tri);
    }

    boundary_vertex_.assign(vertices_.size(), 0);
    for (Edge& e : edges_) {
        e.boundary = e.triangle_ids[1] < 0;
        if (e.boundary) {
            boundary_vertex_[static_cast<std::size_t>(e.vertex_ids[0])] = 1;
            boundary_vertex_[static_cast<std::size_t>(e.vertex_ids[1])] = 1;
        }
    }

    int bad = 0;
    for (Triangle& tri : triangles_) {
        h_ = std::max(h_, tri.diameter);
        int type_ii_slot = -1;
        for (int i = 0; i < 3; ++i) {
            if (edge(tri.edge_ids[static_cast<std::size_t>(i)]).kind == EdgeKind::TypeI) {
                ++tri.type_i_edges;
            } else {
                type_ii_slot = i;
            }
        }
        if (tri.type_i_edges != 2) {
            ++bad;
            continue;
        }
        const int s = type_ii_slot;
        int a1 = tri.vertex_ids[static_cast<std::size_t>((s + 1) % 3)];
        int a2 = tri.vertex_ids[static_cast<std::size_t>((s + 2) % 3)];
        if (a1 > a2) {
            std::swap(a1, a2);
        }
        LocalLabels labels;
        labels.vertices = {a1, a2, tri.vertex_ids[static_cast<std::size_t>(s)]};
        for (int i = 0; i < 3; ++i) {
            const int vid = labels.vertices[static_cast<std::size_t>(i)];
            const auto pos = std::find(tri.vertex_ids.begin(), tri.vertex_ids.end(), vid) - tri.vertex_ids.begin();
            labels.edges[static_cast<std::size_t>(i)] = tri.edge_ids[static_cast<std::size_t>(pos)];
        }
        tri.labels = labels;
        const double beta = edge(labels.edges[2]).frame.beta;
        tri.quality = 1.0 - beta * beta;
    }

    if (triangles_.empty()) {
        admissibility_ = Admissibility::NotAdmissible;
        reason_ = "mesh has no triangles";
    } else if (bad == 0) {
        admissibility_ = Admissibility::AdmissibleTwoTypeI;
    } else {
        admissibility_ = Admissibility::NotAdmissible;
        reason_ = std::to_string(bad) + " of " + std::to_string(triangles_.size()) +
                  " triangles do not have exactly two type I edges";
    }
}

std::array<Point2, 3> Mesh::corners(int triangle_id) const {
    const Triangle& t = triangle(triangle_id);
    return {vertex(t.vertex_ids[0]), vertex(t.vertex_ids[1]), vertex(t.vertex_ids[2])};
}

Mesh generate_crisscross(int n, double length) {
    if (n < 1 || !(length > 0.0)) {
        throw MeshError("criss-cross mesh needs n >= 1 and a positive side length");
    }
    const int row = n + 1;
    std::vector<Point2> vertices;
    vertices.reserve(static_cast<std::size_t>(row * row + n * n));
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            vertices.push_back({length * i / n, length * j / n});
        }
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            vertices.push_back({length * (2 * i + 1) / (2.0 * n), length * (2 * j + 1) / (2.0 * n)});
        }
    }
    std::vector<std::array<int, 3>> triangles;
    triangles.reserve(static_cast<std::size_t>(4 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int p00 = j * row + i;
            const int p10 = p00 + 1;
            const int p01 = p00 + row;
            const int p11 = p01 + 1;
            const int c = row * row + j * n + i;
            triangles.push_back({p00, p10, c});
            triangles.push_back({p10, p11, c});
            triangles.push_back({p11, p01, c});
            triangles.push_back({p01, p00, c});
        }
    }
    return Mesh(std::move(vertices), triangles);
}

AdmissibilityReport check_admissibility(const Mesh& mesh) {
    AdmissibilityReport report;
    report.verdict = mesh.admissibility();
    report.min_quality = std::numeric_limits<double>::quiet_NaN();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Triangle& tri = mesh.triangle(t);
        report.type_i_counts.push_back(tri.type_i_edges);
        if (tri.labels) {
            report.min_quality = std::isnan(report.min_quality) ? tri.quality : std::min(report.min_quality, tri.quality);
        } else {
            report.problem_triangles.push_back(t);
        }
    }
    if (mesh.admissible()) {
        std::ostringstream os;
        os.precision(3);
        os << std::fixed << "admissible, min quality " << report.min_quality;
        report.message = os.str();
    } else {
        std::ostringstream os;
        os << "not admissible: ";
        if (mesh.num_triangles() == 0) {
            os << "mesh has no triangles";
        } else {
            const int first = report.problem_triangles.front();
            os << report.type_i_counts[static_cast<std::size_t>(first)] << " type I edges on triangle " << first
               << " (" << report.problem_triangles.size() << " of " << mesh.num_triangles()
               << " triangles affected); the cubic and quartic conforming elements require every "
                  "triangle to have exactly two type I (45 degree) edges, otherwise a conforming "
                  "element needs polynomial degree >= 5";
        }
        report.message = os.str();
    }
    return report;
}

double quality_metric(const Mesh& mesh, int triangle_id) {
    const Triangle& tri = mesh.triangle(triangle_id);
    if (!tri.labels) {
        throw NotAdmissibleError("triangle " + std::to_string(triangle_id) + " has " +
                                 std::to_string(tri.type_i_edges) + " type I edges; two are required");
    }
    return tri.quality;
}

std::string format_real(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

template <class T>
T parse_number(std::string_view token, std::size_t line, const char* what) {
    T value{};
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw MeshParseError(line, std::string("malformed ") + what + " '" + std::string(token) + "'");
    }
    return value;
}

}  // namespace

Mesh read_mesh(std::istream& in) {
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::set<std::array<int, 3>> seen;
    std::map<EdgeKey, int> edge_use;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const auto tok = split_ws(line);
        if (tok.empty()) {
            continue;
        }
        if (tok[0] == "vertex") {
            if (tok.size() != 4) {
                throw MeshParseError(line_no, "expected 'vertex <id> <x> <y>'");
            }
            if (!triangles.empty()) {
                throw MeshParseError(line_no, "vertex after the first triangle");
            }
            const int id = parse_number<int>(tok[1], line_no, "vertex id");
            if (id != static_cast<int>(vertices.size())) {
                throw MeshParseError(line_no, "vertex ids must be consecutive from 0; expected " +
                                                  std::to_string(vertices.size()) + ", got " + std::to_string(id));
            }
            const double x = parse_number<double>(tok[2], line_no, "coordinate");
            const double y = parse_number<double>(tok[3], line_no, "coordinate");
            if (!std::isfinite(x) || !std::isfinite(y)) {
                throw MeshParseError(line_no, "non-finite coordinate");
            }
            vertices.push_back({x, y});
        } else if (tok[0] == "triangle") {
            if (tok.size() != 5) {
                throw MeshParseError(line_no, "expected 'triangle <id> <v0> <v1> <v2>'");
            }
            const int id = parse_number<int>(tok[1], line_no, "triangle id");
            if (id != static_cast<int>(triangles.size())) {
                throw MeshParseError(line_no, "triangle ids must be consecutive from 0; expected " +
                                                  std::to_string(triangles.size()) + ", got " + std::to_string(id));
            }
            std::array<int, 3> v{};
            for (int k = 0; k < 3; ++k) {
                v[static_cast<std::size_t>(k)] = parse_number<int>(tok[static_cast<std::size_t>(k + 2)], line_no, "vertex id");
                const int vid = v[static_cast<std::size_t>(k)];
                if (vid < 0 || vid >= static_cast<int>(vertices.size())) {
                    throw MeshParseError(line_no, "unknown vertex id " + std::to_string(vid) + " (mesh has " +
                                                      std::to_string(vertices.size()) + " vertices)");
                }
            }
            std::array<int, 3> sorted = v;
            std::sort(sorted.begin(), sorted.end());
            if (sorted[0] == sorted[1] || sorted[1] == sorted[2]) {
                throw MeshParseError(line_no, "triangle repeats a vertex");
            }
            if (!seen.insert(sorted).second) {
                throw MeshParseError(line_no, "duplicate triangle");
            }
            if (signed_area(vertices[static_cast<std::size_t>(v[0])], vertices[static_cast<std::size_t>(v[1])],
                            vertices[static_cast<std::size_t>(v[2])]) == 0.0) {
                throw MeshParseError(line_no, "degenerate triangle (zero area)");
            }
            for (int k = 0; k < 3; ++k) {
                const EdgeKey key = make_key(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]);
                if (++edge_use[key] > 2) {
                    throw MeshParseError(line_no, "non-manifold edge (" + std::to_string(key.first) + ", " +
                                                      std::to_string(key.second) + ") has more than two triangles");
                }
            }
            triangles.push_back(v);
        } else {
            throw MeshParseError(line_no, "unknown record '" + std::string(tok[0]) + "'");
        }
    }
    if (vertices.empty()) {
        throw MeshParseError(0, "mesh file contains no vertices");
    }
    if (triangles.empty()) {
        throw MeshParseError(0, "mesh file contains no triangles");
    }
    return Mesh(std::move(vertices), triangles);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
    out << "# " << mesh.num_vertices() << " vertices, " << mesh.num_triangles() << " triangles\n";
    for (int i = 0; i < mesh.num_vertices(); ++i) {
        out << "vertex " << i << ' ' << format_real(mesh.vertex(i).x) << ' ' << format_real(mesh.vertex(i).y) << '\n';
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& v = mesh.triangle(t).vertex_ids;
        out << "triangle " << t << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    }
}

}  // namespace biwave
