#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "biwave/geometry.hpp"

namespace biwave {

/// |(|tau_x| - |tau_y|)| at or below this value makes an edge type I.
inline constexpr double kTypeITolerance = 1e-10;

enum class EdgeKind { TypeI, TypeII };

/// Orientation frame of an edge: tau runs from the lower to the higher global
/// vertex id, n = (tau_y, -tau_x), nbar = (n_x, -n_y), beta = tau . nbar.
struct EdgeFrame {
    Point2 tau;
    Point2 n;
    Point2 nbar;
    double beta = 0.0;
};

EdgeFrame make_edge_frame(Point2 from, Point2 to);

/// Type I edges run at 45 degrees to the x axis (nbar = +-tau); all others are type II.
/// Throws MeshError for a degenerate edge.
EdgeKind classify_edge(Point2 p, Point2 q, double tol = kTypeITolerance);

struct Edge {
    std::array<int, 2> vertex_ids{};        // lower id first
    std::array<int, 2> triangle_ids{-1, -1}; // second entry -1 on the boundary
    EdgeFrame frame;
    EdgeKind kind = EdgeKind::TypeII;
    bool boundary = false;
    Point2 midpoint;

    [[nodiscard]] int triangle_count() const { return triangle_ids[1] < 0 ? 1 : 2; }
};

/// Labels (a1, a2, a3) of an admissible triangle: a3 is opposite the type II
/// edge and a1 < a2 by global id. edges[i] is opposite vertices[i].
struct LocalLabels {
    std::array<int, 3> vertices{};
    std::array<int, 3> edges{};
};

struct Triangle {
    std::array<int, 3> vertex_ids{};  // counterclockwise
    std::array<int, 3> edge_ids{};    // edge_ids[i] is opposite vertex_ids[i]
    double diameter = 0.0;
    double area = 0.0;
    int type_i_edges = 0;
    std::optional<LocalLabels> labels;  // set iff exactly two type I edges
    double quality = 0.0;               // 1 - beta^2 of the type II edge; 0 if unlabeled
};

enum class Admissibility { AdmissibleTwoTypeI, NotAdmissible };

/// Immutable triangulation with derived edges, edge classification and labels.
class Mesh {
public:
    /// Builds edges and classification. Triangles are reoriented counterclockwise.
    /// Throws MeshError on bad ids, degenerate or duplicate triangles, or edges
    /// shared by more than two triangles.
    Mesh(std::vector<Point2> vertices, const std::vector<std::array<int, 3>>& triangles);

    [[nodiscard]] const std::vector<Point2>& vertices() const { return vertices_; }
    [[nodiscard]] const std::vector<Triangle>& triangles() const { return triangles_; }
    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
    [[nodiscard]] const Point2& vertex(int id) const { return vertices_[static_cast<std::size_t>(id)]; }
    [[nodiscard]] const Triangle& triangle(int id) const { return triangles_[static_cast<std::size_t>(id)]; }
    [[nodiscard]] const Edge& edge(int id) const { return edges_[static_cast<std::size_t>(id)]; }

    [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles_.size()); }
    [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }

    /// Largest triangle diameter.
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] Admissibility admissibility() const { return admissibility_; }
    [[nodiscard]] bool admissible() const { return admissibility_ == Admissibility::AdmissibleTwoTypeI; }
    /// Empty when admissible.
    [[nodiscard]] const std::string& inadmissibility_reason() const { return reason_; }

    [[nodiscard]] bool on_boundary(int vertex_id) const {
        return boundary_vertex_[static_cast<std::size_t>(vertex_id)] != 0;
    }
    [[nodiscard]] std::array<Point2, 3> corners(int triangle_id) const;

private:
    std::vector<Point2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Edge> edges_;
    std::vector<char> boundary_vertex_;
    double h_ = 0.0;
    Admissibility admissibility_ = Admissibility::NotAdmissible;
    std::string reason_;
};

/// Uniform n x n criss-cross mesh of [0, L]^2: every square is cut by both diagonals.
/// Grid vertices come first (row major), then square centers.
Mesh generate_crisscross(int n, double length = 1.0);

struct AdmissibilityReport {
    std::vector<int> type_i_counts;  // per triangle
    Admissibility verdict = Admissibility::NotAdmissible;
    double min_quality = 0.0;        // over triangles with two type I edges; NaN if none
    std::vector<int> problem_triangles;
    std::string message;
};

AdmissibilityReport check_admissibility(const Mesh& mesh);

/// 1 - beta^2 for the type II edge of an admissible triangle (= sin^2(2 theta)).
/// Throws NotAdmissibleError otherwise.
double quality_metric(const Mesh& mesh, int triangle_id);

/// Plain text format: "vertex <id> <x> <y>" and "triangle <id> <v0> <v1> <v2>",
/// '#' comments. Throws MeshParseError with the offending line number.
Mesh read_mesh(std::istream& in);
void write_mesh(std::ostream& out, const Mesh& mesh);

/// Shortest decimal that round-trips to the same double.
std::string format_real(double value);

}  // namespace biwave
