#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "biwave/error.hpp"
#include "biwave/mesh.hpp"
#include "support.hpp"

namespace biwave {
namespace {

TEST(EdgeClassification, DiagonalAndAxisEdges) {
    EXPECT_EQ(classify_edge({0, 0}, {1, 1}), EdgeKind::TypeI);
    EXPECT_EQ(classify_edge({0, 0}, {1, -1}), EdgeKind::TypeI);
    EXPECT_EQ(classify_edge({0, 0}, {1, 0}), EdgeKind::TypeII);
    EXPECT_EQ(classify_edge({0, 0}, {2, 1}), EdgeKind::TypeII);
    EXPECT_THROW(classify_edge({0.5, 0.5}, {0.5, 0.5}), MeshError);
}

TEST(EdgeClassification, FrameConventions) {
    const EdgeFrame f = make_edge_frame({0, 0}, {3, 4});
    EXPECT_NEAR(norm(f.tau), 1.0, 1e-14);
    EXPECT_NEAR(norm(f.n), 1.0, 1e-14);
    EXPECT_NEAR(norm(f.nbar), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(f.n.x, f.tau.y);
    EXPECT_DOUBLE_EQ(f.n.y, -f.tau.x);
    EXPECT_EQ(f.nbar.x, f.n.x);
    EXPECT_EQ(f.nbar.y, -f.n.y);
    EXPECT_DOUBLE_EQ(f.beta, dot(f.tau, f.nbar));

    // 45 degree edges: nbar is +-tau
    const EdgeFrame g = make_edge_frame({0, 0}, {1, 1});
    EXPECT_LT(std::min(norm(g.nbar - g.tau), norm(g.nbar + g.tau)), 1e-14);
}

TEST(Crisscross, CountsAndEuler) {
    const Mesh m1 = generate_crisscross(1);
    EXPECT_EQ(m1.num_vertices(), 5);
    EXPECT_EQ(m1.num_edges(), 8);
    EXPECT_EQ(m1.num_triangles(), 4);
    const Mesh m2 = generate_crisscross(2);
    EXPECT_EQ(m2.num_vertices(), 13);
    EXPECT_EQ(m2.num_triangles(), 16);
    for (int n : {1, 2, 3, 7, 16, 33, 64}) {
        const Mesh m = generate_crisscross(n);
        EXPECT_EQ(m.num_vertices(), (n + 1) * (n + 1) + n * n);
        EXPECT_EQ(m.num_triangles(), 4 * n * n);
        EXPECT_EQ(m.num_edges(), 2 * n * (n + 1) + 4 * n * n);
        EXPECT_EQ(m.num_vertices() - m.num_edges() + m.num_triangles(), 1);
        EXPECT_TRUE(m.admissible());
        EXPECT_NEAR(m.h(), 1.0 / n, 1e-14);
    }
}

TEST(Crisscross, ScaledDomain) {
    const Mesh m = generate_crisscross(4, 2.5);
    EXPECT_NEAR(m.h(), 2.5 / 4, 1e-14);
    EXPECT_TRUE(m.admissible());
}

TEST(Crisscross, QualityIsOne) {
    const AdmissibilityReport r = check_admissibility(generate_crisscross(2));
    EXPECT_EQ(r.verdict, Admissibility::AdmissibleTwoTypeI);
    EXPECT_NEAR(r.min_quality, 1.0, 1e-14);
    EXPECT_EQ(r.message, "admissible, min quality 1.000");
    const Mesh m1 = generate_crisscross(1);
    for (int t = 0; t < m1.num_triangles(); ++t) {
        EXPECT_NEAR(quality_metric(m1, t), 1.0, 1e-14);
    }
}

TEST(MeshInvariants, StoredKindsLabelsAndBoundary) {
    for (const Mesh& m : {generate_crisscross(5), testing::load_fixture("diamond_nonuniform.mesh")}) {
        for (const Edge& e : m.edges()) {
            EXPECT_EQ(e.kind, classify_edge(m.vertex(e.vertex_ids[0]), m.vertex(e.vertex_ids[1])));
            EXPECT_LT(e.vertex_ids[0], e.vertex_ids[1]);
            EXPECT_EQ(e.boundary, e.triangle_ids[1] < 0);
            if (e.kind == EdgeKind::TypeI) {
                EXPECT_LE(std::min(norm(e.frame.nbar - e.frame.tau), norm(e.frame.nbar + e.frame.tau)), 1e-10);
            }
        }
        double hmax = 0.0;
        for (int t = 0; t < m.num_triangles(); ++t) {
            const Triangle& tri = m.triangle(t);
            ASSERT_TRUE(tri.labels.has_value());
            EXPECT_GT(tri.area, 0.0);
            EXPECT_GE(tri.quality, 1e-6);
            hmax = std::max(hmax, tri.diameter);
            for (int i = 0; i < 3; ++i) {
                const Edge& e = m.edge(tri.labels->edges[static_cast<std::size_t>(i)]);
                const int vi = tri.labels->vertices[static_cast<std::size_t>(i)];
                EXPECT_NE(e.vertex_ids[0], vi);
                EXPECT_NE(e.vertex_ids[1], vi);
                EXPECT_EQ(e.kind, i == 2 ? EdgeKind::TypeII : EdgeKind::TypeI);
            }
            EXPECT_LT(tri.labels->vertices[0], tri.labels->vertices[1]);
        }
        EXPECT_EQ(m.h(), hmax);
    }
}

TEST(MeshOrientation, ClockwiseInputIsReoriented) {
    const Mesh m({{0, 0}, {1, 1}, {2, 0}}, {{0, 1, 2}});
    EXPECT_GT(signed_area(m.corners(0)[0], m.corners(0)[1], m.corners(0)[2]), 0.0);
    EXPECT_TRUE(m.admissible());
    EXPECT_EQ(m.triangle(0).labels->vertices[2], 1);
}

TEST(Admissibility, RejectsOneAndZeroTypeIEdges) {
    const Mesh single({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
    const AdmissibilityReport r = check_admissibility(single);
    EXPECT_EQ(r.verdict, Admissibility::NotAdmissible);
    EXPECT_EQ(r.type_i_counts[0], 1);
    EXPECT_TRUE(std::isnan(r.min_quality));
    EXPECT_NE(r.message.find("degree >= 5"), std::string::npos);
    EXPECT_THROW(quality_metric(single, 0), NotAdmissibleError);

    const AdmissibilityReport one = check_admissibility(testing::load_fixture("one_type_i.mesh"));
    EXPECT_EQ(one.verdict, Admissibility::NotAdmissible);
    EXPECT_EQ(one.problem_triangles.size(), 2U);

    const AdmissibilityReport zero = check_admissibility(testing::load_fixture("zero_type_i.mesh"));
    EXPECT_EQ(zero.verdict, Admissibility::NotAdmissible);
    EXPECT_EQ(zero.message.rfind("not admissible: 0 type I edges", 0), 0U);
}

TEST(Admissibility, NonuniformFixture) {
    const Mesh m = testing::load_fixture("diamond_nonuniform.mesh");
    const AdmissibilityReport r = check_admissibility(m);
    EXPECT_EQ(r.verdict, Admissibility::AdmissibleTwoTypeI);
    EXPECT_LT(r.min_quality, 1.0);
    EXPECT_GT(r.min_quality, 0.5);
    // genuinely nonuniform: several distinct diameters
    std::vector<double> sizes;
    for (const Triangle& t : m.triangles()) {
        sizes.push_back(std::round(t.diameter * 1e9));
    }
    std::sort(sizes.begin(), sizes.end());
    EXPECT_GE(std::unique(sizes.begin(), sizes.end()) - sizes.begin(), 3);
}

TEST(Quality, MatchesDoubleAngleSine) {
    const Mesh m = testing::admissible_triangle({0, 0}, std::numbers::pi / 8, 1.0, 0, false);
    EXPECT_NEAR(quality_metric(m, 0), 0.5, 1e-12);
    double last = 2.0;
    for (double theta : {std::numbers::pi / 4, 0.5, 0.3, 0.1, 0.01, 1e-4}) {
        const double q = quality_metric(testing::admissible_triangle({0, 0}, theta, 1.0, 1, true), 0);
        EXPECT_NEAR(q, std::pow(std::sin(2 * theta), 2), 1e-12);
        EXPECT_LT(q, last);
        last = q;
    }
    EXPECT_LT(last, 1e-6);
}

TEST(MeshIo, RoundTrip) {
    const Mesh m = generate_crisscross(3);
    std::stringstream s;
    write_mesh(s, m);
    const Mesh r = read_mesh(s);
    ASSERT_EQ(r.num_vertices(), m.num_vertices());
    ASSERT_EQ(r.num_triangles(), m.num_triangles());
    for (int i = 0; i < m.num_vertices(); ++i) {
        EXPECT_EQ(r.vertex(i), m.vertex(i));
    }
    for (int t = 0; t < m.num_triangles(); ++t) {
        EXPECT_EQ(r.triangle(t).vertex_ids, m.triangle(t).vertex_ids);
    }
    EXPECT_EQ(r.admissible(), m.admissible());
}

TEST(MeshIo, ExactDecimalPreservation) {
    std::stringstream s("vertex 0 0.1 0.2\nvertex 1 1.1 1.2\nvertex 2 0.1 1.3\ntriangle 0 0 1 2\n");
    const Mesh m = read_mesh(s);
    std::stringstream out;
    write_mesh(out, m);
    EXPECT_NE(out.str().find("vertex 0 0.1 0.2\n"), std::string::npos);
    EXPECT_NE(out.str().find("vertex 1 1.1 1.2\n"), std::string::npos);
}

void expect_parse_error(const std::string& text, std::size_t line, const std::string& fragment) {
    std::stringstream s(text);
    try {
        (void)read_mesh(s);
        ADD_FAILURE() << "expected a parse error for:\n" << text;
    } catch (const MeshParseError& e) {
        EXPECT_EQ(e.line(), line) << e.what();
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

TEST(MeshIo, ParseErrors) {
    const std::string verts = "vertex 0 0 0\nvertex 1 1 0\nvertex 2 1 1\nvertex 3 0 1\nvertex 4 0.5 0.5\n";
    expect_parse_error(verts + "triangle 0 0 1 99\n", 6, "unknown vertex id 99 (mesh has 5 vertices)");
    expect_parse_error("", 0, "no vertices");
    expect_parse_error("# only a comment\n", 0, "no vertices");
    expect_parse_error(verts, 0, "no triangles");
    expect_parse_error("vertex 0 0\n", 1, "expected");
    expect_parse_error("vertex 0 zero 0\n", 1, "coordinate");
    expect_parse_error("vertex 1 0 0\n", 1, "consecutive");
    expect_parse_error(verts + "triangle 0 0 1 4\ntriangle 1 4 1 0\n", 7, "duplicate triangle");
    expect_parse_error(verts + "triangle 0 0 1 4\ntriangle 1 0 1 2\ntriangle 2 0 1 3\n", 8, "non-manifold edge (0, 1)");
    expect_parse_error(verts + "triangle 0 0 4 2\n", 6, "degenerate");
    expect_parse_error(verts + "quad 0 0 1 2 3\n", 6, "unknown record");
}

}  // namespace
}  // namespace biwave
