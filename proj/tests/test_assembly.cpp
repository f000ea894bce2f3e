#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "biwave/assembly.hpp"
#include "biwave/error.hpp"
#include "support.hpp"

namespace biwave {
namespace {

double quadratic_form(const SymmetricCsr& a, const std::vector<double>& x) {
    std::vector<double> y(x.size());
    a.multiply(x, y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += x[i] * y[i];
    }
    return s;
}

Eigen::MatrixXd dense(const SymmetricCsr& a) {
    Eigen::MatrixXd m(a.n, a.n);
    for (int i = 0; i < a.n; ++i) {
        for (int j = 0; j < a.n; ++j) {
            m(i, j) = a.at(i, j);
        }
    }
    return m;
}

TEST(DofMap, CrisscrossOneCounts) {
    const Mesh m = generate_crisscross(1);
    const GlobalDofMap cubic = build_dof_map(m, 3);
    EXPECT_EQ(cubic.num_slots(), 21);
    EXPECT_EQ(cubic.num_free(), 5);
    const GlobalDofMap quartic = build_dof_map(m, 4);
    EXPECT_EQ(quartic.num_slots(), 37);
    EXPECT_EQ(quartic.num_free(), 13);
}

TEST(DofMap, CubicCountFormula) {
    for (int n : {1, 2, 3, 5, 8, 13}) {
        const GlobalDofMap map = build_dof_map(generate_crisscross(n), 3);
        // values, grid-vertex gradients, type I midpoints, type II nbar slots
        const int slots = (n + 1) * (n + 1) + n * n + 2 * (n + 1) * (n + 1) + 4 * n * n + 2 * n * (n + 1);
        EXPECT_EQ(map.num_slots(), slots);
        EXPECT_EQ(map.num_free(), slots - 16 * n);
    }
}

TEST(DofMap, ConstrainedSlotsAreBoundarySlots) {
    for (int order : {3, 4}) {
        for (const Mesh& m : {generate_crisscross(3), testing::load_fixture("diamond_nonuniform.mesh")}) {
            const GlobalDofMap map = build_dof_map(m, order);
            int free = 0;
            for (int s = 0; s < map.num_slots(); ++s) {
                const SlotInfo& info = map.slot(s);
                bool on_boundary = false;
                switch (info.kind) {
                    case SlotKind::VertexValue:
                    case SlotKind::VertexGradX:
                    case SlotKind::VertexGradY:
                        on_boundary = m.on_boundary(info.entity);
                        break;
                    case SlotKind::EdgeValue:
                    case SlotKind::EdgeNbar:
                        on_boundary = m.edge(info.entity).boundary;
                        break;
                    case SlotKind::InteriorValue:
                        break;
                }
                EXPECT_EQ(map.constrained(s), on_boundary) << "slot " << s;
                if (!map.constrained(s)) {
                    EXPECT_EQ(map.free_index(s), free);
                    ++free;
                }
            }
            EXPECT_EQ(free, map.num_free());
        }
    }
}

TEST(DofMap, KnownFixtureCounts) {
    const Mesh m = testing::load_fixture("diamond_nonuniform.mesh");
    EXPECT_EQ(build_dof_map(m, 3).num_slots(), 117);
    EXPECT_EQ(build_dof_map(m, 3).num_free(), 69);
    EXPECT_EQ(build_dof_map(m, 4).num_slots(), 237);
    EXPECT_EQ(build_dof_map(m, 4).num_free(), 165);
}

TEST(DofMap, RejectsInconsistentRightAngleVertices) {
    // the shared 45 degree edge (0,0)-(1,1) has its right angle at (1,1) on one
    // side and at (0,0) on the other
    const Mesh m({{0, 0}, {1, 1}, {2, 0}, {-1, 1}}, {{0, 2, 1}, {0, 1, 3}});
    ASSERT_TRUE(m.admissible());
    EXPECT_THROW(build_dof_map(m, 3), NotAdmissibleError);
    EXPECT_THROW(FeSpace(m, 4), NotAdmissibleError);
}

TEST(DofMap, RejectsInadmissibleMesh) {
    EXPECT_THROW(build_dof_map(testing::load_fixture("one_type_i.mesh"), 3), NotAdmissibleError);
}

class ByOrder : public ::testing::TestWithParam<int> {};

TEST_P(ByOrder, SymmetricPositiveDefinite) {
    const Mesh m = generate_crisscross(4);
    const FeSpace space(m, GetParam());
    const SparseSystem sys = assemble(space, 1.0, [](Point2) { return 1.0; });
    for (int i = 0; i < sys.matrix.n; ++i) {
        for (int k = sys.matrix.row_ptr[static_cast<std::size_t>(i)]; k < sys.matrix.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            EXPECT_LE(sys.matrix.col[static_cast<std::size_t>(k)], i);
        }
    }
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> x = testing::random_vector(rng, static_cast<std::size_t>(sys.matrix.n));
        EXPECT_GT(quadratic_form(sys.matrix, x), 0.0);
    }
    const Mesh small = generate_crisscross(2);
    const Eigen::MatrixXd a = dense(assemble(FeSpace(small, GetParam()), 1.0, [](Point2) { return 1.0; }).matrix);
    EXPECT_LT((a - a.transpose()).norm(), 1e-14 * a.norm());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().minCoeff(), 0.0);
}

TEST_P(ByOrder, ConstantsInKernelOfUnconstrainedForm) {
    for (const Mesh& m : {generate_crisscross(3), testing::load_fixture("diamond_nonuniform.mesh")}) {
        const FeSpace space(m, GetParam());
        const SymmetricCsr a = assemble_unconstrained(space, 0.7);
        const std::vector<double> one = space.interpolate({[](Point2) { return 1.0; }, [](Point2) { return Point2{}; }});
        std::vector<double> y(one.size());
        a.multiply(one, y);
        double amax = 0.0;
        for (double v : a.val) {
            amax = std::max(amax, std::abs(v));
        }
        for (double v : y) {
            EXPECT_LE(std::abs(v), 1e-10 * amax);
        }
    }
}

TEST_P(ByOrder, DeterministicAssembly) {
    const Mesh m = testing::load_fixture("diamond_nonuniform.mesh");
    const FeSpace space(m, GetParam());
    const auto f = [](Point2 p) { return std::sin(3 * p.x) + p.y; };
    const SparseSystem a = assemble(space, 0.3, f);
    const SparseSystem b = assemble(space, 0.3, f);
    EXPECT_EQ(a.matrix.row_ptr, b.matrix.row_ptr);
    EXPECT_EQ(a.matrix.col, b.matrix.col);
    EXPECT_EQ(a.matrix.val, b.matrix.val);
    EXPECT_EQ(a.rhs, b.rhs);
}

TEST_P(ByOrder, LocalMatrixExactWithMatrixRule) {
    const int k = GetParam();
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Mesh m = testing::shape_triangle(testing::random_shape(rng), 0.3);
        const ElementBasis basis = build_basis(m, 0, k);
        const Eigen::MatrixXd lo = local_matrix(basis, m.corners(0), 0.5, rule_for_degree(matrix_rule_degree(k)));
        const Eigen::MatrixXd hi = local_matrix(basis, m.corners(0), 0.5, rule_for_degree(matrix_rule_degree(k) + 2));
        EXPECT_LE((lo - hi).cwiseAbs().maxCoeff(), 1e-12 * hi.cwiseAbs().maxCoeff());
        EXPECT_EQ(lo, lo.transpose());
    }
}

TEST_P(ByOrder, ZeroDeltaIsDirichletEnergy) {
    const Mesh m = testing::load_fixture("diamond_nonuniform.mesh");
    const FeSpace space(m, GetParam());
    const SymmetricCsr a = assemble_unconstrained(space, 0.0);
    std::mt19937_64 rng(11);
    const std::vector<double> c = testing::random_vector(rng, static_cast<std::size_t>(a.n));
    double energy = 0.0;
    const QuadRule& rule = rule_for_degree(12);
    for (int t = 0; t < space.mesh().num_triangles(); ++t) {
        energy += integrate(rule, space.mesh().corners(t), [&](Point2 p) {
            const Point2 g = space.evaluate(t, c, p).grad;
            return dot(g, g);
        });
    }
    EXPECT_NEAR(quadratic_form(a, c), energy, 1e-10 * energy);
}

TEST_P(ByOrder, ConformingAcrossEdges) {
    std::mt19937_64 rng(3);
    for (const Mesh& m : {generate_crisscross(4), testing::load_fixture("diamond_nonuniform.mesh")}) {
        const FeSpace space(m, GetParam());
        for (int trial = 0; trial < 10; ++trial) {
            const std::vector<double> global =
                space.expand(testing::random_vector(rng, static_cast<std::size_t>(space.dof_map().num_free())));
            const testing::JumpResult j = testing::max_interior_jumps(space, global);
            EXPECT_LE(j.value, 1e-9);
            EXPECT_LE(j.nbar, 1e-9);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(CubicAndQuartic, ByOrder, ::testing::Values(3, 4));

TEST(Assembly, NegativeDeltaThrows) {
    const Mesh m = generate_crisscross(1);
    const FeSpace space(m, 3);
    EXPECT_THROW(assemble(space, -1e-3, [](Point2) { return 1.0; }), Error);
}

TEST(Assembly, ExpandAndLocalValues) {
    const Mesh m = generate_crisscross(2);
    const FeSpace space(m, 3);
    std::vector<double> free(static_cast<std::size_t>(space.dof_map().num_free()));
    for (std::size_t i = 0; i < free.size(); ++i) {
        free[i] = static_cast<double>(i + 1);
    }
    const std::vector<double> global = space.expand(free);
    ASSERT_EQ(global.size(), static_cast<std::size_t>(space.dof_map().num_slots()));
    for (int s = 0; s < space.dof_map().num_slots(); ++s) {
        const int fi = space.dof_map().free_index(s);
        EXPECT_EQ(global[static_cast<std::size_t>(s)], fi < 0 ? 0.0 : free[static_cast<std::size_t>(fi)]);
    }
    EXPECT_EQ(space.local_values(0, global).size(), 10U);
}

TEST(Assembly, MatrixMarketFormat) {
    const Mesh m = generate_crisscross(1);
    const SparseSystem sys = assemble(FeSpace(m, 3), 1.0, [](Point2) { return 1.0; });
    std::ostringstream out;
    write_matrix_market(out, sys.matrix);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "%%MatrixMarket matrix coordinate real symmetric");
    while (std::getline(in, line) && line[0] == '%') {
    }
    std::istringstream sizes(line);
    int rows = 0;
    int cols = 0;
    std::size_t nnz = 0;
    sizes >> rows >> cols >> nnz;
    EXPECT_EQ(rows, 5);
    EXPECT_EQ(cols, 5);
    EXPECT_EQ(nnz, sys.matrix.nonzeros());
    std::size_t count = 0;
    int i = 0;
    int j = 0;
    double v = 0.0;
    while (in >> i >> j >> v) {
        EXPECT_GE(i, j);
        EXPECT_GE(j, 1);
        EXPECT_NEAR(v, sys.matrix.at(i - 1, j - 1), 1e-15 * std::abs(v) + 1e-300);
        ++count;
    }
    EXPECT_EQ(count, nnz);
}

}  // namespace
}  // namespace biwave
