#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "biwave/analysis.hpp"
#include "biwave/error.hpp"
#include "biwave/solver.hpp"
#include "support.hpp"

namespace biwave {
namespace {

SymmetricCsr from_lower(int n, const std::vector<std::array<double, 3>>& entries) {
    SymmetricCsr a;
    a.n = n;
    a.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        for (const auto& e : entries) {
            if (static_cast<int>(e[0]) == i) {
                a.col.push_back(static_cast<int>(e[1]));
                a.val.push_back(e[2]);
            }
        }
        a.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<int>(a.col.size());
    }
    return a;
}

SolveOptions with(SolveMethod m) {
    SolveOptions o;
    o.method = m;
    return o;
}

class ByMethod : public ::testing::TestWithParam<SolveMethod> {};

TEST_P(ByMethod, Identity) {
    const SymmetricCsr a = from_lower(3, {{0, 0, 1}, {1, 1, 1}, {2, 2, 1}});
    const std::vector<double> b{1.5, -2, 3};
    const SolveResult r = solve(a, b, with(GetParam()));
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(r.x[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)], 1e-15);
    }
    EXPECT_LE(r.report.relative_residual, 1e-12);
}

TEST_P(ByMethod, TwoByTwo) {
    const SymmetricCsr a = from_lower(2, {{0, 0, 2}, {1, 0, 1}, {1, 1, 2}});
    const SolveResult r = solve(a, std::vector<double>{3, 3}, with(GetParam()));
    EXPECT_NEAR(r.x[0], 1.0, 1e-14);
    EXPECT_NEAR(r.x[1], 1.0, 1e-14);
    EXPECT_EQ(r.report.method, GetParam());
}

TEST_P(ByMethod, ZeroRightHandSide) {
    const SymmetricCsr a = from_lower(2, {{0, 0, 2}, {1, 0, 1}, {1, 1, 2}});
    const SolveResult r = solve(a, std::vector<double>{0, 0}, with(GetParam()));
    EXPECT_EQ(r.x, (std::vector<double>{0, 0}));
}

TEST_P(ByMethod, GalerkinReproduction) {
    std::mt19937_64 rng(17);
    for (int order : {3, 4}) {
        const Mesh m = generate_crisscross(6);
        const FeSpace space(m, order);
        const SparseSystem sys = assemble(space, 1e-2, [](Point2) { return 1.0; });
        const std::vector<double> c = testing::random_vector(rng, static_cast<std::size_t>(sys.matrix.n));
        std::vector<double> b(c.size());
        sys.matrix.multiply(c, b);
        const SolveResult r = solve(sys.matrix, b, with(GetParam()));
        double err = 0.0;
        double ref = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            err = std::max(err, std::abs(r.x[i] - c[i]));
            ref = std::max(ref, std::abs(c[i]));
        }
        EXPECT_LE(err, 1e-7 * ref) << "order " << order;
    }
}

TEST_P(ByMethod, ReportedResidualIsRecomputed) {
    const Mesh m = generate_crisscross(5);
    const FeSpace space(m, 3);
    const SparseSystem sys = assemble(space, 1.0, [](Point2 p) { return p.x - p.y * p.y; });
    const SolveResult r = solve(sys, with(GetParam()));
    EXPECT_DOUBLE_EQ(r.report.relative_residual, relative_residual(sys.matrix, r.x, sys.rhs));
    EXPECT_LE(r.report.relative_residual, std::max(1e-12, r.report.residual_floor));
}

INSTANTIATE_TEST_SUITE_P(Methods, ByMethod,
                         ::testing::Values(SolveMethod::ConjugateGradient, SolveMethod::DirectCholesky));

TEST(Solver, AutoPicksDirectForSmallSystems) {
    const SymmetricCsr a = from_lower(2, {{0, 0, 2}, {1, 0, 1}, {1, 1, 2}});
    EXPECT_EQ(solve(a, std::vector<double>{1, 0}).report.method, SolveMethod::DirectCholesky);
}

TEST(Solver, CgMatchesDirect) {
    const Mesh m = generate_crisscross(8);
    for (int order : {3, 4}) {
        const FeSpace space(m, order);
        const SparseSystem sys = assemble(space, 0.1, [](Point2 p) { return std::exp(p.x) * std::cos(p.y); });
        const SolveResult cg = solve(sys, with(SolveMethod::ConjugateGradient));
        const SolveResult ch = solve(sys, with(SolveMethod::DirectCholesky));
        double diff = 0.0;
        double ref = 0.0;
        for (std::size_t i = 0; i < cg.x.size(); ++i) {
            diff += (cg.x[i] - ch.x[i]) * (cg.x[i] - ch.x[i]);
            ref += ch.x[i] * ch.x[i];
        }
        EXPECT_LE(std::sqrt(diff / ref), 1e-8);
        EXPECT_GT(cg.report.iterations, 0);
    }
}

TEST(Solver, UnpreconditionedCg) {
    const SymmetricCsr a = from_lower(3, {{0, 0, 4}, {1, 0, 1}, {1, 1, 3}, {2, 1, -1}, {2, 2, 5}});
    SolveOptions o = with(SolveMethod::ConjugateGradient);
    o.preconditioner = Preconditioner::None;
    const SolveResult r = solve(a, std::vector<double>{1, 2, 3}, o);
    EXPECT_LE(r.report.relative_residual, 1e-12);
}

TEST(Solver, DetectsIndefiniteMatrix) {
    const SymmetricCsr a = from_lower(2, {{0, 0, 1}, {1, 0, 2}, {1, 1, 1}});
    EXPECT_THROW(solve(a, std::vector<double>{1, 0}, with(SolveMethod::ConjugateGradient)), SolverError);
    EXPECT_THROW(solve(a, std::vector<double>{1, 0}, with(SolveMethod::DirectCholesky)), SolverError);
    const SymmetricCsr neg = from_lower(2, {{0, 0, -1}, {1, 1, 1}});
    EXPECT_THROW(solve(neg, std::vector<double>{1, 1}, with(SolveMethod::ConjugateGradient)), SolverError);
}

TEST(Solver, IterationLimitKeepsBestIterate) {
    const Mesh m = generate_crisscross(8);
    const FeSpace space(m, 3);
    const SparseSystem sys = assemble(space, 1.0, [](Point2) { return 1.0; });
    SolveOptions o = with(SolveMethod::ConjugateGradient);
    o.max_iter = 20;
    try {
        (void)solve(sys, o);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        ASSERT_EQ(e.best_iterate().size(), static_cast<std::size_t>(sys.matrix.n));
        EXPECT_GT(e.residual(), 1e-12);
        EXPECT_LE(e.residual(), 1.0);
        EXPECT_NEAR(e.residual(), relative_residual(sys.matrix, e.best_iterate(), sys.rhs), 1e-12);
        EXPECT_NE(std::string(e.what()).find("residual"), std::string::npos);
    }
}

TEST(Solver, InvalidArguments) {
    const SymmetricCsr a = from_lower(2, {{0, 0, 2}, {1, 0, 1}, {1, 1, 2}});
    const std::vector<double> b{1, 1};
    SolveOptions o;
    o.rel_tol = 0.0;
    EXPECT_THROW(solve(a, b, o), std::invalid_argument);
    o.rel_tol = 1e-3;
    EXPECT_THROW(solve(a, b, o), std::invalid_argument);
    o.rel_tol = 1e-10;
    o.max_iter = -1;
    EXPECT_THROW(solve(a, b, o), std::invalid_argument);
    EXPECT_THROW(solve(a, std::vector<double>{1, 1, 1}), std::invalid_argument);
    EXPECT_THROW(solve(a, std::vector<double>{1, std::nan("")}), std::invalid_argument);
}

TEST(Solver, MeetsTightToleranceOnModerateMesh) {
    const Mesh m = generate_crisscross(32);
    const FeSpace space(m, 3);
    const ExactSolution p = manufactured_test1(1e-2);
    const SparseSystem sys = assemble(space, 1e-2, p.f);
    const SolveResult r = solve(sys);
    EXPECT_LE(r.report.relative_residual, 1e-12);
    EXPECT_EQ(to_string(r.report.method), "cholesky");
}

}  // namespace
}  // namespace biwave
