#include "biwave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "biwave/error.hpp"
#include "biwave/parallel.hpp"

namespace biwave {

namespace {

constexpr double kPi = std::numbers::pi;

double sq(double v) { return v * v; }

}  // namespace

ExactSolution manufactured_test1(double delta) {
    if (!(delta >= 0.0)) {
        throw Error("delta must be non-negative");
    }
    ExactSolution e;
    e.name = "test1";
    e.has_exact = true;
    e.delta_dependent = true;
    e.delta = delta;
    // X(t) = sin^2(4 pi t), X' = 4 pi sin(8 pi t), X'' = 32 pi^2 cos(8 pi t)
    e.u = [](Point2 p) { return sq(std::sin(4 * kPi * p.x)) * sq(std::sin(4 * kPi * p.y)); };
    e.grad = [](Point2 p) {
        const double x0 = sq(std::sin(4 * kPi * p.x));
        const double y0 = sq(std::sin(4 * kPi * p.y));
        return Point2{4 * kPi * std::sin(8 * kPi * p.x) * y0, 4 * kPi * std::sin(8 * kPi * p.y) * x0};
    };
    e.hess = [](Point2 p) {
        const double x0 = sq(std::sin(4 * kPi * p.x));
        const double y0 = sq(std::sin(4 * kPi * p.y));
        const double x1 = 4 * kPi * std::sin(8 * kPi * p.x);
        const double y1 = 4 * kPi * std::sin(8 * kPi * p.y);
        const double x2 = 32 * kPi * kPi * std::cos(8 * kPi * p.x);
        const double y2 = 32 * kPi * kPi * std::cos(8 * kPi * p.y);
        return Hessian{x2 * y0, x1 * y1, x0 * y2};
    };
    e.f = [delta](Point2 p) {
        const double cx = sq(std::cos(4 * kPi * p.x));
        const double sx = sq(std::sin(4 * kPi * p.x));
        const double cy = sq(std::cos(4 * kPi * p.y));
        const double sy = sq(std::sin(4 * kPi * p.y));
        const double pi2 = kPi * kPi;
        return -2048 * pi2 * pi2 * delta * (cx - sy) - 32 * pi2 * (sy * (cx - sx) + sx * (cy - sy));
    };
    return e;
}

ExactSolution constant_source(double c) {
    ExactSolution e;
    e.name = "const:" + format_real(c);
    e.f = [c](Point2) { return c; };
    return e;
}

ExactSolution manufactured_test2() {
    ExactSolution e = constant_source(1.0);
    e.name = "test2";
    return e;
}

double ErrorReport::err_form() const { return std::sqrt(delta * err_box * err_box + err_grad * err_grad); }

ErrorReport compute_errors(const FeSpace& space, std::span<const double> global, const ExactSolution& exact,
                           double delta, int rule_degree) {
    if (!exact.has_exact) {
        throw Error("no exact solution for problem '" + exact.name + "'");
    }
    const Mesh& mesh = space.mesh();
    const QuadRule& rule = rule_for_degree(rule_degree);
    const int nt = mesh.num_triangles();
    // l2, grad, hessian, box squared integrals per triangle
    std::vector<std::array<double, 4>> parts(static_cast<std::size_t>(nt));
    parallel_for(0, nt, [&](int t) {
        const ElementBasis& basis = space.basis(t);
        const std::vector<double> local = space.local_values(t, global);
        const Eigen::VectorXd mono = monomial_coefficients(basis, local);
        const auto corners = mesh.corners(t);
        const double area = mesh.triangle(t).area;
        std::array<double, 4> acc{};
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2 p = barycentric_to_point(corners, rule.points[q]);
            const PolyValue uh = evaluate_monomials(basis, mono, p);
            const Point2 g = exact.grad(p);
            const Hessian hs = exact.hess(p);
            const double w = rule.weights[q] * area;
            const double e0 = exact.u(p) - uh.value;
            const double ex = g.x - uh.grad.x;
            const double ey = g.y - uh.grad.y;
            const double exx = hs.xx - uh.hess.xx;
            const double exy = hs.xy - uh.hess.xy;
            const double eyy = hs.yy - uh.hess.yy;
            acc[0] += w * e0 * e0;
            acc[1] += w * (ex * ex + ey * ey);
            acc[2] += w * (exx * exx + 2 * exy * exy + eyy * eyy);
            acc[3] += w * sq(exx - eyy);
        }
        parts[static_cast<std::size_t>(t)] = acc;
    });
    std::array<double, 4> sum{};
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < 4; ++i) {
            sum[i] += p[i];
        }
    }
    ErrorReport r;
    r.h = mesh.h();
    r.dofs = space.dof_map().num_free();
    r.delta = delta;
    r.err_l2 = std::sqrt(sum[0]);
    r.err_h1 = std::sqrt(sum[0] + sum[1]);
    r.err_h2_broken = std::sqrt(sum[0] + sum[1] + sum[2]);
    r.err_grad = std::sqrt(sum[1]);
    r.err_box = std::sqrt(sum[3]);
    r.err_energy = delta * r.err_box + r.err_grad;
    return r;
}

ErrorReport compute_errors_free(const FeSpace& space, std::span<const double> free_values, const ExactSolution& exact,
                                double delta, int rule_degree) {
    const std::vector<double> global = space.expand(free_values);
    return compute_errors(space, global, exact, delta, rule_degree);
}

std::array<double, kNormCount> norm_values(const ErrorReport& r) {
    return {r.err_l2, r.err_h1, r.err_h2_broken, r.err_energy};
}

double convergence_rate(double e0, double e1, double h0, double h1) {
    if (h0 == h1) {
        throw Error("equal h in convergence rate (h = " + format_real(h0) + ")");
    }
    return std::log(e0 / e1) / std::log(h0 / h1);
}

ConvergenceTable convergence_rates(std::vector<ErrorReport> reports) {
    if (reports.size() < 2) {
        throw Error("convergence rates need at least two refinement levels");
    }
    ConvergenceTable table;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    table.rates.push_back({nan, nan, nan, nan});
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const auto prev = norm_values(reports[i - 1]);
        const auto cur = norm_values(reports[i]);
        std::array<double, kNormCount> rate{};
        for (std::size_t k = 0; k < rate.size(); ++k) {
            rate[k] = convergence_rate(prev[k], cur[k], reports[i - 1].h, reports[i].h);
        }
        table.rates.push_back(rate);
    }
    table.reports = std::move(reports);
    return table;
}

DiscreteSolution solve_problem(const FeSpace& space, double delta, const SourceFunction& f,
                               const SolveOptions& options, int load_degree) {
    const SparseSystem system = assemble(space, delta, f, load_degree);
    SolveResult result = solve(system, options);
    DiscreteSolution s;
    s.global = space.expand(result.x);
    s.report = result.report;
    s.dofs = system.matrix.n;
    return s;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
    Point2 hi = mesh.vertex(0);
    lo_ = hi;
    for (const Point2& v : mesh.vertices()) {
        lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    const double span = std::max(hi.x - lo_.x, hi.y - lo_.y);
    const int per_side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()))));
    cell_ = span / per_side;
    if (!(cell_ > 0.0)) {
        cell_ = 1.0;
    }
    nx_ = static_cast<int>((hi.x - lo_.x) / cell_) + 1;
    ny_ = static_cast<int>((hi.y - lo_.y) / cell_) + 1;
    buckets_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto c = mesh.corners(t);
        const double x0 = std::min({c[0].x, c[1].x, c[2].x});
        const double x1 = std::max({c[0].x, c[1].x, c[2].x});
        const double y0 = std::min({c[0].y, c[1].y, c[2].y});
        const double y1 = std::max({c[0].y, c[1].y, c[2].y});
        const int i0 = std::clamp(static_cast<int>((x0 - lo_.x) / cell_), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>((x1 - lo_.x) / cell_), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>((y0 - lo_.y) / cell_), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>((y1 - lo_.y) / cell_), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j) {
            for (int i = i0; i <= i1; ++i) {
                buckets_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i)]
                    .push_back(t);
            }
        }
    }
}

int PointLocator::locate(Point2 p) const {
    const int i = static_cast<int>(std::floor((p.x - lo_.x) / cell_));
    const int j = static_cast<int>(std::floor((p.y - lo_.y) / cell_));
    if (i < -1 || j < -1 || i > nx_ || j > ny_) {
        return -1;
    }
    int best = -1;
    double best_min = -std::numeric_limits<double>::infinity();
    const std::size_t bi = static_cast<std::size_t>(std::clamp(i, 0, nx_ - 1));
    const std::size_t bj = static_cast<std::size_t>(std::clamp(j, 0, ny_ - 1));
    for (int t : buckets_[bj * static_cast<std::size_t>(nx_) + bi]) {
        const auto c = mesh_->corners(t);
        const double area = signed_area(c[0], c[1], c[2]);
        const double l0 = signed_area(p, c[1], c[2]) / area;
        const double l1 = signed_area(c[0], p, c[2]) / area;
        const double l2 = 1.0 - l0 - l1;
        const double m = std::min({l0, l1, l2});
        if (m > best_min) {
            best_min = m;
            best = t;
        }
    }
    return best_min >= -1e-10 ? best : -1;
}

SampleGrid sample_solution(const FeSpace& space, std::span<const double> global, int m) {
    if (m < 1) {
        throw Error("sample grid needs at least one interval per side");
    }
    const Mesh& mesh = space.mesh();
    Point2 lo = mesh.vertex(0);
    Point2 hi = lo;
    for (const Point2& v : mesh.vertices()) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    const PointLocator locator(mesh);
    SampleGrid g;
    g.m = m;
    const auto count = static_cast<std::size_t>(m + 1) * static_cast<std::size_t>(m + 1);
    g.x.resize(count);
    g.y.resize(count);
    g.value.resize(count);
    parallel_for(0, m + 1, [&](int j) {
        for (int i = 0; i <= m; ++i) {
            const auto k = static_cast<std::size_t>(j) * static_cast<std::size_t>(m + 1) + static_cast<std::size_t>(i);
            const Point2 p{lo.x + (hi.x - lo.x) * i / m, lo.y + (hi.y - lo.y) * j / m};
            g.x[k] = p.x;
            g.y[k] = p.y;
            const int t = locator.locate(p);
            g.value[k] = t < 0 ? std::numeric_limits<double>::quiet_NaN() : space.evaluate(t, global, p).value;
        }
    });
    return g;
}

double relative_grid_difference(const SampleGrid& a, const SampleGrid& b) {
    if (a.value.size() != b.value.size()) {
        throw Error("sample grids differ in size");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < a.value.size(); ++k) {
        if (std::isnan(a.value[k]) || std::isnan(b.value[k])) {
            continue;
        }
        num += sq(a.value[k] - b.value[k]);
        den += sq(b.value[k]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace biwave
