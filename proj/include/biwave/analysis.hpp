#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "biwave/assembly.hpp"
#include "biwave/solver.hpp"

namespace biwave {

/// Source term and, when known, the exact solution with its derivatives.
struct ExactSolution {
    std::string name;
    bool has_exact = false;
    bool delta_dependent = false;
    double delta = 0.0;
    std::function<double(Point2)> u;
    std::function<Point2(Point2)> grad;
    std::function<Hessian(Point2)> hess;
    SourceFunction f;

    [[nodiscard]] SmoothFunction smooth() const { return {u, grad}; }
};

/// u = sin^2(4 pi x) sin^2(4 pi y) on the unit square, f = delta box^2 u - lap u.
ExactSolution manufactured_test1(double delta);
/// f = 1, no exact solution.
ExactSolution manufactured_test2();
/// f = c, no exact solution.
ExactSolution constant_source(double c);

struct ErrorReport {
    double h = 0.0;
    int dofs = 0;
    double delta = 0.0;
    double err_l2 = 0.0;
    double err_h1 = 0.0;          // full H1 norm
    double err_h2_broken = 0.0;   // sqrt(sum_T ||e||^2_{H2(T)}), full norm
    double err_energy = 0.0;      // delta ||box e|| + ||grad e||, the tabulated energy column
    double err_box = 0.0;         // ||box e||, broken
    double err_grad = 0.0;        // ||grad e||

    /// sqrt(delta ||box e||^2 + ||grad e||^2), the norm induced by the bilinear form.
    [[nodiscard]] double err_form() const;
};

/// Errors of the discrete function (values over all global slots) against the
/// exact solution, integrated with the rule of exactness rule_degree.
/// Throws Error when the problem has no exact solution.
ErrorReport compute_errors(const FeSpace& space, std::span<const double> global, const ExactSolution& exact,
                           double delta, int rule_degree = kLoadRuleDegree);

/// Same, for a discrete function given as free unknowns.
ErrorReport compute_errors_free(const FeSpace& space, std::span<const double> free_values, const ExactSolution& exact,
                                double delta, int rule_degree = kLoadRuleDegree);

inline constexpr int kNormCount = 4;  // L2, H1, broken H2, energy

struct ConvergenceTable {
    std::vector<ErrorReport> reports;
    /// rates[i] compares reports[i-1] and reports[i]; rates[0] is NaN.
    std::vector<std::array<double, kNormCount>> rates;
};

std::array<double, kNormCount> norm_values(const ErrorReport& r);

/// ln(e0/e1) / ln(h0/h1).
double convergence_rate(double e0, double e1, double h0, double h1);

/// Throws Error with fewer than two reports or consecutive equal h.
ConvergenceTable convergence_rates(std::vector<ErrorReport> reports);

struct DiscreteSolution {
    std::vector<double> global;  // all slots, constrained ones zero
    SolveReport report;
    int dofs = 0;
};

/// Assembles and solves the clamped problem on the space.
DiscreteSolution solve_problem(const FeSpace& space, double delta, const SourceFunction& f,
                               const SolveOptions& options = {}, int load_degree = kLoadRuleDegree);

/// Finds the triangle containing a point through a bucket grid.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh);

    /// Triangle id, or -1 when the point lies outside the mesh.
    [[nodiscard]] int locate(Point2 p) const;

private:
    const Mesh* mesh_;
    Point2 lo_;
    double cell_ = 1.0;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

/// Values of the discrete solution on a (m+1) x (m+1) grid spanning the mesh
/// bounding box, row-major in y then x. Points outside the mesh are NaN.
struct SampleGrid {
    int m = 0;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> value;
};

SampleGrid sample_solution(const FeSpace& space, std::span<const double> global, int m);

/// sqrt(sum (a-b)^2 / sum b^2) over points defined in both grids.
double relative_grid_difference(const SampleGrid& a, const SampleGrid& b);

}  // namespace biwave
