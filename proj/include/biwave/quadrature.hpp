#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "biwave/geometry.hpp"

namespace biwave {

/// Fully symmetric triangle rule. Points are barycentric triples, weights sum
/// to one and are scaled by the triangle area at the use site.
struct QuadRule {
    int degree = 0;
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return weights.size(); }
};

/// Lowest-order tabulated rule with exactness >= d, 1 <= d <= 14.
/// All weights are positive and all points interior. Throws std::out_of_range.
const QuadRule& rule_for_degree(int d);

/// Rule exactness used for element matrices of an order-k element.
inline constexpr int matrix_rule_degree(int order) { return 2 * order; }
/// Rule exactness used for load vectors and error norms.
inline constexpr int kLoadRuleDegree = 12;
/// Six-point rule for load and norms of the reference-table protocol. Errors
/// measured this way differ from the accurate ones by up to ~15% on Test 1.
inline constexpr int kReferenceRuleDegree = 4;

inline Point2 barycentric_to_point(const std::array<Point2, 3>& tri, const std::array<double, 3>& l) {
    return {l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x, l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y};
}

/// Area-weighted sum of f over the triangle.
template <class F>
double integrate(const QuadRule& rule, const std::array<Point2, 3>& tri, F&& f) {
    const double area = std::abs(signed_area(tri[0], tri[1], tri[2]));
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        sum += rule.weights[q] * f(barycentric_to_point(tri, rule.points[q]));
    }
    return area * sum;
}

}  // namespace biwave
