#include "biwave/quadrature.hpp"

#include <span>
#include <stdexcept>
#include <string>

namespace biwave {

namespace {

struct RawPoint {
    double l0, l1, l2, w;
};

#include "quadrature_tables.inc"

QuadRule make_rule(int degree, std::span<const RawPoint> raw) {
    QuadRule rule;
    rule.degree = degree;
    for (const RawPoint& p : raw) {
        rule.points.push_back({p.l0, p.l1, p.l2});
        rule.weights.push_back(p.w);
    }
    return rule;
}

const std::array<QuadRule, 12>& tabulated() {
    static const std::array<QuadRule, 12> rules{
        make_rule(1, kDegree1),   make_rule(2, kDegree2),   make_rule(3, kDegree3),   make_rule(4, kDegree4),
        make_rule(5, kDegree5),   make_rule(6, kDegree6),   make_rule(7, kDegree7),   make_rule(8, kDegree8),
        make_rule(9, kDegree9),   make_rule(10, kDegree10), make_rule(12, kDegree12), make_rule(14, kDegree14),
    };
    return rules;
}

}  // namespace

const QuadRule& rule_for_degree(int d) {
    if (d < 1 || d > 14) {
        throw std::out_of_range("quadrature degree " + std::to_string(d) + " outside [1, 14]");
    }
    for (const QuadRule& rule : tabulated()) {
        if (rule.degree >= d) {
            return rule;
        }
    }
    throw std::out_of_range("no quadrature rule for degree " + std::to_string(d));
}

}  // namespace biwave
