#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "biwave/geometry.hpp"
#include "biwave/mesh.hpp"

namespace biwave {

/// Condition estimates of the scaled DOF matrix above this are rejected.
inline constexpr double kMaxDofCondition = 1e12;

enum class DofKind { PointValue, DirectionalDeriv, NbarDeriv };

/// Mesh entity through which a degree of freedom is shared.
struct DofOwner {
    enum class Kind { Vertex, Edge, Interior };
    Kind kind = Kind::Vertex;
    int id = -1;
};

/// One local degree-of-freedom functional.
///
/// PointValue: v(location). DirectionalDeriv: grad v(location) . direction, with
/// the unnormalized direction a_j - a_i. NbarDeriv: share_sign * grad v(location) . direction,
/// where direction is the global nbar of the owning edge, so the local functional
/// is the derivative along the triangle's own (outward) nbar.
struct DofSpec {
    DofKind kind = DofKind::PointValue;
    Point2 location;
    Point2 direction;
    DofOwner owner;
    int share_sign = 1;
    int slot = 0;  // position among the owner's slots of this kind, ordered along the edge tangent
};

struct Hessian {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;
};

/// Value, gradient and Hessian of a polynomial at a point.
struct PolyValue {
    double value = 0.0;
    Point2 grad;
    Hessian hess;

    /// Wave operator d_xx - d_yy.
    [[nodiscard]] double box() const { return hess.xx - hess.yy; }
    [[nodiscard]] double lap() const { return hess.xx + hess.yy; }
};

/// Value and gradient evaluators of a smooth function.
struct SmoothFunction {
    std::function<double(Point2)> value;
    std::function<Point2(Point2)> gradient;
};

/// Number of local degrees of freedom (= dim P_k) of the order-k element.
inline constexpr int local_dof_count(int order) { return (order + 1) * (order + 2) / 2; }

/// Ten functionals of the cubic element, in the order
/// v(a1), v(a2), v(a3), v(a13), v(a23), D_{a1->a2}, D_{a1->a3}, D_{a2->a1}, D_{a2->a3}, d_nbar v(b3)
/// where a13, a23 are the midpoints of the type I edges.
/// Throws NotAdmissibleError if the triangle lacks two type I edges.
std::vector<DofSpec> dof_set_cubic(const Mesh& mesh, int triangle_id);

/// Fifteen functionals of the quartic element, in the order
/// v(a1), v(a2), v(a3), v(a113), v(a133), v(a223), v(a233), v(b3),
/// D_{a1->a2}, D_{a1->a3}, D_{a2->a1}, D_{a2->a3}, d_nbar v(a112), d_nbar v(a122), v(a123).
std::vector<DofSpec> dof_set_quartic(const Mesh& mesh, int triangle_id);

std::vector<DofSpec> dof_set(const Mesh& mesh, int triangle_id, int order);

/// Nodal basis of P_k on one physical triangle. Column j of `coeffs` holds the
/// coefficients of basis function j in the monomials ((x-c)/s)^a ((y-c)/s)^b,
/// c the centroid and s the triangle diameter, ordered by total degree.
struct ElementBasis {
    int order = 3;
    int triangle_id = -1;
    Point2 center;
    double scale = 1.0;
    Eigen::MatrixXd coeffs;
    std::vector<DofSpec> dofs;
    double cond_estimate = 0.0;

    [[nodiscard]] int size() const { return static_cast<int>(dofs.size()); }

    /// Value, gradient and Hessian of every basis function at p.
    void tabulate(Point2 p, std::vector<PolyValue>& out) const;
};

/// Solves the generalized Vandermonde system. Derivative functionals along unit
/// directions are scaled by the diameter so the condition estimate is scale free.
/// Throws NotUnisolventError when the estimate exceeds kMaxDofCondition.
ElementBasis build_basis(const Mesh& mesh, int triangle_id, std::vector<DofSpec> dofs);
ElementBasis build_basis(const Mesh& mesh, int triangle_id, int order);

/// Monomial coefficients of the local polynomial with the given DOF values.
Eigen::VectorXd monomial_coefficients(const ElementBasis& basis, std::span<const double> local_coeffs);

PolyValue evaluate(const ElementBasis& basis, std::span<const double> local_coeffs, Point2 p);
/// Evaluates a polynomial given directly by its monomial coefficients.
PolyValue evaluate_monomials(const ElementBasis& basis, const Eigen::VectorXd& monomial_coeffs, Point2 p);

/// Applies one DOF functional to a polynomial (given by its local evaluation).
double apply_functional(const DofSpec& dof, const PolyValue& at_location);

/// Applies every functional of `dofs` to f: the DOF values of the interpolant.
std::vector<double> interpolate(std::span<const DofSpec> dofs, const SmoothFunction& f);
std::vector<double> interpolate(const Mesh& mesh, int triangle_id, int order, const SmoothFunction& f);

}  // namespace biwave
