#include "biwave/element.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "biwave/error.hpp"

namespace biwave {

namespace {

struct LabeledTriangle {
    std::array<Point2, 3> a;  // a1, a2, a3
    std::array<int, 3> vertex;
    std::array<int, 3> edge;  // e_i opposite a_i
};

LabeledTriangle labeled(const Mesh& mesh, int triangle_id) {
    const Triangle& tri = mesh.triangle(triangle_id);
    if (!tri.labels) {
        throw NotAdmissibleError("triangle " + std::to_string(triangle_id) + " has " +
                                 std::to_string(tri.type_i_edges) +
                                 " type I edges; the conforming elements need exactly two");
    }
    LabeledTriangle t;
    t.vertex = tri.labels->vertices;
    t.edge = tri.labels->edges;
    for (int i = 0; i < 3; ++i) {
        t.a[static_cast<std::size_t>(i)] = mesh.vertex(t.vertex[static_cast<std::size_t>(i)]);
    }
    return t;
}

DofSpec point_value(Point2 p, DofOwner::Kind kind, int id, int slot = 0) {
    DofSpec d;
    d.kind = DofKind::PointValue;
    d.location = p;
    d.owner = {kind, id};
    d.slot = slot;
    return d;
}

/// Slot of a point on an edge: 0 if it lies in the half nearer the lower vertex id.
int edge_slot(const Mesh& mesh, int edge_id, Point2 p) {
    const Edge& e = mesh.edge(edge_id);
    const Point2 v0 = mesh.vertex(e.vertex_ids[0]);
    return dot(p - v0, e.frame.tau) < 0.5 * distance(v0, mesh.vertex(e.vertex_ids[1])) ? 0 : 1;
}

DofSpec nbar_derivative(const Mesh& mesh, const LabeledTriangle& t, Point2 p, int slot) {
    const Edge& e3 = mesh.edge(t.edge[2]);
    DofSpec d;
    d.kind = DofKind::NbarDeriv;
    d.location = p;
    d.direction = e3.frame.nbar;
    d.owner = {DofOwner::Kind::Edge, t.edge[2]};
    // The global normal points outward iff it points away from the opposite vertex a3.
    d.share_sign = dot(e3.frame.n, e3.midpoint - t.a[2]) > 0.0 ? 1 : -1;
    d.slot = slot;
    return d;
}

void push_directional(std::vector<DofSpec>& out, const LabeledTriangle& t) {
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (j == i) {
                continue;
            }
            DofSpec d;
            d.kind = DofKind::DirectionalDeriv;
            d.location = t.a[static_cast<std::size_t>(i)];
            d.direction = t.a[static_cast<std::size_t>(j)] - t.a[static_cast<std::size_t>(i)];
            d.owner = {DofOwner::Kind::Vertex, t.vertex[static_cast<std::size_t>(i)]};
            out.push_back(d);
        }
    }
}

/// Exponents (a, b) of the monomials of total degree <= order.
std::vector<std::array<int, 2>> monomial_exponents(int order) {
    std::vector<std::array<int, 2>> e;
    for (int d = 0; d <= order; ++d) {
        for (int a = d; a >= 0; --a) {
            e.push_back({a, d - a});
        }
    }
    return e;
}

/// Value and derivatives of every scaled monomial at p.
void tabulate_monomials(int order, Point2 center, double scale, Point2 p, std::vector<PolyValue>& out) {
    const double xi = (p.x - center.x) / scale;
    const double eta = (p.y - center.y) / scale;
    std::array<double, 8> px{};
    std::array<double, 8> py{};
    px[0] = py[0] = 1.0;
    for (int k = 1; k <= order; ++k) {
        px[static_cast<std::size_t>(k)] = px[static_cast<std::size_t>(k - 1)] * xi;
        py[static_cast<std::size_t>(k)] = py[static_cast<std::size_t>(k - 1)] * eta;
    }
    auto pw = [](const std::array<double, 8>& p, int k) { return k < 0 ? 0.0 : p[static_cast<std::size_t>(k)]; };
    const double s1 = 1.0 / scale;
    const double s2 = s1 * s1;
    out.clear();
    for (const auto& [a, b] : monomial_exponents(order)) {
        PolyValue v;
        v.value = pw(px, a) * pw(py, b);
        v.grad = {a * pw(px, a - 1) * pw(py, b) * s1, b * pw(px, a) * pw(py, b - 1) * s1};
        v.hess.xx = a * (a - 1) * pw(px, a - 2) * pw(py, b) * s2;
        v.hess.xy = a * b * pw(px, a - 1) * pw(py, b - 1) * s2;
        v.hess.yy = b * (b - 1) * pw(px, a) * pw(py, b - 2) * s2;
        out.push_back(v);
    }
}

PolyValue combine(const std::vector<PolyValue>& monomials, const Eigen::Ref<const Eigen::VectorXd>& c) {
    PolyValue r;
    for (std::size_t j = 0; j < monomials.size(); ++j) {
        const double w = c(static_cast<Eigen::Index>(j));
        const PolyValue& m = monomials[j];
        r.value += w * m.value;
        r.grad = r.grad + w * m.grad;
        r.hess.xx += w * m.hess.xx;
        r.hess.xy += w * m.hess.xy;
        r.hess.yy += w * m.hess.yy;
    }
    return r;
}

}  // namespace

std::vector<DofSpec> dof_set_cubic(const Mesh& mesh, int triangle_id) {
    const LabeledTriangle t = labeled(mesh, triangle_id);
    using K = DofOwner::Kind;
    std::vector<DofSpec> d;
    d.reserve(10);
    for (int i = 0; i < 3; ++i) {
        d.push_back(point_value(t.a[static_cast<std::size_t>(i)], K::Vertex, t.vertex[static_cast<std::size_t>(i)]));
    }
    d.push_back(point_value(0.5 * (t.a[0] + t.a[2]), K::Edge, t.edge[1]));
    d.push_back(point_value(0.5 * (t.a[1] + t.a[2]), K::Edge, t.edge[0]));
    push_directional(d, t);
    d.push_back(nbar_derivative(mesh, t, 0.5 * (t.a[0] + t.a[1]), 0));
    return d;
}

std::vector<DofSpec> dof_set_quartic(const Mesh& mesh, int triangle_id) {
    const LabeledTriangle t = labeled(mesh, triangle_id);
    using K = DofOwner::Kind;
    const auto& a = t.a;
    std::vector<DofSpec> d;
    d.reserve(15);
    for (int i = 0; i < 3; ++i) {
        d.push_back(point_value(a[static_cast<std::size_t>(i)], K::Vertex, t.vertex[static_cast<std::size_t>(i)]));
    }
    for (int i = 0; i < 2; ++i) {
        const Point2 ai = a[static_cast<std::size_t>(i)];
        const int edge = t.edge[static_cast<std::size_t>(1 - i)];  // a_i a_3 is e_2 for i = 1, e_1 for i = 2
        const Point2 near = (1.0 / 3.0) * (2.0 * ai + a[2]);
        const Point2 far = (1.0 / 3.0) * (ai + 2.0 * a[2]);
        d.push_back(point_value(near, K::Edge, edge, edge_slot(mesh, edge, near)));
        d.push_back(point_value(far, K::Edge, edge, edge_slot(mesh, edge, far)));
    }
    d.push_back(point_value(0.5 * (a[0] + a[1]), K::Edge, t.edge[2]));
    push_directional(d, t);
    const Point2 a112 = (1.0 / 3.0) * (2.0 * a[0] + a[1]);
    const Point2 a122 = (1.0 / 3.0) * (a[0] + 2.0 * a[1]);
    d.push_back(nbar_derivative(mesh, t, a112, edge_slot(mesh, t.edge[2], a112)));
    d.push_back(nbar_derivative(mesh, t, a122, edge_slot(mesh, t.edge[2], a122)));
    d.push_back(point_value((1.0 / 3.0) * (a[0] + a[1] + a[2]), K::Interior, triangle_id));
    return d;
}

std::vector<DofSpec> dof_set(const Mesh& mesh, int triangle_id, int order) {
    switch (order) {
        case 3:
            return dof_set_cubic(mesh, triangle_id);
        case 4:
            return dof_set_quartic(mesh, triangle_id);
        default:
            throw Error("element order must be 3 or 4, got " + std::to_string(order));
    }
}

double apply_functional(const DofSpec& dof, const PolyValue& v) {
    switch (dof.kind) {
        case DofKind::PointValue:
            return v.value;
        case DofKind::DirectionalDeriv:
            return dot(v.grad, dof.direction);
        case DofKind::NbarDeriv:
            return dof.share_sign * dot(v.grad, dof.direction);
    }
    return 0.0;
}

void ElementBasis::tabulate(Point2 p, std::vector<PolyValue>& out) const {
    thread_local std::vector<PolyValue> monomials;
    tabulate_monomials(order, center, scale, p, monomials);
    out.resize(dofs.size());
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
        out[static_cast<std::size_t>(j)] = combine(monomials, coeffs.col(j));
    }
}

ElementBasis build_basis(const Mesh& mesh, int triangle_id, std::vector<DofSpec> dofs) {
    const Triangle& tri = mesh.triangle(triangle_id);
    const int n = static_cast<int>(dofs.size());
    int order = 0;
    while (local_dof_count(order) < n) {
        ++order;
    }
    if (local_dof_count(order) != n) {
        throw Error("DOF count " + std::to_string(n) + " is not the dimension of a polynomial space");
    }

    ElementBasis basis;
    basis.order = order;
    basis.triangle_id = triangle_id;
    const auto c = mesh.corners(triangle_id);
    basis.center = (1.0 / 3.0) * (c[0] + c[1] + c[2]);
    basis.scale = tri.diameter;

    Eigen::MatrixXd dof_matrix(n, n);
    Eigen::VectorXd row_scale(n);
    std::vector<PolyValue> monomials;
    for (int i = 0; i < n; ++i) {
        const DofSpec& d = dofs[static_cast<std::size_t>(i)];
        row_scale(i) = d.kind == DofKind::NbarDeriv ? basis.scale : 1.0;
        tabulate_monomials(order, basis.center, basis.scale, d.location, monomials);
        for (int j = 0; j < n; ++j) {
            dof_matrix(i, j) = row_scale(i) * apply_functional(d, monomials[static_cast<std::size_t>(j)]);
        }
    }

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(dof_matrix);
    if (!lu.isInvertible()) {
        throw NotUnisolventError(triangle_id, std::numeric_limits<double>::infinity());
    }
    const Eigen::MatrixXd inverse = lu.inverse();
    const double cond = dof_matrix.cwiseAbs().colwise().sum().maxCoeff() * inverse.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(cond) || cond > kMaxDofCondition) {
        throw NotUnisolventError(triangle_id, cond);
    }
    basis.cond_estimate = cond;
    basis.coeffs = inverse * row_scale.asDiagonal();
    basis.dofs = std::move(dofs);
    return basis;
}

ElementBasis build_basis(const Mesh& mesh, int triangle_id, int order) {
    return build_basis(mesh, triangle_id, dof_set(mesh, triangle_id, order));
}

Eigen::VectorXd monomial_coefficients(const ElementBasis& basis, std::span<const double> local_coeffs) {
    const Eigen::Map<const Eigen::VectorXd> u(local_coeffs.data(), static_cast<Eigen::Index>(local_coeffs.size()));
    return basis.coeffs * u;
}

PolyValue evaluate_monomials(const ElementBasis& basis, const Eigen::VectorXd& monomial_coeffs, Point2 p) {
    thread_local std::vector<PolyValue> monomials;
    tabulate_monomials(basis.order, basis.center, basis.scale, p, monomials);
    return combine(monomials, monomial_coeffs);
}

PolyValue evaluate(const ElementBasis& basis, std::span<const double> local_coeffs, Point2 p) {
    return evaluate_monomials(basis, monomial_coefficients(basis, local_coeffs), p);
}

std::vector<double> interpolate(std::span<const DofSpec> dofs, const SmoothFunction& f) {
    std::vector<double> out;
    out.reserve(dofs.size());
    for (const DofSpec& d : dofs) {
        PolyValue v;
        if (d.kind == DofKind::PointValue) {
            v.value = f.value(d.location);
        } else {
            v.grad = f.gradient(d.location);
        }
        out.push_back(apply_functional(d, v));
    }
    return out;
}

std::vector<double> interpolate(const Mesh& mesh, int triangle_id, int order, const SmoothFunction& f) {
    return interpolate(dof_set(mesh, triangle_id, order), f);
}

}  // namespace biwave
