#include "biwave/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "biwave/error.hpp"
#include "biwave/parallel.hpp"

namespace biwave {

namespace {

void check_type_i_neighbours(const Mesh& mesh) {
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edge(e);
        if (edge.kind != EdgeKind::TypeI || edge.boundary) {
            continue;
        }
        const int t0 = edge.triangle_ids[0];
        const int t1 = edge.triangle_ids[1];
        const int apex0 = mesh.triangle(t0).labels->vertices[2];
        const int apex1 = mesh.triangle(t1).labels->vertices[2];
        if (apex0 != apex1) {
            throw NotAdmissibleError("type I edge (" + std::to_string(edge.vertex_ids[0]) + ", " +
                                     std::to_string(edge.vertex_ids[1]) + ") joins triangles " + std::to_string(t0) +
                                     " and " + std::to_string(t1) +
                                     " whose right-angle vertices differ; the traces would not match");
        }
    }
}

/// A boundary vertex gradient is fixed when the tangents and nbar directions of
/// its boundary edges span the plane.
bool boundary_gradient_determined(const Mesh& mesh, const std::vector<std::vector<int>>& boundary_edges_at, int v) {
    std::vector<Point2> dirs;
    for (int e : boundary_edges_at[static_cast<std::size_t>(v)]) {
        dirs.push_back(mesh.edge(e).frame.tau);
        dirs.push_back(mesh.edge(e).frame.nbar);
    }
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        for (std::size_t j = i + 1; j < dirs.size(); ++j) {
            if (std::abs(cross(dirs[i], dirs[j])) > 1e-8) {
                return true;
            }
        }
    }
    return false;
}

struct ElementContribution {
    std::vector<int> slots;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd load;
};

ElementContribution element_contribution(const FeSpace& space, int t, double delta, const SourceFunction* f,
                                         int load_degree) {
    const GlobalDofMap& map = space.dof_map();
    const ElementBasis& basis = space.basis(t);
    const auto corners = space.mesh().corners(t);
    const Eigen::MatrixXd m = local_matrix(basis, corners, delta, rule_for_degree(matrix_rule_degree(space.order())));

    ElementContribution c;
    c.slots = map.triangle_slots(t);
    const auto terms = map.terms(t);
    Eigen::MatrixXd transfer = Eigen::MatrixXd::Zero(basis.size(), static_cast<Eigen::Index>(c.slots.size()));
    for (int i = 0; i < basis.size(); ++i) {
        for (const LocalTerm& term : terms[static_cast<std::size_t>(i)]) {
            if (term.slot < 0) {
                continue;
            }
            const auto pos = std::lower_bound(c.slots.begin(), c.slots.end(), term.slot) - c.slots.begin();
            transfer(i, pos) += term.weight;
        }
    }
    Eigen::MatrixXd g = transfer.transpose() * m * transfer;
    // symmetric to the last bit
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            g(j, i) = g(i, j);
        }
    }
    c.matrix = std::move(g);
    if (f != nullptr) {
        c.load = transfer.transpose() * local_load(basis, corners, *f, rule_for_degree(load_degree));
    }
    return c;
}

/// Assembles rows/columns given by row_of_slot (-1 drops the slot).
void assemble_into(const FeSpace& space, double delta, const SourceFunction* f, int load_degree,
                   const std::vector<int>& row_of_slot, int n, SymmetricCsr& a, std::vector<double>* rhs) {
    const Mesh& mesh = space.mesh();
    const int nt = mesh.num_triangles();

    std::vector<std::vector<int>> pattern(static_cast<std::size_t>(n));
    for (int t = 0; t < nt; ++t) {
        std::vector<int> rows;
        for (int s : space.dof_map().triangle_slots(t)) {
            const int r = row_of_slot[static_cast<std::size_t>(s)];
            if (r >= 0) {
                rows.push_back(r);
            }
        }
        for (int r : rows) {
            for (int c : rows) {
                if (c <= r) {
                    pattern[static_cast<std::size_t>(r)].push_back(c);
                }
            }
        }
    }
    a = SymmetricCsr{};
    a.n = n;
    a.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int r = 0; r < n; ++r) {
        auto& cols = pattern[static_cast<std::size_t>(r)];
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        a.row_ptr[static_cast<std::size_t>(r) + 1] = a.row_ptr[static_cast<std::size_t>(r)] + static_cast<int>(cols.size());
    }
    a.col.reserve(static_cast<std::size_t>(a.row_ptr.back()));
    for (auto& cols : pattern) {
        a.col.insert(a.col.end(), cols.begin(), cols.end());
        std::vector<int>().swap(cols);
    }
    a.val.assign(a.col.size(), 0.0);
    if (rhs != nullptr) {
        rhs->assign(static_cast<std::size_t>(n), 0.0);
    }

    // Element work in parallel, accumulation serial in triangle order.
    constexpr int kChunk = 2048;
    std::vector<ElementContribution> chunk;
    for (int first = 0; first < nt; first += kChunk) {
        const int last = std::min(nt, first + kChunk);
        chunk.assign(static_cast<std::size_t>(last - first), {});
        parallel_for(first, last, [&](int t) {
            chunk[static_cast<std::size_t>(t - first)] = element_contribution(space, t, delta, f, load_degree);
        });
        for (const ElementContribution& c : chunk) {
            const auto m = static_cast<Eigen::Index>(c.slots.size());
            for (Eigen::Index i = 0; i < m; ++i) {
                const int r = row_of_slot[static_cast<std::size_t>(c.slots[static_cast<std::size_t>(i)])];
                if (r < 0) {
                    continue;
                }
                if (rhs != nullptr) {
                    (*rhs)[static_cast<std::size_t>(r)] += c.load(i);
                }
                const auto row_begin = a.col.begin() + a.row_ptr[static_cast<std::size_t>(r)];
                const auto row_end = a.col.begin() + a.row_ptr[static_cast<std::size_t>(r) + 1];
                for (Eigen::Index j = 0; j < m; ++j) {
                    const int cc = row_of_slot[static_cast<std::size_t>(c.slots[static_cast<std::size_t>(j)])];
                    if (cc < 0 || cc > r) {
                        continue;
                    }
                    const auto pos = std::lower_bound(row_begin, row_end, cc) - a.col.begin();
                    a.val[static_cast<std::size_t>(pos)] += c.matrix(i, j);
                }
            }
        }
    }
}

}  // namespace

std::vector<int> GlobalDofMap::triangle_slots(int triangle_id) const {
    std::vector<int> s;
    for (const LocalDofTerms& terms : this->terms(triangle_id)) {
        for (const LocalTerm& t : terms) {
            if (t.slot >= 0) {
                s.push_back(t.slot);
            }
        }
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

GlobalDofMap build_dof_map(const Mesh& mesh, int order) {
    if (order != 3 && order != 4) {
        throw Error("element order must be 3 or 4, got " + std::to_string(order));
    }
    if (!mesh.admissible()) {
        throw NotAdmissibleError("mesh not admissible: " + mesh.inadmissibility_reason() +
                                 "; the cubic and quartic conforming elements require two type I edges per triangle");
    }
    check_type_i_neighbours(mesh);

    GlobalDofMap map;
    map.order_ = order;
    map.local_size_ = local_dof_count(order);
    const int nv = mesh.num_vertices();
    const int ne = mesh.num_edges();
    const int nt = mesh.num_triangles();

    std::vector<char> has_gradient(static_cast<std::size_t>(nv), 0);
    for (const Triangle& tri : mesh.triangles()) {
        has_gradient[static_cast<std::size_t>(tri.labels->vertices[0])] = 1;
        has_gradient[static_cast<std::size_t>(tri.labels->vertices[1])] = 1;
    }

    for (int v = 0; v < nv; ++v) {
        map.slots_.push_back({SlotKind::VertexValue, v, 0});
    }
    map.gradient_slot_.assign(static_cast<std::size_t>(nv), -1);
    for (int v = 0; v < nv; ++v) {
        if (has_gradient[static_cast<std::size_t>(v)] != 0) {
            map.gradient_slot_[static_cast<std::size_t>(v)] = map.num_slots();
            map.slots_.push_back({SlotKind::VertexGradX, v, 0});
            map.slots_.push_back({SlotKind::VertexGradY, v, 1});
        }
    }
    const int per_edge = order - 2;
    std::vector<int> edge_value_first(static_cast<std::size_t>(ne), -1);
    std::vector<int> edge_nbar_first(static_cast<std::size_t>(ne), -1);
    for (int e = 0; e < ne; ++e) {
        if (mesh.edge(e).kind == EdgeKind::TypeI) {
            edge_value_first[static_cast<std::size_t>(e)] = map.num_slots();
            for (int k = 0; k < per_edge; ++k) {
                map.slots_.push_back({SlotKind::EdgeValue, e, k});
            }
        }
    }
    for (int e = 0; e < ne; ++e) {
        if (mesh.edge(e).kind == EdgeKind::TypeII) {
            edge_nbar_first[static_cast<std::size_t>(e)] = map.num_slots();
            for (int k = 0; k < per_edge; ++k) {
                map.slots_.push_back({SlotKind::EdgeNbar, e, k});
            }
        }
    }
    if (order == 4) {
        for (int e = 0; e < ne; ++e) {
            if (mesh.edge(e).kind == EdgeKind::TypeII) {
                edge_value_first[static_cast<std::size_t>(e)] = map.num_slots();
                map.slots_.push_back({SlotKind::EdgeValue, e, 0});
            }
        }
    }
    int interior_first = map.num_slots();
    if (order == 4) {
        for (int t = 0; t < nt; ++t) {
            map.slots_.push_back({SlotKind::InteriorValue, t, 0});
        }
    }

    map.terms_.assign(static_cast<std::size_t>(nt) * static_cast<std::size_t>(map.local_size_), LocalDofTerms{});
    for (int t = 0; t < nt; ++t) {
        const std::vector<DofSpec> dofs = dof_set(mesh, t, order);
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const DofSpec& d = dofs[i];
            LocalDofTerms& out = map.terms_[static_cast<std::size_t>(t) * static_cast<std::size_t>(map.local_size_) + i];
            const int id = d.owner.id;
            switch (d.kind) {
                case DofKind::PointValue:
                    if (d.owner.kind == DofOwner::Kind::Vertex) {
                        out[0] = {id, 1.0};
                    } else if (d.owner.kind == DofOwner::Kind::Edge) {
                        out[0] = {edge_value_first[static_cast<std::size_t>(id)] + d.slot, 1.0};
                    } else {
                        out[0] = {interior_first + id, 1.0};
                    }
                    break;
                case DofKind::DirectionalDeriv: {
                    const int g = map.gradient_slot_[static_cast<std::size_t>(id)];
                    out[0] = {g, d.direction.x};
                    out[1] = {g + 1, d.direction.y};
                    break;
                }
                case DofKind::NbarDeriv:
                    out[0] = {edge_nbar_first[static_cast<std::size_t>(id)] + d.slot, static_cast<double>(d.share_sign)};
                    break;
            }
        }
    }

    std::vector<std::vector<int>> boundary_edges_at(static_cast<std::size_t>(nv));
    std::vector<char> fixed(map.slots_.size(), 0);
    for (int e = 0; e < ne; ++e) {
        const Edge& edge = mesh.edge(e);
        if (!edge.boundary) {
            continue;
        }
        boundary_edges_at[static_cast<std::size_t>(edge.vertex_ids[0])].push_back(e);
        boundary_edges_at[static_cast<std::size_t>(edge.vertex_ids[1])].push_back(e);
    }
    for (int s = 0; s < map.num_slots(); ++s) {
        const SlotInfo& info = map.slots_[static_cast<std::size_t>(s)];
        switch (info.kind) {
            case SlotKind::VertexValue:
            case SlotKind::VertexGradX:
            case SlotKind::VertexGradY:
                fixed[static_cast<std::size_t>(s)] = mesh.on_boundary(info.entity) ? 1 : 0;
                break;
            case SlotKind::EdgeValue:
            case SlotKind::EdgeNbar:
                fixed[static_cast<std::size_t>(s)] = mesh.edge(info.entity).boundary ? 1 : 0;
                break;
            case SlotKind::InteriorValue:
                break;
        }
        if (info.kind == SlotKind::VertexGradX && mesh.on_boundary(info.entity) &&
            !boundary_gradient_determined(mesh, boundary_edges_at, info.entity)) {
            throw Error("boundary vertex " + std::to_string(info.entity) +
                        ": the clamped conditions fix only one gradient direction (boundary edges at 45 degrees)");
        }
    }
    map.free_index_.assign(map.slots_.size(), -1);
    for (int s = 0; s < map.num_slots(); ++s) {
        if (fixed[static_cast<std::size_t>(s)] == 0) {
            map.free_index_[static_cast<std::size_t>(s)] = map.num_free_++;
            map.free_slots_.push_back(s);
        }
    }
    return map;
}

FeSpace::FeSpace(const Mesh& mesh, int order) : mesh_(&mesh), map_(build_dof_map(mesh, order)) {
    bases_.resize(static_cast<std::size_t>(mesh.num_triangles()));
    parallel_for(0, mesh.num_triangles(), [&](int t) { bases_[static_cast<std::size_t>(t)] = build_basis(mesh, t, order); });
}

std::vector<double> FeSpace::local_values(int triangle_id, std::span<const double> global) const {
    const auto terms = map_.terms(triangle_id);
    std::vector<double> local(terms.size(), 0.0);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (const LocalTerm& t : terms[i]) {
            if (t.slot >= 0) {
                local[i] += t.weight * global[static_cast<std::size_t>(t.slot)];
            }
        }
    }
    return local;
}

std::vector<double> FeSpace::interpolate(const SmoothFunction& f) const {
    std::vector<double> g(static_cast<std::size_t>(map_.num_slots()), 0.0);
    const Mesh& mesh = *mesh_;
    for (int s = 0; s < map_.num_slots(); ++s) {
        const SlotInfo& info = map_.slot(s);
        switch (info.kind) {
            case SlotKind::VertexValue:
                g[static_cast<std::size_t>(s)] = f.value(mesh.vertex(info.entity));
                break;
            case SlotKind::VertexGradX:
            case SlotKind::VertexGradY: {
                const Point2 grad = f.gradient(mesh.vertex(info.entity));
                g[static_cast<std::size_t>(s)] = info.kind == SlotKind::VertexGradX ? grad.x : grad.y;
                break;
            }
            default:
                break;
        }
    }
    // Edge and interior slots: read them off the local functionals that own them.
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& dofs = bases_[static_cast<std::size_t>(t)].dofs;
        const auto terms = map_.terms(t);
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const DofSpec& d = dofs[i];
            if (d.owner.kind == DofOwner::Kind::Vertex) {
                continue;
            }
            const double local = biwave::interpolate(std::span<const DofSpec>(&d, 1), f)[0];
            g[static_cast<std::size_t>(terms[i][0].slot)] = local / terms[i][0].weight;
        }
    }
    return g;
}

std::vector<double> FeSpace::expand(std::span<const double> free_values) const {
    std::vector<double> g(static_cast<std::size_t>(map_.num_slots()), 0.0);
    const auto& free = map_.free_slots();
    for (std::size_t k = 0; k < free.size(); ++k) {
        g[static_cast<std::size_t>(free[k])] = free_values[k];
    }
    return g;
}

PolyValue FeSpace::evaluate(int triangle_id, std::span<const double> global, Point2 p) const {
    const std::vector<double> local = local_values(triangle_id, global);
    return biwave::evaluate(basis(triangle_id), local, p);
}

void SymmetricCsr::multiply(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        const double xi = x[static_cast<std::size_t>(i)];
        for (int k = row_ptr[static_cast<std::size_t>(i)]; k < row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const int j = col[static_cast<std::size_t>(k)];
            const double v = val[static_cast<std::size_t>(k)];
            sum += v * x[static_cast<std::size_t>(j)];
            if (j != i) {
                y[static_cast<std::size_t>(j)] += v * xi;
            }
        }
        y[static_cast<std::size_t>(i)] += sum;
    }
}

double SymmetricCsr::at(int i, int j) const {
    if (j > i) {
        std::swap(i, j);
    }
    const auto begin = col.begin() + row_ptr[static_cast<std::size_t>(i)];
    const auto end = col.begin() + row_ptr[static_cast<std::size_t>(i) + 1];
    const auto it = std::lower_bound(begin, end, j);
    return it != end && *it == j ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

std::vector<double> SymmetricCsr::diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        d[static_cast<std::size_t>(i)] = at(i, i);
    }
    return d;
}

Eigen::MatrixXd local_matrix(const ElementBasis& basis, const std::array<Point2, 3>& corners, double delta,
                             const QuadRule& rule) {
    const int k = basis.size();
    const double area = std::abs(signed_area(corners[0], corners[1], corners[2]));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
    std::vector<PolyValue> phi;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        basis.tabulate(barycentric_to_point(corners, rule.points[q]), phi);
        const double w = rule.weights[q] * area;
        for (int i = 0; i < k; ++i) {
            const PolyValue& pi = phi[static_cast<std::size_t>(i)];
            for (int j = 0; j <= i; ++j) {
                const PolyValue& pj = phi[static_cast<std::size_t>(j)];
                m(i, j) += w * (delta * pi.box() * pj.box() + dot(pi.grad, pj.grad));
            }
        }
    }
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < i; ++j) {
            m(j, i) = m(i, j);
        }
    }
    return m;
}

Eigen::VectorXd local_load(const ElementBasis& basis, const std::array<Point2, 3>& corners, const SourceFunction& f,
                           const QuadRule& rule) {
    const double area = std::abs(signed_area(corners[0], corners[1], corners[2]));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(basis.size());
    std::vector<PolyValue> phi;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point2 p = barycentric_to_point(corners, rule.points[q]);
        basis.tabulate(p, phi);
        const double wf = rule.weights[q] * area * f(p);
        for (int i = 0; i < basis.size(); ++i) {
            b(i) += wf * phi[static_cast<std::size_t>(i)].value;
        }
    }
    return b;
}

SparseSystem assemble(const FeSpace& space, double delta, const SourceFunction& f, int load_degree) {
    if (!(delta >= 0.0)) {
        throw Error("delta must be non-negative, got " + std::to_string(delta));
    }
    const GlobalDofMap& map = space.dof_map();
    std::vector<int> row_of_slot(static_cast<std::size_t>(map.num_slots()));
    for (int s = 0; s < map.num_slots(); ++s) {
        row_of_slot[static_cast<std::size_t>(s)] = map.free_index(s);
    }
    SparseSystem sys;
    sys.delta = delta;
    sys.dof_map = &map;
    assemble_into(space, delta, &f, load_degree, row_of_slot, map.num_free(), sys.matrix, &sys.rhs);
    return sys;
}

SymmetricCsr assemble_unconstrained(const FeSpace& space, double delta) {
    if (!(delta >= 0.0)) {
        throw Error("delta must be non-negative, got " + std::to_string(delta));
    }
    const int n = space.dof_map().num_slots();
    std::vector<int> row_of_slot(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        row_of_slot[static_cast<std::size_t>(s)] = s;
    }
    SymmetricCsr a;
    assemble_into(space, delta, nullptr, kLoadRuleDegree, row_of_slot, n, a, nullptr);
    return a;
}

void write_matrix_market(std::ostream& out, const SymmetricCsr& a) {
    out << "%%MatrixMarket matrix coordinate real symmetric\n";
    out << a.n << ' ' << a.n << ' ' << a.nonzeros() << '\n';
    for (int i = 0; i < a.n; ++i) {
        for (int k = a.row_ptr[static_cast<std::size_t>(i)]; k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            out << i + 1 << ' ' << a.col[static_cast<std::size_t>(k)] + 1 << ' '
                << format_real(a.val[static_cast<std::size_t>(k)]) << '\n';
        }
    }
}

}  // namespace biwave
