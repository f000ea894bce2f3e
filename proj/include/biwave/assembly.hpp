#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "biwave/element.hpp"
#include "biwave/mesh.hpp"
#include "biwave/quadrature.hpp"

namespace biwave {

enum class SlotKind { VertexValue, VertexGradX, VertexGradY, EdgeValue, EdgeNbar, InteriorValue };

/// One global unknown and the mesh entity it lives on.
struct SlotInfo {
    SlotKind kind = SlotKind::VertexValue;
    int entity = -1;
    int index = 0;  // position among the entity's slots of this kind
};

/// Contribution of a global slot to a local functional.
struct LocalTerm {
    int slot = -1;  // -1: unused
    double weight = 0.0;
};

/// Local functional i of triangle t = sum of weight * global slot over its terms.
/// Value functionals have one term; directional derivatives combine the two
/// gradient components of their vertex; nbar derivatives carry the share sign.
using LocalDofTerms = std::array<LocalTerm, 2>;

/// Global numbering, entity-type major and id minor:
/// vertex values, vertex gradients (x, y), type I edge values, type II edge
/// nbar slots, type II edge values, interior values.
class GlobalDofMap {
public:
    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] int num_slots() const { return static_cast<int>(slots_.size()); }
    [[nodiscard]] int num_free() const { return num_free_; }
    [[nodiscard]] int local_size() const { return local_size_; }

    [[nodiscard]] const SlotInfo& slot(int s) const { return slots_[static_cast<std::size_t>(s)]; }
    [[nodiscard]] bool constrained(int s) const { return free_index_[static_cast<std::size_t>(s)] < 0; }
    /// Index among the free unknowns, or -1 for a constrained slot.
    [[nodiscard]] int free_index(int s) const { return free_index_[static_cast<std::size_t>(s)]; }
    [[nodiscard]] const std::vector<int>& free_slots() const { return free_slots_; }

    [[nodiscard]] std::span<const LocalDofTerms> terms(int triangle_id) const {
        return {terms_.data() + static_cast<std::size_t>(triangle_id) * static_cast<std::size_t>(local_size_),
                static_cast<std::size_t>(local_size_)};
    }
    /// Distinct global slots touched by a triangle, ascending.
    [[nodiscard]] std::vector<int> triangle_slots(int triangle_id) const;

    /// First gradient slot (x component) of a vertex, or -1.
    [[nodiscard]] int gradient_slot(int vertex_id) const { return gradient_slot_[static_cast<std::size_t>(vertex_id)]; }
    [[nodiscard]] int value_slot(int vertex_id) const { return vertex_id; }

    friend GlobalDofMap build_dof_map(const Mesh& mesh, int order);

private:
    int order_ = 3;
    int local_size_ = 10;
    int num_free_ = 0;
    std::vector<SlotInfo> slots_;
    std::vector<int> free_index_;
    std::vector<int> free_slots_;
    std::vector<int> gradient_slot_;
    std::vector<LocalDofTerms> terms_;
};

/// Throws NotAdmissibleError for meshes without two type I edges per triangle
/// or with type I edges whose neighbours disagree on the right-angle vertex, and
/// Error when a boundary vertex gradient is not fixed by the clamped conditions.
GlobalDofMap build_dof_map(const Mesh& mesh, int order);

/// Mesh, DOF map and the nodal basis of every triangle.
/// Keeps a reference to the mesh, which must outlive it.
class FeSpace {
public:
    FeSpace(const Mesh& mesh, int order);
    FeSpace(Mesh&&, int) = delete;

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] int order() const { return map_.order(); }
    [[nodiscard]] const GlobalDofMap& dof_map() const { return map_; }
    [[nodiscard]] const ElementBasis& basis(int triangle_id) const { return bases_[static_cast<std::size_t>(triangle_id)]; }

    /// Local DOF values of a triangle from a vector over all global slots.
    [[nodiscard]] std::vector<double> local_values(int triangle_id, std::span<const double> global) const;
    /// Global slot values of the interpolant of f.
    [[nodiscard]] std::vector<double> interpolate(const SmoothFunction& f) const;
    /// Scatters free unknowns into a full slot vector (constrained slots zero).
    [[nodiscard]] std::vector<double> expand(std::span<const double> free_values) const;
    /// Evaluates the discrete function on a triangle.
    [[nodiscard]] PolyValue evaluate(int triangle_id, std::span<const double> global, Point2 p) const;

private:
    const Mesh* mesh_;
    GlobalDofMap map_;
    std::vector<ElementBasis> bases_;
};

/// Symmetric matrix in compressed rows; only the lower triangle (col <= row) is stored.
struct SymmetricCsr {
    int n = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col;
    std::vector<double> val;

    [[nodiscard]] std::size_t nonzeros() const { return val.size(); }
    /// y = A x using both triangles.
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// Entry (i, j) of the full symmetric matrix.
    [[nodiscard]] double at(int i, int j) const;
    [[nodiscard]] std::vector<double> diagonal() const;
};

struct SparseSystem {
    SymmetricCsr matrix;
    std::vector<double> rhs;
    double delta = 0.0;
    const GlobalDofMap* dof_map = nullptr;
};

using SourceFunction = std::function<double(Point2)>;

/// M_ij = delta (box phi_i, box phi_j)_T + (grad phi_i, grad phi_j)_T.
Eigen::MatrixXd local_matrix(const ElementBasis& basis, const std::array<Point2, 3>& corners, double delta,
                             const QuadRule& rule);
/// b_i = (f, phi_i)_T.
Eigen::VectorXd local_load(const ElementBasis& basis, const std::array<Point2, 3>& corners, const SourceFunction& f,
                           const QuadRule& rule);

/// Assembles delta (box u, box v) + (grad u, grad v) = (f, v) over the free
/// unknowns, the load integrated with the rule of exactness load_degree.
/// Throws Error for delta < 0.
SparseSystem assemble(const FeSpace& space, double delta, const SourceFunction& f,
                      int load_degree = kLoadRuleDegree);
/// The same bilinear form over all slots, before boundary elimination.
SymmetricCsr assemble_unconstrained(const FeSpace& space, double delta);

/// Matrix Market (symmetric, coordinate, real) dump of the lower triangle.
void write_matrix_market(std::ostream& out, const SymmetricCsr& a);

}  // namespace biwave
