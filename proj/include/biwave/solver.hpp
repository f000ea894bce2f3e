#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "biwave/assembly.hpp"

namespace biwave {

enum class SolveMethod { Auto, ConjugateGradient, DirectCholesky };
enum class Preconditioner { None, Jacobi };

/// Auto picks the direct factorization up to kDirectSolveLimit unknowns.
inline constexpr int kDirectSolveLimit = 300000;

struct SolveOptions {
    SolveMethod method = SolveMethod::Auto;
    double rel_tol = 1e-12;
    long max_iter = 0;  // 0: 20 * unknowns
    Preconditioner preconditioner = Preconditioner::Jacobi;
};

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;  // ||b - A x|| / ||b||, recomputed
    SolveMethod method = SolveMethod::ConjugateGradient;
    /// eps ||(|A| |x|)|| / ||b||. When it exceeds rel_tol no double-precision
    /// vector can meet rel_tol, and the solve is accepted at this level instead.
    double residual_floor = 0.0;
};

struct SolveResult {
    std::vector<double> x;
    SolveReport report;
};

std::string_view to_string(SolveMethod method);

/// ||b - A x|| / ||b||, or ||A x|| when b = 0.
double relative_residual(const SymmetricCsr& a, std::span<const double> x, std::span<const double> b);

/// Throws std::invalid_argument for bad options, SolverError when neither
/// rel_tol nor the rounding floor is met or the matrix is not positive definite.
SolveResult solve(const SymmetricCsr& a, std::span<const double> b, const SolveOptions& options = {});
SolveResult solve(const SparseSystem& system, const SolveOptions& options = {});

}  // namespace biwave
