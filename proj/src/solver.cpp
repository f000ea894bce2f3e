#include "biwave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "biwave/error.hpp"

namespace biwave {

namespace {

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

// b - A x accumulated in extended precision; the cancellation in A x is what
// limits attainable residuals on these systems.
void residual(const SymmetricCsr& a, std::span<const double> x, std::span<const double> b, std::vector<double>& r) {
    std::vector<long double> acc(b.begin(), b.end());
    for (int i = 0; i < a.n; ++i) {
        long double sum = 0.0L;
        const long double xi = x[static_cast<std::size_t>(i)];
        for (int k = a.row_ptr[static_cast<std::size_t>(i)]; k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const int j = a.col[static_cast<std::size_t>(k)];
            const long double v = a.val[static_cast<std::size_t>(k)];
            sum += v * x[static_cast<std::size_t>(j)];
            if (j != i) {
                acc[static_cast<std::size_t>(j)] -= v * xi;
            }
        }
        acc[static_cast<std::size_t>(i)] -= sum;
    }
    r.assign(acc.begin(), acc.end());
}

/// eps ||(|A| |x|)|| / ||b||: the residual that rounding x to double alone produces.
double rounding_floor(const SymmetricCsr& a, std::span<const double> x, double bnorm) {
    std::vector<double> y(x.size(), 0.0);
    for (int i = 0; i < a.n; ++i) {
        for (int k = a.row_ptr[static_cast<std::size_t>(i)]; k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            const int j = a.col[static_cast<std::size_t>(k)];
            const double v = std::abs(a.val[static_cast<std::size_t>(k)]);
            y[static_cast<std::size_t>(i)] += v * std::abs(x[static_cast<std::size_t>(j)]);
            if (j != i) {
                y[static_cast<std::size_t>(j)] += v * std::abs(x[static_cast<std::size_t>(i)]);
            }
        }
    }
    return std::numeric_limits<double>::epsilon() * norm2(y) / bnorm;
}

SolveResult conjugate_gradient(const SymmetricCsr& a, std::span<const double> b, const SolveOptions& opt,
                               long max_iter) {
    const auto n = static_cast<std::size_t>(a.n);
    const double bnorm = norm2(b);
    std::vector<double> inv_diag(n, 1.0);
    if (opt.preconditioner == Preconditioner::Jacobi) {
        const std::vector<double> d = a.diagonal();
        for (std::size_t i = 0; i < n; ++i) {
            if (!(d[i] > 0.0)) {
                throw SolverError("non-positive diagonal entry " + std::to_string(i) + "; matrix is not SPD",
                                  std::vector<double>(n, 0.0), 1.0, 0);
            }
            inv_diag[i] = 1.0 / d[i];
        }
    }

    std::vector<double> x(n, 0.0);
    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> q(n);
    std::vector<double> best = x;
    double best_res = 1.0;
    long it = 0;

    // Restart from the true residual whenever the recurrence claims convergence
    // but the recomputed residual disagrees.
    for (int restart = 0; restart < 5; ++restart) {
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag[i] * r[i];
        }
        p = z;
        double rz = dot(r, z);
        double rel = norm2(r) / bnorm;
        while (rel > opt.rel_tol && it < max_iter) {
            a.multiply(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) {
                throw SolverError("p'Ap <= 0 at iteration " + std::to_string(it) + "; matrix is not SPD", best,
                                  best_res, static_cast<int>(it));
            }
            const double alpha = rz / pq;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
                z[i] = inv_diag[i] * r[i];
            }
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) {
                p[i] = z[i] + beta * p[i];
            }
            ++it;
            rel = norm2(r) / bnorm;
            if (rel < best_res) {
                best_res = rel;
                best = x;
            }
        }
        residual(a, x, b, r);
        const double true_rel = norm2(r) / bnorm;
        const double floor = rounding_floor(a, x, bnorm);
        if (true_rel <= std::max(opt.rel_tol, floor)) {
            return {std::move(x), {static_cast<int>(it), true_rel, SolveMethod::ConjugateGradient, floor}};
        }
        if (it >= max_iter) {
            break;
        }
    }
    const double res = relative_residual(a, best, b);
    throw SolverError("conjugate gradients did not reach relative residual " + fmt_sci(opt.rel_tol) + " in " +
                          std::to_string(it) + " iterations (best " + fmt_sci(res) + ")",
                      std::move(best), res, static_cast<int>(it));
}

SolveResult direct_cholesky(const SymmetricCsr& a, std::span<const double> b, const SolveOptions& opt) {
    const auto n = static_cast<Eigen::Index>(a.n);
    // Lower-triangle CSR is the upper triangle in compressed columns.
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(a.nonzeros());
    for (int i = 0; i < a.n; ++i) {
        for (int k = a.row_ptr[static_cast<std::size_t>(i)]; k < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++k) {
            entries.emplace_back(i, a.col[static_cast<std::size_t>(k)], a.val[static_cast<std::size_t>(k)]);
        }
    }
    Eigen::SparseMatrix<double> lower(n, n);
    lower.setFromTriplets(entries.begin(), entries.end());
    entries.clear();
    entries.shrink_to_fit();

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt(lower);
    if (llt.info() != Eigen::Success) {
        throw SolverError("Cholesky factorization failed; matrix is not positive definite",
                          std::vector<double>(static_cast<std::size_t>(n), 0.0), 1.0, 0);
    }
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
    Eigen::VectorXd sol = llt.solve(rhs);
    std::vector<double> x(sol.data(), sol.data() + n);
    std::vector<double> r;
    const double bnorm = norm2(b);
    residual(a, x, b, r);
    double rel = norm2(r) / bnorm;
    int steps = 0;
    // iterative refinement
    while (rel > opt.rel_tol && steps < 8) {
        const Eigen::Map<const Eigen::VectorXd> rv(r.data(), n);
        const Eigen::VectorXd dx = llt.solve(rv);
        std::vector<double> trial(x);
        for (Eigen::Index i = 0; i < n; ++i) {
            trial[static_cast<std::size_t>(i)] += dx(i);
        }
        std::vector<double> r_trial;
        residual(a, trial, b, r_trial);
        const double rel_trial = norm2(r_trial) / bnorm;
        ++steps;
        if (!(rel_trial < rel)) {
            break;
        }
        x = std::move(trial);
        r = std::move(r_trial);
        rel = rel_trial;
    }
    const double floor = rounding_floor(a, x, bnorm);
    if (rel > std::max(opt.rel_tol, floor)) {
        throw SolverError("direct solve reached relative residual " + fmt_sci(rel) + " above tolerance " +
                              fmt_sci(opt.rel_tol),
                          std::move(x), rel, steps);
    }
    return {std::move(x), {steps, rel, SolveMethod::DirectCholesky, floor}};
}

}  // namespace

std::string_view to_string(SolveMethod method) {
    switch (method) {
        case SolveMethod::Auto:
            return "auto";
        case SolveMethod::ConjugateGradient:
            return "cg";
        case SolveMethod::DirectCholesky:
            return "cholesky";
    }
    return "?";
}

double relative_residual(const SymmetricCsr& a, std::span<const double> x, std::span<const double> b) {
    std::vector<double> r;
    residual(a, x, b, r);
    const double bnorm = norm2(b);
    return bnorm > 0.0 ? norm2(r) / bnorm : norm2(r);
}

SolveResult solve(const SymmetricCsr& a, std::span<const double> b, const SolveOptions& options) {
    if (!(options.rel_tol > 0.0 && options.rel_tol <= 1e-4)) {
        throw std::invalid_argument("rel_tol must lie in (0, 1e-4]");
    }
    if (options.max_iter < 0) {
        throw std::invalid_argument("max_iter must be positive");
    }
    if (b.size() != static_cast<std::size_t>(a.n)) {
        throw std::invalid_argument("right-hand side has " + std::to_string(b.size()) + " entries, matrix has " +
                                    std::to_string(a.n) + " rows");
    }
    for (double v : b) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("right-hand side is not finite");
        }
    }
    SolveMethod method = options.method;
    if (method == SolveMethod::Auto) {
        method = a.n <= kDirectSolveLimit ? SolveMethod::DirectCholesky : SolveMethod::ConjugateGradient;
    }
    if (norm2(b) == 0.0) {
        return {std::vector<double>(b.size(), 0.0), {0, 0.0, method}};
    }
    if (method == SolveMethod::DirectCholesky) {
        return direct_cholesky(a, b, options);
    }
    const long max_iter = options.max_iter > 0 ? options.max_iter : 20L * std::max(a.n, 1);
    return conjugate_gradient(a, b, options, max_iter);
}

SolveResult solve(const SparseSystem& system, const SolveOptions& options) {
    return solve(system.matrix, system.rhs, options);
}

}  // namespace biwave
