#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "biwave/analysis.hpp"

namespace biwave::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInadmissible = 2, kSolverFailure = 3 };

struct RunConfig {
    std::string command;
    int order = 3;
    double delta = 1.0;
    int crisscross = 0;      // n, or 0 when reading a file
    std::string mesh_path;
    std::string test = "test1";  // test1 | test2 | const:<c>
    std::vector<int> levels;
    int quad_degree = kLoadRuleDegree;
    std::string solver = "auto";   // auto | cg | cholesky
    double rel_tol = 1e-12;
    long max_iter = 0;
    std::string precond = "jacobi";  // none | jacobi
    std::string out_dir = ".";
    std::string prefix;
    int grid = 100;
    std::string matrix_market;
    bool json = false;

    /// One line, fixed field order; written at the top of every output file.
    [[nodiscard]] std::string echo() const;
};

/// Problem named by --test. Throws Error for unknown names.
ExactSolution make_problem(const std::string& test, double delta);

SolveOptions solve_options(const RunConfig& config);

inline constexpr const char* kCsvHeader =
    "element,delta,n,h,dofs,err_l2,rate_l2,err_h1,rate_h1,err_h2b,rate_h2b,err_energy,rate_energy,solver_iters,residual";

/// One CSV row; rates may be null for the first level. n <= 0 leaves the column empty.
std::string csv_row(int order, double delta, int n, const ErrorReport& report, const std::array<double, kNormCount>* rates,
                    const SolveReport& solve);

/// Gnuplot script plotting the four error norms of a convergence CSV against h.
std::string gnuplot_script(const std::string& csv_name, const std::string& title);

/// Entry point behind the executable. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biwave::cli
