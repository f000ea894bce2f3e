#include "biwave/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "biwave/error.hpp"

namespace biwave::cli {

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::ofstream open_output(const RunConfig& config, const std::string& suffix, std::string& path_out) {
    std::filesystem::create_directories(config.out_dir);
    path_out = (std::filesystem::path(config.out_dir) / (config.prefix + suffix)).string();
    std::ofstream out(path_out);
    if (!out) {
        throw Error("cannot write " + path_out);
    }
    return out;
}

Mesh load_mesh(const RunConfig& config) {
    if (config.crisscross > 0) {
        return generate_crisscross(config.crisscross);
    }
    std::ifstream in(config.mesh_path);
    if (!in) {
        throw Error("cannot open mesh file " + config.mesh_path);
    }
    return read_mesh(in);
}

void write_grid(const RunConfig& config, const SampleGrid& grid, std::ostream& log) {
    std::string path;
    std::ofstream out = open_output(config, "_grid.dat", path);
    out << "# " << config.echo() << "\n# x y u\n";
    for (int j = 0; j <= grid.m; ++j) {
        for (int i = 0; i <= grid.m; ++i) {
            const auto k = static_cast<std::size_t>(j) * static_cast<std::size_t>(grid.m + 1) + static_cast<std::size_t>(i);
            out << format_real(grid.x[k]) << ' ' << format_real(grid.y[k]) << ' ' << sci(grid.value[k]) << '\n';
        }
        out << '\n';
    }
    log << "wrote " << path << '\n';
}

struct LevelResult {
    int n = 0;
    ErrorReport errors;
    SolveReport solve;
};

/// Assemble, solve and measure one mesh; the solution over all slots lands in `global`.
LevelResult run_level(const RunConfig& config, const FeSpace& space, int n, std::vector<double>& global,
                      std::ostream& log) {
    const Mesh& mesh = space.mesh();
    const ExactSolution problem = make_problem(config.test, config.delta);
    const SparseSystem system = assemble(space, config.delta, problem.f, config.quad_degree);
    if (!config.matrix_market.empty()) {
        std::ofstream mm(config.matrix_market);
        if (!mm) {
            throw Error("cannot write " + config.matrix_market);
        }
        write_matrix_market(mm, system.matrix);
        log << "wrote " << config.matrix_market << '\n';
    }
    const SolveResult result = solve(system, solve_options(config));
    global = space.expand(result.x);
    LevelResult level;
    level.n = n;
    level.solve = result.report;
    if (problem.has_exact) {
        level.errors = compute_errors(space, global, problem, config.delta, config.quad_degree);
    } else {
        level.errors.h = mesh.h();
        level.errors.dofs = system.matrix.n;
    }
    log << "n=" << n << " h=" << format_real(mesh.h()) << " dofs=" << system.matrix.n << " solver=" << to_string(result.report.method)
        << " iterations=" << result.report.iterations << " residual=" << sci(result.report.relative_residual) << '\n';
    if (result.report.relative_residual > config.rel_tol) {
        log << "note: residual above rel_tol; accepted at the rounding floor " << sci(result.report.residual_floor)
            << '\n';
    }
    return level;
}

int cmd_solve(const RunConfig& config, std::ostream& out) {
    const Mesh mesh = load_mesh(config);
    const FeSpace space(mesh, config.order);
    std::vector<double> global;
    const LevelResult level = run_level(config, space, config.crisscross, global, out);
    write_grid(config, sample_solution(space, global, config.grid), out);
    const ExactSolution problem = make_problem(config.test, config.delta);
    if (problem.has_exact) {
        std::string path;
        std::ofstream csv = open_output(config, ".csv", path);
        const std::string row = csv_row(config.order, config.delta, config.crisscross, level.errors, nullptr, level.solve);
        csv << "# " << config.echo() << '\n' << kCsvHeader << '\n' << row << '\n';
        out << kCsvHeader << '\n' << row << '\n' << "wrote " << path << '\n';
    }
    return kOk;
}

int cmd_convergence(const RunConfig& config, std::ostream& out) {
    if (config.levels.size() < 2) {
        throw std::invalid_argument("convergence needs at least two levels");
    }
    if (!make_problem(config.test, config.delta).has_exact) {
        throw std::invalid_argument("convergence needs a problem with an exact solution");
    }
    for (std::size_t i = 1; i < config.levels.size(); ++i) {
        if (config.levels[i] == config.levels[i - 1]) {
            throw Error("equal h in consecutive levels (n = " + std::to_string(config.levels[i]) + ")");
        }
    }
    std::vector<LevelResult> levels;
    for (int n : config.levels) {
        const Mesh mesh = generate_crisscross(n);
        const FeSpace space(mesh, config.order);
        std::vector<double> global;
        levels.push_back(run_level(config, space, n, global, out));
    }
    std::vector<ErrorReport> reports;
    for (const auto& l : levels) {
        reports.push_back(l.errors);
    }
    const ConvergenceTable table = convergence_rates(reports);

    std::string path;
    std::ofstream csv = open_output(config, ".csv", path);
    csv << "# " << config.echo() << '\n' << kCsvHeader << '\n';
    out << kCsvHeader << '\n';
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const std::string row = csv_row(config.order, config.delta, levels[i].n, table.reports[i],
                                        i == 0 ? nullptr : &table.rates[i], levels[i].solve);
        csv << row << '\n';
        out << row << '\n';
    }
    out << "wrote " << path << '\n';
    std::string gp_path;
    std::ofstream gp = open_output(config, ".gp", gp_path);
    gp << "# " << config.echo() << '\n'
       << gnuplot_script(config.prefix + ".csv", "order " + std::to_string(config.order) + ", delta " + format_real(config.delta));
    out << "wrote " << gp_path << '\n';
    return kOk;
}

int cmd_mesh_check(const RunConfig& config, std::ostream& out) {
    std::ifstream in(config.mesh_path);
    if (!in) {
        throw Error("cannot open mesh file " + config.mesh_path);
    }
    const Mesh mesh = read_mesh(in);
    const AdmissibilityReport report = check_admissibility(mesh);
    const bool ok = report.verdict == Admissibility::AdmissibleTwoTypeI;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const int count = report.type_i_counts[static_cast<std::size_t>(t)];
        const double quality = count == 2 ? mesh.triangle(t).quality : std::nan("");
        if (config.json) {
            nlohmann::json line = {{"triangle", t}, {"type_i_edges", count}};
            line["quality"] = std::isnan(quality) ? nlohmann::json(nullptr) : nlohmann::json(quality);
            out << line.dump() << '\n';
        } else {
            out << "triangle " << t << ": " << count << " type I edges";
            if (!std::isnan(quality)) {
                out << ", quality " << fixed4(quality);
            }
            out << '\n';
        }
    }
    if (config.json) {
        nlohmann::json summary = {{"verdict", ok ? "admissible" : "not admissible"},
                                  {"triangles", mesh.num_triangles()},
                                  {"problem_triangles", report.problem_triangles},
                                  {"message", report.message}};
        summary["min_quality"] =
            std::isnan(report.min_quality) ? nlohmann::json(nullptr) : nlohmann::json(report.min_quality);
        out << summary.dump() << '\n';
    } else {
        out << report.message << '\n';
    }
    return ok ? kOk : kInadmissible;
}

int cmd_mesh_export(const RunConfig& config, std::ostream& out) {
    const Mesh mesh = generate_crisscross(config.crisscross);
    if (config.mesh_path.empty() || config.mesh_path == "-") {
        write_mesh(out, mesh);
        return kOk;
    }
    std::ofstream file(config.mesh_path);
    if (!file) {
        throw Error("cannot write " + config.mesh_path);
    }
    write_mesh(file, mesh);
    return kOk;
}

void add_problem_options(CLI::App& sub, RunConfig& c) {
    sub.add_option("--element", c.order, "element order")->check(CLI::IsMember({3, 4}));
    sub.add_option("--delta", c.delta, "singular perturbation parameter")->check(CLI::NonNegativeNumber);
    sub.add_option("--test", c.test, "test1, test2 or const:<c>");
    sub.add_option("--quad-degree", c.quad_degree, "exactness of the load and norm quadrature")
        ->check(CLI::Range(1, 14));
    sub.add_option("--solver", c.solver, "auto, cg or cholesky")->check(CLI::IsMember({"auto", "cg", "cholesky"}));
    sub.add_option("--rel-tol", c.rel_tol, "relative residual tolerance");
    sub.add_option("--max-iter", c.max_iter, "CG iteration cap (0: 20 x unknowns)");
    sub.add_option("--precond", c.precond, "none or jacobi")->check(CLI::IsMember({"none", "jacobi"}));
    sub.add_option("--out-dir", c.out_dir, "directory for output files");
    sub.add_option("--prefix", c.prefix, "output file prefix");
    sub.add_option("--matrix-market", c.matrix_market, "also write the assembled matrix here");
}

}  // namespace

std::string RunConfig::echo() const {
    std::ostringstream s;
    s << "biwave " << command << " element=" << order << " delta=" << format_real(delta) << " mesh="
      << (crisscross > 0    ? "crisscross:" + std::to_string(crisscross)
                                          : !levels.empty() ? std::string("crisscross")
                                                            : mesh_path) << " test=" << test;
    if (!levels.empty()) {
        s << " levels=";
        for (std::size_t i = 0; i < levels.size(); ++i) {
            s << (i == 0 ? "" : ",") << levels[i];
        }
    }
    s << " quad_degree=" << quad_degree << " solver=" << solver << " rel_tol=" << format_real(rel_tol)
      << " max_iter=" << max_iter << " precond=" << precond << " grid=" << grid;
    return s.str();
}

ExactSolution make_problem(const std::string& test, double delta) {
    if (test == "test1") {
        return manufactured_test1(delta);
    }
    if (test == "test2") {
        return manufactured_test2();
    }
    if (test.rfind("const:", 0) == 0) {
        const std::string value = test.substr(6);
        std::size_t used = 0;
        double c = 0.0;
        try {
            c = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != value.size() || !std::isfinite(c)) {
            throw std::invalid_argument("bad constant source '" + value + "'");
        }
        return constant_source(c);
    }
    throw std::invalid_argument("unknown test '" + test + "' (expected test1, test2 or const:<c>)");
}

SolveOptions solve_options(const RunConfig& config) {
    SolveOptions o;
    o.method = config.solver == "cg"         ? SolveMethod::ConjugateGradient
               : config.solver == "cholesky" ? SolveMethod::DirectCholesky
                                             : SolveMethod::Auto;
    o.rel_tol = config.rel_tol;
    o.max_iter = config.max_iter;
    o.preconditioner = config.precond == "none" ? Preconditioner::None : Preconditioner::Jacobi;
    return o;
}

std::string csv_row(int order, double delta, int n, const ErrorReport& report, const std::array<double, kNormCount>* rates,
                    const SolveReport& solve) {
    std::ostringstream s;
    s << order << ',' << format_real(delta) << ',' << (n > 0 ? std::to_string(n) : "") << ',' << sci(report.h) << ','
      << report.dofs;
    const auto errs = norm_values(report);
    for (std::size_t k = 0; k < errs.size(); ++k) {
        s << ',' << sci(errs[k]) << ',' << (rates != nullptr ? fixed4((*rates)[k]) : "");
    }
    s << ',' << solve.iterations << ',' << sci(solve.relative_residual);
    return s.str();
}

std::string gnuplot_script(const std::string& csv_name, const std::string& title) {
    std::ostringstream s;
    s << "set datafile separator ','\n"
      << "set logscale xy\n"
      << "set key bottom right\n"
      << "set xlabel 'h'\n"
      << "set ylabel 'error'\n"
      << "set title '" << title << "'\n"
      << "set terminal pngcairo size 900,700\n"
      << "set output '" << csv_name.substr(0, csv_name.size() - 4) << ".png'\n"
      << "plot '" << csv_name << "' using 4:6 with linespoints title 'L2', \\\n"
      << "     '' using 4:8 with linespoints title 'H1', \\\n"
      << "     '' using 4:10 with linespoints title 'broken H2', \\\n"
      << "     '' using 4:12 with linespoints title 'energy'\n";
    return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Conforming cubic/quartic finite elements for the bi-wave problem", "biwave"};
    app.require_subcommand(1);
    RunConfig c;

    auto* solve_cmd = app.add_subcommand("solve", "solve one problem and write the solution grid");
    add_problem_options(*solve_cmd, c);
    auto* mesh_src = solve_cmd->add_option_group("mesh");
    mesh_src->add_option("--crisscross", c.crisscross, "crisscross mesh with n x n squares")->check(CLI::PositiveNumber);
    mesh_src->add_option("--mesh", c.mesh_path, "mesh file");
    mesh_src->require_option(1);
    solve_cmd->add_option("--grid", c.grid, "sample grid intervals per side")->check(CLI::PositiveNumber);

    auto* conv_cmd = app.add_subcommand("convergence", "solve on a ladder of crisscross meshes, report rates");
    add_problem_options(*conv_cmd, c);
    conv_cmd->add_option("--levels", c.levels, "crisscross n per level, comma separated")
        ->delimiter(',')
        ->required()
        ->check(CLI::PositiveNumber);

    auto* check_cmd = app.add_subcommand("mesh-check", "classify the triangles of a mesh file");
    check_cmd->add_option("path", c.mesh_path, "mesh file")->required();
    check_cmd->add_flag("--json", c.json, "JSON lines instead of text");

    auto* export_cmd = app.add_subcommand("mesh-export", "write a crisscross mesh file");
    export_cmd->add_option("--crisscross", c.crisscross, "squares per side")->required()->check(CLI::PositiveNumber);
    export_cmd->add_option("-o,--output", c.mesh_path, "output path (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    c.command = app.get_subcommands().front()->get_name();
    if (c.prefix.empty()) {
        c.prefix = c.command;
    }

    try {
        if (c.command == "solve") {
            return cmd_solve(c, out);
        }
        if (c.command == "convergence") {
            return cmd_convergence(c, out);
        }
        if (c.command == "mesh-check") {
            return cmd_mesh_check(c, out);
        }
        return cmd_mesh_export(c, out);
    } catch (const NotAdmissibleError& e) {
        err << "error: " << e.what() << '\n';
        if (c.command == "solve" && c.crisscross == 0) {
            std::ifstream in(c.mesh_path);
            err << check_admissibility(read_mesh(in)).message << '\n';
        }
        return kInadmissible;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << "\niterations " << e.iterations() << ", relative residual "
            << sci(e.residual()) << '\n';
        return kSolverFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace biwave::cli
