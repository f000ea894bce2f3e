#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace biwave {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed mesh text; carries the 1-based offending line (0 when not line specific).
class MeshParseError : public Error {
public:
    MeshParseError(std::size_t line, const std::string& what)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Geometric or topological mesh defect (degenerate edge, bad connectivity).
class MeshError : public Error {
public:
    using Error::Error;
};

/// The mesh (or a triangle of it) does not carry two type I edges per triangle.
class NotAdmissibleError : public Error {
public:
    using Error::Error;
};

/// The degree-of-freedom matrix of a triangle is numerically singular.
class NotUnisolventError : public Error {
public:
    NotUnisolventError(int triangle_id, double condition)
        : Error("degrees of freedom are not unisolvent on triangle " + std::to_string(triangle_id) +
                " (condition estimate " + std::to_string(condition) + ")"),
          triangle_id_(triangle_id),
          condition_(condition) {}

    [[nodiscard]] int triangle_id() const noexcept { return triangle_id_; }
    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    int triangle_id_;
    double condition_;
};

/// Linear solver failure. Keeps the best iterate seen so far.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> best_iterate, double residual, int iterations)
        : Error(what), best_(std::move(best_iterate)), residual_(residual), iterations_(iterations) {}

    [[nodiscard]] const std::vector<double>& best_iterate() const noexcept { return best_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    std::vector<double> best_;
    double residual_;
    int iterations_;
};

}  // namespace biwave
