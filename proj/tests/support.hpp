#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "biwave/assembly.hpp"
#include "biwave/error.hpp"
#include "biwave/mesh.hpp"

namespace biwave::testing {

inline std::string data_path(const std::string& name) { return std::string(BIWAVE_TEST_DATA) + "/" + name; }

inline Mesh load_fixture(const std::string& name) {
    std::ifstream in(data_path(name));
    if (!in) {
        throw Error("missing fixture " + name);
    }
    return read_mesh(in);
}

/// Right triangle with legs along the diagonals (both 45 degree edges),
/// smaller acute angle theta, hypotenuse length h, legs turned by quarter turns.
inline Mesh admissible_triangle(Point2 apex, double theta, double h, int quarter_turns, bool mirror) {
    const double s = 1.0 / std::numbers::sqrt2;
    Point2 d1{s, s};
    for (int k = 0; k < quarter_turns; ++k) {
        d1 = {-d1.y, d1.x};
    }
    Point2 d2{-d1.y, d1.x};
    if (mirror) {
        std::swap(d1, d2);
    }
    return Mesh({apex, apex + (h * std::cos(theta)) * d1, apex + (h * std::sin(theta)) * d2}, {{0, 1, 2}});
}

struct RandomShape {
    Point2 apex;
    double theta = 0.0;
    int quarter_turns = 0;
    bool mirror = false;
};

/// theta in [pi/16, pi/4], any rigid motion that keeps the legs at 45 degrees.
inline RandomShape random_shape(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-5.0, 5.0);
    std::uniform_real_distribution<double> angle(std::numbers::pi / 16, std::numbers::pi / 4);
    std::uniform_int_distribution<int> turns(0, 3);
    std::bernoulli_distribution flip(0.5);
    return {{pos(rng), pos(rng)}, angle(rng), turns(rng), flip(rng)};
}

inline Mesh shape_triangle(const RandomShape& s, double h) {
    return admissible_triangle(h * s.apex, s.theta, h, s.quarter_turns, s.mirror);
}

/// Largest jump of v and of its nbar derivative across interior edges, relative
/// to the largest sampled magnitude of each, over `samples` points per edge.
struct JumpResult {
    double value = 0.0;
    double nbar = 0.0;
};

inline JumpResult max_interior_jumps(const FeSpace& space, const std::vector<double>& global, int samples = 10) {
    const Mesh& mesh = space.mesh();
    double jv = 0.0;
    double jn = 0.0;
    double sv = 0.0;
    double sn = 0.0;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edge(e);
        const Point2 p = mesh.vertex(edge.vertex_ids[0]);
        const Point2 q = mesh.vertex(edge.vertex_ids[1]);
        for (int k = 0; k < samples; ++k) {
            const double t = (k + 0.5) / samples;
            const Point2 x = p + t * (q - p);
            const PolyValue a = space.evaluate(edge.triangle_ids[0], global, x);
            const double da = dot(a.grad, edge.frame.nbar);
            sv = std::max(sv, std::abs(a.value));
            sn = std::max(sn, std::abs(da));
            if (edge.boundary) {
                continue;
            }
            const PolyValue b = space.evaluate(edge.triangle_ids[1], global, x);
            jv = std::max(jv, std::abs(a.value - b.value));
            jn = std::max(jn, std::abs(da - dot(b.grad, edge.frame.nbar)));
        }
    }
    return {sv > 0.0 ? jv / sv : jv, sn > 0.0 ? jn / sn : jn};
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) {
        x = dist(rng);
    }
    return v;
}

}  // namespace biwave::testing
