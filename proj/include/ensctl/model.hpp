// model.hpp — ensemble system definitions, discretization grids, and transfer targets
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ensctl/errors.hpp"

namespace ensctl {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Parameterized family dX/dt = A(t,b) X + B(t,b) u, indexed by b in a compact box.
// Evaluators must be pure: equal (t,b) always yields identical matrices of the
// declared dimensions, and calls are safe from concurrent threads.
struct LinearEnsembleSystem {
    int n{0};  // state dimension
    int m{0};  // input dimension
    int d{0};  // parameter dimension
    std::function<Matrix(double, const Vector&)> eval_A;  // (t, b) -> n x n
    std::function<Matrix(double, const Vector&)> eval_B;  // (t, b) -> n x m
    std::string label;
};

// Compact axis-aligned parameter box; an axis with lower == upper is degenerate.
struct ParameterBox {
    Vector lower;
    Vector upper;

    Index dim() const { return lower.size(); }
    void validate() const;
    // Product of the positive axis extents (degenerate axes contribute 1).
    double measure() const;
};

// Uniform tensor grid of cell midpoints over a ParameterBox, flattened
// row-major (last axis varies fastest). Every point carries the same
// quadrature weight, and the weights sum to the box measure.
struct ParameterGrid {
    ParameterBox box;
    std::vector<Index> counts;
    std::vector<Vector> points;
    double cell_measure{1.0};

    Index size() const { return static_cast<Index>(points.size()); }
};

// Uniform partition of [0, T] into N steps; nodes t_k = k*T/N for k = 0..N.
struct TimeGrid {
    double T{0.0};
    Index N{0};
    double delta{0.0};
    std::vector<double> nodes;
};

// Initial and target state functions over the parameter box.
struct TransferSpec {
    std::function<Vector(const Vector&)> X0;
    std::function<Vector(const Vector&)> XF;
};

// Closed planar curve, periodic parametric function s in [0,1) -> R^2.
using PlanarCurve = std::function<Eigen::Vector2d(double)>;

TimeGrid make_time_grid(double T, Index N);
ParameterGrid make_parameter_grid(const ParameterBox& box, const std::vector<Index>& counts);

// Flattened index of the grid cell containing beta (per-axis floor, clamped).
// Exact for grid points themselves.
Index grid_cell_index(const ParameterGrid& grid, const Vector& beta);

// Planar rotation ensemble: n=2, m=2, d=1 with A(t,w) = [[0,-w],[w,0]], B = I.
LinearEnsembleSystem harmonic_oscillator_system();

// 4-state, 3-input, 2-parameter family
//   A(t,r,c) = A0 + A1 sin(2 pi t) + A2 r,   B(t,r,c) = B0 + B1/(1+t) + B2 c,
// with all entries standard-normal. Generator: std::mt19937_64 seeded with
// `seed`; each normal consumes two consecutive engine outputs via the
// Box-Muller cosine branch (see draw_standard_normal). Draw order: A0
// row-major, then A1, A2, B0, B1, B2.
LinearEnsembleSystem random_timevarying_system(std::uint64_t seed);

// One standard-normal draw from two consecutive engine outputs:
//   u1 = ((e >> 11) + 1) * 2^-53 in (0,1],  u2 = (e >> 11) * 2^-53 in [0,1),
//   z  = sqrt(-2 ln u1) * cos(2 pi u2).
// Fully determined by the mt19937_64 stream, hence reproducible across platforms.
double draw_standard_normal(std::mt19937_64& engine);

TransferSpec constant_transfer(const Vector& x0, const Vector& xF);

// Assigns grid point j (flattened order) the curve samples at s = j / P_total.
// Off-grid parameters map to the nearest enclosing cell's sample.
TransferSpec curve_transfer(PlanarCurve curve0, PlanarCurve curveF, const ParameterGrid& pgrid);

// Built-in closed curves: rho(theta) in polar form, theta = 2 pi s.
//   star: rho = 0.65 + 0.30 cos(5 theta) + 0.05 cos(10 theta)   (5-fold symmetric)
//   leaf: rho = 0.55 (1 + 0.85 cos theta) + 0.08 cos(6 theta)   (serrated cardioid)
//   circle: rho = 1
PlanarCurve star_curve();
PlanarCurve leaf_curve();
PlanarCurve circle_curve();

// Curve registry used by the config layer; throws ConfigError for unknown names.
PlanarCurve builtin_curve(const std::string& name);

}  // namespace ensctl
