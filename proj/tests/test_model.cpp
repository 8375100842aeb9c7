#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "ensctl/model.hpp"
#include "support/oracles.hpp"

using namespace ensctl;

namespace {

ParameterBox box1d(double lo, double hi) {
    ParameterBox box;
    box.lower = Vector::Constant(1, lo);
    box.upper = Vector::Constant(1, hi);
    return box;
}

}  // namespace

TEST_CASE("make_time_grid produces uniform nodes with both endpoints") {
    TimeGrid g = make_time_grid(1.0, 4);
    CHECK(g.delta == doctest::Approx(0.25).epsilon(1e-15));
    REQUIRE(g.nodes.size() == 5);
    const double expected[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int k = 0; k <= 4; ++k) CHECK(g.nodes[k] == doctest::Approx(expected[k]).epsilon(1e-15));
    CHECK(g.nodes.front() == 0.0);
    CHECK(g.nodes.back() == 1.0);

    CHECK(make_time_grid(1.0, 20000).delta == doctest::Approx(5e-5).epsilon(1e-12));
    CHECK(make_time_grid(40.0, 20000).delta == doctest::Approx(2e-3).epsilon(1e-12));

    CHECK_THROWS_AS(make_time_grid(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(make_time_grid(-1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(make_time_grid(1.0, 0), std::invalid_argument);
}

TEST_CASE("make_parameter_grid places cell midpoints with uniform weights") {
    ParameterGrid g = make_parameter_grid(box1d(-10.0, 10.0), {4});
    REQUIRE(g.size() == 4);
    const double expected[] = {-7.5, -2.5, 2.5, 7.5};
    for (int j = 0; j < 4; ++j) CHECK(g.points[j][0] == doctest::Approx(expected[j]).epsilon(1e-15));
    CHECK(g.cell_measure == doctest::Approx(5.0).epsilon(1e-15));

    ParameterGrid degenerate = make_parameter_grid(box1d(0.0, 0.0), {1});
    REQUIRE(degenerate.size() == 1);
    CHECK(degenerate.points[0][0] == 0.0);
    CHECK(degenerate.cell_measure == 1.0);

    ParameterBox box2;
    box2.lower = (Vector(2) << -0.01, -0.1).finished();
    box2.upper = (Vector(2) << 0.01, 0.1).finished();
    ParameterGrid g2 = make_parameter_grid(box2, {8, 13});
    CHECK(g2.size() == 104);

    CHECK_THROWS_AS(make_parameter_grid(box1d(0.0, 1.0), {0}), std::invalid_argument);
    CHECK_THROWS_AS(make_parameter_grid(box1d(0.0, 1.0), {2, 2}), std::invalid_argument);
    ParameterBox bad = box1d(1.0, 0.0);
    CHECK_THROWS_AS(make_parameter_grid(bad, {2}), std::invalid_argument);
}

TEST_CASE("grid weights sum to the box measure") {
    ParameterBox box2;
    box2.lower = (Vector(2) << -0.01, -0.1).finished();
    box2.upper = (Vector(2) << 0.01, 0.1).finished();
    for (const auto& [box, counts] :
         std::vector<std::pair<ParameterBox, std::vector<Index>>>{
             {box1d(-10.0, 10.0), {20}}, {box1d(2.0, 3.5), {7}}, {box2, {8, 13}}}) {
        ParameterGrid g = make_parameter_grid(box, counts);
        double total = g.cell_measure * static_cast<double>(g.size());
        CHECK(total == doctest::Approx(box.measure()).epsilon(1e-12));
    }
}

TEST_CASE("grid flattening is row-major with the last axis fastest") {
    ParameterBox box;
    box.lower = (Vector(2) << 0.0, 0.0).finished();
    box.upper = (Vector(2) << 3.0, 8.0).finished();
    const Index c1 = 3, c2 = 4;
    ParameterGrid g = make_parameter_grid(box, {c1, c2});
    REQUIRE(g.size() == c1 * c2);
    for (Index j = 0; j < g.size(); ++j) {
        const Index i1 = j / c2, i2 = j % c2;
        CHECK(g.points[j][0] == doctest::Approx((i1 + 0.5) * (3.0 / c1)).epsilon(1e-15));
        CHECK(g.points[j][1] == doctest::Approx((i2 + 0.5) * (8.0 / c2)).epsilon(1e-15));
        CHECK(grid_cell_index(g, g.points[j]) == j);
    }
}

TEST_CASE("harmonic oscillator system matches its definition") {
    LinearEnsembleSystem sys = harmonic_oscillator_system();
    CHECK(sys.n == 2);
    CHECK(sys.m == 2);
    CHECK(sys.d == 1);

    Vector w2 = Vector::Constant(1, 2.0);
    Matrix A = sys.eval_A(0.3, w2);
    CHECK(A(0, 0) == 0.0);
    CHECK(A(0, 1) == -2.0);
    CHECK(A(1, 0) == 2.0);
    CHECK(A(1, 1) == 0.0);

    CHECK(sys.eval_A(1.7, Vector::Zero(1)).isZero(0.0));
    CHECK(sys.eval_B(0.9, w2).isIdentity(0.0));
}

TEST_CASE("evaluators are pure: repeated calls are bitwise identical") {
    LinearEnsembleSystem osc = harmonic_oscillator_system();
    LinearEnsembleSystem rnd = random_timevarying_system(42);
    Vector w = Vector::Constant(1, -3.25);
    Vector rc = (Vector(2) << 0.004, -0.07).finished();
    Matrix a0 = osc.eval_A(0.37, w);
    Matrix r0 = rnd.eval_A(0.37, rc);
    Matrix rb0 = rnd.eval_B(0.37, rc);
    for (int i = 0; i < 100; ++i) {
        CHECK(osc.eval_A(0.37, w) == a0);
        CHECK(rnd.eval_A(0.37, rc) == r0);
        CHECK(rnd.eval_B(0.37, rc) == rb0);
    }
}

namespace {

// Re-derivation of the documented generator contract, kept separate from the
// library implementation on purpose.
double contract_draw(std::mt19937_64& engine) {
    const double u1 = static_cast<double>((engine() >> 11) + 1) * 0x1p-53;
    const double u2 = static_cast<double>(engine() >> 11) * 0x1p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Matrix contract_matrix(std::mt19937_64& engine, Index rows, Index cols) {
    Matrix M(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) M(r, c) = contract_draw(engine);
    return M;
}

}  // namespace

TEST_CASE("random time-varying system follows the documented draw contract") {
    const std::uint64_t seed = 7;
    std::mt19937_64 engine(seed);
    const Matrix A0 = contract_matrix(engine, 4, 4);
    const Matrix A1 = contract_matrix(engine, 4, 4);
    const Matrix A2 = contract_matrix(engine, 4, 4);
    const Matrix B0 = contract_matrix(engine, 4, 3);
    const Matrix B1 = contract_matrix(engine, 4, 3);
    const Matrix B2 = contract_matrix(engine, 4, 3);

    LinearEnsembleSystem sys = random_timevarying_system(seed);
    CHECK(sys.n == 4);
    CHECK(sys.m == 3);
    CHECK(sys.d == 2);

    Vector origin = Vector::Zero(2);
    CHECK(sys.eval_A(0.0, origin) == A0);  // sin(0) = 0, r = 0
    CHECK(sys.eval_B(1.0, origin) == (B0 + 0.5 * B1).eval());

    Vector rc = (Vector(2) << 0.008, -0.03).finished();
    const double t = 0.21;
    Matrix expected_A = (A0 + std::sin(2.0 * std::numbers::pi * t) * A1 + rc[0] * A2).eval();
    Matrix expected_B = (B0 + (1.0 / (1.0 + t)) * B1 + rc[1] * B2).eval();
    CHECK(sys.eval_A(t, rc).isApprox(expected_A, 1e-15));
    CHECK(sys.eval_B(t, rc).isApprox(expected_B, 1e-15));
}

TEST_CASE("same seed gives bitwise-identical random systems") {
    LinearEnsembleSystem a = random_timevarying_system(123);
    LinearEnsembleSystem b = random_timevarying_system(123);
    LinearEnsembleSystem c = random_timevarying_system(124);
    Vector rc = (Vector(2) << -0.002, 0.05).finished();
    CHECK(a.eval_A(0.4, rc) == b.eval_A(0.4, rc));
    CHECK(a.eval_B(0.4, rc) == b.eval_B(0.4, rc));
    CHECK(a.eval_A(0.4, rc) != c.eval_A(0.4, rc));
}

TEST_CASE("constant transfer returns the same vectors everywhere") {
    Vector x0 = (Vector(2) << 1.0, 0.0).finished();
    Vector xF = Vector::Zero(2);
    TransferSpec spec = constant_transfer(x0, xF);
    for (double w : {-10.0, 0.0, 3.7}) {
        Vector beta = Vector::Constant(1, w);
        CHECK(spec.X0(beta) == x0);
        CHECK(spec.XF(beta) == xF);
    }
    TransferSpec null_spec = constant_transfer(Vector::Zero(2), Vector::Zero(2));
    CHECK(null_spec.X0(Vector::Zero(1)).isZero(0.0));

    Vector x4 = (Vector(4) << 0.83, 1.38, -1.06, -0.47).finished();
    Vector xF4 = (Vector(4) << -0.27, 1.10, -0.28, 0.70).finished();
    TransferSpec four = constant_transfer(x4, xF4);
    CHECK(four.X0(Vector::Zero(2)) == x4);
    CHECK(four.XF(Vector::Zero(2)) == xF4);

    CHECK_THROWS_AS(constant_transfer(Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("curve transfer samples curves in flattened grid order") {
    ParameterGrid g = make_parameter_grid(box1d(-10.0, 10.0), {8});
    TransferSpec same = curve_transfer(circle_curve(), circle_curve(), g);
    for (Index j = 0; j < g.size(); ++j) {
        Vector beta = g.points[static_cast<size_t>(j)];
        CHECK((same.X0(beta) - same.XF(beta)).norm() == 0.0);
    }

    PlanarCurve star = star_curve();
    TransferSpec spec = curve_transfer(star, leaf_curve(), g);
    for (Index j = 0; j < g.size(); ++j) {
        Vector beta = g.points[static_cast<size_t>(j)];
        Eigen::Vector2d p = star(static_cast<double>(j) / static_cast<double>(g.size()));
        CHECK(spec.X0(beta)[0] == p.x());
        CHECK(spec.X0(beta)[1] == p.y());
    }

    // Off-grid parameters hit the enclosing cell's sample.
    Vector off = Vector::Constant(1, g.points[3][0] + 0.4 * 2.5);
    CHECK(spec.X0(off) == spec.X0(g.points[3]));
}

TEST_CASE("builtin star curve is 5-fold symmetric") {
    PlanarCurve star = star_curve();
    const Eigen::Matrix2d R = oracle::rotation(2.0 * std::numbers::pi / 5.0);
    for (double s : {0.0, 0.05, 0.13, 0.42, 0.77}) {
        Eigen::Vector2d rotated = R * star(s);
        Eigen::Vector2d advanced = star(s + 0.2);
        CHECK((rotated - advanced).norm() < 1e-12);
    }
}

TEST_CASE("builtin curves close up") {
    for (const char* name : {"star", "leaf", "circle"}) {
        PlanarCurve curve = builtin_curve(name);
        Eigen::Vector2d start = curve(0.0);
        Eigen::Vector2d end = curve(std::nextafter(1.0, 0.0));
        CHECK((start - end).norm() < 1e-12);
    }
    CHECK_THROWS_AS(builtin_curve("heart"), ConfigError);
}
