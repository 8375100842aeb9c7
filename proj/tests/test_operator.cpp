#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <numbers>

#include "ensctl/operator.hpp"
#include "support/oracles.hpp"

using namespace ensctl;

namespace {

ParameterGrid point_grid(double value) {
    ParameterBox box;
    box.lower = Vector::Constant(1, value);
    box.upper = Vector::Constant(1, value);
    return make_parameter_grid(box, {1});
}

ParameterGrid osc_grid(Index count) {
    ParameterBox box;
    box.lower = Vector::Constant(1, 1.0);
    box.upper = Vector::Constant(1, 3.0);
    return make_parameter_grid(box, {count});
}

Vector stack_samples(const std::function<Vector(double)>& u, const TimeGrid& tgrid, Index m) {
    Vector g(m * tgrid.N);
    for (Index k = 1; k <= tgrid.N; ++k)
        g.segment((k - 1) * m, m) = u(tgrid.nodes[static_cast<size_t>(k)]);
    return g;
}

}  // namespace

TEST_CASE("operator dimensions and metadata") {
    LinearEnsembleSystem sys = harmonic_oscillator_system();
    ParameterGrid pgrid = osc_grid(3);
    TimeGrid tgrid = make_time_grid(1.0, 10);
    FlowTable flows = build_flow_table(sys, pgrid, tgrid, IntegratorConfig{});
    OperatorMatrix W = assemble_operator(sys, flows, tgrid, pgrid);
    CHECK(W.n == 2);
    CHECK(W.m == 2);
    CHECK(W.N == 10);
    CHECK(W.P_total == 3);
    CHECK(W.delta == tgrid.delta);
    CHECK(W.data.rows() == 6);
    CHECK(W.data.cols() == 20);
}

TEST_CASE("zero input matrix yields the zero operator") {
    LinearEnsembleSystem sys = harmonic_oscillator_system();
    sys.eval_B = [](double, const Vector&) { return Matrix::Zero(2, 2); };
    ParameterGrid pgrid = osc_grid(2);
    TimeGrid tgrid = make_time_grid(1.0, 6);
    FlowTable flows = build_flow_table(sys, pgrid, tgrid, IntegratorConfig{});
    OperatorMatrix W = assemble_operator(sys, flows, tgrid, pgrid);
    CHECK(W.data.isZero(0.0));
}

TEST_CASE("oscillator blocks are scaled rotations") {
    LinearEnsembleSystem sys = harmonic_oscillator_system();
    ParameterGrid pgrid = osc_grid(3);
    TimeGrid tgrid = make_time_grid(1.0, 8);
    FlowTable flows = build_flow_table(sys, pgrid, tgrid, IntegratorConfig{});
    OperatorMatrix W = assemble_operator(sys, flows, tgrid, pgrid);
    for (Index j = 0; j < pgrid.size(); ++j) {
        const double w = pgrid.points[static_cast<size_t>(j)][0];
        for (Index k = 1; k <= tgrid.N; ++k) {
            Matrix closed_form =
                tgrid.delta * oracle::rotation(-w * tgrid.nodes[static_cast<size_t>(k)]);
            CHECK((W.block(j, k) - closed_form).norm() < 1e-6);
        }
    }
}

TEST_CASE("blocks reproduce the defining product bitwise") {
    LinearEnsembleSystem sys = random_timevarying_system(9);
    ParameterBox box;
    box.lower = (Vector(2) << -0.01, -0.1).finished();
    box.upper = (Vector(2) << 0.01, 0.1).finished();
    ParameterGrid pgrid = make_parameter_grid(box, {2, 2});
    TimeGrid tgrid = make_time_grid(1.0, 6);
    FlowTable flows = build_flow_table(sys, pgrid, tgrid, IntegratorConfig{});
    OperatorMatrix W = assemble_operator(sys, flows, tgrid, pgrid);
    for (Index j = 0; j < pgrid.size(); ++j) {
        const Vector& beta = pgrid.points[static_cast<size_t>(j)];
        for (Index k = 1; k <= tgrid.N; ++k) {
            const double tk = tgrid.nodes[static_cast<size_t>(k)];
            const Matrix B = sys.eval_B(tk, beta);
            Matrix expected = tgrid.delta * (flows.psi(j, k) * B);
            CHECK(W.block(j, k) == expected);
        }
    }
}

TEST_CASE("scalar drift-free system gives a constant row of step weights") {
    LinearEnsembleSystem sys;
    sys.n = 1;
    sys.m = 1;
    sys.d = 1;
    sys.eval_A = [](double, const Vector&) { return Matrix::Zero(1, 1); };
    sys.eval_B = [](double, const Vector&) { return Matrix::Identity(1, 1); };
    sys.label = "integrator";
    ParameterGrid pgrid = point_grid(0.0);
    TimeGrid tgrid = make_time_grid(2.0, 4);
    FlowTable flows = build_flow_table(sys, pgrid, tgrid, IntegratorConfig{});
    OperatorMatrix W = assemble_operator(sys, flows, tgrid, pgrid);
    REQUIRE(W.data.rows() == 1);
    REQUIRE(W.data.cols() == 4);
    for (Index c = 0; c < 4; ++c) CHECK(W.data(0, c) == tgrid.delta);
}

TEST_CASE("target assembly follows its definition") {
    LinearEnsembleSystem sys = harmonic_oscillator_system();
    ParameterGrid pgrid = osc_grid(2);
    TimeGrid tgrid = make_time_grid(1.0, 6);
    FlowTable flows = build_flow_table(sys, pgrid, tgrid, IntegratorConfig{});

    SUBCASE("zero target reduces to minus the initial state") {
        TransferSpec spec;
        spec.X0 = [](const Vector& beta) { return (Vector(2) << beta[0], 2.0 * beta[0]).finished(); };
        spec.XF = [](const Vector&) { return Vector::Zero(2); };
        TargetVector xi = assemble_target(sys, flows, spec, pgrid, tgrid);
        CHECK(xi.n == 2);
        CHECK(xi.P_total == 2);
        REQUIRE(xi.data.size() == 4);
        for (Index j = 0; j < 2; ++j) {
            const double w = pgrid.points[static_cast<size_t>(j)][0];
            CHECK(xi.block(j)[0] == -w);
            CHECK(xi.block(j)[1] == -2.0 * w);
        }
    }

    SUBCASE("fixed point of a drift-free system vanishes") {
        LinearEnsembleSystem still = sys;
        still.eval_A = [](double, const Vector&) { return Matrix::Zero(2, 2); };
        FlowTable flat = build_flow_table(still, pgrid, tgrid, IntegratorConfig{});
        Vector c = (Vector(2) << 0.3, -1.2).finished();
        TargetVector xi = assemble_target(still, flat, constant_transfer(c, c), pgrid, tgrid);
        CHECK(xi.data.isZero(0.0));
    }

    SUBCASE("quarter-turn oscillator matches the rotation oracle") {
        ParameterGrid quarter = point_grid(std::numbers::pi / 2.0);
        FlowTable qflows = build_flow_table(sys, quarter, tgrid, IntegratorConfig{});
        Vector x0 = (Vector(2) << 1.0, 0.0).finished();
        Vector xF = (Vector(2) << 0.0, 1.0).finished();
        TargetVector xi = assemble_target(sys, qflows, constant_transfer(x0, xF), quarter, tgrid);
        Vector expected = oracle::rotation(-std::numbers::pi / 2.0) * xF - x0;
        CHECK((xi.block(0) - expected).norm() < 1e-6);
        CHECK(expected.norm() < 1e-12);  // this transfer is reachable with zero control
    }
}

TEST_CASE("overdetermined shapes are rejected") {
    LinearEnsembleSystem sys = harmonic_oscillator_system();
    ParameterGrid pgrid = osc_grid(3);  // rows = 6
    TimeGrid tgrid = make_time_grid(1.0, 2);  // cols = 4
    FlowTable flows = build_flow_table(sys, pgrid, tgrid, IntegratorConfig{});
    bool thrown = false;
    try {
        assemble_operator(sys, flows, tgrid, pgrid);
    } catch (const ShapeError& err) {
        thrown = true;
        CHECK(std::string(err.what()).find("overdetermined") != std::string::npos);
    }
    CHECK(thrown);
}

TEST_CASE("stale flow tables are rejected") {
    LinearEnsembleSystem sys = harmonic_oscillator_system();
    ParameterGrid pgrid = osc_grid(2);
    TimeGrid tgrid = make_time_grid(1.0, 8);
    FlowTable flows = build_flow_table(sys, pgrid, tgrid, IntegratorConfig{});

    TimeGrid other_t = make_time_grid(1.0, 10);
    CHECK_THROWS_AS(assemble_operator(sys, flows, other_t, pgrid), std::invalid_argument);
    ParameterGrid other_p = osc_grid(3);
    CHECK_THROWS_AS(assemble_operator(sys, flows, tgrid, other_p), std::invalid_argument);
    TransferSpec spec = constant_transfer(Vector::Zero(2), Vector::Zero(2));
    CHECK_THROWS_AS(assemble_target(sys, flows, spec, pgrid, other_t), std::invalid_argument);
}

TEST_CASE("discretization converges to the integral operator at first order") {
    LinearEnsembleSystem sys = harmonic_oscillator_system();
    ParameterGrid pgrid = point_grid(2.0);
    const double w = 2.0;
    auto u = [](double t) {
        return (Vector(2) << std::sin(t), std::cos(2.0 * t)).finished();
    };
    auto integrand = [&](double s) -> Vector {
        return oracle::rotation(-w * s) * u(s);
    };
    Vector exact = oracle::simpson(integrand, 0.0, 1.0, 4000);

    IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-13;
    auto riemann_error = [&](Index N) {
        TimeGrid tgrid = make_time_grid(1.0, N);
        FlowTable flows = build_flow_table(sys, pgrid, tgrid, cfg);
        OperatorMatrix W = assemble_operator(sys, flows, tgrid, pgrid);
        Vector g = stack_samples(u, tgrid, 2);
        return (W.data * g - exact).norm();
    };
    const double coarse = riemann_error(100);
    const double fine = riemann_error(200);
    CHECK(coarse > 0.0);
    const double ratio = coarse / fine;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);
}
