// flow.cpp — Dormand-Prince 5(4) stepper and flow-table construction
#include "ensctl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ensctl/parallel.hpp"

namespace ensctl {

namespace {

// Dormand-Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
// 5th-order weights (also the a7 row: first-same-as-last).
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b(5th) - b(4th): error estimator weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kShrinkMin = 0.2;
constexpr double kGrowMax = 5.0;

double step_floor(double t) {
    return 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
    if (max_step && !(*max_step > 0.0))
        throw std::invalid_argument("IntegratorConfig: max_step must be positive");
    if (initial_step && !(*initial_step > 0.0))
        throw std::invalid_argument("IntegratorConfig: initial_step must be positive");
}

AdaptiveRK::AdaptiveRK(Deriv deriv, Vector y0, double t0, const IntegratorConfig& cfg)
    : f_(std::move(deriv)), cfg_(cfg), y_(std::move(y0)), t_(t0) {
    cfg_.validate();
    const Index dim = y_.size();
    for (auto& k : k_) k.resize(dim);
    y_stage_.resize(dim);
    y_next_.resize(dim);
    y_err_.resize(dim);
}

double AdaptiveRK::error_norm() const {
    double worst = 0.0;
    for (Index i = 0; i < y_.size(); ++i) {
        const double scale =
            cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_next_[i]));
        const double ratio = std::abs(y_err_[i]) / scale;
        if (!(ratio == ratio)) return std::numeric_limits<double>::infinity();  // NaN
        worst = std::max(worst, ratio);
    }
    return worst;
}

double AdaptiveRK::initial_step_guess(double span) const {
    if (cfg_.initial_step) return std::min(*cfg_.initial_step, span);
    // scaled-norm heuristic: h ~ 0.01 |y| / |f|, bounded by the span
    double ynorm = 0.0, fnorm = 0.0;
    for (Index i = 0; i < y_.size(); ++i) {
        const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
        ynorm = std::max(ynorm, std::abs(y_[i]) / sc);
        fnorm = std::max(fnorm, std::abs(k_[0][i]) / sc);
    }
    double h = (ynorm > 1e-10 && fnorm > 1e-10) ? 0.01 * ynorm / fnorm : 1e-3 * span;
    return std::clamp(h, step_floor(t_), span);
}

void AdaptiveRK::advance(double t_target) {
    if (t_target < t_)
        throw std::invalid_argument("AdaptiveRK: cannot advance backwards");
    if (t_target == t_) return;

    if (!have_k1_) {
        f_(t_, y_, k_[0]);
        have_k1_ = true;
    }
    if (h_ == 0.0) h_ = initial_step_guess(t_target - t_);

    while (t_ < t_target) {
        const double span = t_target - t_;
        double h = std::min(h_, span);
        if (cfg_.max_step) h = std::min(h, *cfg_.max_step);
        if (h < step_floor(t_) && h < span)
            throw IntegrationError("adaptive step size underflow at t=" + std::to_string(t_), t_);

        const double t = t_;
        y_stage_ = y_ + h * (a21 * k_[0]);
        f_(t + c2 * h, y_stage_, k_[1]);
        y_stage_ = y_ + h * (a31 * k_[0] + a32 * k_[1]);
        f_(t + c3 * h, y_stage_, k_[2]);
        y_stage_ = y_ + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
        f_(t + c4 * h, y_stage_, k_[3]);
        y_stage_ = y_ + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
        f_(t + c5 * h, y_stage_, k_[4]);
        y_stage_ = y_ + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
        f_(t + h, y_stage_, k_[5]);
        y_next_ = y_ + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
        f_(t + h, y_next_, k_[6]);
        y_err_ = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);

        const double err = error_norm();
        if (err <= 1.0) {
            t_ = (h == span) ? t_target : t_ + h;
            y_.swap(y_next_);
            k_[0].swap(k_[6]);  // FSAL
            double grow = (err == 0.0) ? kGrowMax
                                       : std::min(kGrowMax, kSafety * std::pow(err, -0.2));
            if (last_rejected_) grow = std::min(grow, 1.0);
            h_ = h * std::max(grow, kShrinkMin);
            last_rejected_ = false;
        } else {
            const double shrink = std::isfinite(err)
                                      ? std::max(kShrinkMin, kSafety * std::pow(err, -0.2))
                                      : kShrinkMin;
            h_ = h * shrink;
            last_rejected_ = true;
        }
    }
}

namespace {

AdaptiveRK::Deriv adjoint_matrix_deriv(const LinearEnsembleSystem& system, Vector beta, int n) {
    return [&system, beta = std::move(beta), n](double t, const Vector& y, Vector& dydt) {
        Eigen::Map<const Matrix> Psi(y.data(), n, n);
        Eigen::Map<Matrix> dPsi(dydt.data(), n, n);
        dPsi = -(Psi * system.eval_A(t, beta));
    };
}

}  // namespace

std::vector<Matrix> inverse_flow_trajectory(const LinearEnsembleSystem& system,
                                            const Vector& beta, const TimeGrid& tgrid,
                                            const IntegratorConfig& cfg) {
    const int n = system.n;
    std::vector<Matrix> out;
    out.reserve(static_cast<size_t>(tgrid.N) + 1);
    out.push_back(Matrix::Identity(n, n));

    Vector y0(static_cast<Index>(n) * n);
    Eigen::Map<Matrix>(y0.data(), n, n) = Matrix::Identity(n, n);
    AdaptiveRK rk(adjoint_matrix_deriv(system, beta, n), std::move(y0), 0.0, cfg);

    for (Index k = 1; k <= tgrid.N; ++k) {
        rk.advance(tgrid.nodes[static_cast<size_t>(k)]);
        Matrix Psi = Eigen::Map<const Matrix>(rk.state().data(), n, n);
        if (!Psi.allFinite())
            throw IntegrationError("non-finite inverse flow at t=" + std::to_string(rk.time()),
                                   rk.time());
        out.push_back(std::move(Psi));
    }
    return out;
}

Matrix forward_flow_step(const LinearEnsembleSystem& system, const Vector& beta, double t_a,
                         double t_b, const Matrix& M0, const IntegratorConfig& cfg) {
    if (t_a > t_b) throw std::invalid_argument("forward_flow_step: t_a must be <= t_b");
    if (M0.rows() != system.n)
        throw std::invalid_argument("forward_flow_step: M0 row count != state dimension");
    if (t_a == t_b) return M0;

    const Index rows = M0.rows(), cols = M0.cols();
    Vector y0(rows * cols);
    Eigen::Map<Matrix>(y0.data(), rows, cols) = M0;
    auto deriv = [&system, &beta, rows, cols](double t, const Vector& y, Vector& dydt) {
        Eigen::Map<const Matrix> M(y.data(), rows, cols);
        Eigen::Map<Matrix> dM(dydt.data(), rows, cols);
        dM = system.eval_A(t, beta) * M;
    };
    AdaptiveRK rk(deriv, std::move(y0), t_a, cfg);
    rk.advance(t_b);
    return Eigen::Map<const Matrix>(rk.state().data(), rows, cols);
}

FlowTable build_flow_table(const LinearEnsembleSystem& system, const ParameterGrid& pgrid,
                           const TimeGrid& tgrid, const IntegratorConfig& cfg, int threads) {
    FlowTable table;
    table.n = system.n;
    table.pgrid = pgrid;
    table.tgrid = tgrid;
    table.inverse_flows.resize(static_cast<size_t>(pgrid.size() * (tgrid.N + 1)));

    parallel_for(pgrid.size(), threads, [&](Index j) {
        const Vector& beta = pgrid.points[static_cast<size_t>(j)];
        std::vector<Matrix> traj;
        try {
            traj = inverse_flow_trajectory(system, beta, tgrid, cfg);
        } catch (const IntegrationError& err) {
            std::ostringstream msg;
            msg << err.what() << " (parameter point j=" << j << ")";
            throw IntegrationError(msg.str(), err.time,
                                   std::vector<double>(beta.data(), beta.data() + beta.size()));
        }
        for (Index k = 0; k <= tgrid.N; ++k)
            table.inverse_flows[static_cast<size_t>(j * (tgrid.N + 1) + k)] =
                std::move(traj[static_cast<size_t>(k)]);
    });
    return table;
}

}  // namespace ensctl
