// verify.cpp — ensemble member simulation and transfer-error metrics
#include "ensctl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ensctl/parallel.hpp"

namespace ensctl {

namespace {

AdaptiveRK::Deriv state_deriv(const LinearEnsembleSystem& system, const Vector& beta,
                              const ControlSignal& control) {
    return [&system, &beta, &control](double t, const Vector& y, Vector& dydt) {
        dydt = system.eval_A(t, beta) * y + system.eval_B(t, beta) * control.eval(t);
    };
}

}  // namespace

Vector simulate_member(const LinearEnsembleSystem& system, const Vector& beta,
                       const Vector& x0, const ControlSignal& control,
                       const IntegratorConfig& cfg) {
    Matrix unused_path;
    std::vector<double> unused_times;
    return simulate_member_recorded(system, beta, x0, control, cfg, 0, unused_path,
                                    unused_times);
}

Vector simulate_member_recorded(const LinearEnsembleSystem& system, const Vector& beta,
                                const Vector& x0, const ControlSignal& control,
                                const IntegratorConfig& cfg, Index record_stride,
                                Matrix& path, std::vector<double>& times) {
    if (x0.size() != system.n)
        throw std::invalid_argument("simulate_member: initial state dimension mismatch");
    if (control.channels() != system.m)
        throw std::invalid_argument("simulate_member: control channel count mismatch");

    const TimeGrid& tgrid = control.tgrid;
    const Index N = tgrid.N;

    std::vector<Index> record_nodes;
    if (record_stride > 0) {
        for (Index k = 0; k <= N; k += record_stride) record_nodes.push_back(k);
        if (record_nodes.back() != N) record_nodes.push_back(N);
        path.resize(static_cast<Index>(record_nodes.size()), system.n);
        times.resize(record_nodes.size());
    }

    AdaptiveRK rk(state_deriv(system, beta, control), x0, 0.0, cfg);
    size_t next_record = 0;
    auto maybe_record = [&](Index k) {
        if (record_stride == 0) return;
        if (next_record < record_nodes.size() && record_nodes[next_record] == k) {
            path.row(static_cast<Index>(next_record)) = rk.state();
            times[next_record] = tgrid.nodes[static_cast<size_t>(k)];
            ++next_record;
        }
    };

    maybe_record(0);
    for (Index k = 1; k <= N; ++k) {
        rk.advance(tgrid.nodes[static_cast<size_t>(k)]);
        maybe_record(k);
    }
    if (!rk.state().allFinite())
        throw IntegrationError("non-finite state at end of simulation", rk.time(),
                               std::vector<double>(beta.data(), beta.data() + beta.size()));
    return rk.state();
}

EnsembleOutcome evaluate_transfer(const LinearEnsembleSystem& system,
                                  const ParameterGrid& pgrid, const TransferSpec& transfer,
                                  const ControlSignal& control, const IntegratorConfig& cfg,
                                  int threads, Index trajectory_stride) {
    const Index P = pgrid.size();
    const int n = system.n;

    EnsembleOutcome outcome;
    outcome.terminal_states.resize(P, n);
    outcome.member_errors.resize(P);
    std::vector<Matrix> paths;
    std::vector<double> shared_times;
    if (trajectory_stride > 0) paths.resize(static_cast<size_t>(P));

    parallel_for(P, threads, [&](Index j) {
        const Vector& beta = pgrid.points[static_cast<size_t>(j)];
        const Vector x0 = transfer.X0(beta);
        const Vector xF = transfer.XF(beta);
        if (x0.size() != n || xF.size() != n)
            throw std::invalid_argument("evaluate_transfer: transfer state dimension mismatch");

        Vector terminal;
        try {
            if (trajectory_stride > 0) {
                std::vector<double> times;
                terminal = simulate_member_recorded(system, beta, x0, control, cfg,
                                                    trajectory_stride,
                                                    paths[static_cast<size_t>(j)], times);
                if (j == 0) shared_times = std::move(times);
            } else {
                terminal = simulate_member(system, beta, x0, control, cfg);
            }
        } catch (const IntegrationError& err) {
            std::ostringstream msg;
            msg << err.what() << " (ensemble member j=" << j << ")";
            throw IntegrationError(msg.str(), err.time,
                                   std::vector<double>(beta.data(),
                                                       beta.data() + beta.size()));
        }
        outcome.terminal_states.row(j) = terminal;
        outcome.member_errors[j] = (terminal - xF).norm();
    });

    // deterministic reductions, ascending j
    double sumsq = 0.0, sum = 0.0, worst = 0.0;
    for (Index j = 0; j < P; ++j) {
        const double e = outcome.member_errors[j];
        sumsq += pgrid.cell_measure * e * e;
        sum += e;
        worst = std::max(worst, e);
    }
    outcome.k_norm_error = std::sqrt(sumsq);
    outcome.mean_error = P > 0 ? sum / static_cast<double>(P) : 0.0;
    outcome.max_error = worst;

    if (trajectory_stride > 0) {
        TrajectorySet traj;
        traj.sample_times = std::move(shared_times);
        traj.states = std::move(paths);
        outcome.trajectories = std::move(traj);
    }
    return outcome;
}

}  // namespace ensctl
