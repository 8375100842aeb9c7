// verify.hpp — forward simulation of the ensemble under a synthesized control
#pragma once

#include <optional>
#include <vector>

#include "ensctl/synthesis.hpp"

namespace ensctl {

// Downsampled state histories: one (num_samples x n) block per ensemble member,
// all sharing sample_times.
struct TrajectorySet {
    std::vector<double> sample_times;
    std::vector<Matrix> states;
};

struct EnsembleOutcome {
    Matrix terminal_states;  // P_total x n
    Vector member_errors;    // ||X(T,beta_j) - XF(beta_j)||
    double k_norm_error{0.0};  // sqrt(sum_j weight_j * err_j^2), grid quadrature of ||.||_K
    double mean_error{0.0};
    double max_error{0.0};
    std::optional<TrajectorySet> trajectories;
};

// Terminal state from adaptive integration of dX/dt = A X + B u(t), X(0) = x0,
// with u evaluated through the control's interpolation rule. Integration steps
// are capped at the control breakpoints so the input is smooth within a step.
Vector simulate_member(const LinearEnsembleSystem& system, const Vector& beta,
                       const Vector& x0, const ControlSignal& control,
                       const IntegratorConfig& cfg);

// As above, additionally recording the state at every record_stride-th node
// (node 0 and node N always included) into `path` (rows = samples, cols = n).
Vector simulate_member_recorded(const LinearEnsembleSystem& system, const Vector& beta,
                                const Vector& x0, const ControlSignal& control,
                                const IntegratorConfig& cfg, Index record_stride,
                                Matrix& path, std::vector<double>& times);

// Simulates every grid member; metric reduction is sequential in ascending j,
// so results do not depend on the worker count.
EnsembleOutcome evaluate_transfer(const LinearEnsembleSystem& system,
                                  const ParameterGrid& pgrid, const TransferSpec& transfer,
                                  const ControlSignal& control, const IntegratorConfig& cfg,
                                  int threads = 0, Index trajectory_stride = 0);

}  // namespace ensctl
