// flow.hpp — state-transition matrices by adaptive explicit Runge-Kutta integration
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ensctl/model.hpp"

namespace ensctl {

struct IntegratorConfig {
    double rel_tol{1e-6};
    double abs_tol{1e-9};
    std::optional<double> max_step;
    std::optional<double> initial_step;

    void validate() const;
};

// Dormand-Prince 5(4) embedded pair. Steps are accepted when the per-entry
// error estimate satisfies |e_i| <= abs_tol + rel_tol * |y_i|; the propagated
// solution is the 5th-order one. advance() lands exactly on its target, so
// grid-node output needs no interpolation.
class AdaptiveRK {
  public:
    using Deriv = std::function<void(double t, const Vector& y, Vector& dydt)>;

    AdaptiveRK(Deriv deriv, Vector y0, double t0, const IntegratorConfig& cfg);

    void advance(double t_target);

    double time() const { return t_; }
    const Vector& state() const { return y_; }

  private:
    double error_norm() const;
    double initial_step_guess(double span) const;

    Deriv f_;
    IntegratorConfig cfg_;
    Vector y_;
    double t_;
    double h_{0.0};
    bool have_k1_{false};
    bool last_rejected_{false};
    Vector k_[7];
    Vector y_stage_, y_next_, y_err_;
};

// Inverse flows Psi_j(t_k) = Phi(0, t_k, beta_j) for all grid points, obtained by
// one adjoint-equation pass d Psi/dt = -Psi A(t, beta) per parameter point.
struct FlowTable {
    int n{0};
    ParameterGrid pgrid;
    TimeGrid tgrid;
    // index j*(N+1) + k
    std::vector<Matrix> inverse_flows;

    const Matrix& psi(Index j, Index k) const {
        return inverse_flows[static_cast<size_t>(j * (tgrid.N + 1) + k)];
    }
};

// Psi(t_k) for k = 0..N along one parameter point; Psi(0) = I.
std::vector<Matrix> inverse_flow_trajectory(const LinearEnsembleSystem& system,
                                            const Vector& beta, const TimeGrid& tgrid,
                                            const IntegratorConfig& cfg);

// Phi(t_b, t_a, beta) * M0 by forward integration of dM/dt = A(t, beta) M.
Matrix forward_flow_step(const LinearEnsembleSystem& system, const Vector& beta,
                         double t_a, double t_b, const Matrix& M0,
                         const IntegratorConfig& cfg);

// All P_total trajectories; independent per parameter point, parallel over j.
FlowTable build_flow_table(const LinearEnsembleSystem& system, const ParameterGrid& pgrid,
                           const TimeGrid& tgrid, const IntegratorConfig& cfg,
                           int threads = 0);

}  // namespace ensctl
