// operator.hpp — block-matrix discretization of the ensemble transfer operator
#pragma once

#include "ensctl/flow.hpp"
#include "ensctl/model.hpp"

namespace ensctl {

// Dense (n*P_total) x (m*N) matrix with n x m blocks
//   W_{jk} = delta * Phi(0, t_k, beta_j) * B(t_k, beta_j),   k = 1..N.
// Row r encodes (j, i) = (r / n, r % n); column c encodes (k, l) with
// k = 1 + c / m and l = c % m (right endpoints only, t_0 never appears).
struct OperatorMatrix {
    Matrix data;
    int n{0};
    int m{0};
    Index N{0};
    Index P_total{0};
    double delta{0.0};

    auto block(Index j, Index k) const {  // k in 1..N
        return data.block(j * n, (k - 1) * m, n, m);
    }
};

// Stacked vector with n-blocks xi(beta_j) = Phi(0,T,beta_j) XF(beta_j) - X0(beta_j),
// sharing the OperatorMatrix row layout.
struct TargetVector {
    Vector data;
    int n{0};
    Index P_total{0};

    auto block(Index j) const { return data.segment(j * n, n); }
};

// Requires n*P_total <= m*N (throws ShapeError otherwise: the synthesis formula
// presumes an underdetermined, minimum-norm problem).
OperatorMatrix assemble_operator(const LinearEnsembleSystem& system, const FlowTable& flows,
                                 const TimeGrid& tgrid, const ParameterGrid& pgrid,
                                 int threads = 0);

TargetVector assemble_target(const LinearEnsembleSystem& system, const FlowTable& flows,
                             const TransferSpec& transfer, const ParameterGrid& pgrid,
                             const TimeGrid& tgrid);

}  // namespace ensctl
