// operator.cpp — assembly of the discretized operator and target
#include "ensctl/operator.hpp"

#include <sstream>
#include <stdexcept>

#include "ensctl/parallel.hpp"

namespace ensctl {

namespace {

void check_grids_match(const FlowTable& flows, const TimeGrid& tgrid,
                       const ParameterGrid& pgrid) {
    if (flows.tgrid.N != tgrid.N || flows.tgrid.T != tgrid.T)
        throw std::invalid_argument("assemble: flow table built on a different time grid");
    if (flows.pgrid.size() != pgrid.size() || flows.pgrid.counts != pgrid.counts ||
        flows.pgrid.box.lower != pgrid.box.lower || flows.pgrid.box.upper != pgrid.box.upper)
        throw std::invalid_argument("assemble: flow table built on a different parameter grid");
}

}  // namespace

OperatorMatrix assemble_operator(const LinearEnsembleSystem& system, const FlowTable& flows,
                                 const TimeGrid& tgrid, const ParameterGrid& pgrid,
                                 int threads) {
    check_grids_match(flows, tgrid, pgrid);
    const int n = system.n, m = system.m;
    const Index N = tgrid.N, P = pgrid.size();
    if (flows.n != n) throw std::invalid_argument("assemble_operator: state dimension mismatch");
    if (n * P > m * N) {
        std::ostringstream msg;
        msg << "assemble_operator: overdetermined shape, n*P_total = " << n * P
            << " > m*N = " << m * N << "; refine N or coarsen the parameter grid";
        throw ShapeError(msg.str());
    }

    OperatorMatrix W;
    W.n = n;
    W.m = m;
    W.N = N;
    W.P_total = P;
    W.delta = tgrid.delta;
    W.data.resize(n * P, m * N);

    parallel_for(P, threads, [&](Index j) {
        const Vector& beta = pgrid.points[static_cast<size_t>(j)];
        for (Index k = 1; k <= N; ++k) {
            const double tk = tgrid.nodes[static_cast<size_t>(k)];
            const Matrix B = system.eval_B(tk, beta);
            if (B.rows() != n || B.cols() != m)
                throw std::invalid_argument("assemble_operator: eval_B dimension mismatch");
            W.data.block(j * n, (k - 1) * m, n, m) = tgrid.delta * (flows.psi(j, k) * B);
        }
    });

    if (!W.data.allFinite())
        throw std::invalid_argument("assemble_operator: non-finite entries");
    return W;
}

TargetVector assemble_target(const LinearEnsembleSystem& system, const FlowTable& flows,
                             const TransferSpec& transfer, const ParameterGrid& pgrid,
                             const TimeGrid& tgrid) {
    check_grids_match(flows, tgrid, pgrid);
    const int n = system.n;
    const Index P = pgrid.size();

    TargetVector xi;
    xi.n = n;
    xi.P_total = P;
    xi.data.resize(n * P);
    for (Index j = 0; j < P; ++j) {
        const Vector& beta = pgrid.points[static_cast<size_t>(j)];
        const Vector x0 = transfer.X0(beta);
        const Vector xF = transfer.XF(beta);
        if (x0.size() != n || xF.size() != n)
            throw std::invalid_argument("assemble_target: transfer state dimension mismatch");
        xi.data.segment(j * n, n) = flows.psi(j, tgrid.N) * xF - x0;
    }
    return xi;
}

}  // namespace ensctl
