// synthesis.cpp — truncated-SVD synthesis of the minimum-norm control
#include "ensctl/synthesis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ensctl {

SingularSystemApprox compute_svd(const OperatorMatrix& W) {
    if (!W.data.allFinite())
        throw DecompositionError("compute_svd: operator matrix has non-finite entries");

    Eigen::BDCSVD<Matrix> svd(W.data, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw DecompositionError("compute_svd: SVD kernel failed to converge");

    const Vector& s = svd.singularValues();
    Index r = 0;
    while (r < s.size() && s[r] > 0.0) ++r;

    SingularSystemApprox out;
    out.rank_bound = r;
    out.singular_values = s.head(r);
    out.left_vectors = svd.matrixU().leftCols(r);
    out.right_vectors = svd.matrixV().leftCols(r);
    return out;
}

Index choose_truncation(const Vector& singular_values, double ratio_cap,
                        std::optional<Index> hard_cap) {
    if (singular_values.size() == 0)
        throw std::invalid_argument("choose_truncation: empty spectrum");
    if (!(ratio_cap > 1.0))
        throw std::invalid_argument("choose_truncation: ratio_cap must exceed 1");

    const double s1 = singular_values[0];
    Index J = 0;
    while (J < singular_values.size() && s1 / singular_values[J] < ratio_cap) ++J;
    if (hard_cap) J = std::min(J, std::max<Index>(*hard_cap, 1));
    return J;
}

Vector ControlSignal::eval(double t) const {
    const Index N = samples.rows();
    if (N == 0) return Vector::Zero(samples.cols());
    if (t <= tgrid.nodes[1]) return samples.row(0);  // constant extension on [0, t_1]

    // samples row i corresponds to node t_{i+1}
    Index k = static_cast<Index>(std::floor(t / tgrid.delta));
    k = std::clamp<Index>(k, 1, N - 1);
    const double tk = tgrid.nodes[static_cast<size_t>(k)];
    const double theta = std::clamp((t - tk) / tgrid.delta, 0.0, 1.0);
    return (1.0 - theta) * samples.row(k - 1) + theta * samples.row(k);
}

std::pair<ControlSignal, SynthesisReport> synthesize_control(const SingularSystemApprox& svd,
                                                             const OperatorMatrix& W,
                                                             const TargetVector& xi, Index J,
                                                             const TimeGrid& tgrid) {
    if (J < 0 || J > svd.rank_bound)
        throw std::invalid_argument("synthesize_control: J exceeds retained spectrum");
    if (xi.data.size() != W.data.rows())
        throw std::invalid_argument("synthesize_control: target length mismatch");
    if (tgrid.N != W.N)
        throw std::invalid_argument("synthesize_control: time grid does not match W");

    SynthesisReport report;
    report.truncation_count = J;
    report.coefficients = svd.left_vectors.transpose() * xi.data;

    report.picard_partial_sums.resize(svd.rank_bound);
    double running = 0.0;
    for (Index j = 0; j < svd.rank_bound; ++j) {
        const double term = report.coefficients[j] / svd.singular_values[j];
        running += term * term;
        report.picard_partial_sums[j] = running;
    }

    Vector g = Vector::Zero(W.data.cols());
    if (J > 0) {
        const Vector weights =
            (report.coefficients.head(J).array() / svd.singular_values.head(J).array()).matrix();
        g = svd.right_vectors.leftCols(J) * weights;
        report.condition_ratio = svd.singular_values[0] / svd.singular_values[J - 1];
    }
    report.residual_norm = (W.data * g - xi.data).norm();
    report.target_norm = xi.data.norm();

    ControlSignal control;
    control.tgrid = tgrid;
    control.samples.resize(W.N, W.m);
    for (Index k = 0; k < W.N; ++k) control.samples.row(k) = g.segment(k * W.m, W.m);
    return {std::move(control), std::move(report)};
}

std::vector<PicardRow> picard_diagnostic(const SynthesisReport& report,
                                         const SingularSystemApprox& svd) {
    std::vector<PicardRow> rows;
    rows.reserve(static_cast<size_t>(svd.rank_bound));
    for (Index j = 0; j < svd.rank_bound; ++j)
        rows.push_back({j + 1, svd.singular_values[j], std::abs(report.coefficients[j]),
                        report.picard_partial_sums[j]});
    return rows;
}

}  // namespace ensctl
