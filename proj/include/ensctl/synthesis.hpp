// synthesis.hpp — SVD of the operator matrix, truncation rule, and minimum-norm control
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ensctl/operator.hpp"

namespace ensctl {

// Thin SVD of W with exactly-zero values dropped; approximates the singular
// system of the underlying integral operator. Columns of left_vectors live in
// the stacked parameter space (length n*P_total), columns of right_vectors in
// the stacked control space (length m*N).
struct SingularSystemApprox {
    Vector singular_values;  // descending, strictly positive
    Matrix left_vectors;
    Matrix right_vectors;
    Index rank_bound{0};
};

SingularSystemApprox compute_svd(const OperatorMatrix& W);

// Largest J with s_1/s_J < ratio_cap, clamped to hard_cap when provided.
// Callers that do not pass hard_cap should supply m*P_total themselves when
// they want the q <= P analogue enforced.
Index choose_truncation(const Vector& singular_values, double ratio_cap = 1e4,
                        std::optional<Index> hard_cap = std::nullopt);

// m-channel control sampled at t_1..t_N (row k-1 holds u(t_k)). Evaluation is
// continuous piecewise-linear through the samples and constant on [0, t_1].
struct ControlSignal {
    Matrix samples;  // N x m
    TimeGrid tgrid;

    Index channels() const { return samples.cols(); }
    Vector eval(double t) const;
};

struct SynthesisReport {
    Index truncation_count{0};
    double condition_ratio{0.0};
    Vector coefficients;         // u_j^T xi for every retained j
    Vector picard_partial_sums;  // running sum of (coefficient_j / s_j)^2
    double residual_norm{0.0};   // ||W g* - xi||
    double target_norm{0.0};     // ||xi||
};

// g* = sum_{j<=J} (u_j^T xi / s_j) v_j, unstacked into N samples of m channels.
// The residual is evaluated against the actual W, not its SVD reconstruction.
std::pair<ControlSignal, SynthesisReport> synthesize_control(const SingularSystemApprox& svd,
                                                             const OperatorMatrix& W,
                                                             const TargetVector& xi, Index J,
                                                             const TimeGrid& tgrid);

// Coefficient-decay table for human inspection; no controllability verdict.
struct PicardRow {
    Index index;  // 1-based
    double singular_value;
    double coefficient;  // |u_j^T xi|
    double partial_sum;
};

std::vector<PicardRow> picard_diagnostic(const SynthesisReport& report,
                                         const SingularSystemApprox& svd);

}  // namespace ensctl
