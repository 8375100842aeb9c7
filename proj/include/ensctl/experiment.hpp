// Config schema, built-in presets, and the pipeline runners behind the CLI.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ensctl/csvio.hpp"
#include "ensctl/flow.hpp"
#include "ensctl/model.hpp"
#include "ensctl/operator.hpp"
#include "ensctl/synthesis.hpp"
#include "ensctl/verify.hpp"

namespace ensctl {

// Time-gridded matrix samples, linearly interpolated and clamped at the ends.
struct MatrixTable {
    std::vector<double> times;
    std::vector<Matrix> values;

    Matrix at(double t) const;
};

// System selector: a builtin family, a constant (A, B) pair, or interpolated
// matrix tables. Constant and table systems do not depend on the parameter,
// but are still swept over the configured box.
struct SystemSelector {
    std::string kind;  // harmonic_oscillator | random_timevarying | constant | tables
    std::uint64_t seed{1};
    Matrix A;              // constant
    Matrix B;              // constant
    MatrixTable A_table;   // tables
    MatrixTable B_table;   // tables
};

struct TransferSelector {
    std::string kind;  // constant | curves
    Vector x0;
    Vector xF;
    std::string initial_curve;  // builtin curve names for kind == curves
    std::string target_curve;
};

struct ExperimentConfig {
    int version{1};
    std::string label;  // preset name or config file stem, echoed in the report
    SystemSelector system;
    ParameterBox box;
    std::vector<Index> counts;
    double T{1.0};
    Index N{0};
    TransferSelector transfer;
    IntegratorConfig integrator;
    double ratio_cap{1e4};
    std::optional<Index> hard_cap;
    std::filesystem::path output_dir{"out"};
    Index trajectory_stride{0};  // 0 = no trajectory dump
    int threads{0};              // 0 = hardware concurrency
    bool dump_operator{false};   // also write W / xi as binary tables
};

// Builds the runtime system behind the selector; `d` is the parameter
// dimension implied by the box (builtins must agree with it).
LinearEnsembleSystem make_system(const SystemSelector& selector, Index d);

TransferSpec make_transfer(const TransferSelector& selector, const LinearEnsembleSystem& system,
                           const ParameterGrid& pgrid);

// Full structural validation. Throws ConfigError naming the offending field,
// or ShapeError when n*P_total > m*N — all before any flow computation.
void validate_config(const ExperimentConfig& cfg);

// Named paper-scale experiment setups: fig1 | fig2 | fig3 | fig4 | null.
ExperimentConfig preset_config(const std::string& name);

// Reads a JSON config file (schema in README). Throws ConfigError on parse or
// schema errors; does not run validate_config.
ExperimentConfig load_config(const std::filesystem::path& path);

struct StageTimings {
    double flow_seconds{0.0};
    double assemble_seconds{0.0};
    double svd_seconds{0.0};
    double synthesis_seconds{0.0};
    double verify_seconds{0.0};
};

struct SynthesisRun {
    ParameterGrid pgrid;
    TimeGrid tgrid;
    Index operator_rows{0};
    Index operator_cols{0};
    SingularSystemApprox svd;
    Index retained{0};
    ControlSignal control;
    SynthesisReport report;
    StageTimings timings;
};

struct VerificationRun {
    ParameterGrid pgrid;
    Matrix targets;  // P_total x n, XF(beta_j) by rows
    EnsembleOutcome outcome;
    StageTimings timings;
};

// flows -> W, xi -> SVD -> truncation -> control. Validates the config first.
// When cfg.dump_operator is set, writes operator.bin / target.bin into
// cfg.output_dir while the assembled tables are still in scope.
SynthesisRun run_synthesis(const ExperimentConfig& cfg);

// Simulates every member under `control` and aggregates the error metrics.
// The control must live on the config's time grid.
VerificationRun run_verification(const ExperimentConfig& cfg, const ControlSignal& control);

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;   // T-major, N ascending within each T
    std::vector<SlopeRow> slopes;       // log-log slope of error vs delta, per T
};

// Re-runs synthesize+verify over the (T, N) product. Every pair must satisfy
// the shape constraint. The fitted slope is d log(error) / d log(delta),
// so first-order convergence shows up as a slope near +1; it is omitted for
// a single N.
ConvergenceStudy run_convergence(const ExperimentConfig& base, const std::vector<double>& T_list,
                                 const std::vector<Index>& N_list);

// Artifact writers; all create cfg.output_dir as needed.
// Synthesis: control.csv, spectrum.csv, picard.csv, report.txt.
// Verification: outcome.csv (+ trajectories.csv when recorded).
// Convergence: convergence.csv, slopes.csv.
void write_synthesis_artifacts(const ExperimentConfig& cfg, const SynthesisRun& run);
void write_verification_artifacts(const ExperimentConfig& cfg, const VerificationRun& run);
void write_convergence_artifacts(const ExperimentConfig& cfg, const ConvergenceStudy& study);

}  // namespace ensctl
