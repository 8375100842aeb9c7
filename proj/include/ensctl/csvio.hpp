// CSV export/import for run artifacts (controls, spectra, outcomes, studies).
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ensctl/model.hpp"
#include "ensctl/synthesis.hpp"
#include "ensctl/verify.hpp"

namespace ensctl {

// All numeric fields are printed with "%.17g" so a double survives a
// write/parse round trip and identical runs produce byte-identical files.
std::string format_double(double v);

// Columns: t, u1..um; one row per sample node t_1..t_N.
void write_control_csv(const std::filesystem::path& path, const ControlSignal& control);

// Reads a file produced by write_control_csv. The header must carry exactly
// `m` channel columns, the body exactly tgrid.N rows whose time column matches
// the grid nodes; anything else throws FileMismatchError.
ControlSignal read_control_csv(const std::filesystem::path& path, const TimeGrid& tgrid,
                               Index m);

// Columns: index, singular_value, coefficient, partial_sum.  The spectrum
// table carries the signed coefficients from the synthesis report; the Picard
// table carries their magnitudes (see picard_diagnostic).
void write_spectrum_csv(const std::filesystem::path& path, const SingularSystemApprox& svd,
                        const SynthesisReport& report);
void write_picard_csv(const std::filesystem::path& path, const std::vector<PicardRow>& rows);

// One row per ensemble member: j, beta coordinates, terminal state, target
// state, member error; followed by a commented summary block with the three
// aggregate metrics.
void write_outcome_csv(const std::filesystem::path& path, const ParameterGrid& pgrid,
                       const Matrix& targets, const EnsembleOutcome& outcome);

// Columns: member, t, x1..xn; rows grouped by member, times ascending.
void write_trajectories_csv(const std::filesystem::path& path, const TrajectorySet& trajectories);

struct ConvergenceRow {
    double T{0.0};
    Index N{0};
    double delta{0.0};
    double k_norm_error{0.0};
    Index retained{0};
};

struct SlopeRow {
    double T{0.0};
    std::optional<double> slope;  // absent when fewer than two grid sizes were run
    Index num_points{0};
};

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRow>& rows);
void write_slopes_csv(const std::filesystem::path& path, const std::vector<SlopeRow>& rows);

}  // namespace ensctl
