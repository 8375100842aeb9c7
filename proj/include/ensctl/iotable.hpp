// Versioned little-endian binary dumps of flow tables and operator data.
#pragma once

#include <cstdint>
#include <filesystem>

#include "ensctl/flow.hpp"
#include "ensctl/operator.hpp"

namespace ensctl {

// FNV-1a over the defining scalars of a grid, used to tie a dump to the grids
// it was computed on.
std::uint64_t hash_time_grid(const TimeGrid& tgrid);
std::uint64_t hash_parameter_grid(const ParameterGrid& pgrid);

// File layout: 8-byte magic, then u64 header words (kind, n, cols, P_total,
// N, tgrid_hash, pgrid_hash), then the payload as row-major 8-byte floats.
// Readers validate the header against the supplied grids and throw
// FileMismatchError on any disagreement.
void write_flow_table(const std::filesystem::path& path, const FlowTable& table);
FlowTable read_flow_table(const std::filesystem::path& path, const ParameterGrid& pgrid,
                          const TimeGrid& tgrid);

void write_operator_matrix(const std::filesystem::path& path, const OperatorMatrix& W,
                           const ParameterGrid& pgrid, const TimeGrid& tgrid);
OperatorMatrix read_operator_matrix(const std::filesystem::path& path,
                                    const ParameterGrid& pgrid, const TimeGrid& tgrid);

void write_target_vector(const std::filesystem::path& path, const TargetVector& xi,
                         const ParameterGrid& pgrid, const TimeGrid& tgrid);
TargetVector read_target_vector(const std::filesystem::path& path, const ParameterGrid& pgrid,
                                const TimeGrid& tgrid);

}  // namespace ensctl
