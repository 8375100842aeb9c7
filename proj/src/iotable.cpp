#include "ensctl/iotable.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "ensctl/errors.hpp"

namespace ensctl {

namespace {

constexpr char kMagic[8] = {'E', 'N', 'S', 'C', 'T', 'B', 'L', '1'};
constexpr std::uint64_t kKindFlowTable = 1;
constexpr std::uint64_t kKindOperator = 2;
constexpr std::uint64_t kKindTarget = 3;

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
        h ^= (word >> (8 * b)) & 0xff;
        h *= 0x100000001b3ULL;
    }
}

void fnv_mix(std::uint64_t& h, double v) { fnv_mix(h, std::bit_cast<std::uint64_t>(v)); }

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

struct Header {
    std::uint64_t kind{0};
    std::uint64_t n{0};
    std::uint64_t cols{0};
    std::uint64_t P_total{0};
    std::uint64_t N{0};
    std::uint64_t tgrid_hash{0};
    std::uint64_t pgrid_hash{0};
};

void put_u64(std::ostream& out, std::uint64_t word) {
    char buf[8];
    for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((word >> (8 * b)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in, const std::filesystem::path& path) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8))
        throw FileMismatchError("truncated table file: " + path.string());
    std::uint64_t word = 0;
    for (int b = 0; b < 8; ++b) word |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
    return word;
}

void put_doubles_row_major(std::ostream& out, const Matrix& M) {
    for (Index r = 0; r < M.rows(); ++r)
        for (Index c = 0; c < M.cols(); ++c)
            put_u64(out, std::bit_cast<std::uint64_t>(M(r, c)));
}

void get_doubles_row_major(std::istream& in, const std::filesystem::path& path, Matrix& M) {
    for (Index r = 0; r < M.rows(); ++r)
        for (Index c = 0; c < M.cols(); ++c)
            M(r, c) = std::bit_cast<double>(get_u64(in, path));
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

void write_header(std::ostream& out, const Header& h) {
    out.write(kMagic, 8);
    put_u64(out, h.kind);
    put_u64(out, h.n);
    put_u64(out, h.cols);
    put_u64(out, h.P_total);
    put_u64(out, h.N);
    put_u64(out, h.tgrid_hash);
    put_u64(out, h.pgrid_hash);
}

Header read_header(std::istream& in, const std::filesystem::path& path,
                   std::uint64_t expected_kind) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw FileMismatchError("not an ensctl table file: " + path.string());
    Header h;
    h.kind = get_u64(in, path);
    h.n = get_u64(in, path);
    h.cols = get_u64(in, path);
    h.P_total = get_u64(in, path);
    h.N = get_u64(in, path);
    h.tgrid_hash = get_u64(in, path);
    h.pgrid_hash = get_u64(in, path);
    if (h.kind != expected_kind)
        throw FileMismatchError("table file holds a different payload kind: " + path.string());
    return h;
}

void check_grid_hashes(const Header& h, const ParameterGrid& pgrid, const TimeGrid& tgrid,
                       const std::filesystem::path& path) {
    if (h.tgrid_hash != hash_time_grid(tgrid) || h.pgrid_hash != hash_parameter_grid(pgrid))
        throw FileMismatchError("table file was produced on different grids: " + path.string());
}

}  // namespace

std::uint64_t hash_time_grid(const TimeGrid& tgrid) {
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, tgrid.T);
    fnv_mix(h, static_cast<std::uint64_t>(tgrid.N));
    return h;
}

std::uint64_t hash_parameter_grid(const ParameterGrid& pgrid) {
    std::uint64_t h = kFnvOffset;
    fnv_mix(h, static_cast<std::uint64_t>(pgrid.box.dim()));
    for (Index a = 0; a < pgrid.box.dim(); ++a) {
        fnv_mix(h, pgrid.box.lower[a]);
        fnv_mix(h, pgrid.box.upper[a]);
        fnv_mix(h, static_cast<std::uint64_t>(pgrid.counts[static_cast<size_t>(a)]));
    }
    return h;
}

void write_flow_table(const std::filesystem::path& path, const FlowTable& table) {
    Header h;
    h.kind = kKindFlowTable;
    h.n = static_cast<std::uint64_t>(table.n);
    h.cols = static_cast<std::uint64_t>(table.n);
    h.P_total = static_cast<std::uint64_t>(table.pgrid.size());
    h.N = static_cast<std::uint64_t>(table.tgrid.N);
    h.tgrid_hash = hash_time_grid(table.tgrid);
    h.pgrid_hash = hash_parameter_grid(table.pgrid);
    auto out = open_out(path);
    write_header(out, h);
    for (const Matrix& M : table.inverse_flows) put_doubles_row_major(out, M);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

FlowTable read_flow_table(const std::filesystem::path& path, const ParameterGrid& pgrid,
                          const TimeGrid& tgrid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileMismatchError("cannot open table file: " + path.string());
    Header h = read_header(in, path, kKindFlowTable);
    check_grid_hashes(h, pgrid, tgrid, path);
    if (h.P_total != static_cast<std::uint64_t>(pgrid.size()) ||
        h.N != static_cast<std::uint64_t>(tgrid.N) || h.n != h.cols || h.n == 0)
        throw FileMismatchError("table file dimensions disagree with grids: " + path.string());

    FlowTable table;
    table.n = static_cast<int>(h.n);
    table.pgrid = pgrid;
    table.tgrid = tgrid;
    table.inverse_flows.resize(static_cast<size_t>(pgrid.size()) *
                               static_cast<size_t>(tgrid.N + 1));
    for (Matrix& M : table.inverse_flows) {
        M.resize(static_cast<Index>(h.n), static_cast<Index>(h.n));
        get_doubles_row_major(in, path, M);
    }
    return table;
}

void write_operator_matrix(const std::filesystem::path& path, const OperatorMatrix& W,
                           const ParameterGrid& pgrid, const TimeGrid& tgrid) {
    Header h;
    h.kind = kKindOperator;
    h.n = static_cast<std::uint64_t>(W.n);
    h.cols = static_cast<std::uint64_t>(W.m);
    h.P_total = static_cast<std::uint64_t>(W.P_total);
    h.N = static_cast<std::uint64_t>(W.N);
    h.tgrid_hash = hash_time_grid(tgrid);
    h.pgrid_hash = hash_parameter_grid(pgrid);
    auto out = open_out(path);
    write_header(out, h);
    put_doubles_row_major(out, W.data);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

OperatorMatrix read_operator_matrix(const std::filesystem::path& path,
                                    const ParameterGrid& pgrid, const TimeGrid& tgrid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileMismatchError("cannot open table file: " + path.string());
    Header h = read_header(in, path, kKindOperator);
    check_grid_hashes(h, pgrid, tgrid, path);
    if (h.P_total != static_cast<std::uint64_t>(pgrid.size()) ||
        h.N != static_cast<std::uint64_t>(tgrid.N) || h.n == 0 || h.cols == 0)
        throw FileMismatchError("table file dimensions disagree with grids: " + path.string());

    OperatorMatrix W;
    W.n = static_cast<int>(h.n);
    W.m = static_cast<int>(h.cols);
    W.N = static_cast<Index>(h.N);
    W.P_total = static_cast<Index>(h.P_total);
    W.delta = tgrid.delta;
    W.data.resize(W.n * W.P_total, W.m * W.N);
    get_doubles_row_major(in, path, W.data);
    return W;
}

void write_target_vector(const std::filesystem::path& path, const TargetVector& xi,
                         const ParameterGrid& pgrid, const TimeGrid& tgrid) {
    Header h;
    h.kind = kKindTarget;
    h.n = static_cast<std::uint64_t>(xi.n);
    h.cols = 1;
    h.P_total = static_cast<std::uint64_t>(xi.P_total);
    h.N = static_cast<std::uint64_t>(tgrid.N);
    h.tgrid_hash = hash_time_grid(tgrid);
    h.pgrid_hash = hash_parameter_grid(pgrid);
    auto out = open_out(path);
    write_header(out, h);
    for (Index i = 0; i < xi.data.size(); ++i)
        put_u64(out, std::bit_cast<std::uint64_t>(xi.data[i]));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

TargetVector read_target_vector(const std::filesystem::path& path, const ParameterGrid& pgrid,
                                const TimeGrid& tgrid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileMismatchError("cannot open table file: " + path.string());
    Header h = read_header(in, path, kKindTarget);
    check_grid_hashes(h, pgrid, tgrid, path);
    if (h.P_total != static_cast<std::uint64_t>(pgrid.size()) || h.cols != 1 || h.n == 0)
        throw FileMismatchError("table file dimensions disagree with grids: " + path.string());

    TargetVector xi;
    xi.n = static_cast<int>(h.n);
    xi.P_total = static_cast<Index>(h.P_total);
    xi.data.resize(xi.n * xi.P_total);
    for (Index i = 0; i < xi.data.size(); ++i)
        xi.data[i] = std::bit_cast<double>(get_u64(in, path));
    return xi;
}

}  // namespace ensctl
