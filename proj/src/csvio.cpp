#include "ensctl/csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ensctl/errors.hpp"

namespace ensctl {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& field, const std::filesystem::path& path) {
    const char* begin = field.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw FileMismatchError("non-numeric field '" + field + "' in " + path.string());
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_control_csv(const std::filesystem::path& path, const ControlSignal& control) {
    const Index N = control.samples.rows();
    const Index m = control.samples.cols();
    if (control.tgrid.N != N)
        throw std::invalid_argument("control sample count does not match its time grid");
    auto out = open_for_write(path);
    out << "t";
    for (Index c = 0; c < m; ++c) out << ",u" << (c + 1);
    out << "\n";
    for (Index k = 1; k <= N; ++k) {
        out << format_double(control.tgrid.nodes[static_cast<size_t>(k)]);
        for (Index c = 0; c < m; ++c) out << "," << format_double(control.samples(k - 1, c));
        out << "\n";
    }
}

ControlSignal read_control_csv(const std::filesystem::path& path, const TimeGrid& tgrid,
                               Index m) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileMismatchError("cannot open control file: " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw FileMismatchError("empty control file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_line(line);
    if (static_cast<Index>(header.size()) != m + 1 || header[0] != "t")
        throw FileMismatchError("control file header has " +
                                std::to_string(header.size() > 0 ? header.size() - 1 : 0) +
                                " channel columns, config expects " + std::to_string(m) +
                                ": " + path.string());

    ControlSignal control;
    control.tgrid = tgrid;
    control.samples.resize(tgrid.N, m);

    const double t_tol = 1e-12 * std::max(1.0, tgrid.T);
    Index row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row >= tgrid.N)
            throw FileMismatchError("control file has more than " + std::to_string(tgrid.N) +
                                    " sample rows: " + path.string());
        auto fields = split_line(line);
        if (static_cast<Index>(fields.size()) != m + 1)
            throw FileMismatchError("row " + std::to_string(row + 2) + " has " +
                                    std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(m + 1) + ": " + path.string());
        double t = parse_double(fields[0], path);
        double t_expected = tgrid.nodes[static_cast<size_t>(row + 1)];
        if (std::abs(t - t_expected) > t_tol)
            throw FileMismatchError("time column mismatch at row " + std::to_string(row + 2) +
                                    " (got " + fields[0] + ", grid node is " +
                                    format_double(t_expected) + "): " + path.string());
        for (Index c = 0; c < m; ++c)
            control.samples(row, c) = parse_double(fields[static_cast<size_t>(c) + 1], path);
        ++row;
    }
    if (row != tgrid.N)
        throw FileMismatchError("control file has " + std::to_string(row) +
                                " sample rows, config expects " + std::to_string(tgrid.N) +
                                ": " + path.string());
    return control;
}

void write_spectrum_csv(const std::filesystem::path& path, const SingularSystemApprox& svd,
                        const SynthesisReport& report) {
    const Index r = svd.singular_values.size();
    if (report.coefficients.size() != r || report.picard_partial_sums.size() != r)
        throw std::invalid_argument("spectrum export: report does not match decomposition size");
    auto out = open_for_write(path);
    out << "index,singular_value,coefficient,partial_sum\n";
    for (Index j = 0; j < r; ++j) {
        out << (j + 1) << "," << format_double(svd.singular_values[j]) << ","
            << format_double(report.coefficients[j]) << ","
            << format_double(report.picard_partial_sums[j]) << "\n";
    }
}

void write_picard_csv(const std::filesystem::path& path, const std::vector<PicardRow>& rows) {
    auto out = open_for_write(path);
    out << "index,singular_value,coefficient,partial_sum\n";
    for (const auto& row : rows) {
        out << row.index << "," << format_double(row.singular_value) << ","
            << format_double(row.coefficient) << "," << format_double(row.partial_sum) << "\n";
    }
}

void write_outcome_csv(const std::filesystem::path& path, const ParameterGrid& pgrid,
                       const Matrix& targets, const EnsembleOutcome& outcome) {
    const Index P = pgrid.size();
    const Index n = outcome.terminal_states.cols();
    const Index d = pgrid.box.dim();
    if (outcome.terminal_states.rows() != P || targets.rows() != P || targets.cols() != n ||
        outcome.member_errors.size() != P)
        throw std::invalid_argument("outcome export: inconsistent dimensions");

    auto out = open_for_write(path);
    out << "j";
    for (Index a = 0; a < d; ++a) out << ",beta" << (a + 1);
    for (Index i = 0; i < n; ++i) out << ",xT" << (i + 1);
    for (Index i = 0; i < n; ++i) out << ",xF" << (i + 1);
    out << ",member_error\n";
    for (Index j = 0; j < P; ++j) {
        out << j;
        for (Index a = 0; a < d; ++a)
            out << "," << format_double(pgrid.points[static_cast<size_t>(j)][a]);
        for (Index i = 0; i < n; ++i) out << "," << format_double(outcome.terminal_states(j, i));
        for (Index i = 0; i < n; ++i) out << "," << format_double(targets(j, i));
        out << "," << format_double(outcome.member_errors[j]) << "\n";
    }
    out << "# k_norm_error," << format_double(outcome.k_norm_error) << "\n";
    out << "# mean_error," << format_double(outcome.mean_error) << "\n";
    out << "# max_error," << format_double(outcome.max_error) << "\n";
}

void write_trajectories_csv(const std::filesystem::path& path,
                            const TrajectorySet& trajectories) {
    auto out = open_for_write(path);
    const size_t S = trajectories.sample_times.size();
    Index n = trajectories.states.empty() ? 0 : trajectories.states.front().cols();
    out << "member,t";
    for (Index i = 0; i < n; ++i) out << ",x" << (i + 1);
    out << "\n";
    for (size_t j = 0; j < trajectories.states.size(); ++j) {
        const Matrix& path_j = trajectories.states[j];
        if (static_cast<size_t>(path_j.rows()) != S || path_j.cols() != n)
            throw std::invalid_argument("trajectory export: inconsistent member shapes");
        for (size_t s = 0; s < S; ++s) {
            out << j << "," << format_double(trajectories.sample_times[s]);
            for (Index i = 0; i < n; ++i)
                out << "," << format_double(path_j(static_cast<Index>(s), i));
            out << "\n";
        }
    }
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRow>& rows) {
    auto out = open_for_write(path);
    out << "T,N,delta,k_norm_error,retained\n";
    for (const auto& row : rows) {
        out << format_double(row.T) << "," << row.N << "," << format_double(row.delta) << ","
            << format_double(row.k_norm_error) << "," << row.retained << "\n";
    }
}

void write_slopes_csv(const std::filesystem::path& path, const std::vector<SlopeRow>& rows) {
    auto out = open_for_write(path);
    out << "T,slope,num_points\n";
    for (const auto& row : rows) {
        out << format_double(row.T) << ",";
        if (row.slope) out << format_double(*row.slope);
        out << "," << row.num_points << "\n";
    }
}

}  // namespace ensctl
