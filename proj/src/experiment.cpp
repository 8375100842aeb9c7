#include "ensctl/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ensctl/errors.hpp"
#include "ensctl/iotable.hpp"

namespace ensctl {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
}

}  // namespace

Matrix MatrixTable::at(double t) const {
    if (times.empty()) throw std::invalid_argument("empty matrix table");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    size_t hi = static_cast<size_t>(it - times.begin());
    size_t lo = hi - 1;
    double w = (t - times[lo]) / (times[hi] - times[lo]);
    return (1.0 - w) * values[lo] + w * values[hi];
}

LinearEnsembleSystem make_system(const SystemSelector& selector, Index d) {
    if (selector.kind == "harmonic_oscillator") return harmonic_oscillator_system();
    if (selector.kind == "random_timevarying") return random_timevarying_system(selector.seed);
    if (selector.kind == "constant") {
        LinearEnsembleSystem sys;
        sys.n = static_cast<int>(selector.A.rows());
        sys.m = static_cast<int>(selector.B.cols());
        sys.d = static_cast<int>(d);
        sys.label = "constant";
        Matrix A = selector.A;
        Matrix B = selector.B;
        sys.eval_A = [A](double, const Vector&) { return A; };
        sys.eval_B = [B](double, const Vector&) { return B; };
        return sys;
    }
    if (selector.kind == "tables") {
        LinearEnsembleSystem sys;
        sys.n = static_cast<int>(selector.A_table.values.front().rows());
        sys.m = static_cast<int>(selector.B_table.values.front().cols());
        sys.d = static_cast<int>(d);
        sys.label = "tables";
        MatrixTable At = selector.A_table;
        MatrixTable Bt = selector.B_table;
        sys.eval_A = [At](double t, const Vector&) { return At.at(t); };
        sys.eval_B = [Bt](double t, const Vector&) { return Bt.at(t); };
        return sys;
    }
    bad_field("system.kind", "unknown value '" + selector.kind + "'");
}

TransferSpec make_transfer(const TransferSelector& selector, const LinearEnsembleSystem& system,
                           const ParameterGrid& pgrid) {
    if (selector.kind == "constant") {
        if (selector.x0.size() != system.n)
            bad_field("transfer.x0", "length " + std::to_string(selector.x0.size()) +
                                         " does not match state dimension " +
                                         std::to_string(system.n));
        if (selector.xF.size() != system.n)
            bad_field("transfer.xF", "length " + std::to_string(selector.xF.size()) +
                                         " does not match state dimension " +
                                         std::to_string(system.n));
        return constant_transfer(selector.x0, selector.xF);
    }
    if (selector.kind == "curves") {
        if (system.n != 2)
            bad_field("transfer.kind", "curve transfers require a planar state (n = 2)");
        return curve_transfer(builtin_curve(selector.initial_curve),
                              builtin_curve(selector.target_curve), pgrid);
    }
    bad_field("transfer.kind", "unknown value '" + selector.kind + "'");
}

namespace {

void validate_system_selector(const SystemSelector& s) {
    if (s.kind == "harmonic_oscillator" || s.kind == "random_timevarying") return;
    if (s.kind == "constant") {
        if (s.A.rows() == 0 || s.A.rows() != s.A.cols())
            bad_field("system.A", "expected a nonempty square matrix");
        if (s.B.rows() != s.A.rows() || s.B.cols() == 0)
            bad_field("system.B", "expected " + std::to_string(s.A.rows()) +
                                      " rows and at least one column");
        if (!s.A.allFinite() || !s.B.allFinite())
            bad_field("system.A", "matrices must be finite");
        return;
    }
    if (s.kind == "tables") {
        const auto& At = s.A_table;
        const auto& Bt = s.B_table;
        if (At.times.empty() || At.times.size() != At.values.size())
            bad_field("system.times", "times and A values must be nonempty and aligned");
        if (Bt.times.size() != Bt.values.size() || Bt.times.empty())
            bad_field("system.times", "times and B values must be nonempty and aligned");
        if (!std::is_sorted(At.times.begin(), At.times.end()) ||
            std::adjacent_find(At.times.begin(), At.times.end()) != At.times.end())
            bad_field("system.times", "must be strictly increasing");
        Index n = At.values.front().rows();
        for (const auto& M : At.values)
            if (M.rows() != n || M.cols() != n || !M.allFinite())
                bad_field("system.A", "every table entry must be a finite " +
                                          std::to_string(n) + "x" + std::to_string(n) +
                                          " matrix");
        Index m = Bt.values.front().cols();
        for (const auto& M : Bt.values)
            if (M.rows() != n || M.cols() != m || !M.allFinite())
                bad_field("system.B", "every table entry must be finite with " +
                                          std::to_string(n) + " rows");
        return;
    }
    bad_field("system.kind", "unknown value '" + s.kind + "'");
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.version != 1)
        bad_field("version", "unsupported value " + std::to_string(cfg.version));

    const Index d = cfg.box.dim();
    if (d < 1 || cfg.box.upper.size() != d)
        bad_field("box", "lower and upper must be nonempty and the same length");
    for (Index a = 0; a < d; ++a) {
        if (!std::isfinite(cfg.box.lower[a]) || !std::isfinite(cfg.box.upper[a]))
            bad_field("box", "bounds must be finite");
        if (cfg.box.lower[a] > cfg.box.upper[a])
            bad_field("box", "lower exceeds upper on axis " + std::to_string(a));
    }
    if (static_cast<Index>(cfg.counts.size()) != d)
        bad_field("counts", "expected one entry per box axis");
    for (Index c : cfg.counts)
        if (c < 1) bad_field("counts", "entries must be at least 1");

    if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) bad_field("T", "must be positive and finite");
    if (cfg.N < 1) bad_field("N", "must be at least 1");
    try {
        cfg.integrator.validate();
    } catch (const std::exception& e) {
        bad_field("integrator", e.what());
    }
    if (!(cfg.ratio_cap > 1.0)) bad_field("ratio_cap", "must exceed 1");
    if (cfg.hard_cap && *cfg.hard_cap < 1) bad_field("hard_cap", "must be at least 1");
    if (cfg.trajectory_stride < 0) bad_field("trajectory_stride", "must be nonnegative");
    if (cfg.threads < 0) bad_field("threads", "must be nonnegative");

    validate_system_selector(cfg.system);
    LinearEnsembleSystem system = make_system(cfg.system, d);
    if (system.d != d)
        bad_field("box", "dimension " + std::to_string(d) + " does not match system '" +
                             cfg.system.kind + "' (d = " + std::to_string(system.d) + ")");

    if (cfg.transfer.kind == "constant") {
        if (cfg.transfer.x0.size() != system.n || !cfg.transfer.x0.allFinite())
            bad_field("transfer.x0", "expected a finite length-" + std::to_string(system.n) +
                                         " vector");
        if (cfg.transfer.xF.size() != system.n || !cfg.transfer.xF.allFinite())
            bad_field("transfer.xF", "expected a finite length-" + std::to_string(system.n) +
                                         " vector");
    } else if (cfg.transfer.kind == "curves") {
        if (system.n != 2)
            bad_field("transfer.kind", "curve transfers require a planar state (n = 2)");
        builtin_curve(cfg.transfer.initial_curve);
        builtin_curve(cfg.transfer.target_curve);
    } else {
        bad_field("transfer.kind", "unknown value '" + cfg.transfer.kind + "'");
    }

    Index P_total = 1;
    for (Index c : cfg.counts) P_total *= c;
    if (static_cast<Index>(system.n) * P_total > static_cast<Index>(system.m) * cfg.N) {
        std::ostringstream msg;
        msg << "overdetermined shape: n*P_total = " << system.n * P_total
            << " exceeds m*N = " << static_cast<Index>(system.m) * cfg.N
            << "; refine N or coarsen the parameter grid";
        throw ShapeError(msg.str());
    }
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.label = name;
    cfg.output_dir = std::filesystem::path("out") / name;

    auto oscillator_box = [&cfg](Index count) {
        cfg.system.kind = "harmonic_oscillator";
        cfg.box.lower = Vector::Constant(1, -10.0);
        cfg.box.upper = Vector::Constant(1, 10.0);
        cfg.counts = {count};
    };

    if (name == "fig1") {
        oscillator_box(20);
        cfg.T = 1.0;
        cfg.N = 20000;
        cfg.transfer.kind = "constant";
        cfg.transfer.x0 = (Vector(2) << 1.0, 0.0).finished();
        cfg.transfer.xF = Vector::Zero(2);
        return cfg;
    }
    if (name == "fig2") {
        oscillator_box(40);
        cfg.T = 1.0;
        cfg.N = 10000;
        cfg.transfer.kind = "constant";
        cfg.transfer.x0 = (Vector(2) << 1.0, 0.0).finished();
        cfg.transfer.xF = Vector::Zero(2);
        return cfg;
    }
    if (name == "fig3") {
        oscillator_box(89);
        cfg.T = 40.0;
        cfg.N = 20000;
        cfg.transfer.kind = "curves";
        cfg.transfer.initial_curve = "star";
        cfg.transfer.target_curve = "leaf";
        return cfg;
    }
    if (name == "fig4") {
        cfg.system.kind = "random_timevarying";
        cfg.system.seed = 1;
        cfg.box.lower = (Vector(2) << -0.01, -0.1).finished();
        cfg.box.upper = (Vector(2) << 0.01, 0.1).finished();
        cfg.counts = {8, 13};
        cfg.T = 1.0;
        cfg.N = 10000;
        cfg.transfer.kind = "constant";
        cfg.transfer.x0 = (Vector(4) << 0.83, 1.38, -1.06, -0.47).finished();
        cfg.transfer.xF = (Vector(4) << -0.27, 1.10, -0.28, 0.70).finished();
        cfg.hard_cap = 12;
        return cfg;
    }
    if (name == "null") {
        oscillator_box(4);
        cfg.T = 1.0;
        cfg.N = 100;
        cfg.transfer.kind = "constant";
        cfg.transfer.x0 = Vector::Zero(2);
        cfg.transfer.xF = Vector::Zero(2);
        return cfg;
    }
    bad_field("preset", "unknown name '" + name + "'");
}

namespace {

double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) bad_field(field, "expected a number");
    return v.get<double>();
}

Index as_integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) bad_field(field, "expected an integer");
    return v.get<Index>();
}

std::string as_string(const json& v, const std::string& field) {
    if (!v.is_string()) bad_field(field, "expected a string");
    return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& field) {
    if (!v.is_array()) bad_field(field, "expected an array of numbers");
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (const auto& entry : v) out[i++] = as_number(entry, field);
    return out;
}

Matrix as_matrix(const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) bad_field(field, "expected an array of rows");
    Index rows = static_cast<Index>(v.size());
    Index cols = -1;
    Matrix out;
    Index r = 0;
    for (const auto& row : v) {
        Vector values = as_vector(row, field);
        if (cols < 0) {
            cols = values.size();
            if (cols == 0) bad_field(field, "rows must be nonempty");
            out.resize(rows, cols);
        } else if (values.size() != cols) {
            bad_field(field, "rows must all have the same length");
        }
        out.row(r++) = values.transpose();
    }
    return out;
}

std::vector<Matrix> as_matrix_list(const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) bad_field(field, "expected an array of matrices");
    std::vector<Matrix> out;
    out.reserve(v.size());
    for (const auto& entry : v) out.push_back(as_matrix(entry, field));
    return out;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            bad_field(where.empty() ? item.key() : where + "." + item.key(),
                      "unknown field");
}

SystemSelector parse_system(const json& j) {
    if (!j.is_object()) bad_field("system", "expected an object");
    reject_unknown_keys(j, {"kind", "seed", "A", "B", "times"}, "system");
    SystemSelector s;
    if (!j.contains("kind")) bad_field("system.kind", "missing");
    s.kind = as_string(j.at("kind"), "system.kind");
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (!v.is_number_unsigned() && !v.is_number_integer())
            bad_field("system.seed", "expected an unsigned integer");
        s.seed = v.get<std::uint64_t>();
    }
    if (s.kind == "constant") {
        if (!j.contains("A")) bad_field("system.A", "missing");
        if (!j.contains("B")) bad_field("system.B", "missing");
        s.A = as_matrix(j.at("A"), "system.A");
        s.B = as_matrix(j.at("B"), "system.B");
    } else if (s.kind == "tables") {
        if (!j.contains("times")) bad_field("system.times", "missing");
        if (!j.contains("A")) bad_field("system.A", "missing");
        if (!j.contains("B")) bad_field("system.B", "missing");
        Vector times = as_vector(j.at("times"), "system.times");
        std::vector<double> tvec(times.data(), times.data() + times.size());
        s.A_table.times = tvec;
        s.A_table.values = as_matrix_list(j.at("A"), "system.A");
        s.B_table.times = tvec;
        s.B_table.values = as_matrix_list(j.at("B"), "system.B");
    }
    return s;
}

TransferSelector parse_transfer(const json& j) {
    if (!j.is_object()) bad_field("transfer", "expected an object");
    reject_unknown_keys(j, {"kind", "x0", "xF", "initial", "target"}, "transfer");
    TransferSelector t;
    if (!j.contains("kind")) bad_field("transfer.kind", "missing");
    t.kind = as_string(j.at("kind"), "transfer.kind");
    if (t.kind == "constant") {
        if (!j.contains("x0")) bad_field("transfer.x0", "missing");
        if (!j.contains("xF")) bad_field("transfer.xF", "missing");
        t.x0 = as_vector(j.at("x0"), "transfer.x0");
        t.xF = as_vector(j.at("xF"), "transfer.xF");
    } else if (t.kind == "curves") {
        if (!j.contains("initial")) bad_field("transfer.initial", "missing");
        if (!j.contains("target")) bad_field("transfer.target", "missing");
        t.initial_curve = as_string(j.at("initial"), "transfer.initial");
        t.target_curve = as_string(j.at("target"), "transfer.target");
    }
    return t;
}

IntegratorConfig parse_integrator(const json& j) {
    if (!j.is_object()) bad_field("integrator", "expected an object");
    reject_unknown_keys(j, {"rel_tol", "abs_tol", "max_step", "initial_step"}, "integrator");
    IntegratorConfig cfg;
    if (j.contains("rel_tol")) cfg.rel_tol = as_number(j.at("rel_tol"), "integrator.rel_tol");
    if (j.contains("abs_tol")) cfg.abs_tol = as_number(j.at("abs_tol"), "integrator.abs_tol");
    if (j.contains("max_step"))
        cfg.max_step = as_number(j.at("max_step"), "integrator.max_step");
    if (j.contains("initial_step"))
        cfg.initial_step = as_number(j.at("initial_step"), "integrator.initial_step");
    return cfg;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);  // allow // comments
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object: " + path.string());
    reject_unknown_keys(j,
                        {"version", "label", "system", "box", "counts", "T", "N", "transfer",
                         "integrator", "ratio_cap", "hard_cap", "output_dir",
                         "trajectory_stride", "threads", "dump_operator"},
                        "");

    ExperimentConfig cfg;
    cfg.label = path.stem().string();
    if (!j.contains("version")) bad_field("version", "missing");
    cfg.version = static_cast<int>(as_integer(j.at("version"), "version"));
    if (j.contains("label")) cfg.label = as_string(j.at("label"), "label");

    if (!j.contains("system")) bad_field("system", "missing");
    cfg.system = parse_system(j.at("system"));

    if (!j.contains("box")) bad_field("box", "missing");
    const json& box = j.at("box");
    if (!box.is_object()) bad_field("box", "expected an object");
    reject_unknown_keys(box, {"lower", "upper"}, "box");
    if (!box.contains("lower")) bad_field("box.lower", "missing");
    if (!box.contains("upper")) bad_field("box.upper", "missing");
    cfg.box.lower = as_vector(box.at("lower"), "box.lower");
    cfg.box.upper = as_vector(box.at("upper"), "box.upper");

    if (!j.contains("counts")) bad_field("counts", "missing");
    if (!j.at("counts").is_array()) bad_field("counts", "expected an array of integers");
    for (const auto& c : j.at("counts")) cfg.counts.push_back(as_integer(c, "counts"));

    if (!j.contains("T")) bad_field("T", "missing");
    cfg.T = as_number(j.at("T"), "T");
    if (!j.contains("N")) bad_field("N", "missing");
    cfg.N = as_integer(j.at("N"), "N");

    if (!j.contains("transfer")) bad_field("transfer", "missing");
    cfg.transfer = parse_transfer(j.at("transfer"));

    if (j.contains("integrator")) cfg.integrator = parse_integrator(j.at("integrator"));
    if (j.contains("ratio_cap")) cfg.ratio_cap = as_number(j.at("ratio_cap"), "ratio_cap");
    if (j.contains("hard_cap") && !j.at("hard_cap").is_null())
        cfg.hard_cap = as_integer(j.at("hard_cap"), "hard_cap");
    if (j.contains("output_dir"))
        cfg.output_dir = as_string(j.at("output_dir"), "output_dir");
    if (j.contains("trajectory_stride"))
        cfg.trajectory_stride = as_integer(j.at("trajectory_stride"), "trajectory_stride");
    if (j.contains("threads"))
        cfg.threads = static_cast<int>(as_integer(j.at("threads"), "threads"));
    if (j.contains("dump_operator")) {
        if (!j.at("dump_operator").is_boolean()) bad_field("dump_operator", "expected a bool");
        cfg.dump_operator = j.at("dump_operator").get<bool>();
    }
    return cfg;
}

SynthesisRun run_synthesis(const ExperimentConfig& cfg) {
    validate_config(cfg);
    LinearEnsembleSystem system = make_system(cfg.system, cfg.box.dim());

    SynthesisRun run;
    run.pgrid = make_parameter_grid(cfg.box, cfg.counts);
    run.tgrid = make_time_grid(cfg.T, cfg.N);

    OperatorMatrix W;
    TargetVector xi;
    {
        auto t0 = Clock::now();
        FlowTable flows = build_flow_table(system, run.pgrid, run.tgrid, cfg.integrator,
                                           cfg.threads);
        run.timings.flow_seconds = seconds_since(t0);

        t0 = Clock::now();
        W = assemble_operator(system, flows, run.tgrid, run.pgrid, cfg.threads);
        TransferSpec transfer = make_transfer(cfg.transfer, system, run.pgrid);
        xi = assemble_target(system, flows, transfer, run.pgrid, run.tgrid);
        run.timings.assemble_seconds = seconds_since(t0);
    }
    run.operator_rows = W.data.rows();
    run.operator_cols = W.data.cols();

    if (cfg.dump_operator) {
        std::filesystem::create_directories(cfg.output_dir);
        write_operator_matrix(cfg.output_dir / "operator.bin", W, run.pgrid, run.tgrid);
        write_target_vector(cfg.output_dir / "target.bin", xi, run.pgrid, run.tgrid);
    }

    auto t0 = Clock::now();
    run.svd = compute_svd(W);
    run.timings.svd_seconds = seconds_since(t0);

    // q <= P analogue: unless configured otherwise, never retain more than
    // m * P_total vectors.
    std::optional<Index> cap = cfg.hard_cap;
    if (!cap) cap = static_cast<Index>(system.m) * run.pgrid.size();
    run.retained = choose_truncation(run.svd.singular_values, cfg.ratio_cap, cap);

    t0 = Clock::now();
    std::tie(run.control, run.report) =
        synthesize_control(run.svd, W, xi, run.retained, run.tgrid);
    run.timings.synthesis_seconds = seconds_since(t0);
    return run;
}

VerificationRun run_verification(const ExperimentConfig& cfg, const ControlSignal& control) {
    validate_config(cfg);
    LinearEnsembleSystem system = make_system(cfg.system, cfg.box.dim());

    if (control.tgrid.N != cfg.N ||
        std::abs(control.tgrid.T - cfg.T) > 1e-12 * std::max(1.0, cfg.T))
        throw FileMismatchError("control grid (T=" + std::to_string(control.tgrid.T) +
                                ", N=" + std::to_string(control.tgrid.N) +
                                ") does not match config (T=" + std::to_string(cfg.T) +
                                ", N=" + std::to_string(cfg.N) + ")");
    if (control.samples.cols() != system.m)
        throw FileMismatchError("control has " + std::to_string(control.samples.cols()) +
                                " channels, system expects " + std::to_string(system.m));

    VerificationRun run;
    run.pgrid = make_parameter_grid(cfg.box, cfg.counts);
    TransferSpec transfer = make_transfer(cfg.transfer, system, run.pgrid);

    run.targets.resize(run.pgrid.size(), system.n);
    for (Index j = 0; j < run.pgrid.size(); ++j)
        run.targets.row(j) = transfer.XF(run.pgrid.points[static_cast<size_t>(j)]).transpose();

    auto t0 = Clock::now();
    run.outcome = evaluate_transfer(system, run.pgrid, transfer, control, cfg.integrator,
                                    cfg.threads, cfg.trajectory_stride);
    run.timings.verify_seconds = seconds_since(t0);
    return run;
}

ConvergenceStudy run_convergence(const ExperimentConfig& base, const std::vector<double>& T_list,
                                 const std::vector<Index>& N_list) {
    if (T_list.empty()) bad_field("T-list", "must be nonempty");
    if (N_list.empty()) bad_field("N-list", "must be nonempty");

    std::vector<Index> Ns = N_list;
    std::sort(Ns.begin(), Ns.end());

    // Shape precondition holds for every pair before any heavy work starts.
    for (double T : T_list)
        for (Index N : Ns) {
            ExperimentConfig c = base;
            c.T = T;
            c.N = N;
            c.trajectory_stride = 0;
            validate_config(c);
        }

    ConvergenceStudy study;
    for (double T : T_list) {
        std::vector<double> log_delta, log_err;
        for (Index N : Ns) {
            ExperimentConfig c = base;
            c.T = T;
            c.N = N;
            c.trajectory_stride = 0;
            SynthesisRun syn = run_synthesis(c);
            VerificationRun ver = run_verification(c, syn.control);
            ConvergenceRow row;
            row.T = T;
            row.N = N;
            row.delta = syn.tgrid.delta;
            row.k_norm_error = ver.outcome.k_norm_error;
            row.retained = syn.retained;
            study.rows.push_back(row);
            if (row.k_norm_error > 0.0) {
                log_delta.push_back(std::log(row.delta));
                log_err.push_back(std::log(row.k_norm_error));
            }
        }

        SlopeRow slope;
        slope.T = T;
        slope.num_points = static_cast<Index>(log_delta.size());
        if (slope.num_points >= 2) {
            double n = static_cast<double>(slope.num_points);
            double mx = 0.0, my = 0.0;
            for (size_t i = 0; i < log_delta.size(); ++i) {
                mx += log_delta[i];
                my += log_err[i];
            }
            mx /= n;
            my /= n;
            double sxx = 0.0, sxy = 0.0;
            for (size_t i = 0; i < log_delta.size(); ++i) {
                sxx += (log_delta[i] - mx) * (log_delta[i] - mx);
                sxy += (log_delta[i] - mx) * (log_err[i] - my);
            }
            if (sxx > 0.0) slope.slope = sxy / sxx;
        }
        study.slopes.push_back(slope);
    }
    return study;
}

namespace {

std::string join_counts(const std::vector<Index>& counts) {
    std::ostringstream out;
    for (size_t i = 0; i < counts.size(); ++i) {
        if (i) out << " x ";
        out << counts[i];
    }
    return out.str();
}

void write_report(const std::filesystem::path& path, const ExperimentConfig& cfg,
                  const SynthesisRun& run) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    const auto& s = run.svd.singular_values;
    out << "ensctl synthesis report\n";
    out << "label: " << cfg.label << "\n";
    out << "system: " << cfg.system.kind << "\n";
    out << "box:";
    for (Index a = 0; a < cfg.box.dim(); ++a)
        out << " [" << format_double(cfg.box.lower[a]) << ", "
            << format_double(cfg.box.upper[a]) << "]";
    out << "\n";
    out << "counts: " << join_counts(cfg.counts) << " (P_total = " << run.pgrid.size() << ")\n";
    out << "T: " << format_double(run.tgrid.T) << "\n";
    out << "N: " << run.tgrid.N << "\n";
    out << "delta: " << format_double(run.tgrid.delta) << "\n";
    out << "operator: " << run.operator_rows << " x " << run.operator_cols << "\n";
    out << "spectrum_size: " << s.size() << "\n";
    out << "retained: " << run.retained << "\n";
    // The spectrum pairs up across channels; q = J/m is the per-channel count
    // (the ratio rule bounds the total vector count m*q).
    const Index m = std::max<Index>(1, run.control.channels());
    out << "retained_per_channel: " << run.retained / m << "\n";
    out << "ratio_cap: " << format_double(cfg.ratio_cap) << "\n";
    if (cfg.hard_cap) out << "hard_cap: " << *cfg.hard_cap << "\n";
    if (s.size() > 0) out << "s_1: " << format_double(s[0]) << "\n";
    if (run.retained > 0)
        out << "s_J: " << format_double(s[run.retained - 1]) << "\n";
    out << "condition_ratio: " << format_double(run.report.condition_ratio) << "\n";
    out << "residual_norm: " << format_double(run.report.residual_norm) << "\n";
    out << "target_norm: " << format_double(run.report.target_norm) << "\n";
    char timing[160];
    std::snprintf(timing, sizeof(timing),
                  "timings_seconds: flow %.3f, assemble %.3f, svd %.3f, synthesis %.3f\n",
                  run.timings.flow_seconds, run.timings.assemble_seconds,
                  run.timings.svd_seconds, run.timings.synthesis_seconds);
    out << timing;
}

}  // namespace

void write_synthesis_artifacts(const ExperimentConfig& cfg, const SynthesisRun& run) {
    std::filesystem::create_directories(cfg.output_dir);
    write_control_csv(cfg.output_dir / "control.csv", run.control);
    write_spectrum_csv(cfg.output_dir / "spectrum.csv", run.svd, run.report);
    write_picard_csv(cfg.output_dir / "picard.csv", picard_diagnostic(run.report, run.svd));
    write_report(cfg.output_dir / "report.txt", cfg, run);
}

void write_verification_artifacts(const ExperimentConfig& cfg, const VerificationRun& run) {
    std::filesystem::create_directories(cfg.output_dir);
    write_outcome_csv(cfg.output_dir / "outcome.csv", run.pgrid, run.targets, run.outcome);
    if (run.outcome.trajectories)
        write_trajectories_csv(cfg.output_dir / "trajectories.csv", *run.outcome.trajectories);
}

void write_convergence_artifacts(const ExperimentConfig& cfg, const ConvergenceStudy& study) {
    std::filesystem::create_directories(cfg.output_dir);
    write_convergence_csv(cfg.output_dir / "convergence.csv", study.rows);
    write_slopes_csv(cfg.output_dir / "slopes.csv", study.slopes);
}

}  // namespace ensctl
