// ensctl — synthesize and verify minimum-norm controls for ensembles of
// parameterized linear time-varying systems.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ensctl/csvio.hpp"
#include "ensctl/errors.hpp"
#include "ensctl/experiment.hpp"

namespace {

using namespace ensctl;

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    int threads{-1};  // -1 keeps the config value
    std::optional<std::uint64_t> seed;
    std::optional<double> ratio_cap;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config file");
    cmd->add_option("--preset", opts.preset, "builtin preset: fig1|fig2|fig3|fig4|null");
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--threads", opts.threads, "worker thread cap (0 = all hardware threads)");
    cmd->add_option("--seed", opts.seed, "seed override for builtin random systems");
    cmd->add_option("--ratio-cap", opts.ratio_cap, "truncation ratio cap override");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
    if (opts.config_path.empty() == opts.preset.empty())
        throw ConfigError("exactly one of --config and --preset is required");
    ExperimentConfig cfg = opts.config_path.empty() ? preset_config(opts.preset)
                                                    : load_config(opts.config_path);
    if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
    if (opts.threads >= 0) cfg.threads = opts.threads;
    if (opts.seed) cfg.system.seed = *opts.seed;
    if (opts.ratio_cap) cfg.ratio_cap = *opts.ratio_cap;
    return cfg;
}

void print_synthesis_summary(const SynthesisRun& run) {
    std::cout << "retained " << run.retained << " of " << run.svd.singular_values.size()
              << " singular values, condition ratio " << run.report.condition_ratio << "\n"
              << "residual norm " << run.report.residual_norm << "\n";
}

int dispatch(const CLI::App& app, const CommonOpts& syn_opts, bool syn_dump,
             const CommonOpts& ver_opts, const std::string& control_path, Index stride,
             const CommonOpts& conv_opts, const std::vector<double>& T_list,
             const std::vector<Index>& N_list, const CommonOpts& spec_opts) {
    const std::string sub = app.get_subcommands().front()->get_name();

    if (sub == "synthesize") {
        ExperimentConfig cfg = resolve_config(syn_opts);
        cfg.dump_operator = cfg.dump_operator || syn_dump;
        SynthesisRun run = run_synthesis(cfg);
        write_synthesis_artifacts(cfg, run);
        print_synthesis_summary(run);
        std::cout << "artifacts in " << cfg.output_dir.string() << "\n";
        return exit_code::ok;
    }

    if (sub == "verify") {
        ExperimentConfig cfg = resolve_config(ver_opts);
        if (stride >= 0) cfg.trajectory_stride = stride;
        if (control_path.empty()) throw ConfigError("--control is required for verify");
        validate_config(cfg);
        LinearEnsembleSystem system = make_system(cfg.system, cfg.box.dim());
        ControlSignal control =
            read_control_csv(control_path, make_time_grid(cfg.T, cfg.N), system.m);
        VerificationRun run = run_verification(cfg, control);
        write_verification_artifacts(cfg, run);
        std::cout << "k_norm_error " << run.outcome.k_norm_error << "\n"
                  << "mean_error " << run.outcome.mean_error << "\n"
                  << "max_error " << run.outcome.max_error << "\n"
                  << "artifacts in " << cfg.output_dir.string() << "\n";
        return exit_code::ok;
    }

    if (sub == "convergence") {
        ExperimentConfig cfg = resolve_config(conv_opts);
        ConvergenceStudy study = run_convergence(cfg, T_list, N_list);
        write_convergence_artifacts(cfg, study);
        for (const auto& row : study.slopes) {
            std::cout << "T=" << row.T << ": ";
            if (row.slope)
                std::cout << "slope " << *row.slope;
            else
                std::cout << "slope undefined";
            std::cout << " (" << row.num_points << " points)\n";
        }
        std::cout << "artifacts in " << cfg.output_dir.string() << "\n";
        return exit_code::ok;
    }

    // spectrum: full assembly + SVD, but only the spectrum table and report.
    ExperimentConfig cfg = resolve_config(spec_opts);
    SynthesisRun run = run_synthesis(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    write_spectrum_csv(cfg.output_dir / "spectrum.csv", run.svd, run.report);
    print_synthesis_summary(run);
    std::cout << "artifacts in " << cfg.output_dir.string() << "\n";
    return exit_code::ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimum-norm control synthesis for linear ensemble systems"};
    app.require_subcommand(1);

    CommonOpts syn_opts;
    bool syn_dump = false;
    CLI::App* syn = app.add_subcommand(
        "synthesize", "assemble the operator, run the SVD synthesis, write artifacts");
    add_common(syn, syn_opts);
    syn->add_flag("--dump-operator", syn_dump, "also write operator.bin / target.bin");

    CommonOpts ver_opts;
    std::string control_path;
    Index stride = -1;
    CLI::App* ver =
        app.add_subcommand("verify", "simulate every ensemble member under a control file");
    add_common(ver, ver_opts);
    ver->add_option("--control", control_path, "control.csv produced by synthesize");
    ver->add_option("--trajectory-stride", stride,
                    "record state every k-th node into trajectories.csv (0 = off)");

    CommonOpts conv_opts;
    std::vector<double> T_list{0.5, 1.0, 2.0, 5.0};
    std::vector<Index> N_list{1250, 2500, 5000, 10000};
    CLI::App* conv =
        app.add_subcommand("convergence", "terminal error vs time step over T and N lists");
    add_common(conv, conv_opts);
    conv->add_option("--T-list", T_list, "time horizons (default 0.5,1,2,5)")
        ->delimiter(',');
    conv->add_option("--N-list", N_list, "time grid sizes (default 1250,2500,5000,10000)")
        ->delimiter(',');

    CommonOpts spec_opts;
    CLI::App* spec = app.add_subcommand(
        "spectrum", "assemble the operator and export its singular spectrum");
    add_common(spec, spec_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? exit_code::ok : exit_code::config;
    }

    try {
        return dispatch(app, syn_opts, syn_dump, ver_opts, control_path, stride, conv_opts,
                        T_list, N_list, spec_opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return exit_code::shape;
    } catch (const IntegrationError& e) {
        std::cerr << "integration error: " << e.what() << "\n";
        return exit_code::integration;
    } catch (const DecompositionError& e) {
        std::cerr << "decomposition error: " << e.what() << "\n";
        return exit_code::decomposition;
    } catch (const FileMismatchError& e) {
        std::cerr << "file mismatch: " << e.what() << "\n";
        return exit_code::file_mismatch;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::failure;
    }
}
