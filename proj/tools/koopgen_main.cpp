#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "koopgen/errors.hpp"
#include "koopgen/pipeline.hpp"

using namespace koopgen;

namespace {

// Flag overrides applied on top of the config file.
struct Overrides {
    double lambda = -1.0;
    double tau = -1.0;
    int per_axis = -1;
    std::string output_dir;
    int threads = -1;
    bool lenient = false;
};

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
    ExperimentConfig cfg = path.empty() ? ExperimentConfig{}
                                        : ExperimentConfig::from_file(path);
    if (ov.lambda > 0) cfg.lambda = ov.lambda;
    if (ov.tau > 0) cfg.tau = ov.tau;
    if (ov.per_axis > 0) cfg.per_axis = ov.per_axis;
    if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
    if (ov.threads >= 0) cfg.threads = ov.threads;
    if (ov.lenient) cfg.strict = false;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* sub, std::string& config_path, Overrides& ov) {
    sub->add_option("--config", config_path, "experiment config JSON");
    sub->add_option("--lambda", ov.lambda, "override lambda");
    sub->add_option("--tau", ov.tau, "override tau");
    sub->add_option("--per-axis", ov.per_axis, "override samples per axis");
    sub->add_option("--output-dir", ov.output_dir, "override output directory");
    sub->add_option("--threads", ov.threads, "worker cap (0 = all)");
    sub->add_flag("--lenient", ov.lenient, "drop failed samples instead of aborting");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Log-free Koopman generator learning"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto* gen = app.add_subcommand("generate", "generate a training dataset");
    add_common(gen, config_path, ov);

    auto* learn = app.add_subcommand("learn", "fit the generator matrix");
    add_common(learn, config_path, ov);
    double baseline_s = -1.0;
    learn->add_option("--baseline", baseline_s,
                      "also fit the Koopman matrix and its log at sampling time s");

    auto* identify = app.add_subcommand("identify", "recover the vector field");
    add_common(identify, config_path, ov);

    auto* lyap = app.add_subcommand("lyapunov", "construct and verify a Lyapunov candidate");
    add_common(lyap, config_path, ov);
    LyapunovOptions lyap_opt;
    lyap->add_flag("--require-pass", lyap_opt.require_pass,
                   "exit nonzero if verification fails");
    lyap->add_option("--theta-file", lyap_opt.theta_file,
                     "verify an externally supplied weight vector (CSV)");

    auto* repro = app.add_subcommand("reproduce", "run the full pipeline and check results");
    ReproduceOptions repro_opt;
    repro->add_flag("--quick", repro_opt.quick, "scaled-down run, looser tolerances");
    repro->add_option("--expected", repro_opt.expected_file, "expected-tables JSON");
    repro->add_option("--work-dir", repro_opt.work_dir, "scratch directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_generate(load_config(config_path, ov));
        if (learn->parsed()) {
            auto cfg = load_config(config_path, ov);
            if (baseline_s > 0) cfg.baseline_s = baseline_s;
            return run_learn(cfg);
        }
        if (identify->parsed()) return run_identify(load_config(config_path, ov));
        if (lyap->parsed()) return run_lyapunov(load_config(config_path, ov), lyap_opt);
        if (repro->parsed()) return run_reproduce(repro_opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
