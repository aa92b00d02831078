#pragma once

#include <string>

#include "koopgen/io.hpp"

namespace koopgen {

// Exit codes shared by the CLI subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitGeneration = 3;
inline constexpr int kExitFit = 4;
inline constexpr int kExitVerify = 5;

// generate: writes <output_dir>/dataset/ (manifest.json, X.csv, Y.csv).
int run_generate(const ExperimentConfig& cfg);

// learn: reads the dataset, writes <output_dir>/model/ (L.csv,
// eigenreport.json; K.csv + L_log_{re,im}.csv when baseline_s > 0).
int run_learn(const ExperimentConfig& cfg);

// identify: writes <output_dir>/identify/ weight tables and error metrics.
int run_identify(const ExperimentConfig& cfg);

struct LyapunovOptions {
    bool require_pass = false;
    std::string theta_file;  // optional: verify an externally supplied theta
};
int run_lyapunov(const ExperimentConfig& cfg, const LyapunovOptions& opt = {});

struct ReproduceOptions {
    bool quick = false;         // scaled-down run with looser tolerances
    std::string expected_file;  // optional override of the expected-tables file
    std::string work_dir = "reproduce_out";
};
int run_reproduce(const ReproduceOptions& opt = {});

}  // namespace koopgen
