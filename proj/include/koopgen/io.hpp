#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "koopgen/datagen.hpp"

namespace koopgen {

// 17 significant digits, scientific notation; round-trip exact for doubles.
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_csv(const std::filesystem::path& path);

std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t fnv1a_file(const std::filesystem::path& path);

nlohmann::json dictionary_manifest(const Dictionary& dict);

/// Full experiment configuration; serialized into every output manifest.
struct ExperimentConfig {
    std::string field = "vanderpol";
    std::string dictionary = "monomials2d:max_i=3,max_j=2";
    std::vector<double> domain_min{-1.0, -1.0};
    std::vector<double> domain_max{1.0, 1.0};
    int per_axis = 100;
    std::string sample_mode = "grid";  // "grid" | "random"
    std::uint64_t seed = 0;
    double lambda = 1e6;
    double tau = 1.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    std::string quadrature = "augmented-ode";  // | "snapshot"
    int snapshots = 400;
    double baseline_s = 0.0;  // 0 = no log baseline
    std::string output_dir = "out";
    bool strict = true;
    int threads = 0;

    static ExperimentConfig from_json(const nlohmann::json& j);  // unknown keys rejected
    static ExperimentConfig from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void validate() const;  // throws ConfigError

    VectorField make_field() const;
    Dictionary make_dictionary() const;
    Flow make_flow() const;
    SamplePlan make_plan() const;
    GenConfig make_gen_config() const;
};

// Dataset directory: manifest.json + X.csv + Y.csv.
void save_training_set(const std::filesystem::path& dir, const TrainingSet& ts,
                       const ExperimentConfig& cfg, const Dictionary& dict);
// Throws ConfigError on manifest/hash mismatch.
TrainingSet load_training_set(const std::filesystem::path& dir,
                              ExperimentConfig* cfg_out = nullptr);

}  // namespace koopgen
