#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "koopgen/dictionary.hpp"
#include "koopgen/dynamics.hpp"

namespace koopgen {

/// Sampling layout over an axis-aligned box.
struct SamplePlan {
    Eigen::VectorXd lo, hi;
    int per_axis = 10;
    enum class Mode { Grid, Random };
    Mode mode = Mode::Grid;
    std::uint64_t seed = 0;

    // Grid mode: per_axis^n cell-center points, strictly inside the box.
    // Random mode: per_axis^n uniform draws (deterministic in seed).
    std::vector<Eigen::VectorXd> points() const;
    long total() const;
};

/// Parameters of the truncated-resolvent label computation.
struct GenConfig {
    double lambda = 1e6;
    double tau = 1.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    enum class Quadrature { AugmentedOde, Snapshot };
    Quadrature quadrature = Quadrature::AugmentedOde;
    int snapshots = 400;  // snapshot mode only

    // exp(-lambda*tau) < 1e-30: the tail beyond the boundary layer is
    // below machine noise. Informational.
    bool fully_truncated() const;
};

struct TrainingSet {
    Eigen::MatrixXd X;  // M x N features
    Eigen::MatrixXd Y;  // M x N labels
    GenConfig cfg;
    std::uint64_t basis_id = 0;
    std::vector<Eigen::VectorXd> samples;
    long dropped = 0;  // lenient mode only
};

// Returns (phi(tau, x), [lambda^2 * int_0^tau e^{-lambda s} z_i(phi(s,x)) ds]_i).
// The integral is evaluated on the boundary layer s in [0, 40/lambda] with
// the constant part of the integrand split off analytically; the remaining
// tail is below the accuracy contract.
std::pair<Eigen::VectorXd, Eigen::VectorXd> truncated_resolvent_integral(
    const Flow& flow, const Dictionary& dict, const Eigen::VectorXd& x,
    const GenConfig& cfg);

// One row of labels: lambda^2 T_tau Z(x) - lambda Z(x).
Eigen::VectorXd label_row(const Flow& flow, const Dictionary& dict,
                          const Eigen::VectorXd& x, const GenConfig& cfg);

struct GenOptions {
    bool strict = true;  // lenient: drop failed samples, record count
    int threads = 0;     // 0 = all available
};

// Stacks features and labels over the whole sample plan. Output is
// identical regardless of worker count; rows are written to pre-assigned
// indices.
TrainingSet generate(const Flow& flow, const Dictionary& dict, const SamplePlan& plan,
                     const GenConfig& cfg, const GenOptions& opt = {});

// Serial reference path, kept for testing against the parallel kernel.
TrainingSet generate_serial(const Flow& flow, const Dictionary& dict,
                            const SamplePlan& plan, const GenConfig& cfg,
                            const GenOptions& opt = {});

}  // namespace koopgen
