#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "koopgen/edmd.hpp"

namespace koopgen {

/// Recovered weights and error metrics for one coordinate function.
struct CoordinateWeights {
    int coordinate = 0;       // 0-based state coordinate k
    int dictionary_index = 0; // index of x_k in the dictionary
    Eigen::VectorXcd weights; // column A . e_idx
    double max_grid_error = 0.0;  // max |Re f_hat - f_k| over the grid
    double rms_grid_error = 0.0;
    double max_imag_weight = 0.0;
};

struct IdentificationReport {
    std::string method;  // "log-free" | "log-baseline"
    std::vector<CoordinateWeights> coordinates;
};

// Vector-field identification from the learned generator: the weight
// column L e_{idx(k)} reconstructs f_k. Error metrics against the exact
// Lie derivative on a grid_per_axis^n cell-center grid over the plan box.
IdentificationReport identify_field(const GeneratorMatrix& gm, const Dictionary& dict,
                                    const VectorField& field,
                                    const std::vector<int>& coordinates,
                                    const SamplePlan& plan, int grid_per_axis = 50);

// Same report through the matrix-logarithm baseline log(K)/s.
IdentificationReport identify_field_log_baseline(const KoopmanMatrix& km,
                                                 const Dictionary& dict,
                                                 const VectorField& field,
                                                 const std::vector<int>& coordinates,
                                                 const SamplePlan& plan,
                                                 int grid_per_axis = 50);

/// Candidate Lyapunov function V(x) = Z(x) theta with fit diagnostics.
struct LyapunovCandidate {
    WeightVector theta;
    double fit_residual = 0.0;
    double value_at_origin = 0.0;  // Z(0) L theta
    double lie_grid_max = 0.0;
    double lie_grid_min = 0.0;
    Eigen::VectorXd lie_argmax;
};

// Fits theta minimizing sum_m (Z(x_m) L theta - g(x_m))^2 with target
// g(x) = |x|^2, by SVD least squares on X L. The constant coefficient is
// pinned to 0 after the fit.
LyapunovCandidate fit_lyapunov(const GeneratorMatrix& gm, const Dictionary& dict,
                               const SamplePlan& plan, const Eigen::MatrixXd& X);

struct VerificationVerdict {
    bool pass = false;
    double min_value = 0.0;      // min V on the punctured grid
    double max_reversed_lie = 0.0;  // max of -Z L theta on the punctured grid
    std::string detail;
};

// PASS iff V > 0 and the reversed-dynamics Lie derivative -Z L theta < 0
// on a grid over the plan box, excluding a ball around the origin.
VerificationVerdict verify_candidate(const LyapunovCandidate& cand,
                                     const GeneratorMatrix& gm, const Dictionary& dict,
                                     const SamplePlan& plan, int grid_per_axis = 50,
                                     double puncture_radius = 0.05);

}  // namespace koopgen
