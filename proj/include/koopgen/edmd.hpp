#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "koopgen/datagen.hpp"

namespace koopgen {

/// Least-squares fit of the truncated-resolvent generator surrogate.
struct GeneratorMatrix {
    Eigen::MatrixXd L;  // N x N
    GenConfig cfg;
    std::uint64_t basis_id = 0;
    double residual = 0.0;  // Frobenius norm of Y - X L
    int rank_used = 0;
    bool degenerate = false;  // rank_used < N (minimum-norm fit returned)
};

/// EDMD fit of the Koopman matrix at sampling time s.
struct KoopmanMatrix {
    Eigen::MatrixXd K;
    double s = 0.0;
    std::uint64_t basis_id = 0;
    double residual = 0.0;
    int rank_used = 0;
    bool degenerate = false;
};

enum class SpectrumSource { Generator, Koopman, LogBaseline };

/// Eigendecomposition, sorted by descending real part (ties by
/// descending imaginary part); vectors have unit Euclidean norm.
struct EigenPairs {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
    SpectrumSource source = SpectrumSource::Generator;
};

struct LogBaselineDiagnostics {
    double eigvec_condition = 0.0;
    double max_imag = 0.0;  // max |Im| over entries of L_log
};

// Minimum-norm least-squares solution of min |Y - X A|_F via SVD of X,
// singular values below 1e-12 * sigma_max treated as zero.
GeneratorMatrix fit_generator(const TrainingSet& ts);

// Koopman EDMD: labels are Z(phi(s, x_m)); same SVD fit.
KoopmanMatrix fit_koopman(const Flow& flow, const Dictionary& dict,
                          const SamplePlan& plan, double s);

// Principal-branch matrix logarithm by eigendecomposition, divided by s.
// Throws NonDiagonalizableError / BranchCutError.
std::pair<Eigen::MatrixXcd, LogBaselineDiagnostics> log_baseline(const KoopmanMatrix& km);

EigenPairs eigen(const Eigen::MatrixXcd& A, SpectrumSource source);

// A . w, basis identity preserved.
WeightVector apply_matrix_to_weights(const Eigen::MatrixXcd& A, const WeightVector& w);

}  // namespace koopgen
