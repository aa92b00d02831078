#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace koopgen {

struct Dictionary;  // dictionary.hpp

/// Right-hand side of an autonomous ODE x' = f(x).
struct VectorField {
    std::string name;
    int dimension = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    bool is_reversed = false;
};

// Van der Pol oscillator: f(x) = [x2, -x1 + (1 - x1^2) x2].
VectorField vanderpol();

// 1-D linear field f(x) = a*x.
VectorField linear_1d(double a);

// Time reversal: negated right-hand side.
VectorField reverse(const VectorField& field);

// Parses "vanderpol", "vanderpol-reversed", "linear:a=<float>".
VectorField field_from_spec(const std::string& spec);

/// Adaptive flow map for a vector field.
struct Flow {
    VectorField field;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.1;
    double blowup_norm = 1e6;
};

// phi(t, x0) for t >= 0. Throws BlowUpError / StepUnderflowError.
Eigen::VectorXd flow_to(const Flow& flow, const Eigen::VectorXd& x0, double t);

/// Diagnostic estimate of the semigroup growth bound |K_t| <= M e^{w t}.
struct SemigroupGrowthEstimate {
    double M_hat = 1.0;      // >= 1
    double omega_hat = 0.0;  // clamped at 0
    int sample_count = 0;
};

// Log-linear fit of the sup-norm growth envelope of dictionary values
// along trajectories started at the given samples. Purely informational.
SemigroupGrowthEstimate estimate_growth(const Flow& flow, const Dictionary& dict,
                                        const std::vector<Eigen::VectorXd>& samples,
                                        double horizon);

}  // namespace koopgen
