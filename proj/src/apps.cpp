#include "koopgen/apps.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "koopgen/errors.hpp"

namespace koopgen {

namespace {

std::vector<Eigen::VectorXd> eval_grid(const SamplePlan& plan, int per_axis) {
    SamplePlan grid = plan;
    grid.per_axis = per_axis;
    grid.mode = SamplePlan::Mode::Grid;
    return grid.points();
}

IdentificationReport identify_common(const Eigen::MatrixXcd& A, const Dictionary& dict,
                                     const VectorField& field,
                                     const std::vector<int>& coordinates,
                                     const SamplePlan& plan, int grid_per_axis,
                                     std::string method) {
    IdentificationReport report;
    report.method = std::move(method);
    const auto grid = eval_grid(plan, grid_per_axis);

    for (int k : coordinates) {
        const int idx = coordinate_index(dict, k);
        if (idx < 0)
            throw CoordinateNotInDictionaryError(
                "coordinate x" + std::to_string(k + 1) + " is not a dictionary member");
        CoordinateWeights cw;
        cw.coordinate = k;
        cw.dictionary_index = idx;
        cw.weights = A.col(idx);
        cw.max_imag_weight = cw.weights.imag().cwiseAbs().maxCoeff();

        double max_err = 0.0, sum_sq = 0.0;
        for (const auto& x : grid) {
            const Eigen::RowVectorXd z = evaluate(dict, x);
            const double f_hat = (z.cast<std::complex<double>>() * cw.weights)(0).real();
            const double f_true =
                analytic_generator_apply(field, dict.entries[idx], x);
            const double err = std::abs(f_hat - f_true);
            max_err = std::max(max_err, err);
            sum_sq += err * err;
        }
        cw.max_grid_error = max_err;
        cw.rms_grid_error = std::sqrt(sum_sq / static_cast<double>(grid.size()));
        report.coordinates.push_back(std::move(cw));
    }
    return report;
}

}  // namespace

IdentificationReport identify_field(const GeneratorMatrix& gm, const Dictionary& dict,
                                    const VectorField& field,
                                    const std::vector<int>& coordinates,
                                    const SamplePlan& plan, int grid_per_axis) {
    if (gm.basis_id != dict.basis_id())
        throw BasisMismatchError("identify_field: generator fitted on a different dictionary");
    return identify_common(gm.L.cast<std::complex<double>>(), dict, field, coordinates,
                           plan, grid_per_axis, "log-free");
}

IdentificationReport identify_field_log_baseline(const KoopmanMatrix& km,
                                                 const Dictionary& dict,
                                                 const VectorField& field,
                                                 const std::vector<int>& coordinates,
                                                 const SamplePlan& plan,
                                                 int grid_per_axis) {
    if (km.basis_id != dict.basis_id())
        throw BasisMismatchError("identify_field_log_baseline: basis mismatch");
    const auto [L_log, diag] = log_baseline(km);
    (void)diag;
    return identify_common(L_log, dict, field, coordinates, plan, grid_per_axis,
                           "log-baseline");
}

LyapunovCandidate fit_lyapunov(const GeneratorMatrix& gm, const Dictionary& dict,
                               const SamplePlan& plan, const Eigen::MatrixXd& X) {
    if (gm.basis_id != dict.basis_id())
        throw BasisMismatchError("fit_lyapunov: generator fitted on a different dictionary");
    const auto pts = plan.points();
    if (static_cast<long>(pts.size()) != X.rows())
        throw ConfigError("fit_lyapunov: feature matrix does not match the sample plan");

    Eigen::VectorXd g(X.rows());
    for (long m = 0; m < X.rows(); ++m) g[m] = pts[m].squaredNorm();

    // min |(X L) theta - g|, minimum-norm. The near-null constant-mode
    // direction gets no weight, so the later pin barely moves the fit.
    const Eigen::MatrixXd A = X * gm.L;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd theta =
        svd.setThreshold(1e-12).solve(g);

    // Lyapunov functions are defined up to an additive constant; pin the
    // unidentifiable constant coefficient so V(0) ~ 0.
    for (int i = 0; i < dict.size(); ++i)
        if (dict.entries[i].exponents.sum() == 0) theta[i] = 0.0;

    LyapunovCandidate cand;
    cand.theta.coefficients = theta.cast<std::complex<double>>();
    cand.theta.basis_id = gm.basis_id;
    cand.fit_residual = (A * theta - g).norm();

    const Eigen::VectorXd Ltheta = gm.L * theta;
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(dict.dimension);
    cand.value_at_origin = (evaluate(dict, origin) * Ltheta)(0);

    double lie_max = -std::numeric_limits<double>::infinity();
    double lie_min = std::numeric_limits<double>::infinity();
    Eigen::VectorXd argmax = origin;
    for (const auto& x : pts) {
        const double lie = (evaluate(dict, x) * Ltheta)(0);
        if (lie > lie_max) {
            lie_max = lie;
            argmax = x;
        }
        lie_min = std::min(lie_min, lie);
    }
    cand.lie_grid_max = lie_max;
    cand.lie_grid_min = lie_min;
    cand.lie_argmax = argmax;
    return cand;
}

VerificationVerdict verify_candidate(const LyapunovCandidate& cand,
                                     const GeneratorMatrix& gm, const Dictionary& dict,
                                     const SamplePlan& plan, int grid_per_axis,
                                     double puncture_radius) {
    if (cand.theta.basis_id != gm.basis_id)
        throw BasisMismatchError("verify_candidate: candidate and generator basis differ");
    const Eigen::VectorXd theta = cand.theta.coefficients.real();
    const Eigen::VectorXd Ltheta = gm.L * theta;

    VerificationVerdict verdict;
    verdict.min_value = std::numeric_limits<double>::infinity();
    verdict.max_reversed_lie = -std::numeric_limits<double>::infinity();

    bool any = false;
    for (const auto& x : eval_grid(plan, grid_per_axis)) {
        if (x.norm() <= puncture_radius) continue;
        any = true;
        const Eigen::RowVectorXd z = evaluate(dict, x);
        verdict.min_value = std::min(verdict.min_value, (z * theta)(0));
        // Lie derivative along the reversed dynamics.
        verdict.max_reversed_lie = std::max(verdict.max_reversed_lie, -(z * Ltheta)(0));
    }
    if (!any) {
        verdict.pass = false;
        verdict.detail = "empty punctured grid";
        return verdict;
    }
    const bool positive = verdict.min_value > 0.0;
    const bool decreasing = verdict.max_reversed_lie < 0.0;
    verdict.pass = positive && decreasing;
    if (!positive) verdict.detail += "V not positive on punctured grid; ";
    if (!decreasing) verdict.detail += "reversed Lie derivative not negative; ";
    if (verdict.pass) verdict.detail = "ok";
    return verdict;
}

}  // namespace koopgen
