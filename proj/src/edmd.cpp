#include "koopgen/edmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "koopgen/errors.hpp"

namespace koopgen {

namespace {

constexpr double kSvdCutoff = 1e-12;  // relative to sigma_max

// Minimum-norm least-squares solve of min |Y - X A|_F via SVD of X.
// Working on X directly avoids squaring the condition number that the
// normal-equations form would incur.
Eigen::MatrixXd svd_least_squares(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                  int* rank_used) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = sigma.size() > 0 ? kSvdCutoff * sigma[0] : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
    int rank = 0;
    for (int i = 0; i < sigma.size(); ++i) {
        if (sigma[i] > cutoff && sigma[i] > 0.0) {
            inv[i] = 1.0 / sigma[i];
            ++rank;
        }
    }
    if (rank_used) *rank_used = rank;
    return svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * Y);
}

}  // namespace

GeneratorMatrix fit_generator(const TrainingSet& ts) {
    const int N = static_cast<int>(ts.X.cols());
    if (ts.X.rows() < N) throw ConfigError("fit_generator: need at least N rows");
    GeneratorMatrix gm;
    gm.cfg = ts.cfg;
    gm.basis_id = ts.basis_id;
    gm.L = svd_least_squares(ts.X, ts.Y, &gm.rank_used);
    gm.residual = (ts.Y - ts.X * gm.L).norm();
    gm.degenerate = gm.rank_used < N;
    return gm;
}

KoopmanMatrix fit_koopman(const Flow& flow, const Dictionary& dict,
                          const SamplePlan& plan, double s) {
    if (!(s > 0.0)) throw ConfigError("fit_koopman: s must be > 0");
    const auto pts = plan.points();
    const long M = static_cast<long>(pts.size());
    const int N = dict.size();
    if (M < N) throw ConfigError("fit_koopman: need at least N samples");

    Eigen::MatrixXd X(M, N), Yt(M, N);
#ifdef KOOPGEN_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
    for (long m = 0; m < M; ++m) {
        X.row(m) = evaluate(dict, pts[m]);
        Yt.row(m) = evaluate(dict, flow_to(flow, pts[m], s));
    }

    KoopmanMatrix km;
    km.s = s;
    km.basis_id = dict.basis_id();
    km.K = svd_least_squares(X, Yt, &km.rank_used);
    km.residual = (Yt - X * km.K).norm();
    km.degenerate = km.rank_used < N;
    return km;
}

std::pair<Eigen::MatrixXcd, LogBaselineDiagnostics> log_baseline(const KoopmanMatrix& km) {
    const Eigen::MatrixXcd K = km.K.cast<std::complex<double>>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(K);
    if (es.info() != Eigen::Success)
        throw NonDiagonalizableError("log_baseline: eigensolver failed to converge");
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::VectorXcd mu = es.eigenvalues();

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond < 1e12))
        throw NonDiagonalizableError("log_baseline: eigenvector condition number " +
                                     std::to_string(cond));

    Eigen::VectorXcd logmu(mu.size());
    for (int i = 0; i < mu.size(); ++i) {
        if (std::abs(mu[i]) < 1e-10)
            throw BranchCutError("log_baseline: eigenvalue at the branch point (zero)");
        // A negative real eigenvalue sits on the branch cut; the tiny
        // numerical imaginary part would pick the branch sign at random.
        // Pin it to the upper branch: log(-r) = log r + i*pi.
        if (mu[i].real() < 0.0 && std::abs(mu[i].imag()) < 1e-13 * std::abs(mu[i]))
            logmu[i] = std::complex<double>(std::log(-mu[i].real()), M_PI);
        else
            logmu[i] = std::log(mu[i]);  // principal branch
    }

    const Eigen::MatrixXcd L_log =
        (V * logmu.asDiagonal() * V.inverse()) / km.s;
    LogBaselineDiagnostics diag;
    diag.eigvec_condition = cond;
    diag.max_imag = L_log.imag().cwiseAbs().maxCoeff();
    return {L_log, diag};
}

EigenPairs eigen(const Eigen::MatrixXcd& A, SpectrumSource source) {
    if (A.rows() != A.cols()) throw ConfigError("eigen: matrix must be square");
    if (!A.allFinite()) throw ConfigError("eigen: matrix has non-finite entries");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigen: solver failed to converge");

    const int N = static_cast<int>(A.rows());
    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXcd& vals = es.eigenvalues();
    std::sort(order.begin(), order.end(), [&vals](int a, int b) {
        if (vals[a].real() != vals[b].real()) return vals[a].real() > vals[b].real();
        return vals[a].imag() > vals[b].imag();
    });

    EigenPairs pairs;
    pairs.source = source;
    pairs.values.resize(N);
    pairs.vectors.resize(N, N);
    for (int i = 0; i < N; ++i) {
        pairs.values[i] = vals[order[i]];
        pairs.vectors.col(i) = es.eigenvectors().col(order[i]).normalized();
    }
    return pairs;
}

WeightVector apply_matrix_to_weights(const Eigen::MatrixXcd& A, const WeightVector& w) {
    if (A.cols() != w.coefficients.size())
        throw BasisMismatchError("apply_matrix_to_weights: dimension mismatch");
    WeightVector out;
    out.coefficients = A * w.coefficients;
    out.basis_id = w.basis_id;
    return out;
}

}  // namespace koopgen
