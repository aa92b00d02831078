#include "koopgen/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#ifdef KOOPGEN_HAVE_OPENMP
#include <omp.h>
#endif

#include "koopgen/errors.hpp"
#include "koopgen/rk45.hpp"

namespace koopgen {

std::vector<Eigen::VectorXd> SamplePlan::points() const {
    const int n = static_cast<int>(lo.size());
    if (hi.size() != n || n < 1) throw ConfigError("SamplePlan: bad box");
    if (per_axis < 1) throw ConfigError("SamplePlan: per_axis must be >= 1");
    for (int d = 0; d < n; ++d)
        if (!(lo[d] < hi[d])) throw ConfigError("SamplePlan: empty box axis");

    const long m = total();
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(m);
    if (mode == Mode::Random) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (long k = 0; k < m; ++k) {
            Eigen::VectorXd x(n);
            for (int d = 0; d < n; ++d) x[d] = lo[d] + (hi[d] - lo[d]) * u(rng);
            pts.push_back(std::move(x));
        }
        return pts;
    }
    // Cell-center grid, strictly interior; axis 0 varies fastest.
    for (long k = 0; k < m; ++k) {
        Eigen::VectorXd x(n);
        long rem = k;
        for (int d = 0; d < n; ++d) {
            const long idx = rem % per_axis;
            rem /= per_axis;
            x[d] = lo[d] + (idx + 0.5) * (hi[d] - lo[d]) / per_axis;
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

long SamplePlan::total() const {
    long m = 1;
    for (int d = 0; d < lo.size(); ++d) m *= per_axis;
    return m;
}

bool GenConfig::fully_truncated() const { return lambda * tau > 69.0; }  // e^{-69} < 1e-30

namespace {

void check_config(const GenConfig& cfg) {
    if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda))
        throw ConfigError("GenConfig: lambda must be > 0");
    if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau))
        throw ConfigError("GenConfig: tau must be > 0");
}

// The integrand lambda^2 e^{-lambda s} z(phi(s,x)) concentrates on
// s in [0, ~40/lambda]; beyond that the weight is < e^{-40}.
double layer_cut(const GenConfig& cfg) { return std::min(cfg.tau, 40.0 / cfg.lambda); }

// Jointly integrates the state and the shifted weighted integrals
//   J_i(t) = lambda^2 int_0^t e^{-lambda s} (z_i(x(s)) - z_i(x0)) ds
// over the boundary layer. Splitting off the constant part keeps J at O(1)
// so that the O(lambda) bulk never enters the quadrature error budget.
// Returns (state at the cut, J at the cut).
std::pair<Eigen::VectorXd, Eigen::VectorXd> layer_integrals_ode(
    const Flow& flow, const Dictionary& dict, const Eigen::VectorXd& x,
    const GenConfig& cfg) {
    const int n = dict.dimension;
    const int N = dict.size();
    const Eigen::RowVectorXd z0 = evaluate(dict, x);
    const double cut = layer_cut(cfg);
    const double lam = cfg.lambda;

    Eigen::VectorXd y0(n + N);
    y0.head(n) = x;
    y0.tail(N).setZero();

    const auto& f = flow.field.eval;
    auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const Eigen::VectorXd state = y.head(n);
        dy.head(n) = f(state);
        const double w = lam * lam * std::exp(-lam * t);
        const Eigen::RowVectorXd z = evaluate(dict, state);
        for (int i = 0; i < N; ++i) dy[n + i] = w * (z[i] - z0[i]);
    };

    Rk45Options opt;
    opt.rel_tol = cfg.rel_tol;
    opt.abs_tol = cfg.abs_tol;
    opt.max_step = cut / 4.0;
    opt.initial_step = 1e-2 / lam;
    opt.blowup_norm = flow.blowup_norm + 1e3;  // J components are O(1)
    const Eigen::VectorXd y = rk45_integrate(rhs, 0.0, cut, y0, opt);
    return {y.head(n), y.tail(N)};
}

// Snapshot alternative: composite trapezoid of the shifted integrand on a
// geometric grid of flow snapshots in (0, cut].
std::pair<Eigen::VectorXd, Eigen::VectorXd> layer_integrals_snapshots(
    const Flow& flow, const Dictionary& dict, const Eigen::VectorXd& x,
    const GenConfig& cfg) {
    const int N = dict.size();
    const int K = std::max(cfg.snapshots, 8);
    const Eigen::RowVectorXd z0 = evaluate(dict, x);
    const double cut = layer_cut(cfg);
    const double lam = cfg.lambda;
    const double s_min = cut * 1e-4;

    auto integrand = [&](double s, const Eigen::VectorXd& state) {
        const Eigen::RowVectorXd z = evaluate(dict, state);
        return (lam * lam * std::exp(-lam * s) * (z - z0)).transpose().eval();
    };

    Eigen::VectorXd J = Eigen::VectorXd::Zero(N);
    double s_prev = 0.0;
    Eigen::VectorXd g_prev = Eigen::VectorXd::Zero(N);  // integrand vanishes at s=0
    Eigen::VectorXd state = x;
    for (int k = 0; k < K; ++k) {
        const double s = s_min * std::pow(cut / s_min, static_cast<double>(k) / (K - 1));
        state = flow_to(flow, state, s - s_prev);
        const Eigen::VectorXd g = integrand(s, state);
        J += 0.5 * (s - s_prev) * (g + g_prev);
        s_prev = s;
        g_prev = g;
    }
    return {state, J};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> layer_integrals(
    const Flow& flow, const Dictionary& dict, const Eigen::VectorXd& x,
    const GenConfig& cfg) {
    return cfg.quadrature == GenConfig::Quadrature::AugmentedOde
               ? layer_integrals_ode(flow, dict, x, cfg)
               : layer_integrals_snapshots(flow, dict, x, cfg);
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> truncated_resolvent_integral(
    const Flow& flow, const Dictionary& dict, const Eigen::VectorXd& x,
    const GenConfig& cfg) {
    check_config(cfg);
    const auto [x_cut, J] = layer_integrals(flow, dict, x, cfg);
    const Eigen::RowVectorXd z0 = evaluate(dict, x);
    const double lam = cfg.lambda;
    // Raw integral = shifted part + analytic constant part.
    const double const_part = lam * (1.0 - std::exp(-lam * cfg.tau));
    Eigen::VectorXd raw = J + const_part * z0.transpose();
    const double cut = layer_cut(cfg);
    const Eigen::VectorXd x_tau =
        cut < cfg.tau ? flow_to(flow, x_cut, cfg.tau - cut) : x_cut;
    return {x_tau, raw};
}

Eigen::VectorXd label_row(const Flow& flow, const Dictionary& dict,
                          const Eigen::VectorXd& x, const GenConfig& cfg) {
    check_config(cfg);
    const auto [x_cut, J] = layer_integrals(flow, dict, x, cfg);
    const Eigen::RowVectorXd z0 = evaluate(dict, x);
    const double lam = cfg.lambda;
    // label = J + lam*z0*(1 - e^{-lam tau}) - lam*z0 = J - lam*z0*e^{-lam tau}
    return J - (lam * std::exp(-lam * cfg.tau)) * z0.transpose();
}

namespace {

TrainingSet generate_impl(const Flow& flow, const Dictionary& dict, const SamplePlan& plan,
                          const GenConfig& cfg, const GenOptions& opt, bool parallel) {
    check_config(cfg);
    const auto pts = plan.points();
    const long M = static_cast<long>(pts.size());
    const int N = dict.size();

    Eigen::MatrixXd X(M, N), Y(M, N);
    std::vector<std::string> failures(M);
    std::vector<char> failed(M, 0);

    auto do_sample = [&](long m) {
        try {
            X.row(m) = evaluate(dict, pts[m]);
            Y.row(m) = label_row(flow, dict, pts[m], cfg).transpose();
        } catch (const std::exception& e) {
            failed[m] = 1;
            failures[m] = e.what();
        }
    };

#ifdef KOOPGEN_HAVE_OPENMP
    if (parallel) {
        const int nthreads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nthreads)
        for (long m = 0; m < M; ++m) do_sample(m);
    } else {
        for (long m = 0; m < M; ++m) do_sample(m);
    }
#else
    (void)parallel;
    for (long m = 0; m < M; ++m) do_sample(m);
#endif

    TrainingSet ts;
    ts.cfg = cfg;
    ts.basis_id = dict.basis_id();

    long nfail = 0;
    for (long m = 0; m < M; ++m) nfail += failed[m];
    if (nfail == 0) {
        ts.X = std::move(X);
        ts.Y = std::move(Y);
        ts.samples = pts;
        return ts;
    }
    if (opt.strict) {
        for (long m = 0; m < M; ++m)
            if (failed[m])
                throw GenerationError("sample " + std::to_string(m) + " failed: " + failures[m]);
    }
    // Lenient: compact surviving rows, order preserved.
    ts.X.resize(M - nfail, N);
    ts.Y.resize(M - nfail, N);
    long r = 0;
    for (long m = 0; m < M; ++m) {
        if (failed[m]) continue;
        ts.X.row(r) = X.row(m);
        ts.Y.row(r) = Y.row(m);
        ts.samples.push_back(pts[m]);
        ++r;
    }
    ts.dropped = nfail;
    return ts;
}

}  // namespace

TrainingSet generate(const Flow& flow, const Dictionary& dict, const SamplePlan& plan,
                     const GenConfig& cfg, const GenOptions& opt) {
    return generate_impl(flow, dict, plan, cfg, opt, /*parallel=*/true);
}

TrainingSet generate_serial(const Flow& flow, const Dictionary& dict, const SamplePlan& plan,
                            const GenConfig& cfg, const GenOptions& opt) {
    return generate_impl(flow, dict, plan, cfg, opt, /*parallel=*/false);
}

}  // namespace koopgen
