#pragma once

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with PI step control.
// The 5th-order solution is propagated; the embedded 4th-order difference
// drives the error estimate.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "koopgen/errors.hpp"

namespace koopgen {

struct Rk45Options {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.1;
    double initial_step = 0.0;  // 0 -> heuristic
    double blowup_norm = 1e6;
    // Optional hook: called after each accepted step with (t, y).
    std::function<void(double, const Eigen::VectorXd&)> on_step;
};

// Integrates y' = rhs(t, y) from t0 to t1 (t1 >= t0) and returns y(t1).
inline Eigen::VectorXd rk45_integrate(
    const std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>& rhs,
    double t0, double t1, Eigen::VectorXd y, const Rk45Options& opt = {}) {
    // Dormand-Prince coefficients.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - bhat (error weights); k7 = f(t+h, y5).
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double span = t1 - t0;
    if (span <= 0.0) return y;

    const Eigen::Index n = y.size();
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n), err(n);

    double t = t0;
    double h = opt.initial_step > 0.0 ? opt.initial_step : std::min(opt.max_step, span / 100.0);
    h = std::min(h, span);
    double err_prev = 1.0;
    bool first = true;

    rhs(t, y, k1);
    while (t < t1) {
        h = std::min(h, t1 - t);
        const double eps_progress = 16.0 * std::numeric_limits<double>::epsilon() *
                                    std::max(std::abs(t), 1.0);
        if (h < eps_progress)
            throw StepUnderflowError("rk45: step size underflow at t=" + std::to_string(t));

        ytmp = y + h * (a21 * k1);
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, y5, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err_norm_sq = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double scale = opt.abs_tol +
                opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double r = err[i] / scale;
            err_norm_sq += r * r;
        }
        const double err_norm = std::sqrt(err_norm_sq / static_cast<double>(n));

        if (err_norm <= 1.0) {
            t += h;
            y.swap(y5);
            k1.swap(k7);  // FSAL
            if (!y.allFinite() || y.norm() > opt.blowup_norm)
                throw BlowUpError("rk45: trajectory norm exceeded blow-up bound at t=" +
                                  std::to_string(t));
            if (opt.on_step) opt.on_step(t, y);
            const double fac = first
                ? 0.9 * std::pow(std::max(err_norm, 1e-10), -0.2)
                : 0.9 * std::pow(std::max(err_norm, 1e-10), -0.14) * std::pow(err_prev, 0.08);
            h *= std::clamp(fac, 0.2, 10.0);
            h = std::min(h, opt.max_step);
            err_prev = std::max(err_norm, 1e-10);
            first = false;
        } else {
            h *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 1.0);
        }
    }
    return y;
}

}  // namespace koopgen
