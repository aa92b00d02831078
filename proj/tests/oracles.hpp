#pragma once

// Test-only reference numerics, independent of the library's adaptive
// integrator: classical fixed-step RK4 and composite Simpson quadrature.

#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace oracles {

// Fixed-step classical RK4 for x' = f(x) over [0, t] with nsteps steps.
inline Eigen::VectorXd rk4_flow(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                Eigen::VectorXd x, double t, long nsteps) {
    const double h = t / static_cast<double>(nsteps);
    for (long k = 0; k < nsteps; ++k) {
        const Eigen::VectorXd k1 = f(x);
        const Eigen::VectorXd k2 = f(x + 0.5 * h * k1);
        const Eigen::VectorXd k3 = f(x + 0.5 * h * k2);
        const Eigen::VectorXd k4 = f(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

// Composite Simpson of g over [a, b] with n subintervals (n even).
inline double simpson(const std::function<double(double)>& g, double a, double b, long n) {
    if (n % 2) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double acc = g(a) + g(b);
    for (long k = 1; k < n; ++k) acc += g(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Reference value of lambda^2 int_0^cut e^{-lambda s} z(phi(s, x)) ds
// computed with RK4 trajectory samples on a uniform grid and Simpson
// weights. 'z' maps a state to a scalar.
inline double weighted_layer_integral(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const std::function<double(const Eigen::VectorXd&)>& z, const Eigen::VectorXd& x0,
    double lambda, double cut, long n) {
    if (n % 2) ++n;
    const double h = cut / static_cast<double>(n);
    // March the trajectory once, accumulating Simpson terms.
    Eigen::VectorXd x = x0;
    auto g = [&](double s, const Eigen::VectorXd& state) {
        return lambda * lambda * std::exp(-lambda * s) * z(state);
    };
    double acc = g(0.0, x);
    for (long k = 1; k <= n; ++k) {
        x = rk4_flow(f, x, h, 1);
        const double w = (k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += w * g(k * h, x);
    }
    return acc * h / 3.0;
}

}  // namespace oracles
