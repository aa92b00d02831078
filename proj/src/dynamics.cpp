#include "koopgen/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "koopgen/dictionary.hpp"
#include "koopgen/errors.hpp"
#include "koopgen/rk45.hpp"

namespace koopgen {

VectorField vanderpol() {
    VectorField f;
    f.name = "vanderpol";
    f.dimension = 2;
    f.eval = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd dx(2);
        dx[0] = x[1];
        dx[1] = -x[0] + (1.0 - x[0] * x[0]) * x[1];
        return dx;
    };
    return f;
}

VectorField linear_1d(double a) {
    VectorField f;
    std::ostringstream name;
    name << "linear:a=" << a;
    f.name = name.str();
    f.dimension = 1;
    f.eval = [a](const Eigen::VectorXd& x) {
        Eigen::VectorXd dx(1);
        dx[0] = a * x[0];
        return dx;
    };
    return f;
}

VectorField reverse(const VectorField& field) {
    VectorField r;
    r.name = field.is_reversed ? field.name.substr(0, field.name.rfind("-reversed"))
                               : field.name + "-reversed";
    r.dimension = field.dimension;
    r.is_reversed = !field.is_reversed;
    auto inner = field.eval;
    r.eval = [inner](const Eigen::VectorXd& x) { return (-inner(x)).eval(); };
    return r;
}

VectorField field_from_spec(const std::string& spec) {
    if (spec == "vanderpol") return vanderpol();
    if (spec == "vanderpol-reversed") return reverse(vanderpol());
    const std::string linear_prefix = "linear:a=";
    if (spec.rfind(linear_prefix, 0) == 0) {
        const std::string arg = spec.substr(linear_prefix.size());
        try {
            size_t pos = 0;
            const double a = std::stod(arg, &pos);
            if (pos != arg.size()) throw std::invalid_argument(arg);
            return linear_1d(a);
        } catch (const std::logic_error&) {
            throw ConfigError("bad linear field spec: " + spec);
        }
    }
    throw ConfigError("unknown field spec: " + spec);
}

Eigen::VectorXd flow_to(const Flow& flow, const Eigen::VectorXd& x0, double t) {
    if (t < 0.0 || !std::isfinite(t)) throw ConfigError("flow_to: t must be finite and >= 0");
    if (x0.size() != flow.field.dimension) throw ConfigError("flow_to: state dimension mismatch");
    if (t == 0.0) return x0;
    Rk45Options opt;
    opt.rel_tol = flow.rel_tol;
    opt.abs_tol = flow.abs_tol;
    opt.max_step = flow.max_step;
    opt.blowup_norm = flow.blowup_norm;
    const auto& f = flow.field.eval;
    return rk45_integrate(
        [&f](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy = f(y); },
        0.0, t, x0, opt);
}

SemigroupGrowthEstimate estimate_growth(const Flow& flow, const Dictionary& dict,
                                        const std::vector<Eigen::VectorXd>& samples,
                                        double horizon) {
    if (samples.empty()) throw ConfigError("estimate_growth: samples empty");
    if (horizon <= 0.0) throw ConfigError("estimate_growth: horizon must be > 0");

    // Envelope r(t) = max over samples and entries of |z_i(phi(t,x))| / |z_i(x)|,
    // restricted to entries with |z_i(x)| above noise. Log-linear fit of r.
    const int steps = 16;
    std::vector<double> ts(steps), logr(steps);
    const double floor_mag = 1e-8;
    for (int k = 0; k < steps; ++k) {
        const double t = horizon * (k + 1) / steps;
        double r = 0.0;
        for (const auto& x : samples) {
            const Eigen::RowVectorXd z0 = evaluate(dict, x);
            const Eigen::RowVectorXd zt = evaluate(dict, flow_to(flow, x, t));
            for (int i = 0; i < dict.size(); ++i) {
                if (std::abs(z0[i]) > floor_mag)
                    r = std::max(r, std::abs(zt[i]) / std::abs(z0[i]));
            }
        }
        ts[k] = t;
        logr[k] = std::log(std::max(r, 1e-300));
    }

    // Least squares for log r ~ log M + w t.
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (int k = 0; k < steps; ++k) {
        st += ts[k];
        sl += logr[k];
        stt += ts[k] * ts[k];
        stl += ts[k] * logr[k];
    }
    const double n = steps;
    const double slope = (n * stl - st * sl) / (n * stt - st * st);
    const double intercept = (sl - slope * st) / n;

    SemigroupGrowthEstimate est;
    est.omega_hat = std::max(0.0, slope);
    est.M_hat = std::max(1.0, std::exp(intercept));
    est.sample_count = static_cast<int>(samples.size());
    return est;
}

}  // namespace koopgen
