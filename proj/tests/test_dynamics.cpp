#include <cmath>
#include <random>

#include <doctest.h>

#include "koopgen/dictionary.hpp"
#include "koopgen/dynamics.hpp"
#include "koopgen/errors.hpp"
#include "oracles.hpp"

using namespace koopgen;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

VectorXd v1(double a) {
    VectorXd v(1);
    v[0] = a;
    return v;
}

}  // namespace

TEST_CASE("vanderpol right-hand side") {
    const VectorField f = vanderpol();
    CHECK(f.dimension == 2);
    CHECK(f.name == "vanderpol");
    CHECK(f.eval(Vector2d(0, 0)).isApprox(Vector2d(0, 0), 0.0));
    CHECK(f.eval(Vector2d(1, 1)).isApprox(Vector2d(1, -1)));
    const Vector2d g = f.eval(Vector2d(0.5, 0.2));
    CHECK(g[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(-0.5 + 0.75 * 0.2).epsilon(1e-15));
}

TEST_CASE("linear_1d right-hand side") {
    const VectorField f = linear_1d(-2.0);
    CHECK(f.dimension == 1);
    CHECK(f.eval(v1(3.0))[0] == doctest::Approx(-6.0).epsilon(1e-15));
    CHECK(f.eval(v1(0.0))[0] == 0.0);
}

TEST_CASE("reverse negates the field and is an involution") {
    const VectorField f = vanderpol();
    const VectorField r = reverse(f);
    CHECK(r.is_reversed);
    CHECK(r.name == "vanderpol-reversed");
    const VectorField rr = reverse(r);
    CHECK_FALSE(rr.is_reversed);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const Vector2d x(u(rng), u(rng));
        CHECK((r.eval(x) + f.eval(x)).norm() == 0.0);
        CHECK((rr.eval(x) - f.eval(x)).norm() == 0.0);
    }
}

TEST_CASE("field_from_spec") {
    CHECK(field_from_spec("vanderpol").name == "vanderpol");
    CHECK(field_from_spec("vanderpol-reversed").is_reversed);
    const VectorField lin = field_from_spec("linear:a=1.5");
    CHECK(lin.eval(v1(2.0))[0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK_THROWS_AS(field_from_spec("lorenz"), ConfigError);
    CHECK_THROWS_AS(field_from_spec("linear:a=banana"), ConfigError);
}

TEST_CASE("flow_to at t = 0 returns the start point exactly") {
    Flow flow;
    flow.field = vanderpol();
    const Vector2d x(0.3, -0.7);
    CHECK((flow_to(flow, x, 0.0) - x).norm() == 0.0);
}

TEST_CASE("flow_to matches exp(a t) for linear fields") {
    for (double a : {-1.0, 1.0}) {
        Flow flow;
        flow.field = linear_1d(a);
        for (double t : {0.1, 0.5, 1.0}) {
            const double got = flow_to(flow, v1(0.8), t)[0];
            const double exact = 0.8 * std::exp(a * t);
            CHECK(std::abs(got - exact) <=
                  10 * (flow.rel_tol * std::abs(exact) + flow.abs_tol));
        }
    }
}

TEST_CASE("flow_to agrees with a fixed-step RK4 reference") {
    Flow flow;
    flow.field = vanderpol();
    const Vector2d x0(0.5, 0.5);
    const VectorXd got = flow_to(flow, x0, 1.0);
    const VectorXd ref = oracles::rk4_flow(flow.field.eval, x0, 1.0, 200000);
    CHECK((got - ref).norm() < 1e-9);
}

TEST_CASE("flow_to is deterministic") {
    Flow flow;
    flow.field = vanderpol();
    const Vector2d x(0.11, -0.42);
    const VectorXd a = flow_to(flow, x, 0.7);
    const VectorXd b = flow_to(flow, x, 0.7);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("semigroup consistency phi(s, phi(t, x)) = phi(t+s, x)") {
    Flow flow;
    flow.field = vanderpol();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const Vector2d x(u(rng), u(rng));
        for (double t : {0.25, 0.5})
            for (double s : {0.25, 0.5}) {
                const VectorXd one = flow_to(flow, x, t + s);
                const VectorXd two = flow_to(flow, flow_to(flow, x, t), s);
                const double tol =
                    10 * (flow.rel_tol * one.norm() + flow.abs_tol);
                CHECK((one - two).norm() <= tol);
            }
    }
}

TEST_CASE("flow_to reports blow-up") {
    Flow flow;
    flow.field = linear_1d(10.0);
    CHECK_THROWS_AS(flow_to(flow, v1(1.0), 5.0), BlowUpError);
}

TEST_CASE("flow_to rejects negative time") {
    Flow flow;
    flow.field = vanderpol();
    CHECK_THROWS_AS(flow_to(flow, Vector2d(0, 0), -0.1), ConfigError);
}

TEST_CASE("estimate_growth on linear fields") {
    const Dictionary dict = monomials_1d(1, 1);
    std::vector<VectorXd> samples{v1(0.5), v1(0.8), v1(1.0)};

    Flow grow;
    grow.field = linear_1d(1.0);
    const auto g = estimate_growth(grow, dict, samples, 1.0);
    CHECK(g.omega_hat == doctest::Approx(1.0).epsilon(0.05));
    CHECK(g.M_hat >= 1.0);
    CHECK(g.sample_count == 3);

    Flow decay;
    decay.field = linear_1d(-1.0);
    const auto d = estimate_growth(decay, dict, samples, 1.0);
    CHECK(d.omega_hat <= 0.05);  // clamped at 0 for contractions
    CHECK(d.M_hat >= 1.0);
}
