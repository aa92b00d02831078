// Compares the serial reference label-generation path against the
// OpenMP-parallel kernel and checks that outputs are identical.

#include <chrono>
#include <cstdio>

#ifdef KOOPGEN_HAVE_OPENMP
#include <omp.h>
#endif

#include "koopgen/datagen.hpp"

using namespace koopgen;
using clock_type = std::chrono::steady_clock;

int main(int argc, char** argv) {
    int per_axis = argc > 1 ? std::atoi(argv[1]) : 40;

    Flow flow;
    flow.field = vanderpol();
    const Dictionary dict = monomials_2d(3, 2);
    SamplePlan plan;
    plan.lo = Eigen::Vector2d(-1, -1);
    plan.hi = Eigen::Vector2d(1, 1);
    plan.per_axis = per_axis;
    GenConfig cfg;  // lambda = 1e6, tau = 1

    std::printf("samples: %ld  dictionary: %d\n", plan.total(), dict.size());

    auto t0 = clock_type::now();
    const TrainingSet serial = generate_serial(flow, dict, plan, cfg);
    auto t1 = clock_type::now();
    const TrainingSet parallel = generate(flow, dict, plan, cfg);
    auto t2 = clock_type::now();

    const double ts = std::chrono::duration<double>(t1 - t0).count();
    const double tp = std::chrono::duration<double>(t2 - t1).count();
#ifdef KOOPGEN_HAVE_OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#endif
    std::printf("serial:   %.3f s\n", ts);
    std::printf("parallel: %.3f s  (speedup %.2fx)\n", tp, ts / tp);

    const double dx = (serial.X - parallel.X).cwiseAbs().maxCoeff();
    const double dy = (serial.Y - parallel.Y).cwiseAbs().maxCoeff();
    std::printf("max |dX| = %g, max |dY| = %g  -> %s\n", dx, dy,
                (dx == 0.0 && dy == 0.0) ? "identical" : "MISMATCH");
    return (dx == 0.0 && dy == 0.0) ? 0 : 1;
}
