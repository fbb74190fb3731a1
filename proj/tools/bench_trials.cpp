// Compares the serial reference trial loop against the OpenMP path on a
// fixed experiment plan and verifies they produce identical results.

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <omp.h>

#include "qka/analysis.hpp"

using namespace qka;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

} // namespace

int main(int argc, char** argv) {
    int trials = 4000;
    int workers = omp_get_max_threads();
    if (argc > 1) trials = std::atoi(argv[1]);
    if (argc > 2) workers = std::atoi(argv[2]);

    ExperimentPlan plan;
    plan.base.m = 8;
    plan.base.l = 2;
    plan.base.qber_threshold = 0.0;
    plan.base.seed = 20240501;
    plan.trials = trials;
    plan.sweep = SweepParam::DecoyCount;
    plan.sweep_values = {4, 8};
    AttackDescriptor attack;
    attack.kind = AttackKind::InterceptResend;
    attack.target_hops = {Hop{Ring::A, 1}};
    plan.attack = attack;

    std::cout << "plan: intercept-resend sweep over decoy_count {4,8}, " << trials
              << " trials per point\n";

    auto t0 = clock_type::now();
    const ExperimentResult serial = run_experiment_serial(plan);
    const double serial_s = seconds_since(t0);
    std::cout << "serial reference: " << serial_s << " s\n";

    t0 = clock_type::now();
    const ExperimentResult parallel = run_experiment_parallel(plan, workers);
    const double parallel_s = seconds_since(t0);
    std::cout << "openmp (" << workers << " workers): " << parallel_s << " s\n";
    std::cout << "speedup: " << serial_s / parallel_s << "x\n";

    const bool identical = experiment_to_csv(serial) == experiment_to_csv(parallel) &&
                           experiment_to_json(serial) == experiment_to_json(parallel);
    std::cout << "results identical: " << (identical ? "yes" : "NO") << "\n";
    if (!identical) return 1;

    for (const SweepPointResult& p : serial.points)
        std::cout << "  decoy_count=" << *p.sweep_value << " detection=" << p.detection_rate
                  << " analytic=" << *p.analytic << "\n";
    return 0;
}
