// Wall-clock comparison of the OpenMP kernels against their serial references.

#include <chrono>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <fmt/format.h>

#include "msqkd/attack.hpp"
#include "msqkd/protocol_mc.hpp"
#include "msqkd/sweep.hpp"

namespace {

template <class F>
double time_ms(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial, double parallel, bool same) {
    fmt::print("{:<28} serial {:>10.2f} ms   parallel {:>10.2f} ms   speedup {:>5.2f}x   identical={}\n", name,
               serial, parallel, serial / parallel, same);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace msqkd;
    const std::uint64_t rounds = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4'000'000;
#ifdef _OPENMP
    fmt::print("OpenMP threads: {}\n", omp_get_max_threads());
#else
    fmt::print("built without OpenMP\n");
#endif

    SimConfig cfg{rounds, 7, {0.05, 0.3, 1e-3}};
    SimStats serial_stats, parallel_stats;
    const double mc_serial = time_ms([&] { serial_stats = run_simulation_serial(cfg); });
    const double mc_parallel = time_ms([&] { parallel_stats = run_simulation(cfg); });
    report(fmt::format("monte carlo ({} rounds)", rounds).c_str(), mc_serial, mc_parallel,
           serial_stats == parallel_stats);

    SweepSpec spec;
    spec.variable = SweepVariable::LossProbability;
    spec.start = 0.0;
    spec.stop = 0.999;
    spec.step = 1e-4;
    spec.fixed = {0.05, 0.0, 1e-6};
    std::vector<SweepRow> serial_rows, parallel_rows;
    const double sw_serial = time_ms([&] { serial_rows = run_sweep_serial(spec); });
    const double sw_parallel = time_ms([&] { parallel_rows = run_sweep(spec); });
    bool same_rows = serial_rows.size() == parallel_rows.size();
    for (std::size_t i = 0; same_rows && i < serial_rows.size(); ++i) {
        same_rows = serial_rows[i].r == parallel_rows[i].r && serial_rows[i].r_eff == parallel_rows[i].r_eff;
    }
    report(fmt::format("sweep ({} points)", serial_rows.size()).c_str(), sw_serial, sw_parallel, same_rows);

    std::vector<CampaignEntry> serial_c, parallel_c;
    const double c_serial = time_ms([&] { serial_c = soundness_campaign_serial(2000, 4, 1); });
    const double c_parallel = time_ms([&] { parallel_c = soundness_campaign(2000, 4, 1); });
    bool same_c = serial_c.size() == parallel_c.size();
    for (std::size_t i = 0; same_c && i < serial_c.size(); ++i) {
        same_c = serial_c[i].report.exact == parallel_c[i].report.exact;
    }
    report("attack campaign (2000)", c_serial, c_parallel, same_c);
    return 0;
}
