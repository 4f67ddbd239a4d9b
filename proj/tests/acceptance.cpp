// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "msqkd/attack.hpp"
#include "msqkd/error.hpp"
#include "msqkd/keyrate.hpp"
#include "msqkd/protocol_mc.hpp"
#include "msqkd/sweep.hpp"

using namespace msqkd;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("failed: " + what);
        }
    }
    void info(const std::string& what) { notes.push_back(what); }
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Outcome ideal_point() {
    Outcome out;
    const auto rep = keyrate_for_channel({0.0, 0.0, 0.0});
    out.require(close(rep.r, 1.0, 1e-9), fmt::format("r = {:.12g}", rep.r));
    out.require(close(rep.h_ab, 0.0, 1e-12), fmt::format("H(A|B) = {:.3g}", rep.h_ab));
    out.require(close(rep.normalization, 0.75, 1e-15), fmt::format("N = {:.15g}", rep.normalization));
    out.info(fmt::format("r={:.12f} H(A|B)={:.3g} N={}", rep.r, rep.h_ab, rep.normalization));
    return out;
}

Outcome efficiency() {
    Outcome out;
    const auto rep = keyrate_for_channel({0.0, 0.0, 0.0});
    const double r_eff_old = rep.baselines.r_eff_old.value_or(-1.0);
    out.require(close(rep.r_eff, 3.0 / 22.0, 1e-9), fmt::format("r_eff = {:.12g}", rep.r_eff));
    out.require(close(r_eff_old, 0.125, 1e-12), fmt::format("r_eff_old = {:.12g}", r_eff_old));
    const double improvement = (rep.r_eff - r_eff_old) / r_eff_old * 100.0;
    out.require(close(improvement, 100.0 / 11.0, 1e-6), fmt::format("improvement = {:.6f}%", improvement));
    out.info(fmt::format("r_eff={:.6f} r_eff_old={:.6f} improvement={:.2f}%", rep.r_eff, r_eff_old, improvement));
    return out;
}

Outcome noise_tolerance() {
    Outcome out;
    const double root_new = max_phase_noise(0.0, 0.0);
    const double root_old = max_phase_noise(0.0, 0.0, {}, true);
    out.require(root_new >= 0.096 && root_new <= 0.100, fmt::format("root {:.5f} outside [0.096, 0.100]", root_new));
    out.require(root_old >= 0.087 && root_old <= 0.091, fmt::format("original root {:.5f} outside [0.087, 0.091]", root_old));
    out.info(fmt::format("phi_max={:.4f} original phi_max={:.4f}", root_new, root_old));
    return out;
}

Outcome figure_shapes() {
    Outcome out;
    constexpr double eps = 1e-12;

    SweepSpec loss;
    loss.stop = 0.10;
    loss.step = 0.002;
    std::vector<std::vector<SweepRow>> curves;
    for (double pl : {0.0, 0.8, 0.95}) {
        loss.fixed = {0.0, pl, 1e-6};
        curves.push_back(run_sweep(loss));
    }
    for (std::size_t c = 0; c < curves.size(); ++c) {
        for (std::size_t i = 0; i < curves[c].size(); ++i) {
            const auto& row = curves[c][i];
            if (!row.r) {
                out.require(false, fmt::format("no accepted rounds at phi={}", row.x));
                continue;
            }
            if (i > 0 && curves[c][i - 1].r) {
                out.require(*row.r <= *curves[c][i - 1].r + eps,
                            fmt::format("r increases in phi at phi={} (curve {})", row.x, c));
            }
            if (c > 0 && curves[c - 1][i].r) {
                out.require(*row.r <= *curves[c - 1][i].r + eps,
                            fmt::format("loss ordering broken at phi={} (curve {})", row.x, c));
            }
        }
    }

    SweepSpec lossless;
    lossless.stop = 0.12;
    lossless.step = 0.002;
    int compared = 0;
    for (const auto& row : run_sweep(lossless)) {
        const double r = row.r.value_or(0.0), r_old = row.r_old.value_or(0.0);
        if (r > 0.0) {
            ++compared;
            out.require(row.bb84 >= r - eps, fmt::format("bb84 < r at phi={}", row.x));
            if (r_old > 0.0) out.require(r >= r_old - eps, fmt::format("r < r_old at phi={}", row.x));
        }
        const double r_eff_old = row.r_eff_old.value_or(0.0);
        if (r_eff_old > 0.0) {
            out.require(row.r_eff.value_or(0.0) >= r_eff_old - eps, fmt::format("r_eff < r_eff_old at phi={}", row.x));
        }
    }
    out.info(fmt::format("{} curves x {} points, {} positive lossless points", curves.size(), curves[0].size(),
                         compared));
    return out;
}

Outcome monte_carlo() {
    Outcome out;
    int points = 0;
    for (double phi : {0.0, 0.05}) {
        for (double pl : {0.0, 0.5}) {
            for (double pd : {0.0, 1e-3}) {
                const ChannelParams params{phi, pl, pd};
                const SimStats stats = run_simulation(SimConfig{1'000'000, 2024 + static_cast<std::uint64_t>(points), params});
                ++points;
                double worst = 0.0;
                for (const auto& z : compare_to_analytic(stats, params, 4.0)) {
                    worst = std::max(worst, std::abs(z.z));
                    out.require(!z.flagged, fmt::format("{} at (phi={}, p_l={}, p_d={}): z = {:.2f}", z.name, phi,
                                                        pl, pd, z.z));
                }
                if (phi == 0.0 && pd == 0.0) {
                    out.require(stats.alice_key == stats.bob_key,
                                fmt::format("raw keys differ at (phi=0, p_l={}, p_d=0)", pl));
                }
                out.info(fmt::format("(phi={}, p_l={}, p_d={}) accepted={} max|z|={:.2f}", phi, pl, pd,
                                     stats.accepted, worst));
            }
        }
    }
    return out;
}

Outcome soundness() {
    Outcome out;
    int accepted = 0, estimated_violations = 0;
    std::uint64_t next_seed = 7000;
    while (accepted < 200) {
        const auto batch = soundness_campaign(static_cast<std::size_t>(200 - accepted), 4, next_seed);
        next_seed += batch.size();
        for (const auto& e : batch) {
            if (!e.accepted) continue;
            ++accepted;
            out.require(e.report.sound6, fmt::format("6-term bound {:.12g} > exact {:.12g} (d={}, seed={})",
                                                     e.report.bound6_exact_overlaps, e.report.exact, e.d, e.seed));
            out.require(e.report.three_le_six, fmt::format("3-term above 6-term (d={}, seed={})", e.d, e.seed));
            if (!e.report.sound3_estimated) ++estimated_violations;
        }
    }

    int phase_points = 0;
    for (int i = 0; i < 50; ++i) {
        const double theta = std::numbers::pi * i / 49.0;
        const auto rep = soundness_report(phase_noisy_attack(theta));
        ++phase_points;
        out.require(rep.sound3_estimated, fmt::format("estimated bound {:.12g} > exact {:.12g} at theta={:.4f}",
                                                      rep.bound3_estimated, rep.exact, theta));
        out.require(rep.sound6, fmt::format("6-term bound above exact at theta={:.4f}", theta));
    }
    out.info(fmt::format("{} random specs, {} phase-family points", accepted, phase_points));
    out.info(fmt::format("informational: estimated-overlap bound exceeded exact H(A|E) on {} of {} random specs",
                         estimated_violations, accepted));
    return out;
}

Outcome cross_module() {
    Outcome out;
    const AttackSpec honest = honest_attack();
    const Observables a = observables_from_attack(honest);
    const Observables c = observables_from_channel({0.0, 0.0, 0.0});
    const double fields_a[] = {a.p1_rr, a.p0_rr, a.p1_mr, a.p0_mr, a.p1_rm, a.p0_rm, a.p1_mm, a.p0_mm,
                               a.alpha2, a.beta2, a.gamma2};
    const double fields_c[] = {c.p1_rr, c.p0_rr, c.p1_mr, c.p0_mr, c.p1_rm, c.p0_rm, c.p1_mm, c.p0_mm,
                               c.alpha2, c.beta2, c.gamma2};
    double worst = 0.0;
    for (std::size_t i = 0; i < std::size(fields_a); ++i) worst = std::max(worst, std::abs(fields_a[i] - fields_c[i]));
    out.require(worst <= 1e-12, fmt::format("observables differ by {:.3g}", worst));

    const auto via_attack = keyrate(a, estimate_inner_products(a), attack_p0(honest));
    const auto via_channel = keyrate_for_channel({0.0, 0.0, 0.0});
    out.require(close(via_attack.r, via_channel.r, 1e-9), "r differs between paths");
    out.require(close(via_attack.r_eff, via_channel.r_eff, 1e-9), "r_eff differs between paths");
    out.info(fmt::format("max observable difference {:.3g}, r difference {:.3g}", worst,
                         std::abs(via_attack.r - via_channel.r)));
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"ideal-point rate", ideal_point},
        {"efficiency over the original protocol", efficiency},
        {"noise tolerance", noise_tolerance},
        {"key-rate curve shapes", figure_shapes},
        {"Monte Carlo agreement", monte_carlo},
        {"bound soundness", soundness},
        {"cross-module consistency", cross_module},
    };

    int failures = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.notes.push_back(std::string("exception: ") + e.what());
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        fmt::print("[{}] {}. {} ({:.1f} ms)\n", outcome.pass ? "PASS" : "FAIL", index, c.name, ms);
        std::size_t shown = 0;
        for (const auto& note : outcome.notes) {
            if (++shown > 12) {
                fmt::print("      ... {} more\n", outcome.notes.size() - 12);
                break;
            }
            fmt::print("      {}\n", note);
        }
        failures += outcome.pass ? 0 : 1;
    }
    fmt::print("{} of {} criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
