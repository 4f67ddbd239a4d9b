#include "msqkd/channel_stats.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "msqkd/error.hpp"

namespace msqkd {

namespace {

void check_range(const char* name, double value, double lo, double hi, double tol = 0.0) {
    if (!std::isfinite(value) || value < lo - tol || value > hi + tol) {
        throw InvalidParameter(fmt::format("{} = {} outside [{}, {}]", name, value, lo, hi));
    }
}

}  // namespace

void validate(const ChannelParams& params) {
    check_range("phi", params.phi, 0.0, 0.5);
    check_range("p_l", params.p_l, 0.0, 1.0);
    check_range("p_d", params.p_d, 0.0, 1.0);
}

void validate(const Observables& obs) {
    const std::pair<const char*, double> fields[] = {
        {"p1_rr", obs.p1_rr}, {"p0_rr", obs.p0_rr}, {"p1_mr", obs.p1_mr}, {"p0_mr", obs.p0_mr},
        {"p1_rm", obs.p1_rm}, {"p0_rm", obs.p0_rm}, {"p1_mm", obs.p1_mm}, {"p0_mm", obs.p0_mm},
        {"alpha2", obs.alpha2}, {"beta2", obs.beta2}, {"gamma2", obs.gamma2},
    };
    // Observables computed from attack vectors carry rounding of a few ulps.
    constexpr double tol = 1e-12;
    for (const auto& [name, value] : fields) check_range(name, value, 0.0, 1.0, tol);

    const std::pair<const char*, double> pairs[] = {
        {"rr", obs.p1_rr + obs.p0_rr},
        {"mr", obs.p1_mr + obs.p0_mr},
        {"rm", obs.p1_rm + obs.p0_rm},
        {"mm", obs.p1_mm + obs.p0_mm},
    };
    for (const auto& [name, sum] : pairs) {
        if (sum > 1.0 + tol) {
            throw InvalidParameter(fmt::format("p1_{0} + p0_{0} = {1} exceeds 1", name, sum));
        }
    }
    const double amp = obs.alpha2 + obs.beta2 + obs.gamma2;
    if (std::abs(amp - 1.0) > tol) {
        throw InvalidParameter(fmt::format("alpha2 + beta2 + gamma2 = {} != 1", amp));
    }
}

Observables observables_from_channel(const ChannelParams& params) {
    validate(params);
    const double phi = params.phi;
    const double pl = params.p_l;
    const double keep = 1.0 - pl;
    // Dark count on a vacuum returned by a lossy leg, per message.
    const double dark = pl * params.p_d / 2.0;

    Observables obs;
    obs.p1_rr = dark + keep * (dark + keep * phi);
    obs.p0_rr = dark + keep * (dark + keep * (1.0 - phi));
    const double single = dark + keep / 2.0 * (dark + keep / 2.0);
    obs.p1_mr = obs.p0_mr = single;
    obs.p1_rm = obs.p0_rm = single;
    obs.p1_mm = obs.p0_mm = dark;
    obs.alpha2 = obs.beta2 = keep / 2.0;
    obs.gamma2 = pl;
    return obs;
}

double normalization(const Observables& obs) {
    const double t1 = obs.t1(), t0 = obs.t0();
    const double s1 = obs.s1(), s0 = obs.s0();
    const double r1 = obs.r1(), r0 = obs.r0();
    const double g1 = obs.g1(), g0 = obs.g0();
    return (t1 + t0 * s0 + t0 * s1)    // AB = 00
           + (s1 + s0 * t0 + s0 * t1)  // AB = 11
           + (r1 + r0 * g0 + r0 * g1)  // AB = 01
           + (g1 + g0 * r0 + g0 * r1); // AB = 10
}

double acceptance_probability(const Observables& obs) { return normalization(obs) / 4.0; }

double subround2_probability(const ChannelParams& params) {
    validate(params);
    const double pl = params.p_l;
    const double pd = params.p_d;
    const double keep = 1.0 - pl;
    return 0.25 * (2.0 * pl * pd + keep * (pl * pd + keep / 2.0 + keep * (1.0 - params.phi)));
}

}  // namespace msqkd
