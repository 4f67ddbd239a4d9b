#include "doctest.h"

#include <vector>

#include "msqkd/channel_stats.hpp"
#include "msqkd/error.hpp"

using namespace msqkd;

namespace {

std::vector<ChannelParams> parameter_grid() {
    std::vector<ChannelParams> grid;
    for (double phi : {0.0, 0.01, 0.05, 0.11, 0.25, 0.5}) {
        for (double pl : {0.0, 0.1, 0.5, 0.8, 0.95, 0.999, 1.0}) {
            for (double pd : {0.0, 1e-6, 1e-3, 0.1, 1.0}) grid.push_back({phi, pl, pd});
        }
    }
    return grid;
}

}  // namespace

TEST_CASE("ideal channel observables") {
    const Observables obs = observables_from_channel({0.0, 0.0, 0.0});
    CHECK(obs.p1_rr == 0.0);
    CHECK(obs.p0_rr == 1.0);
    CHECK(obs.p1_mr == 0.25);
    CHECK(obs.p0_mr == 0.25);
    CHECK(obs.p1_rm == 0.25);
    CHECK(obs.p0_rm == 0.25);
    CHECK(obs.p1_mm == 0.0);
    CHECK(obs.p0_mm == 0.0);
    CHECK(obs.alpha2 == 0.5);
    CHECK(obs.beta2 == 0.5);
    CHECK(obs.gamma2 == 0.0);
}

TEST_CASE("total loss forces vacuum") {
    for (double phi : {0.0, 0.2, 0.5}) {
        const Observables obs = observables_from_channel({phi, 1.0, 0.0});
        CHECK(obs.p1_rr == 0.0);
        CHECK(obs.p0_rr == 0.0);
        CHECK(obs.p1_mr == 0.0);
        CHECK(obs.p0_mr == 0.0);
        CHECK(obs.p1_rm == 0.0);
        CHECK(obs.p0_rm == 0.0);
        CHECK(obs.p1_mm == 0.0);
        CHECK(obs.p0_mm == 0.0);
        CHECK(obs.gamma2 == 1.0);
        CHECK(normalization(obs) == 0.0);
    }
}

TEST_CASE("phase noise only moves the both-reflect cells") {
    const Observables obs = observables_from_channel({0.05, 0.0, 0.0});
    CHECK(obs.p1_rr == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(obs.p0_rr == doctest::Approx(0.95).epsilon(1e-15));
    CHECK(obs.p1_mr == 0.25);
    CHECK(obs.p1_mm == 0.0);
}

TEST_CASE("normalization and acceptance") {
    const Observables ideal = observables_from_channel({0.0, 0.0, 0.0});
    CHECK(normalization(ideal) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(acceptance_probability(ideal) == doctest::Approx(3.0 / 16.0).epsilon(1e-15));

    CHECK(normalization(Observables{}) == 0.0);
    CHECK(acceptance_probability(Observables{}) == 0.0);

    // 1/4 + 1/16 + 1/16 twice, plus <r1> = 0.05.
    const Observables noisy = observables_from_channel({0.05, 0.0, 0.0});
    CHECK(normalization(noisy) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(acceptance_probability(noisy) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("sub-round 2 probability") {
    CHECK(subround2_probability({0.0, 0.0, 0.0}) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(subround2_probability({0.3, 1.0, 0.0}) == 0.0);
    CHECK(subround2_probability({0.05, 0.0, 0.0}) == doctest::Approx(0.3625).epsilon(1e-15));
}

TEST_CASE("invalid channel parameters") {
    CHECK_THROWS_AS(observables_from_channel({0.6, 0.0, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(observables_from_channel({-0.01, 0.0, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(observables_from_channel({0.0, 1.5, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(observables_from_channel({0.0, 0.0, -1e-9}), InvalidParameter);
    CHECK_THROWS_AS(subround2_probability({0.0, 0.0, 2.0}), InvalidParameter);
}

TEST_CASE("observables invariants over the parameter grid") {
    for (const auto& p : parameter_grid()) {
        CAPTURE(p.phi);
        CAPTURE(p.p_l);
        CAPTURE(p.p_d);
        const Observables obs = observables_from_channel(p);
        CHECK_NOTHROW(validate(obs));
        const double n = normalization(obs);
        CHECK(acceptance_probability(obs) >= 0.0);
        CHECK(acceptance_probability(obs) <= 1.0);
        CHECK(n >= 0.0);
        const double p0 = subround2_probability(p);
        CHECK(p0 >= 0.0);
        CHECK(p0 <= 1.0);
        if (p.p_d == 0.0) {
            CHECK(obs.p1_mm == 0.0);
            CHECK(obs.p0_mm == 0.0);
        }
    }
}

TEST_CASE("normalization is monotone in every observable") {
    const double fields[] = {0.0, 0.1, 0.3, 0.6, 0.9};
    double Observables::*members[] = {&Observables::p1_rr, &Observables::p0_rr, &Observables::p1_mr,
                                      &Observables::p0_mr, &Observables::p1_rm, &Observables::p0_rm,
                                      &Observables::p1_mm, &Observables::p0_mm};
    for (const auto& p : parameter_grid()) {
        const Observables base = observables_from_channel(p);
        for (auto member : members) {
            double previous = -1.0;
            for (double v : fields) {
                Observables obs = base;
                obs.*member = v;
                const double n = normalization(obs);
                CHECK(n >= previous);
                previous = n;
            }
        }
    }
}

TEST_CASE("observables validation rejects inconsistent records") {
    Observables obs = observables_from_channel({0.0, 0.0, 0.0});
    obs.gamma2 = 0.1;
    CHECK_THROWS_AS(validate(obs), InvalidParameter);

    obs = observables_from_channel({0.0, 0.0, 0.0});
    obs.p1_rr = 0.2;  // p1_rr + p0_rr = 1.2
    CHECK_THROWS_AS(validate(obs), InvalidParameter);

    obs = observables_from_channel({0.0, 0.0, 0.0});
    obs.p1_mm = -0.1;
    CHECK_THROWS_AS(validate(obs), InvalidParameter);
}
