#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

#include "msqkd/attack.hpp"
#include "msqkd/error.hpp"

using namespace msqkd;

namespace {

using V = DerivedVectors;

bool has_violation(const std::vector<Violation>& v, const std::string& needle) {
    for (const auto& x : v) {
        if (x.constraint.find(needle) != std::string::npos) return true;
    }
    return false;
}

double h2(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double von_neumann(const Eigen::MatrixXcd& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    double h = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double p = solver.eigenvalues()(i);
        if (p > 1e-14) h -= p * std::log2(p);
    }
    return h;
}

// Brute-force H(A|E): rho_AE written out on A (x) M1 (x) E (x) M2 (x) E,
// rho_E by partial trace over A. The first-message-"1" branches carry
// |0>|e_0> in the second slot.
struct DenseOracle {
    double h_ae_given_e = 0.0;
    double trace = 0.0;
};

DenseOracle dense_conditional_entropy(const AttackSpec& spec) {
    const DerivedVectors dv = derived_vectors(spec);
    const auto d = static_cast<Eigen::Index>(spec.d);
    const Eigen::Index dim_e = 2 * d * 2 * d;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2 * dim_e, 2 * dim_e);

    struct B {
        int a, first;
        V::Index x;
        int second;
        V::Index y;
    };
    const B branches[] = {
        {0, 1, V::t1, 0, V::t1}, {0, 0, V::t0, 0, V::s0}, {0, 0, V::t0, 1, V::s1},
        {0, 1, V::r1, 0, V::r1}, {0, 0, V::r0, 0, V::g0}, {0, 0, V::r0, 1, V::g1},
        {1, 1, V::s1, 0, V::s1}, {1, 0, V::s0, 0, V::t0}, {1, 0, V::s0, 1, V::t1},
        {1, 1, V::g1, 0, V::g1}, {1, 0, V::g0, 0, V::r0}, {1, 0, V::g0, 1, V::r1},
    };
    for (const auto& b : branches) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(2 * dim_e);
        const auto& x = dv.vectors[b.x];
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                cplx second_amp;
                int m2;
                if (b.first == 1) {
                    m2 = 0;
                    second_amp = j == 0 ? 1.0 : 0.0;
                } else {
                    m2 = b.second;
                    second_amp = dv.vectors[b.y][static_cast<std::size_t>(j)];
                }
                const Eigen::Index idx = (((b.a * 2 + b.first) * d + i) * 2 + m2) * d + j;
                psi(idx) = x[static_cast<std::size_t>(i)] * second_amp;
            }
        }
        rho += psi * psi.adjoint();
    }
    DenseOracle out;
    out.trace = rho.trace().real();
    rho /= out.trace;
    const Eigen::MatrixXcd rho_e = rho.topLeftCorner(dim_e, dim_e) + rho.bottomRightCorner(dim_e, dim_e);
    out.h_ae_given_e = von_neumann(rho) - von_neumann(rho_e);
    return out;
}

}  // namespace

TEST_CASE("validator") {
    CHECK(validate_attack(honest_attack()).empty());

    AttackSpec bad = honest_attack();
    bad.e.m0[0] = bad.e.m1[0] = std::sqrt(0.45);
    const auto v = validate_attack(bad);
    CHECK(has_violation(v, "e-column normalization"));
    CHECK(v.size() == 1);

    AttackSpec amp = honest_attack();
    amp.gamma = 0.1;
    CHECK(has_violation(validate_attack(amp), "source amplitudes"));

    AttackSpec shape = honest_attack();
    shape.d = 2;
    CHECK(has_violation(validate_attack(shape), "has length 1 but d = 2"));

    AttackSpec overlap = honest_attack();
    overlap.g = overlap.e;
    CHECK(has_violation(validate_attack(overlap), "e-g column orthogonality"));

    CHECK_THROWS_AS(honest_attack(0.1), InvalidParameter);
}

TEST_CASE("honest attack reproduces the ideal channel") {
    const AttackSpec honest = honest_attack();
    const Observables obs = observables_from_attack(honest);
    const Observables ref = observables_from_channel({0.0, 0.0, 0.0});
    CHECK(obs.p1_rr == doctest::Approx(ref.p1_rr));
    CHECK(obs.p0_rr == doctest::Approx(ref.p0_rr));
    CHECK(obs.p1_mr == doctest::Approx(0.25));
    CHECK(obs.p0_mr == doctest::Approx(0.25));
    CHECK(obs.p1_rm == doctest::Approx(0.25));
    CHECK(obs.p0_rm == doctest::Approx(0.25));
    CHECK(obs.p1_mm == doctest::Approx(0.0));
    CHECK(obs.p0_mm == doctest::Approx(0.0));
    CHECK(obs.gamma2 == 0.0);

    CHECK(exact_conditional_entropy(honest) == doctest::Approx(1.0).epsilon(1e-12));
    const auto ipb = exact_inner_products(honest);
    CHECK(ipb.s1t1 == doctest::Approx(0.25));
    CHECK(ipb.s0t0 == doctest::Approx(0.25));
    CHECK(attack_p0(honest) == doctest::Approx(0.375));
}

TEST_CASE("phase-noisy family") {
    for (double phi : {0.0, 0.01, 0.05, 0.1, 0.3}) {
        CAPTURE(phi);
        const double theta = 2.0 * std::asin(std::sqrt(phi));
        const AttackSpec spec = phase_noisy_attack(theta);
        CHECK(validate_attack(spec).empty());
        const Observables obs = observables_from_attack(spec);
        CHECK(obs.p1_rr == doctest::Approx(phi).epsilon(1e-12));
        CHECK(obs.p0_rr == doctest::Approx(1.0 - phi).epsilon(1e-12));

        const auto rep = soundness_report(spec);
        CHECK(rep.sound6);
        CHECK(rep.sound3);
        CHECK(rep.sound3_estimated);
        CHECK(rep.bound3_estimated <= rep.exact + 1e-9);
    }
}

TEST_CASE("random attacks") {
    for (std::size_t d : {1u, 2u, 3u, 5u}) {
        for (std::uint64_t seed : {0u, 1u, 99u}) {
            const AttackSpec spec = random_attack(d, seed);
            CHECK(validate_attack(spec, 1e-12).empty());
            const AttackSpec again = random_attack(d, seed);
            CHECK(spec.alpha == again.alpha);
            CHECK(spec.f.m1 == again.f.m1);
            CHECK(spec.g.mv == again.g.mv);
        }
    }
    CHECK(random_attack(2, 1).e.m0 != random_attack(2, 2).e.m0);

    const AttackSpec pinned = random_attack(3, 7, 1.0);
    const AttackSpec honest = embed_attack(honest_attack(), 3);
    CHECK(pinned.alpha == doctest::Approx(honest.alpha));
    CHECK(pinned.gamma == doctest::Approx(0.0));
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(pinned.e.m0[i] - honest.e.m0[i]) < 1e-12);
        CHECK(std::abs(pinned.f.m1[i] - honest.f.m1[i]) < 1e-12);
        CHECK(std::abs(pinned.g.mv[i] - honest.g.mv[i]) < 1e-12);
    }
    CHECK(validate_attack(random_attack(2, 3, 0.5), 1e-12).empty());

    CHECK_THROWS_AS(random_attack(0, 1), InvalidParameter);
    CHECK_THROWS_AS(random_attack(2, 1, 1.5), InvalidParameter);
}

TEST_CASE("derived vectors") {
    const AttackSpec spec = random_attack(2, 5);
    const DerivedVectors dv = derived_vectors(spec);
    const double a = spec.alpha, b = spec.beta, c = spec.gamma;
    for (std::size_t i = 0; i < spec.d; ++i) {
        CHECK(std::abs(dv.vectors[V::r0][i] - (a * spec.e.m0[i] + b * spec.f.m0[i] + c * spec.g.m0[i])) < 1e-15);
        CHECK(std::abs(dv.vectors[V::s1][i] - (b * spec.f.m1[i] + c * spec.g.m1[i])) < 1e-15);
        CHECK(std::abs(dv.vectors[V::t0][i] - (a * spec.e.m0[i] + c * spec.g.m0[i])) < 1e-15);
        CHECK(dv.vectors[V::g1][i] == spec.g.m1[i]);
    }
    for (std::size_t i = 0; i < V::count; ++i) {
        for (std::size_t j = 0; j < V::count; ++j) {
            CHECK(std::abs(dv.gram[i][j] - std::conj(dv.gram[j][i])) < 1e-15);
        }
    }

    // Observables from the attack are valid channel statistics.
    const Observables obs = observables_from_attack(spec);
    CHECK_NOTHROW(validate(obs));
    const auto ipb = exact_inner_products(spec);
    CHECK(ipb.s1t1 <= std::sqrt(obs.s1() * obs.t1()) + 1e-12);
    CHECK(*ipb.r0g0 <= std::sqrt(obs.r0() * obs.g0()) + 1e-12);
}

TEST_CASE("Gram spectrum") {
    CHECK(gram_spectrum({}).empty());
    const auto single = gram_spectrum({{cplx{0.4, 0.0}}});
    REQUIRE(single.size() == 1);
    CHECK(single[0] == doctest::Approx(0.4));

    // Two unit vectors with overlap c: eigenvalues 1 +- |c|.
    const cplx c{0.3, 0.4};
    const auto pair = gram_spectrum({{1.0, c}, {std::conj(c), 1.0}});
    CHECK(pair[0] == doctest::Approx(0.5));
    CHECK(pair[1] == doctest::Approx(1.5));

    const DerivedVectors dv = derived_vectors(random_attack(3, 17));
    std::vector<std::vector<cplx>> g(V::count, std::vector<cplx>(V::count));
    double trace = 0.0;
    for (std::size_t i = 0; i < V::count; ++i) {
        trace += dv.gram[i][i].real();
        for (std::size_t j = 0; j < V::count; ++j) g[i][j] = dv.gram[i][j];
    }
    const auto ev = gram_spectrum(g);
    double sum = 0.0;
    for (double x : ev) {
        CHECK(x >= -1e-12);
        sum += x;
    }
    CHECK(sum == doctest::Approx(trace).epsilon(1e-12));
    // Rank is at most d = 3.
    int nonzero = 0;
    for (double x : ev) nonzero += x > 1e-10;
    CHECK(nonzero <= 3);
}

TEST_CASE("exact H(A|E) agrees with the dense oracle") {
    for (std::size_t d : {1u, 2u}) {
        for (std::uint64_t seed = 0; seed < 12; ++seed) {
            CAPTURE(d);
            CAPTURE(seed);
            const AttackSpec spec = random_attack(d, seed, seed % 3 == 0 ? std::optional<double>(0.6) : std::nullopt);
            const auto oracle = dense_conditional_entropy(spec);
            CHECK(oracle.trace == doctest::Approx(normalization(observables_from_attack(spec))).epsilon(1e-12));
            CHECK(exact_conditional_entropy(spec) == doctest::Approx(oracle.h_ae_given_e).epsilon(1e-9));
        }
    }
    const auto phase = phase_noisy_attack(0.4);
    CHECK(exact_conditional_entropy(phase) == doctest::Approx(dense_conditional_entropy(phase).h_ae_given_e));
}

TEST_CASE("exact H(A|E) examples") {
    // All of the source on Alice's path and g on the vacuum message:
    // every accepted round has A = 0.
    AttackSpec one_sided;
    one_sided.alpha = 1.0;
    one_sided.d = 1;
    one_sided.e = {{std::sqrt(0.5)}, {std::sqrt(0.5)}, {0.0}};
    one_sided.f = {{std::sqrt(0.5)}, {-std::sqrt(0.5)}, {0.0}};
    one_sided.g = {{0.0}, {0.0}, {1.0}};
    REQUIRE(validate_attack(one_sided).empty());
    CHECK(exact_conditional_entropy(one_sided) == doctest::Approx(0.0).epsilon(1e-12));

    // Server announces "vac" always: nothing is accepted.
    AttackSpec silent = honest_attack();
    silent.d = 3;
    silent.e = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    silent.f = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    silent.g = {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    REQUIRE(validate_attack(silent).empty());
    CHECK_THROWS_AS(exact_conditional_entropy(silent), NoAcceptedRounds);

    // Phase-noisy single-message picture: H(A|E) stays within [0, 1] and
    // falls with the noise.
    double previous = 1.0 + 1e-12;
    for (double theta : {0.0, 0.2, 0.4, 0.8}) {
        const double h = exact_conditional_entropy(phase_noisy_attack(theta));
        CHECK(h >= -1e-12);
        CHECK(h <= previous);
        previous = h;
    }
    CHECK(h2(0.5) == 1.0);
}

TEST_CASE("soundness on random attacks") {
    const auto entries = soundness_campaign_serial(200, 4, 1000);
    int accepted = 0;
    for (const auto& e : entries) {
        if (!e.accepted) continue;
        ++accepted;
        CAPTURE(e.seed);
        CAPTURE(e.d);
        CHECK(e.report.exact >= -1e-9);
        CHECK(e.report.exact <= 1.0 + 1e-9);
        CHECK(e.report.sound6);
        CHECK(e.report.sound3);
        CHECK(e.report.three_le_six);
    }
    CHECK(accepted > 190);
}

TEST_CASE("parallel campaign matches the serial reference") {
    const auto par = soundness_campaign(64, 3, 42);
    const auto ser = soundness_campaign_serial(64, 3, 42);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].seed == ser[i].seed);
        CHECK(par[i].d == ser[i].d);
        CHECK(par[i].report.exact == ser[i].report.exact);
        CHECK(par[i].report.bound6_exact_overlaps == ser[i].report.bound6_exact_overlaps);
    }
    CHECK_THROWS_AS(soundness_campaign(4, 0, 1), InvalidParameter);
}

TEST_CASE("key rate from attack statistics matches the channel path") {
    const double phi = 0.05;
    const AttackSpec spec = phase_noisy_attack(2.0 * std::asin(std::sqrt(phi)));
    const Observables from_attack = observables_from_attack(spec);
    const auto a = keyrate(from_attack, estimate_inner_products(from_attack), attack_p0(spec));
    const auto b = keyrate_for_channel({phi, 0.0, 0.0});
    CHECK(a.r == doctest::Approx(b.r).epsilon(1e-12));
    CHECK(a.r_eff == doctest::Approx(b.r_eff).epsilon(1e-12));
    CHECK(a.h_ab == doctest::Approx(b.h_ab).epsilon(1e-12));
}
