#include "msqkd/keyrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "msqkd/error.hpp"

namespace msqkd {

namespace {

// Overlap lower bounds may not exceed the Cauchy-Schwarz cap of their pair;
// rounding noise up to 1e-9 is clamped away.
double capped_overlap(const char* name, double overlap, double nE, double nF) {
    const double cap = std::sqrt(std::max(nE, 0.0) * std::max(nF, 0.0));
    if (overlap < 0.0 || overlap > cap + 1e-9) {
        throw InvalidParameter(
            fmt::format("overlap bound {} = {} violates Cauchy-Schwarz cap {}", name, overlap, cap));
    }
    return std::min(overlap, cap);
}

// Common shape of both overlap bounds: half the excess of the two single-arm
// probabilities over the both-reflect probability, minus the vacuum
// corrections (|<e|g>| <= sqrt(<g>)).
double triangle_bound(const Observables& obs, double t, double s, double r, double g) {
    const double alpha = std::sqrt(obs.alpha2);
    const double beta = std::sqrt(obs.beta2);
    const double gamma = std::sqrt(obs.gamma2);
    const double raw = (t + s - r) / 2.0 - 1.5 * g - (alpha * gamma + beta * gamma) * std::sqrt(g);
    return std::clamp(raw, 0.0, std::sqrt(t * s));
}

TermContribution contribution(const char* label, const EntropyTerm& term, double n) {
    TermContribution out;
    out.label = label;
    const double total = term.nE + term.nF;
    out.weight = total / n;
    out.lambda = total > 0.0 ? lambda_of(term) : std::numeric_limits<double>::quiet_NaN();
    out.contribution = theorem1_summand(term, n);
    return out;
}

constexpr std::array<const char*, 6> kTermLabels = {
    "t1|s1", "t0s0|s0t0", "t0s1|s0t1", "r1|g1", "r0g0|g0r0", "r0g1|g0r1",
};

EntropyBound evaluate_terms(const Observables& obs, const std::vector<EntropyTerm>& terms) {
    const double n = normalization(obs);
    if (!(n > 0.0)) throw InvalidNormalization("normalization N must be positive");
    EntropyBound bound;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        bound.terms.push_back(contribution(kTermLabels[i], terms[i], n));
        bound.value += bound.terms.back().contribution;
    }
    return bound;
}

}  // namespace

double bound_s1t1(const Observables& obs) {
    return triangle_bound(obs, obs.t1(), obs.s1(), obs.r1(), obs.g1());
}

double bound_s0t0(const Observables& obs, S0T0Variant variant) {
    if (variant == S0T0Variant::IndexConsistent) {
        return triangle_bound(obs, obs.t0(), obs.s0(), obs.r0(), obs.g0());
    }
    return triangle_bound(obs, obs.t0(), obs.s0(), obs.r1(), obs.g1());
}

InnerProductBounds estimate_inner_products(const Observables& obs, S0T0Variant variant) {
    InnerProductBounds ipb;
    ipb.s1t1 = bound_s1t1(obs);
    ipb.s0t0 = bound_s0t0(obs, variant);
    return ipb;
}

JointAB joint_distribution(const Observables& obs) {
    const double n = normalization(obs);
    if (!(n > 0.0)) throw NoAcceptedRounds();
    JointAB p;
    p.p00 = (obs.t1() + obs.t0() * obs.s0() + obs.t0() * obs.s1()) / n;
    p.p11 = (obs.s1() + obs.s0() * obs.t0() + obs.s0() * obs.t1()) / n;
    p.p01 = (obs.r1() + obs.r0() * obs.g0() + obs.r0() * obs.g1()) / n;
    p.p10 = (obs.g1() + obs.g0() * obs.r0() + obs.g0() * obs.r1()) / n;
    return p;
}

double conditional_entropy_AB(const Observables& obs) {
    const JointAB p = joint_distribution(obs);
    const std::array<double, 4> joint = {p.p00, p.p01, p.p10, p.p11};
    const std::array<double, 2> bob = {p.p00 + p.p10, p.p01 + p.p11};
    return std::max(shannon_entropy(joint) - shannon_entropy(bob), 0.0);
}

std::vector<EntropyTerm> entropy_terms_3(const Observables& obs, const InnerProductBounds& ipb) {
    const double t1 = obs.t1(), t0 = obs.t0(), s1 = obs.s1(), s0 = obs.s0();
    const double s1t1 = capped_overlap("s1t1", ipb.s1t1, s1, t1);
    const double s0t0 = capped_overlap("s0t0", ipb.s0t0, s0, t0);
    return {
        {t1, s1, s1t1},
        {t0 * s0, s0 * t0, s0t0 * s0t0},
        {t0 * s1, s0 * t1, s0t0 * s1t1},
    };
}

std::vector<EntropyTerm> entropy_terms_6(const Observables& obs, const InnerProductBounds& ipb) {
    auto terms = entropy_terms_3(obs, ipb);
    const double r1 = obs.r1(), r0 = obs.r0(), g1 = obs.g1(), g0 = obs.g0();
    const double r1g1 = capped_overlap("r1g1", ipb.r1g1.value_or(0.0), r1, g1);
    const double r0g0 = capped_overlap("r0g0", ipb.r0g0.value_or(0.0), r0, g0);
    terms.push_back({r1, g1, r1g1});
    terms.push_back({r0 * g0, g0 * r0, r0g0 * r0g0});
    terms.push_back({r0 * g1, g0 * r1, r0g0 * r1g1});
    return terms;
}

EntropyBound entropy_lower_bound_3term(const Observables& obs, const InnerProductBounds& ipb) {
    return evaluate_terms(obs, entropy_terms_3(obs, ipb));
}

EntropyBound entropy_lower_bound_6term(const Observables& obs, const InnerProductBounds& ipb) {
    return evaluate_terms(obs, entropy_terms_6(obs, ipb));
}

OriginalProtocolRate original_protocol_keyrate(const Observables& obs) {
    OriginalProtocolRate out;
    const double t1 = obs.t1(), s1 = obs.s1(), r1 = obs.r1(), g1 = obs.g1();
    out.normalization = t1 + s1 + r1 + g1;
    if (!(out.normalization > 0.0)) throw NoAcceptedRounds();
    const double n = out.normalization;

    const EntropyTerm term{t1, s1, bound_s1t1(obs)};
    out.h_ae_lower = theorem1_bound(std::span(&term, 1), n);

    // Key bits: RM -> (0,0), MR -> (1,1), RR -> (0,1), MM -> (1,0).
    const std::array<double, 4> joint = {t1 / n, r1 / n, g1 / n, s1 / n};
    const std::array<double, 2> bob = {(t1 + g1) / n, (r1 + s1) / n};
    out.h_ab = std::max(shannon_entropy(joint) - shannon_entropy(bob), 0.0);
    out.r = out.h_ae_lower - out.h_ab;
    out.r_eff = n / 4.0 * out.r;
    return out;
}

double bb84_keyrate(double phi) {
    if (!(phi >= 0.0 && phi <= 0.5)) {
        throw InvalidParameter(fmt::format("phi = {} outside [0, 0.5]", phi));
    }
    return 1.0 - 2.0 * binary_entropy(phi);
}

KeyRateReport keyrate(const Observables& obs, const InnerProductBounds& ipb, double p0,
                      BoundMode mode, std::optional<double> phi) {
    validate(obs);
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw InvalidParameter(fmt::format("p0 = {} outside [0, 1]", p0));

    KeyRateReport report;
    report.mode = mode;
    report.normalization = normalization(obs);
    if (!(report.normalization > 0.0)) throw NoAcceptedRounds();
    report.p_acc = report.normalization / 4.0;
    report.p0 = p0;

    EntropyBound bound = mode == BoundMode::SixTerm ? entropy_lower_bound_6term(obs, ipb)
                                                    : entropy_lower_bound_3term(obs, ipb);
    report.h_ae_lower = bound.value;
    report.term_breakdown = std::move(bound.terms);
    report.h_ab = conditional_entropy_AB(obs);
    report.r = report.h_ae_lower - report.h_ab;
    report.r_eff = report.normalization / (4.0 * (1.0 + p0)) * report.r;

    try {
        const auto old = original_protocol_keyrate(obs);
        report.baselines.r_old = old.r;
        report.baselines.r_eff_old = old.r_eff;
    } catch (const NoAcceptedRounds&) {
    }
    if (phi) report.baselines.bb84 = bb84_keyrate(*phi);
    return report;
}

KeyRateReport keyrate_for_channel(const ChannelParams& params, const KeyRateOptions& options) {
    const Observables obs = observables_from_channel(params);
    return keyrate(obs, estimate_inner_products(obs, options.variant), subround2_probability(params),
                   options.mode, params.phi);
}

double max_phase_noise(double p_l, double p_d, const KeyRateOptions& options,
                       bool original_protocol, double tolerance) {
    if (!(tolerance > 0.0)) throw InvalidParameter("bisection tolerance must be positive");
    auto rate = [&](double phi) {
        const ChannelParams params{phi, p_l, p_d};
        try {
            if (original_protocol) return original_protocol_keyrate(observables_from_channel(params)).r;
            return keyrate_for_channel(params, options).r;
        } catch (const NoAcceptedRounds&) {
            return 0.0;
        }
    };
    double lo = 0.0, hi = 0.5;
    if (rate(lo) <= 0.0) return 0.0;
    if (rate(hi) > 0.0) return hi;
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        (rate(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

const char* to_string(BoundMode mode) { return mode == BoundMode::SixTerm ? "6term" : "3term"; }

const char* to_string(S0T0Variant variant) {
    return variant == S0T0Variant::IndexConsistent ? "index-consistent" : "mixed-index";
}

}  // namespace msqkd
