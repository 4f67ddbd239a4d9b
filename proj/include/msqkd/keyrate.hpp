#pragma once

#include <optional>
#include <string>
#include <vector>

#include "msqkd/channel_stats.hpp"
#include "msqkd/entropy.hpp"

namespace msqkd {

enum class BoundMode { ThreeTerm, SixTerm };

// Which observables enter the |<s0|t0>| lower bound. MixedIndex uses <r1>, <g1>
//; IndexConsistent swaps in <r0>, <g0>.
enum class S0T0Variant { MixedIndex, IndexConsistent };

struct InnerProductBounds {
    double s1t1 = 0.0;  // lower bound on |<s1|t1>|
    double s0t0 = 0.0;  // lower bound on |<s0|t0>|
    // No observable bound is known for these; absent means Eve's optimum, 0.
    std::optional<double> r0g0;
    std::optional<double> r1g1;
};

double bound_s1t1(const Observables& obs);
double bound_s0t0(const Observables& obs, S0T0Variant variant = S0T0Variant::MixedIndex);

// Both bounds from observables alone, r0g0/r1g1 left unset.
InnerProductBounds estimate_inner_products(const Observables& obs,
                                           S0T0Variant variant = S0T0Variant::MixedIndex);

// Joint distribution of the raw-key bits (A, B) over accepted rounds.
struct JointAB {
    double p00 = 0.0, p01 = 0.0, p10 = 0.0, p11 = 0.0;
};

JointAB joint_distribution(const Observables& obs);

// H(A|B) = H(AB) - H(B) in bits. Throws NoAcceptedRounds if N == 0.
double conditional_entropy_AB(const Observables& obs);

// Conditional-state pairs of the accepted-round state. The first three come from the
// opposite-action branches, the last three from equal-action branches.
std::vector<EntropyTerm> entropy_terms_3(const Observables& obs, const InnerProductBounds& ipb);
std::vector<EntropyTerm> entropy_terms_6(const Observables& obs, const InnerProductBounds& ipb);

struct TermContribution {
    std::string label;
    double weight = 0.0;  // (nE + nF) / N
    double lambda = 0.0;  // NaN for zero-weight terms
    double contribution = 0.0;
};

struct EntropyBound {
    double value = 0.0;
    std::vector<TermContribution> terms;
};

EntropyBound entropy_lower_bound_3term(const Observables& obs, const InnerProductBounds& ipb);
EntropyBound entropy_lower_bound_6term(const Observables& obs, const InnerProductBounds& ipb);

// Rate of the sub-round-1-only protocol, which keeps a key bit only on "1".
struct OriginalProtocolRate {
    double normalization = 0.0;  // <t1> + <s1> + <r1> + <g1>
    double h_ae_lower = 0.0;
    double h_ab = 0.0;
    double r = 0.0;
    double r_eff = 0.0;  // (N_old / 4) * r
};

OriginalProtocolRate original_protocol_keyrate(const Observables& obs);

// 1 - 2 h(phi); not clamped.
double bb84_keyrate(double phi);

struct Baselines {
    std::optional<double> r_old;
    std::optional<double> r_eff_old;
    std::optional<double> bb84;  // needs a phase error rate
};

struct KeyRateReport {
    BoundMode mode = BoundMode::ThreeTerm;
    double normalization = 0.0;
    double p_acc = 0.0;
    double p0 = 0.0;
    double h_ae_lower = 0.0;
    double h_ab = 0.0;
    double r = 0.0;      // bits per raw-key bit
    double r_eff = 0.0;  // bits per photon sent: N / (4 (1 + p0)) * r
    std::vector<TermContribution> term_breakdown;
    Baselines baselines;
};

// p0 is the probability of a sub-round-2 invocation and must come from the
// caller for non-symmetric observables. phi, when known, fills the BB84 baseline.
KeyRateReport keyrate(const Observables& obs, const InnerProductBounds& ipb, double p0,
                      BoundMode mode = BoundMode::ThreeTerm,
                      std::optional<double> phi = std::nullopt);

struct KeyRateOptions {
    BoundMode mode = BoundMode::ThreeTerm;
    S0T0Variant variant = S0T0Variant::MixedIndex;
};

// Symmetric-channel convenience: observables, estimated overlaps and p0 all
// derived from the channel parameters.
KeyRateReport keyrate_for_channel(const ChannelParams& params, const KeyRateOptions& options = {});

// Largest phi in [0, 1/2] with a positive rate, located by bisection on a
// sign change of r (or r_old) down to bracket width `tolerance`. Returns 0
// when the rate is already non-positive at phi = 0.
double max_phase_noise(double p_l, double p_d, const KeyRateOptions& options = {},
                       bool original_protocol = false, double tolerance = 1e-4);

const char* to_string(BoundMode mode);
const char* to_string(S0T0Variant variant);

}  // namespace msqkd
