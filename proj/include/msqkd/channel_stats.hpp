#pragma once

// Symmetric channel model: phase error phi, one-way loss p_l, server dark
// counts p_d. Maps the channel onto the eight server-message observables the
// users estimate, plus the acceptance quantities derived from them.

namespace msqkd {

struct ChannelParams {
    double phi = 0.0;  // phase error rate, [0, 1/2]
    double p_l = 0.0;  // loss probability in one direction, [0, 1]
    double p_d = 0.0;  // server dark-count rate, [0, 1]

    bool operator==(const ChannelParams&) const = default;
};

// Throws InvalidParameter if a field is out of range or not finite.
void validate(const ChannelParams& params);

// Conditional server-message probabilities, jointly with the measuring
// party(ies) not detecting the photon. The second index letter pair is
// (Alice, Bob): rm = Alice Reflect, Bob Measure.
//
// Bracket identification used throughout the key-rate pipeline:
//   <r_i> = p{i}_rr, <s_i> = p{i}_mr, <t_i> = p{i}_rm, <g_i> = p{i}_mm.
struct Observables {
    double p1_rr = 0.0, p0_rr = 0.0;
    double p1_mr = 0.0, p0_mr = 0.0;
    double p1_rm = 0.0, p0_rm = 0.0;
    double p1_mm = 0.0, p0_mm = 0.0;
    double alpha2 = 0.0, beta2 = 0.0, gamma2 = 0.0;

    double r1() const { return p1_rr; }
    double r0() const { return p0_rr; }
    double s1() const { return p1_mr; }
    double s0() const { return p0_mr; }
    double t1() const { return p1_rm; }
    double t0() const { return p0_rm; }
    double g1() const { return p1_mm; }
    double g0() const { return p0_mm; }
};

// Throws InvalidParameter when a probability is outside [0,1], a message pair
// sums above 1, or alpha2+beta2+gamma2 deviates from 1 by more than 1e-12.
void validate(const Observables& obs);

Observables observables_from_channel(const ChannelParams& params);

// Total unnormalized weight of all accepted-round branches.
double normalization(const Observables& obs);

// Probability a round is accepted: N/4 (the 1/4 is the action-pair probability).
double acceptance_probability(const Observables& obs);

// Probability the server announces "0" on sub-round 1 under the symmetric model.
double subround2_probability(const ChannelParams& params);

}  // namespace msqkd
