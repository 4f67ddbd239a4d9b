#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msqkd/channel_stats.hpp"
#include "msqkd/keyrate.hpp"

namespace msqkd {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

// Image of one input basis state under the server's isometry U, split by the
// classical message register: U|x> = |0>|m0> + |1>|m1> + |v>|mv>.
struct AttackColumn {
    CVector m0;
    CVector m1;
    CVector mv;
};

// i.i.d. attack applied on every sub-round. The source state is
// alpha|0,c0> + beta|1,c1> + gamma|v,cv>; e, f and g are the columns of U for
// the Alice-path, Bob-path and vacuum inputs.
struct AttackSpec {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::size_t d = 1;  // ancilla dimension
    AttackColumn e;
    AttackColumn f;
    AttackColumn g;
};

struct Violation {
    std::string constraint;
    double residual = 0.0;
};

std::vector<Violation> validate_attack(const AttackSpec& spec, double tolerance = 1e-10);

// Lossless honest server, d = 1. Throws InvalidParameter for p_l > 0.
AttackSpec honest_attack(double p_l = 0.0);

// Honest attack with a relative interferometer phase theta on Bob's arm,
// giving <r1> = sin^2(theta/2).
AttackSpec phase_noisy_attack(double theta);

// Honest attack with the ancilla padded to dimension d (first basis vector used).
AttackSpec embed_attack(const AttackSpec& spec, std::size_t d);

// Seeded random isometry: three orthonormal columns in C^{3d} by Gram-Schmidt.
// bias in [0,1] mixes each column toward the honest attack before
// re-orthonormalizing; bias = 1 reproduces embed_attack(honest_attack(), d).
AttackSpec random_attack(std::size_t d, std::uint64_t seed,
                         std::optional<double> bias = std::nullopt);

// Vectors built from the attack, in the order of DerivedVectors::Index.
struct DerivedVectors {
    enum Index : std::size_t { r0, r1, s0, s1, t0, t1, g0, g1, count };

    std::array<CVector, count> vectors;
    std::array<std::array<cplx, count>, count> gram{};  // gram[i][j] = <i|j>

    double norm(Index i) const { return gram[i][i].real(); }
    cplx overlap(Index i, Index j) const { return gram[i][j]; }
};

DerivedVectors derived_vectors(const AttackSpec& spec);

Observables observables_from_attack(const AttackSpec& spec);

// Probability of "0" on sub-round 1, (<r0> + <s0> + <t0> + <g0>) / 4.
double attack_p0(const AttackSpec& spec);

// |<s1|t1>|, |<s0|t0>|, |<r0|g0>|, |<r1|g1>| computed from the attack.
InnerProductBounds exact_inner_products(const AttackSpec& spec);

// Eigenvalues of sum_i |psi_i><psi_i| from the Gram matrix of the states.
std::vector<double> gram_spectrum(const std::vector<std::vector<cplx>>& gram);

// Exact H(A|E) of the accepted-round state, in bits.
// Throws NoAcceptedRounds if N == 0.
double exact_conditional_entropy(const AttackSpec& spec);

struct SoundnessReport {
    double exact = 0.0;
    double bound6_exact_overlaps = 0.0;
    double bound3_exact_overlaps = 0.0;
    double bound3_estimated = 0.0;
    InnerProductBounds exact_overlaps;
    InnerProductBounds estimated_overlaps;
    bool sound6 = false;
    bool sound3 = false;
    bool sound3_estimated = false;
    bool three_le_six = false;
    bool estimated_overlaps_below_exact = false;  // estimated <= exact for s1t1 and s0t0
};

SoundnessReport soundness_report(const AttackSpec& spec, double tolerance = 1e-9);

struct CampaignEntry {
    std::uint64_t seed = 0;
    std::size_t d = 1;
    bool accepted = true;  // false when the sampled attack has N == 0
    SoundnessReport report;
};

// Soundness reports for random_attack(d, seed + i), i < count, with d cycling
// through 1..max_d. Seeds are evaluated concurrently; entries stay in seed order.
std::vector<CampaignEntry> soundness_campaign(std::size_t count, std::size_t max_d, std::uint64_t seed);
std::vector<CampaignEntry> soundness_campaign_serial(std::size_t count, std::size_t max_d,
                                                     std::uint64_t seed);

}  // namespace msqkd
