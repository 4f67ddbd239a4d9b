#include "msqkd/attack.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "msqkd/error.hpp"

namespace msqkd {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kZeroEigenvalue = 1e-14;

cplx inner(const CVector& a, const CVector& b) {
    cplx sum{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
    return sum;
}

// <col_a|col_b> over the message (x) ancilla space.
cplx column_inner(const AttackColumn& a, const AttackColumn& b) {
    return inner(a.m0, b.m0) + inner(a.m1, b.m1) + inner(a.mv, b.mv);
}

CVector combine(double ca, const CVector& a, double cb, const CVector& b, double cc,
                const CVector& c) {
    CVector out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ca * a[i] + cb * b[i] + cc * c[i];
    return out;
}

CVector pad(const CVector& v, std::size_t d) {
    CVector out(d, cplx{0.0, 0.0});
    std::copy_n(v.begin(), std::min(v.size(), d), out.begin());
    return out;
}

// Flattened column layout: [m0 | m1 | mv], each of length d.
CVector flatten(const AttackColumn& col) {
    CVector out;
    out.reserve(3 * col.m0.size());
    for (const auto* part : {&col.m0, &col.m1, &col.mv}) out.insert(out.end(), part->begin(), part->end());
    return out;
}

AttackColumn unflatten(const CVector& flat, std::size_t d) {
    AttackColumn col;
    col.m0.assign(flat.begin(), flat.begin() + d);
    col.m1.assign(flat.begin() + d, flat.begin() + 2 * d);
    col.mv.assign(flat.begin() + 2 * d, flat.end());
    return col;
}

double vector_norm(const CVector& v) { return std::sqrt(inner(v, v).real()); }

double entropy_of(const std::vector<double>& eigenvalues, double scale) {
    double h = 0.0;
    for (double ev : eigenvalues) {
        const double p = ev / scale;
        if (p > kZeroEigenvalue) h -= p * std::log2(p);
    }
    return h;
}

}  // namespace

std::vector<Violation> validate_attack(const AttackSpec& spec, double tolerance) {
    std::vector<Violation> out;
    if (spec.d == 0) {
        out.push_back({"ancilla dimension d must be positive", 1.0});
        return out;
    }
    const std::pair<const char*, const AttackColumn*> columns[] = {
        {"e", &spec.e}, {"f", &spec.f}, {"g", &spec.g}};
    bool shapes_ok = true;
    for (const auto& [name, col] : columns) {
        const std::pair<const char*, const CVector*> parts[] = {
            {"0", &col->m0}, {"1", &col->m1}, {"v", &col->mv}};
        for (const auto& [suffix, vec] : parts) {
            if (vec->size() != spec.d) {
                out.push_back({fmt::format("{}{} has length {} but d = {}", name, suffix, vec->size(), spec.d),
                               std::abs(static_cast<double>(vec->size()) - static_cast<double>(spec.d))});
                shapes_ok = false;
            }
        }
    }

    const double amp = spec.alpha * spec.alpha + spec.beta * spec.beta + spec.gamma * spec.gamma;
    if (std::abs(amp - 1.0) > tolerance) {
        out.push_back({"source amplitudes: alpha^2 + beta^2 + gamma^2 = 1", std::abs(amp - 1.0)});
    }
    if (!shapes_ok) return out;

    for (const auto& [name, col] : columns) {
        const double residual = std::abs(column_inner(*col, *col).real() - 1.0);
        if (residual > tolerance) {
            out.push_back({fmt::format("{}-column normalization: <{}0>+<{}1>+<{}v> = 1", name, name, name, name),
                           residual});
        }
    }
    const std::pair<const char*, std::pair<const AttackColumn*, const AttackColumn*>> pairs[] = {
        {"e-f", {&spec.e, &spec.f}}, {"e-g", {&spec.e, &spec.g}}, {"f-g", {&spec.f, &spec.g}}};
    for (const auto& [name, pr] : pairs) {
        const double residual = std::abs(column_inner(*pr.first, *pr.second));
        if (residual > tolerance) out.push_back({fmt::format("{} column orthogonality", name), residual});
    }
    return out;
}

AttackSpec honest_attack(double p_l) {
    if (p_l != 0.0) {
        throw InvalidParameter("honest_attack models the lossless server only; use protocol_mc for p_l > 0");
    }
    AttackSpec spec;
    spec.alpha = spec.beta = kInvSqrt2;
    spec.gamma = 0.0;
    spec.d = 1;
    spec.e = {{kInvSqrt2}, {kInvSqrt2}, {0.0}};
    spec.f = {{kInvSqrt2}, {-kInvSqrt2}, {0.0}};
    spec.g = {{0.0}, {0.0}, {1.0}};
    return spec;
}

AttackSpec phase_noisy_attack(double theta) {
    AttackSpec spec = honest_attack();
    const cplx phase = std::polar(1.0, theta);
    spec.f = {{phase * kInvSqrt2}, {-phase * kInvSqrt2}, {0.0}};
    return spec;
}

AttackSpec embed_attack(const AttackSpec& spec, std::size_t d) {
    if (d < spec.d) throw InvalidParameter("embed_attack cannot shrink the ancilla");
    AttackSpec out = spec;
    out.d = d;
    for (AttackColumn* col : {&out.e, &out.f, &out.g}) {
        col->m0 = pad(col->m0, d);
        col->m1 = pad(col->m1, d);
        col->mv = pad(col->mv, d);
    }
    return out;
}

AttackSpec random_attack(std::size_t d, std::uint64_t seed, std::optional<double> bias) {
    if (d == 0) throw InvalidParameter("random_attack needs d >= 1");
    if (bias && !(*bias >= 0.0 && *bias <= 1.0)) throw InvalidParameter("bias must lie in [0, 1]");
    constexpr int kMaxAttempts = 16;
    constexpr double kDependence = 1e-8;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const AttackSpec honest = embed_attack(honest_attack(), d);
    const CVector honest_cols[3] = {flatten(honest.e), flatten(honest.f), flatten(honest.g)};

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::array<CVector, 3> cols;
        bool degenerate = false;
        for (std::size_t c = 0; c < 3 && !degenerate; ++c) {
            CVector z(3 * d);
            for (auto& x : z) x = {normal(rng), normal(rng)};
            if (bias) {
                const double scale = (1.0 - *bias) / vector_norm(z);
                for (std::size_t i = 0; i < z.size(); ++i) z[i] = scale * z[i] + *bias * honest_cols[c][i];
            }
            for (std::size_t p = 0; p < c; ++p) {
                const cplx proj = inner(cols[p], z);
                for (std::size_t i = 0; i < z.size(); ++i) z[i] -= proj * cols[p][i];
            }
            const double norm = vector_norm(z);
            if (norm < kDependence) {
                degenerate = true;
                break;
            }
            for (auto& x : z) x /= norm;
            cols[c] = std::move(z);
        }

        std::array<double, 3> amp = {std::abs(normal(rng)), std::abs(normal(rng)), std::abs(normal(rng))};
        if (degenerate) continue;
        double amp_norm = std::sqrt(amp[0] * amp[0] + amp[1] * amp[1] + amp[2] * amp[2]);
        if (amp_norm < kDependence) continue;
        for (auto& a : amp) a /= amp_norm;
        if (bias) {
            amp = {(1.0 - *bias) * amp[0] + *bias * kInvSqrt2, (1.0 - *bias) * amp[1] + *bias * kInvSqrt2,
                   (1.0 - *bias) * amp[2]};
            amp_norm = std::sqrt(amp[0] * amp[0] + amp[1] * amp[1] + amp[2] * amp[2]);
            for (auto& a : amp) a /= amp_norm;
        }

        AttackSpec spec;
        spec.alpha = amp[0];
        spec.beta = amp[1];
        spec.gamma = amp[2];
        spec.d = d;
        spec.e = unflatten(cols[0], d);
        spec.f = unflatten(cols[1], d);
        spec.g = unflatten(cols[2], d);
        return spec;
    }
    throw DegenerateSample(fmt::format("random_attack(d={}, seed={}) kept hitting dependent samples", d, seed));
}

DerivedVectors derived_vectors(const AttackSpec& spec) {
    const double a = spec.alpha, b = spec.beta, c = spec.gamma;
    const CVector zero(spec.d, cplx{0.0, 0.0});
    DerivedVectors dv;
    dv.vectors[DerivedVectors::r0] = combine(a, spec.e.m0, b, spec.f.m0, c, spec.g.m0);
    dv.vectors[DerivedVectors::r1] = combine(a, spec.e.m1, b, spec.f.m1, c, spec.g.m1);
    dv.vectors[DerivedVectors::s0] = combine(0.0, zero, b, spec.f.m0, c, spec.g.m0);
    dv.vectors[DerivedVectors::s1] = combine(0.0, zero, b, spec.f.m1, c, spec.g.m1);
    dv.vectors[DerivedVectors::t0] = combine(a, spec.e.m0, 0.0, zero, c, spec.g.m0);
    dv.vectors[DerivedVectors::t1] = combine(a, spec.e.m1, 0.0, zero, c, spec.g.m1);
    dv.vectors[DerivedVectors::g0] = spec.g.m0;
    dv.vectors[DerivedVectors::g1] = spec.g.m1;
    for (std::size_t i = 0; i < DerivedVectors::count; ++i) {
        for (std::size_t j = 0; j < DerivedVectors::count; ++j) {
            dv.gram[i][j] = inner(dv.vectors[i], dv.vectors[j]);
        }
    }
    return dv;
}

Observables observables_from_attack(const AttackSpec& spec) {
    const DerivedVectors dv = derived_vectors(spec);
    Observables obs;
    obs.p1_rr = dv.norm(DerivedVectors::r1);
    obs.p0_rr = dv.norm(DerivedVectors::r0);
    obs.p1_mr = dv.norm(DerivedVectors::s1);
    obs.p0_mr = dv.norm(DerivedVectors::s0);
    obs.p1_rm = dv.norm(DerivedVectors::t1);
    obs.p0_rm = dv.norm(DerivedVectors::t0);
    obs.p1_mm = dv.norm(DerivedVectors::g1);
    obs.p0_mm = dv.norm(DerivedVectors::g0);
    obs.alpha2 = spec.alpha * spec.alpha;
    obs.beta2 = spec.beta * spec.beta;
    obs.gamma2 = spec.gamma * spec.gamma;
    return obs;
}

double attack_p0(const AttackSpec& spec) {
    const Observables obs = observables_from_attack(spec);
    return (obs.r0() + obs.s0() + obs.t0() + obs.g0()) / 4.0;
}

InnerProductBounds exact_inner_products(const AttackSpec& spec) {
    using V = DerivedVectors;
    const DerivedVectors dv = derived_vectors(spec);
    InnerProductBounds ipb;
    ipb.s1t1 = std::abs(dv.overlap(V::s1, V::t1));
    ipb.s0t0 = std::abs(dv.overlap(V::s0, V::t0));
    ipb.r0g0 = std::abs(dv.overlap(V::r0, V::g0));
    ipb.r1g1 = std::abs(dv.overlap(V::r1, V::g1));
    return ipb;
}

std::vector<double> gram_spectrum(const std::vector<std::vector<cplx>>& gram) {
    const auto n = static_cast<Eigen::Index>(gram.size());
    if (n == 0) return {};
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = gram[i][j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

namespace {

// One branch of the accepted-round state: A's key bit, then the sub-round-1
// message with Eve's vector, then either the placeholder nu0 (first message
// "1") or the sub-round-2 message with Eve's vector.
struct Branch {
    int a;
    int first;  // sub-round-1 message, 0 or 1
    DerivedVectors::Index x;
    int second;  // sub-round-2 message; unused when first == 1
    DerivedVectors::Index y;
};

std::vector<Branch> accepted_branches() {
    using V = DerivedVectors;
    // Equal A-values come from AB = 00 / 01 (A = 0) and AB = 11 / 10 (A = 1);
    // the A = 1 list is the A = 0 list under s <-> t, r <-> g.
    return {
        {0, 1, V::t1, 0, V::t1}, {0, 0, V::t0, 0, V::s0}, {0, 0, V::t0, 1, V::s1},
        {0, 1, V::r1, 0, V::r1}, {0, 0, V::r0, 0, V::g0}, {0, 0, V::r0, 1, V::g1},
        {1, 1, V::s1, 0, V::s1}, {1, 0, V::s0, 0, V::t0}, {1, 0, V::s0, 1, V::t1},
        {1, 1, V::g1, 0, V::g1}, {1, 0, V::g0, 0, V::r0}, {1, 0, V::g0, 1, V::r1},
    };
}

// nu0 only ever follows a first message "1" and is a unit vector, so it
// contributes a factor 1 within that block and never meets a sub-round-2 branch.
cplx branch_overlap(const DerivedVectors& dv, const Branch& p, const Branch& q) {
    if (p.first != q.first) return {0.0, 0.0};
    if (p.first == 1) return dv.overlap(p.x, q.x);
    if (p.second != q.second) return {0.0, 0.0};
    return dv.overlap(p.x, q.x) * dv.overlap(p.y, q.y);
}

int block_of(const Branch& b) { return b.first == 1 ? 0 : 1 + b.second; }

// Entropy of (1/N) sum |psi><psi| over branches, grouped into blocks that are
// mutually orthogonal through the message registers.
double block_entropy(const DerivedVectors& dv, const std::vector<Branch>& branches, bool split_by_a,
                     double n) {
    double h = 0.0;
    for (int block = 0; block < 3; ++block) {
        for (int a = 0; a < (split_by_a ? 2 : 1); ++a) {
            std::vector<const Branch*> members;
            for (const auto& b : branches) {
                if (block_of(b) == block && (!split_by_a || b.a == a)) members.push_back(&b);
            }
            std::vector<std::vector<cplx>> gram(members.size(), std::vector<cplx>(members.size()));
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = 0; j < members.size(); ++j) {
                    gram[i][j] = branch_overlap(dv, *members[i], *members[j]);
                }
            }
            h += entropy_of(gram_spectrum(gram), n);
        }
    }
    return h;
}

}  // namespace

double exact_conditional_entropy(const AttackSpec& spec) {
    const DerivedVectors dv = derived_vectors(spec);
    const double n = normalization(observables_from_attack(spec));
    if (!(n > 0.0)) throw NoAcceptedRounds();
    const auto branches = accepted_branches();
    const double h_ae = block_entropy(dv, branches, true, n);
    const double h_e = block_entropy(dv, branches, false, n);
    return h_ae - h_e;
}

SoundnessReport soundness_report(const AttackSpec& spec, double tolerance) {
    SoundnessReport rep;
    const Observables obs = observables_from_attack(spec);
    rep.exact = exact_conditional_entropy(spec);
    rep.exact_overlaps = exact_inner_products(spec);
    rep.estimated_overlaps = estimate_inner_products(obs);
    rep.bound6_exact_overlaps = entropy_lower_bound_6term(obs, rep.exact_overlaps).value;
    rep.bound3_exact_overlaps = entropy_lower_bound_3term(obs, rep.exact_overlaps).value;
    rep.bound3_estimated = entropy_lower_bound_3term(obs, rep.estimated_overlaps).value;
    rep.sound6 = rep.bound6_exact_overlaps <= rep.exact + tolerance;
    rep.sound3 = rep.bound3_exact_overlaps <= rep.exact + tolerance;
    rep.sound3_estimated = rep.bound3_estimated <= rep.exact + tolerance;
    rep.three_le_six = rep.bound3_exact_overlaps <= rep.bound6_exact_overlaps + tolerance;
    rep.estimated_overlaps_below_exact =
        rep.estimated_overlaps.s1t1 <= rep.exact_overlaps.s1t1 + tolerance &&
        rep.estimated_overlaps.s0t0 <= rep.exact_overlaps.s0t0 + tolerance;
    return rep;
}

namespace {

CampaignEntry campaign_entry(std::size_t index, std::size_t max_d, std::uint64_t seed) {
    CampaignEntry entry;
    entry.seed = seed + index;
    entry.d = 1 + index % max_d;
    try {
        entry.report = soundness_report(random_attack(entry.d, entry.seed));
    } catch (const NoAcceptedRounds&) {
        entry.accepted = false;
    }
    return entry;
}

void check_campaign(std::size_t max_d) {
    if (max_d == 0) throw InvalidParameter("campaign needs max_d >= 1");
}

}  // namespace

std::vector<CampaignEntry> soundness_campaign(std::size_t count, std::size_t max_d, std::uint64_t seed) {
    check_campaign(max_d);
    std::vector<CampaignEntry> entries(count);
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        entries[static_cast<std::size_t>(i)] = campaign_entry(static_cast<std::size_t>(i), max_d, seed);
    }
    return entries;
}

std::vector<CampaignEntry> soundness_campaign_serial(std::size_t count, std::size_t max_d,
                                                     std::uint64_t seed) {
    check_campaign(max_d);
    std::vector<CampaignEntry> entries;
    entries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) entries.push_back(campaign_entry(i, max_d, seed));
    return entries;
}

}  // namespace msqkd
