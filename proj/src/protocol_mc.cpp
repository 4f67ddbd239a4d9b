#include "msqkd/protocol_mc.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <fmt/format.h>

#include "msqkd/error.hpp"

namespace msqkd {

namespace {

constexpr std::uint64_t kBlockRounds = 1u << 14;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream) : gen_(splitmix64(seed ^ splitmix64(stream))) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    bool coin() { return (gen_() >> 63) != 0; }

private:
    std::mt19937_64 gen_;
};

struct SubroundOutcome {
    Message msg = Message::Vac;
    Detection det = Detection::None;
};

// Server announcement on a vacuum: "0" or "1" each with probability p_d/2.
Message dark_count(double p_d, Rng& rng) {
    const double u = rng.uniform();
    if (u < p_d / 2.0) return Message::Zero;
    if (u < p_d) return Message::One;
    return Message::Vac;
}

// One sub-round of the symmetric channel. Branch-to-formula mapping:
//   forward loss (p_l) then dark count           -> the leading p_l p_d / 2 terms
//   photon to a measuring arm                    -> user detection, round discarded,
//                                                   announcement "vac"
//   return loss (p_l) then dark count            -> the inner p_l p_d / 2 terms
//   both reflect, interference                   -> "1" with probability phi
//   one reflects, single arm returns             -> "0" / "1" each 1/2
SubroundOutcome simulate_subround(Action alice, Action bob, const ChannelParams& ch, Rng& rng) {
    if (rng.uniform() < ch.p_l) return {dark_count(ch.p_d, rng), Detection::None};

    if (alice == Action::Measure || bob == Action::Measure) {
        const bool at_alice = rng.coin();
        const Action arm_action = at_alice ? alice : bob;
        if (arm_action == Action::Measure) {
            return {Message::Vac, at_alice ? Detection::Alice : Detection::Bob};
        }
        if (rng.uniform() < ch.p_l) return {dark_count(ch.p_d, rng), Detection::None};
        return {rng.coin() ? Message::One : Message::Zero, Detection::None};
    }

    if (rng.uniform() < ch.p_l) return {dark_count(ch.p_d, rng), Detection::None};
    return {rng.uniform() < ch.phi ? Message::One : Message::Zero, Detection::None};
}

Action invert(Action a) { return a == Action::Reflect ? Action::Measure : Action::Reflect; }

// Partial statistics of one block; keys are kept in round order.
struct BlockResult {
    std::array<std::uint64_t, SimStats::kCells> counts{};
    std::uint64_t accepted = 0;
    std::uint64_t subround2_used = 0;
    std::array<std::uint64_t, 4> ab_counts{};
    std::vector<std::uint8_t> alice_key;
    std::vector<std::uint8_t> bob_key;
};

BlockResult simulate_block(const SimConfig& cfg, std::uint64_t block) {
    BlockResult out;
    Rng rng(cfg.seed, block);
    const std::uint64_t first = block * kBlockRounds;
    const std::uint64_t last = std::min(cfg.rounds, first + kBlockRounds);
    const ChannelParams& ch = cfg.channel;

    for (std::uint64_t round = first; round < last; ++round) {
        const Action alice = rng.coin() ? Action::Measure : Action::Reflect;
        const Action bob = rng.coin() ? Action::Measure : Action::Reflect;
        const std::size_t pair = action_pair_index(alice, bob);

        const auto first_sub = simulate_subround(alice, bob, ch, rng);
        ++out.counts[SimStats::cell(pair, 0, first_sub.msg, first_sub.det)];

        bool accept = false;
        if (first_sub.det == Detection::None) {
            if (first_sub.msg == Message::One) {
                accept = true;
            } else if (first_sub.msg == Message::Zero) {
                ++out.subround2_used;
                const Action alice2 = invert(alice);
                const Action bob2 = invert(bob);
                const auto second_sub = simulate_subround(alice2, bob2, ch, rng);
                ++out.counts[SimStats::cell(action_pair_index(alice2, bob2), 1, second_sub.msg,
                                            second_sub.det)];
                accept = second_sub.det == Detection::None && second_sub.msg != Message::Vac;
            }
        }
        if (!accept) continue;

        // Key bits always follow the sub-round-1 actions. Alice: Reflect -> 0,
        // Bob: Reflect -> 1.
        const std::uint8_t a_bit = alice == Action::Measure ? 1 : 0;
        const std::uint8_t b_bit = bob == Action::Reflect ? 1 : 0;
        ++out.accepted;
        ++out.ab_counts[2 * a_bit + b_bit];
        out.alice_key.push_back(a_bit);
        out.bob_key.push_back(b_bit);
    }
    return out;
}

void merge(SimStats& stats, const BlockResult& block) {
    for (std::size_t i = 0; i < SimStats::kCells; ++i) stats.counts[i] += block.counts[i];
    stats.accepted += block.accepted;
    stats.subround2_used += block.subround2_used;
    for (std::size_t i = 0; i < 4; ++i) stats.ab_counts[i] += block.ab_counts[i];
    stats.alice_key.insert(stats.alice_key.end(), block.alice_key.begin(), block.alice_key.end());
    stats.bob_key.insert(stats.bob_key.end(), block.bob_key.begin(), block.bob_key.end());
}

void validate(const SimConfig& cfg) {
    if (cfg.rounds < 1) throw InvalidParameter("rounds must be at least 1");
    validate(cfg.channel);
}

std::uint64_t block_count(const SimConfig& cfg) { return (cfg.rounds + kBlockRounds - 1) / kBlockRounds; }

}  // namespace

const char* action_pair_name(std::size_t pair) {
    static constexpr const char* names[] = {"RR", "RM", "MR", "MM"};
    return pair < 4 ? names[pair] : "??";
}

const char* to_string(Message msg) {
    switch (msg) {
        case Message::Zero: return "0";
        case Message::One: return "1";
        case Message::Vac: return "vac";
    }
    return "?";
}

const char* to_string(Detection det) {
    switch (det) {
        case Detection::None: return "none";
        case Detection::Alice: return "alice";
        case Detection::Bob: return "bob";
    }
    return "?";
}

SimStats run_simulation(const SimConfig& cfg, int threads) {
    validate(cfg);
    const auto blocks = static_cast<std::int64_t>(block_count(cfg));
    std::vector<BlockResult> results(static_cast<std::size_t>(blocks));

#ifdef _OPENMP
    const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(team)
#endif
    for (std::int64_t b = 0; b < blocks; ++b) {
        results[static_cast<std::size_t>(b)] = simulate_block(cfg, static_cast<std::uint64_t>(b));
    }
    (void)threads;

    SimStats stats;
    stats.config = cfg;
    for (const auto& block : results) merge(stats, block);
    return stats;
}

SimStats run_simulation_serial(const SimConfig& cfg) {
    validate(cfg);
    SimStats stats;
    stats.config = cfg;
    const std::uint64_t blocks = block_count(cfg);
    for (std::uint64_t b = 0; b < blocks; ++b) merge(stats, simulate_block(cfg, b));
    return stats;
}

namespace {

Estimate proportion(std::uint64_t hits, std::uint64_t trials) {
    Estimate e;
    e.trials = trials;
    if (trials == 0) return e;
    e.value = static_cast<double>(hits) / static_cast<double>(trials);
    e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
    return e;
}

}  // namespace

EmpiricalObservables empirical_observables(const SimStats& stats) {
    constexpr Message msgs[] = {Message::Zero, Message::One, Message::Vac};
    constexpr Detection dets[] = {Detection::None, Detection::Alice, Detection::Bob};

    std::array<std::uint64_t, 4> trials{};
    for (std::size_t pair = 0; pair < 4; ++pair) {
        for (std::size_t sub = 0; sub < 2; ++sub) {
            for (Message m : msgs) {
                for (Detection d : dets) trials[pair] += stats.count(pair, sub, m, d);
            }
        }
        if (trials[pair] == 0) {
            throw InsufficientData(fmt::format("no sub-rounds with actions {}", action_pair_name(pair)));
        }
    }

    auto undetected = [&](std::size_t pair, Message m) {
        return stats.count(pair, 0, m, Detection::None) + stats.count(pair, 1, m, Detection::None);
    };
    auto detected_by = [&](std::size_t pair, Detection d) {
        std::uint64_t n = 0;
        for (Message m : msgs) n += stats.count(pair, 0, m, d) + stats.count(pair, 1, m, d);
        return n;
    };

    constexpr std::size_t RR = 0, RM = 1, MR = 2, MM = 3;
    EmpiricalObservables out;
    auto fill = [&](double Observables::*field, std::size_t pair, Message m) {
        const Estimate e = proportion(undetected(pair, m), trials[pair]);
        out.value.*field = e.value;
        out.stderr_.*field = e.stderr_;
    };
    fill(&Observables::p1_rr, RR, Message::One);
    fill(&Observables::p0_rr, RR, Message::Zero);
    fill(&Observables::p1_mr, MR, Message::One);
    fill(&Observables::p0_mr, MR, Message::Zero);
    fill(&Observables::p1_rm, RM, Message::One);
    fill(&Observables::p0_rm, RM, Message::Zero);
    fill(&Observables::p1_mm, MM, Message::One);
    fill(&Observables::p0_mm, MM, Message::Zero);

    const std::uint64_t mm_alice = detected_by(MM, Detection::Alice);
    const std::uint64_t mm_bob = detected_by(MM, Detection::Bob);
    const std::uint64_t mm_none = detected_by(MM, Detection::None);
    const Estimate a2 = proportion(mm_alice, trials[MM]);
    const Estimate b2 = proportion(mm_bob, trials[MM]);
    const Estimate c2 = proportion(mm_none, trials[MM]);
    out.value.alpha2 = a2.value;
    out.stderr_.alpha2 = a2.stderr_;
    out.value.beta2 = b2.value;
    out.stderr_.beta2 = b2.stderr_;
    out.value.gamma2 = c2.value;
    out.stderr_.gamma2 = c2.stderr_;

    out.p1_mm_given_undetected = proportion(undetected(MM, Message::One), mm_none);
    out.p0_mm_given_undetected = proportion(undetected(MM, Message::Zero), mm_none);

    const std::uint64_t rounds = stats.config.rounds;
    out.p_acc = proportion(stats.accepted, rounds);
    std::uint64_t first_zero = 0;
    for (std::size_t pair = 0; pair < 4; ++pair) {
        for (Detection d : dets) first_zero += stats.count(pair, 0, Message::Zero, d);
    }
    out.p0 = proportion(first_zero, rounds);
    for (std::size_t i = 0; i < 4; ++i) out.joint_ab[i] = proportion(stats.ab_counts[i], stats.accepted);
    return out;
}

std::vector<ZScore> compare_to_analytic(const SimStats& stats, const ChannelParams& params,
                                        double threshold) {
    const EmpiricalObservables emp = empirical_observables(stats);
    const Observables ana = observables_from_channel(params);

    std::vector<ZScore> out;
    auto add = [&](const char* name, double empirical, double analytic, std::uint64_t n) {
        ZScore z;
        z.name = name;
        z.empirical = empirical;
        z.analytic = analytic;
        const double var = analytic * (1.0 - analytic) / static_cast<double>(n);
        const double diff = empirical - analytic;
        if (var > 0.0) {
            z.z = diff / std::sqrt(var);
        } else {
            z.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        }
        z.flagged = !(std::abs(z.z) <= threshold);
        out.push_back(std::move(z));
    };

    // Sub-rounds per action pair, both sub-rounds pooled.
    std::array<std::uint64_t, 4> trials{};
    for (std::size_t i = 0; i < SimStats::kCells; ++i) {
        trials[i / (SimStats::kSubrounds * SimStats::kMessages * SimStats::kDetections)] += stats.counts[i];
    }
    constexpr std::size_t RR = 0, RM = 1, MR = 2, MM = 3;
    add("p1_rr", emp.value.p1_rr, ana.p1_rr, trials[RR]);
    add("p0_rr", emp.value.p0_rr, ana.p0_rr, trials[RR]);
    add("p1_mr", emp.value.p1_mr, ana.p1_mr, trials[MR]);
    add("p0_mr", emp.value.p0_mr, ana.p0_mr, trials[MR]);
    add("p1_rm", emp.value.p1_rm, ana.p1_rm, trials[RM]);
    add("p0_rm", emp.value.p0_rm, ana.p0_rm, trials[RM]);
    add("p1_mm", emp.value.p1_mm, ana.p1_mm, trials[MM]);
    add("p0_mm", emp.value.p0_mm, ana.p0_mm, trials[MM]);
    add("alpha2", emp.value.alpha2, ana.alpha2, trials[MM]);
    add("beta2", emp.value.beta2, ana.beta2, trials[MM]);
    add("gamma2", emp.value.gamma2, ana.gamma2, trials[MM]);
    add("p_acc", emp.p_acc.value, acceptance_probability(ana), stats.config.rounds);
    add("p0", emp.p0.value, subround2_probability(params), stats.config.rounds);
    return out;
}

void write_counts_csv(const SimStats& stats, std::ostream& out) {
    out << "actions,subround,message,detection,count\n";
    for (std::size_t pair = 0; pair < SimStats::kPairs; ++pair) {
        for (std::size_t sub = 0; sub < SimStats::kSubrounds; ++sub) {
            for (Message m : {Message::Zero, Message::One, Message::Vac}) {
                for (Detection d : {Detection::None, Detection::Alice, Detection::Bob}) {
                    out << action_pair_name(pair) << ',' << sub + 1 << ',' << to_string(m) << ','
                        << to_string(d) << ',' << stats.count(pair, sub, m, d) << '\n';
                }
            }
        }
    }
}

}  // namespace msqkd
