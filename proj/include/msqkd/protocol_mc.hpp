#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "msqkd/channel_stats.hpp"

namespace msqkd {

enum class Action : std::uint8_t { Reflect, Measure };
enum class Message : std::uint8_t { Zero, One, Vac };
enum class Detection : std::uint8_t { None, Alice, Bob };

// Action pairs are ordered (Alice, Bob): RR, RM, MR, MM.
constexpr std::size_t action_pair_index(Action alice, Action bob) {
    return 2 * static_cast<std::size_t>(alice) + static_cast<std::size_t>(bob);
}

const char* action_pair_name(std::size_t pair);
const char* to_string(Message msg);
const char* to_string(Detection det);

struct SimConfig {
    std::uint64_t rounds = 1;
    std::uint64_t seed = 0;
    ChannelParams channel;

    bool operator==(const SimConfig&) const = default;
};

struct SimStats {
    static constexpr std::size_t kPairs = 4;
    static constexpr std::size_t kSubrounds = 2;
    static constexpr std::size_t kMessages = 3;
    static constexpr std::size_t kDetections = 3;
    static constexpr std::size_t kCells = kPairs * kSubrounds * kMessages * kDetections;

    static constexpr std::size_t cell(std::size_t pair, std::size_t subround, Message msg,
                                      Detection det) {
        return ((pair * kSubrounds + subround) * kMessages + static_cast<std::size_t>(msg)) *
                   kDetections +
               static_cast<std::size_t>(det);
    }

    SimConfig config;
    // subround is 0 for sub-round 1 and 1 for sub-round 2.
    std::array<std::uint64_t, kCells> counts{};
    std::uint64_t accepted = 0;
    std::uint64_t subround2_used = 0;
    // Accepted rounds by raw-key bit pair, index 2*A + B.
    std::array<std::uint64_t, 4> ab_counts{};
    std::vector<std::uint8_t> alice_key;
    std::vector<std::uint8_t> bob_key;

    std::uint64_t count(std::size_t pair, std::size_t subround, Message msg, Detection det) const {
        return counts[cell(pair, subround, msg, det)];
    }

    bool operator==(const SimStats&) const = default;
};

// Rounds are processed in fixed-size blocks, each with its own RNG stream
// derived from (seed, block index), so the result does not depend on the
// number of threads.
SimStats run_simulation(const SimConfig& cfg, int threads = 0);

// Single-threaded reference with the same block/stream layout.
SimStats run_simulation_serial(const SimConfig& cfg);

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t trials = 0;
};

struct EmpiricalObservables {
    Observables value;
    Observables stderr_;
    Estimate p_acc;
    Estimate p0;
    std::array<Estimate, 4> joint_ab;  // over accepted rounds, index 2*A + B
    // Alternative reading of the MM cells: conditioned on neither user
    // detecting instead of joint with it.
    Estimate p1_mm_given_undetected;
    Estimate p0_mm_given_undetected;
};

// Frequencies pooled over both sub-rounds per action pair. Throws
// InsufficientData when an action pair was never sampled.
EmpiricalObservables empirical_observables(const SimStats& stats);

struct ZScore {
    std::string name;
    double empirical = 0.0;
    double analytic = 0.0;
    double z = 0.0;
    bool flagged = false;
};

// z = (empirical - analytic) / sqrt(analytic (1 - analytic) / n), flagged when
// |z| > threshold.
std::vector<ZScore> compare_to_analytic(const SimStats& stats, const ChannelParams& params,
                                        double threshold = 4.0);

// CSV count table: actions,subround,message,detection,count (non-zero rows
// are not filtered; every cell is emitted in a fixed order).
void write_counts_csv(const SimStats& stats, std::ostream& out);

}  // namespace msqkd
