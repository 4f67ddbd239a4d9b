#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msqkd/keyrate.hpp"

namespace msqkd {

enum class SweepVariable { Phi, LossProbability };

struct SweepSpec {
    SweepVariable variable = SweepVariable::Phi;
    double start = 0.0;
    double stop = 0.12;
    double step = 0.002;
    ChannelParams fixed;  // the swept field is overwritten per grid point
    KeyRateOptions options;
    bool emit_r = true;
    bool emit_r_eff = true;
    bool emit_baselines = true;
    bool emit_improvement = true;
};

// Throws InvalidParameter unless start <= stop and step > 0.
void validate(const SweepSpec& spec);

std::vector<double> sweep_grid(const SweepSpec& spec);

// Undefined values (no accepted rounds, r'_old <= 0 for the improvement) are empty.
struct SweepRow {
    double x = 0.0;
    std::optional<double> r;
    std::optional<double> r_eff;
    std::optional<double> r_old;
    std::optional<double> r_eff_old;
    double bb84 = 0.0;
    std::optional<double> improvement_percent;
};

SweepRow evaluate_point(const SweepSpec& spec, double x);

// Grid points evaluated concurrently; rows come back in grid order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);
std::vector<SweepRow> run_sweep_serial(const SweepSpec& spec);

const char* to_string(SweepVariable variable);

// 12 significant digits, fixed column order.
std::string format_number(double value);
void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& out);
void write_sweep_json(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace msqkd
