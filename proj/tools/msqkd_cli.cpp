// msqkd: key-rate evaluation, figure sweeps, Monte Carlo runs and attack
// soundness checks for the two-sub-round mediated semi-quantum protocol.
//
// Exit codes: 0 success, 2 invalid input, 3 no accepted rounds,
// 4 statistical or soundness failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "msqkd/attack.hpp"
#include "msqkd/error.hpp"
#include "msqkd/io.hpp"
#include "msqkd/keyrate.hpp"
#include "msqkd/protocol_mc.hpp"
#include "msqkd/sweep.hpp"

namespace {

using namespace msqkd;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNoRounds = 3;
constexpr int kExitFailure = 4;

struct ChannelArgs {
    double phi = 0.0;
    double pl = 0.0;
    double pd = 0.0;
    std::string mode = "3term";
    std::string variant = "mixed-index";
};

void add_channel_flags(CLI::App* cmd, ChannelArgs& args) {
    cmd->add_option("--phi", args.phi, "phase error rate")->check(CLI::Range(0.0, 0.5));
    cmd->add_option("--pl", args.pl, "one-way loss probability")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--pd", args.pd, "server dark-count rate")->check(CLI::Range(0.0, 1.0));
}

void add_bound_flags(CLI::App* cmd, ChannelArgs& args) {
    cmd->add_option("--mode", args.mode, "entropy bound")->check(CLI::IsMember({"3term", "6term"}));
    cmd->add_option("--bound-variant", args.variant, "|<s0|t0>| bound variant")
        ->check(CLI::IsMember({"mixed-index", "index-consistent"}));
}

KeyRateOptions options_from(const ChannelArgs& args) {
    KeyRateOptions opts;
    opts.mode = args.mode == "6term" ? BoundMode::SixTerm : BoundMode::ThreeTerm;
    opts.variant = args.variant == "index-consistent" ? S0T0Variant::IndexConsistent : S0T0Variant::MixedIndex;
    return opts;
}

// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw InvalidParameter(fmt::format("cannot write '{}'", path));
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

int cmd_rate(const ChannelArgs& args, const std::string& format, const std::string& out_path) {
    const ChannelParams params{args.phi, args.pl, args.pd};
    const KeyRateOptions opts = options_from(args);
    Output out(out_path);
    if (format == "csv") {
        SweepSpec spec;
        spec.variable = SweepVariable::Phi;
        spec.start = spec.stop = args.phi;
        spec.step = 1.0;
        spec.fixed = params;
        spec.options = opts;
        const auto rows = run_sweep_serial(spec);
        if (!rows.front().r) throw NoAcceptedRounds();
        write_sweep_csv(spec, rows, out.stream());
        return kExitOk;
    }
    const KeyRateReport report = keyrate_for_channel(params, opts);
    if (format == "json") {
        out.stream() << report_to_json(report).dump(2) << '\n';
    } else {
        write_report_text(report, out.stream());
    }
    return kExitOk;
}

struct SweepArgs {
    ChannelArgs channel;
    std::string var = "phi";
    std::optional<double> start, stop, step;
    std::string outputs = "r,r_eff,baselines,improvement";
    std::string format = "csv";
    std::string out;
};

int cmd_sweep(const SweepArgs& args) {
    SweepSpec spec;
    spec.variable = args.var == "phi" ? SweepVariable::Phi : SweepVariable::LossProbability;
    const bool phi = spec.variable == SweepVariable::Phi;
    spec.start = args.start.value_or(0.0);
    spec.stop = args.stop.value_or(phi ? 0.12 : 0.99);
    spec.step = args.step.value_or(phi ? 0.002 : 0.01);
    spec.fixed = {args.channel.phi, args.channel.pl, args.channel.pd};
    spec.options = options_from(args.channel);

    spec.emit_r = spec.emit_r_eff = spec.emit_baselines = spec.emit_improvement = false;
    std::stringstream list(args.outputs);
    for (std::string item; std::getline(list, item, ',');) {
        if (item == "r") spec.emit_r = true;
        else if (item == "r_eff") spec.emit_r_eff = true;
        else if (item == "baselines") spec.emit_baselines = true;
        else if (item == "improvement") spec.emit_improvement = true;
        else throw InvalidParameter(fmt::format("unknown sweep output '{}'", item));
    }

    const auto rows = run_sweep(spec);
    Output out(args.out);
    if (args.format == "json") {
        write_sweep_json(spec, rows, out.stream());
    } else {
        write_sweep_csv(spec, rows, out.stream());
    }
    return kExitOk;
}

struct SimulateArgs {
    ChannelArgs channel;
    std::uint64_t rounds = 1000000;
    std::uint64_t seed = 1;
    bool compare = false;
    int threads = 0;
    std::string format = "text";
    std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
    SimConfig cfg;
    cfg.rounds = args.rounds;
    cfg.seed = args.seed;
    cfg.channel = {args.channel.phi, args.channel.pl, args.channel.pd};
    const SimStats stats = run_simulation(cfg, args.threads);

    Output out(args.out);
    if (args.format == "csv") {
        write_counts_csv(stats, out.stream());
    }

    std::optional<EmpiricalObservables> emp;
    std::optional<std::vector<ZScore>> zs;
    try {
        emp = empirical_observables(stats);
        if (args.compare) zs = compare_to_analytic(stats, cfg.channel);
    } catch (const InsufficientData& e) {
        if (args.compare) throw;
    }

    if (args.format == "json") {
        out.stream() << sim_report_json(stats, emp ? &*emp : nullptr, zs ? &*zs : nullptr).dump(2) << '\n';
    } else if (args.format == "text") {
        write_sim_report_text(stats, emp ? &*emp : nullptr, zs ? &*zs : nullptr, out.stream());
    }

    if (zs) {
        for (const auto& z : *zs) {
            if (z.flagged) return kExitFailure;
        }
    }
    return kExitOk;
}

int cmd_attack_validate(const std::string& file) {
    const AttackSpec spec = load_attack(file);
    const auto violations = validate_attack(spec);
    if (violations.empty()) {
        fmt::print("{}: no violations\n", file);
        return kExitOk;
    }
    for (const auto& v : violations) fmt::print("violation: {} (residual {:.3e})\n", v.constraint, v.residual);
    return kExitFailure;
}

int cmd_attack_random(std::size_t d, std::uint64_t seed, std::optional<double> bias, const std::string& out) {
    const AttackSpec spec = random_attack(d, seed, bias);
    if (out.empty()) {
        std::cout << attack_to_json(spec).dump(2) << '\n';
    } else {
        save_attack(spec, out);
        fmt::print("wrote {}\n", out);
    }
    return kExitOk;
}

int cmd_attack_check(const std::string& file, const std::string& format) {
    const AttackSpec spec = load_attack(file);
    const auto violations = validate_attack(spec);
    if (!violations.empty()) {
        for (const auto& v : violations) fmt::print(std::cerr, "violation: {} (residual {:.3e})\n", v.constraint, v.residual);
        return kExitInvalid;
    }
    const SoundnessReport rep = soundness_report(spec);
    const bool sound = rep.sound6 && rep.sound3 && rep.three_le_six;
    if (format == "json") {
        std::cout << soundness_to_json(rep).dump(2) << '\n';
    } else {
        fmt::print("exact={:.4f}\n", rep.exact);
        fmt::print("bound6_exact_overlaps={:.4f}\n", rep.bound6_exact_overlaps);
        fmt::print("bound3_exact_overlaps={:.4f}\n", rep.bound3_exact_overlaps);
        fmt::print("bound3_estimated={:.4f}\n", rep.bound3_estimated);
        fmt::print("bounds={:.4f}\n", rep.bound6_exact_overlaps);
        fmt::print("sound={}\n", sound);
        fmt::print("sound3_estimated={}\n", rep.sound3_estimated);
        fmt::print("estimated_overlaps_below_exact={}\n", rep.estimated_overlaps_below_exact);
    }
    return sound ? kExitOk : kExitFailure;
}

int cmd_attack_campaign(std::size_t count, std::size_t max_d, std::uint64_t seed, const std::string& out_path) {
    const auto entries = soundness_campaign(count, max_d, seed);
    std::size_t evaluated = 0, sound6 = 0, ordered = 0, estimated_ok = 0;
    for (const auto& e : entries) {
        if (!e.accepted) continue;
        ++evaluated;
        sound6 += e.report.sound6;
        ordered += e.report.three_le_six;
        estimated_ok += e.report.sound3_estimated;
    }
    if (!out_path.empty()) {
        Output out(out_path);
        out.stream() << "seed,d,exact,bound6_exact,bound3_exact,bound3_estimated,sound6,three_le_six,"
                        "sound3_estimated,estimated_overlaps_below_exact\n";
        for (const auto& e : entries) {
            if (!e.accepted) continue;
            const auto& r = e.report;
            out.stream() << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", e.seed, e.d, format_number(r.exact),
                                        format_number(r.bound6_exact_overlaps),
                                        format_number(r.bound3_exact_overlaps), format_number(r.bound3_estimated),
                                        int(r.sound6), int(r.three_le_six), int(r.sound3_estimated),
                                        int(r.estimated_overlaps_below_exact));
        }
    }
    fmt::print("evaluated {} of {} attacks (N > 0)\n", evaluated, entries.size());
    fmt::print("6-term bound with exact overlaps <= exact H(A|E): {}/{}\n", sound6, evaluated);
    fmt::print("3-term <= 6-term: {}/{}\n", ordered, evaluated);
    fmt::print("estimated-overlap 3-term bound <= exact H(A|E): {}/{} (informational)\n", estimated_ok, evaluated);
    return sound6 == evaluated && ordered == evaluated ? kExitOk : kExitFailure;
}

int cmd_threshold(const ChannelArgs& args, bool original) {
    const double phi = max_phase_noise(args.pl, args.pd, options_from(args), original);
    fmt::print("max_phi={:.4f}\n", phi);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Key-rate analysis and simulation for the two-sub-round mediated SQKD protocol"};
    app.require_subcommand(1);

    ChannelArgs rate_args;
    std::string rate_format = "text", rate_out;
    auto* rate = app.add_subcommand("rate", "evaluate the key rate at one channel point");
    add_channel_flags(rate, rate_args);
    add_bound_flags(rate, rate_args);
    rate->add_option("--format", rate_format)->check(CLI::IsMember({"text", "csv", "json"}));
    rate->add_option("--out", rate_out, "output file");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "sweep phi or p_l and emit rate curves");
    sweep->add_option("--var", sweep_args.var)->check(CLI::IsMember({"phi", "p_l", "pl"}));
    sweep->add_option("--start", sweep_args.start);
    sweep->add_option("--stop", sweep_args.stop);
    sweep->add_option("--step", sweep_args.step);
    add_channel_flags(sweep, sweep_args.channel);
    add_bound_flags(sweep, sweep_args.channel);
    sweep->add_option("--outputs", sweep_args.outputs, "comma list of r,r_eff,baselines,improvement");
    sweep->add_option("--format", sweep_args.format)->check(CLI::IsMember({"csv", "json"}));
    sweep->add_option("--out", sweep_args.out, "output file");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of the protocol with an honest server");
    add_channel_flags(simulate, sim_args.channel);
    simulate->add_option("--rounds", sim_args.rounds)->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim_args.seed);
    simulate->add_flag("--compare", sim_args.compare, "z-test the statistics against the closed forms");
    simulate->add_option("--threads", sim_args.threads, "OpenMP threads (0 = default)");
    simulate->add_option("--format", sim_args.format)->check(CLI::IsMember({"text", "csv", "json"}));
    simulate->add_option("--out", sim_args.out, "output file");

    auto* attack = app.add_subcommand("attack", "explicit attacks: validation and bound soundness");
    attack->require_subcommand(1);
    std::string attack_file, attack_out, attack_format = "text";
    std::size_t attack_d = 1, campaign_count = 200, campaign_dmax = 4;
    std::uint64_t attack_seed = 1;
    std::optional<double> attack_bias;
    auto* validate_cmd = attack->add_subcommand("validate", "check isometry and amplitude constraints");
    validate_cmd->add_option("--file", attack_file)->required();
    auto* random_cmd = attack->add_subcommand("random", "write a seeded random attack");
    random_cmd->add_option("--d", attack_d)->check(CLI::PositiveNumber);
    random_cmd->add_option("--seed", attack_seed);
    random_cmd->add_option("--bias", attack_bias)->check(CLI::Range(0.0, 1.0));
    random_cmd->add_option("--out", attack_out);
    auto* check_cmd = attack->add_subcommand("check", "exact H(A|E) against the entropy bounds");
    check_cmd->add_option("--file", attack_file)->required();
    check_cmd->add_option("--format", attack_format)->check(CLI::IsMember({"text", "json"}));
    auto* campaign_cmd = attack->add_subcommand("campaign", "soundness check over many random attacks");
    campaign_cmd->add_option("--count", campaign_count);
    campaign_cmd->add_option("--dmax", campaign_dmax)->check(CLI::PositiveNumber);
    campaign_cmd->add_option("--seed", attack_seed);
    campaign_cmd->add_option("--out", attack_out, "per-attack CSV");

    ChannelArgs threshold_args;
    bool threshold_original = false;
    auto* threshold = app.add_subcommand("threshold", "largest phase error with a positive key rate");
    add_channel_flags(threshold, threshold_args);
    add_bound_flags(threshold, threshold_args);
    threshold->add_flag("--original", threshold_original, "use the sub-round-1-only protocol");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*rate) return cmd_rate(rate_args, rate_format, rate_out);
        if (*sweep) return cmd_sweep(sweep_args);
        if (*simulate) return cmd_simulate(sim_args);
        if (*threshold) return cmd_threshold(threshold_args, threshold_original);
        if (*validate_cmd) return cmd_attack_validate(attack_file);
        if (*random_cmd) return cmd_attack_random(attack_d, attack_seed, attack_bias, attack_out);
        if (*check_cmd) return cmd_attack_check(attack_file, attack_format);
        if (*campaign_cmd) return cmd_attack_campaign(campaign_count, campaign_dmax, attack_seed, attack_out);
    } catch (const NoAcceptedRounds& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitNoRounds;
    } catch (const InsufficientData& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitFailure;
    } catch (const std::invalid_argument& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitInvalid;
    }
    return kExitInvalid;
}
