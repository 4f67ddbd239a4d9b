#include "msqkd/io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <ostream>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "msqkd/error.hpp"

namespace msqkd {

namespace {

constexpr const char* kVectorFields[] = {"e0", "e1", "ev", "f0", "f1", "fv", "g0", "g1", "gv"};

std::array<CVector*, 9> vector_fields(AttackSpec& spec) {
    return {&spec.e.m0, &spec.e.m1, &spec.e.mv, &spec.f.m0, &spec.f.m1,
            &spec.f.mv, &spec.g.m0, &spec.g.m1, &spec.g.mv};
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json attack_to_json(const AttackSpec& spec) {
    nlohmann::json doc;
    doc["alpha"] = spec.alpha;
    doc["beta"] = spec.beta;
    doc["gamma"] = spec.gamma;
    doc["d"] = spec.d;
    AttackSpec copy = spec;
    const auto fields = vector_fields(copy);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        auto arr = nlohmann::json::array();
        for (const cplx& z : *fields[i]) arr.push_back({z.real(), z.imag()});
        doc[kVectorFields[i]] = std::move(arr);
    }
    return doc;
}

AttackSpec attack_from_json(const nlohmann::json& doc) {
    try {
        AttackSpec spec;
        spec.alpha = doc.at("alpha").get<double>();
        spec.beta = doc.at("beta").get<double>();
        spec.gamma = doc.at("gamma").get<double>();
        const auto d = doc.at("d").get<std::int64_t>();
        if (d < 1) throw InvalidParameter("attack field d must be a positive integer");
        spec.d = static_cast<std::size_t>(d);
        const auto fields = vector_fields(spec);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto& arr = doc.at(kVectorFields[i]);
            if (!arr.is_array()) throw InvalidParameter(fmt::format("attack field {} must be a list", kVectorFields[i]));
            for (const auto& entry : arr) {
                if (!entry.is_array() || entry.size() != 2) {
                    throw InvalidParameter(fmt::format("attack field {} entries must be [re, im] pairs", kVectorFields[i]));
                }
                fields[i]->emplace_back(entry[0].get<double>(), entry[1].get<double>());
            }
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(fmt::format("malformed attack spec: {}", e.what()));
    }
}

AttackSpec load_attack(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter(fmt::format("cannot open attack file '{}'", path));
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidParameter(fmt::format("cannot parse attack file '{}': {}", path, e.what()));
    }
    return attack_from_json(doc);
}

void save_attack(const AttackSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidParameter(fmt::format("cannot write attack file '{}'", path));
    out << attack_to_json(spec).dump(2) << '\n';
}

nlohmann::json report_to_json(const KeyRateReport& report) {
    nlohmann::json doc;
    doc["mode"] = to_string(report.mode);
    doc["N"] = report.normalization;
    doc["p_acc"] = report.p_acc;
    doc["p0"] = report.p0;
    doc["h_ae_lower"] = report.h_ae_lower;
    doc["h_ab"] = report.h_ab;
    doc["r"] = report.r;
    doc["r_eff"] = report.r_eff;
    auto& terms = doc["terms"] = nlohmann::json::array();
    for (const auto& t : report.term_breakdown) {
        terms.push_back({{"label", t.label},
                         {"weight", t.weight},
                         {"lambda", std::isnan(t.lambda) ? nlohmann::json(nullptr) : nlohmann::json(t.lambda)},
                         {"contribution", t.contribution}});
    }
    doc["baselines"] = {{"r_old", optional_json(report.baselines.r_old)},
                        {"r_eff_old", optional_json(report.baselines.r_eff_old)},
                        {"bb84", optional_json(report.baselines.bb84)}};
    return doc;
}

void write_report_text(const KeyRateReport& report, std::ostream& out) {
    fmt::print(out, "mode        {}\n", to_string(report.mode));
    fmt::print(out, "N           {:.6f}\n", report.normalization);
    fmt::print(out, "p_acc       {:.6f}\n", report.p_acc);
    fmt::print(out, "p0          {:.6f}\n", report.p0);
    fmt::print(out, "H(A|E) >=   {:.6f}\n", report.h_ae_lower);
    fmt::print(out, "H(A|B)      {:.6f}\n", report.h_ab);
    fmt::print(out, "r={:.4f}\n", report.r);
    fmt::print(out, "r_eff={:.4f}\n", report.r_eff);
    fmt::print(out, "terms:\n");
    for (const auto& t : report.term_breakdown) {
        fmt::print(out, "  {:<10} weight={:.6f} lambda={:.6f} contribution={:.6f}\n", t.label, t.weight,
                   t.lambda, t.contribution);
    }
    auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string("n/a"); };
    fmt::print(out, "baselines:\n");
    fmt::print(out, "  r_old={} r_eff_old={} bb84={}\n", opt(report.baselines.r_old),
               opt(report.baselines.r_eff_old), opt(report.baselines.bb84));
}

nlohmann::json soundness_to_json(const SoundnessReport& report) {
    auto ipb = [](const InnerProductBounds& b) {
        return nlohmann::json{{"s1t1", b.s1t1}, {"s0t0", b.s0t0}, {"r0g0", optional_json(b.r0g0)},
                              {"r1g1", optional_json(b.r1g1)}};
    };
    return {{"exact", report.exact},
            {"bound6_exact_overlaps", report.bound6_exact_overlaps},
            {"bound3_exact_overlaps", report.bound3_exact_overlaps},
            {"bound3_estimated", report.bound3_estimated},
            {"exact_overlaps", ipb(report.exact_overlaps)},
            {"estimated_overlaps", ipb(report.estimated_overlaps)},
            {"sound6", report.sound6},
            {"sound3", report.sound3},
            {"sound3_estimated", report.sound3_estimated},
            {"three_le_six", report.three_le_six},
            {"estimated_overlaps_below_exact", report.estimated_overlaps_below_exact}};
}

namespace {

nlohmann::json observables_json(const Observables& o) {
    return {{"p1_rr", o.p1_rr}, {"p0_rr", o.p0_rr}, {"p1_mr", o.p1_mr}, {"p0_mr", o.p0_mr},
            {"p1_rm", o.p1_rm}, {"p0_rm", o.p0_rm}, {"p1_mm", o.p1_mm}, {"p0_mm", o.p0_mm},
            {"alpha2", o.alpha2}, {"beta2", o.beta2}, {"gamma2", o.gamma2}};
}

nlohmann::json estimate_json(const Estimate& e) {
    return {{"value", e.value}, {"stderr", e.stderr_}, {"trials", e.trials}};
}

}  // namespace

nlohmann::json sim_report_json(const SimStats& stats, const EmpiricalObservables* emp,
                               const std::vector<ZScore>* zscores) {
    nlohmann::json doc;
    doc["rounds"] = stats.config.rounds;
    doc["seed"] = stats.config.seed;
    doc["channel"] = {{"phi", stats.config.channel.phi}, {"p_l", stats.config.channel.p_l},
                      {"p_d", stats.config.channel.p_d}};
    doc["accepted"] = stats.accepted;
    doc["subround2_used"] = stats.subround2_used;
    doc["ab_counts"] = {{"00", stats.ab_counts[0]}, {"01", stats.ab_counts[1]},
                        {"10", stats.ab_counts[2]}, {"11", stats.ab_counts[3]}};
    std::uint64_t mismatches = 0;
    for (std::size_t i = 0; i < stats.alice_key.size(); ++i) mismatches += stats.alice_key[i] != stats.bob_key[i];
    doc["raw_key_length"] = stats.alice_key.size();
    doc["raw_key_mismatches"] = mismatches;
    if (emp) {
        doc["empirical"] = {
            {"observables", observables_json(emp->value)},
            {"stderr", observables_json(emp->stderr_)},
            {"p_acc", estimate_json(emp->p_acc)},
            {"p0", estimate_json(emp->p0)},
            {"joint_ab", {estimate_json(emp->joint_ab[0]), estimate_json(emp->joint_ab[1]),
                          estimate_json(emp->joint_ab[2]), estimate_json(emp->joint_ab[3])}},
            {"p1_mm_given_undetected", estimate_json(emp->p1_mm_given_undetected)},
            {"p0_mm_given_undetected", estimate_json(emp->p0_mm_given_undetected)},
        };
    }
    if (zscores) {
        auto& arr = doc["zscores"] = nlohmann::json::array();
        for (const auto& z : *zscores) {
            arr.push_back({{"name", z.name},
                           {"empirical", z.empirical},
                           {"analytic", z.analytic},
                           {"z", std::isfinite(z.z) ? nlohmann::json(z.z) : nlohmann::json(z.z > 0 ? "inf" : "-inf")},
                           {"flagged", z.flagged}});
        }
    }
    return doc;
}

void write_sim_report_text(const SimStats& stats, const EmpiricalObservables* emp,
                           const std::vector<ZScore>* zscores, std::ostream& out) {
    const auto& ch = stats.config.channel;
    fmt::print(out, "rounds {} seed {} phi={} p_l={} p_d={}\n", stats.config.rounds, stats.config.seed, ch.phi,
               ch.p_l, ch.p_d);
    fmt::print(out, "{} accepted rounds\n", stats.accepted);
    fmt::print(out, "sub-round 2 used {} times\n", stats.subround2_used);
    std::uint64_t mismatches = 0;
    for (std::size_t i = 0; i < stats.alice_key.size(); ++i) mismatches += stats.alice_key[i] != stats.bob_key[i];
    fmt::print(out, "raw key length {} mismatches {}\n", stats.alice_key.size(), mismatches);
    fmt::print(out, "AB counts 00={} 01={} 10={} 11={}\n", stats.ab_counts[0], stats.ab_counts[1],
               stats.ab_counts[2], stats.ab_counts[3]);
    if (emp) {
        const auto& v = emp->value;
        const auto& e = emp->stderr_;
        fmt::print(out, "empirical observables (value +- stderr):\n");
        const std::tuple<const char*, double, double> rows[] = {
            {"p1_rr", v.p1_rr, e.p1_rr}, {"p0_rr", v.p0_rr, e.p0_rr}, {"p1_mr", v.p1_mr, e.p1_mr},
            {"p0_mr", v.p0_mr, e.p0_mr}, {"p1_rm", v.p1_rm, e.p1_rm}, {"p0_rm", v.p0_rm, e.p0_rm},
            {"p1_mm", v.p1_mm, e.p1_mm}, {"p0_mm", v.p0_mm, e.p0_mm}, {"alpha2", v.alpha2, e.alpha2},
            {"beta2", v.beta2, e.beta2}, {"gamma2", v.gamma2, e.gamma2},
        };
        for (const auto& [name, val, se] : rows) fmt::print(out, "  {:<7} {:.6f} +- {:.6f}\n", name, val, se);
        fmt::print(out, "  p_acc   {:.6f} +- {:.6f}\n", emp->p_acc.value, emp->p_acc.stderr_);
        fmt::print(out, "  p0      {:.6f} +- {:.6f}\n", emp->p0.value, emp->p0.stderr_);
        fmt::print(out, "  P(1|MM, undetected) {:.6f}  P(0|MM, undetected) {:.6f}\n",
                   emp->p1_mm_given_undetected.value, emp->p0_mm_given_undetected.value);
    }
    if (zscores) {
        fmt::print(out, "z-scores vs closed forms:\n");
        for (const auto& z : *zscores) {
            fmt::print(out, "  {:<7} empirical={:.6f} analytic={:.6f} z={:+.3f}{}\n", z.name, z.empirical,
                       z.analytic, z.z, z.flagged ? "  FLAGGED" : "");
        }
    }
}

}  // namespace msqkd
