#include "msqkd/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "json.hpp"
#include "msqkd/error.hpp"

namespace msqkd {

void validate(const SweepSpec& spec) {
    if (!std::isfinite(spec.start) || !std::isfinite(spec.stop) || spec.start > spec.stop) {
        throw InvalidParameter(fmt::format("sweep range [{}, {}] is empty", spec.start, spec.stop));
    }
    if (!(spec.step > 0.0)) throw InvalidParameter(fmt::format("sweep step {} must be positive", spec.step));
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
    validate(spec);
    const auto n = static_cast<std::size_t>(std::floor((spec.stop - spec.start) / spec.step + 1e-9)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = std::min(spec.start + static_cast<double>(i) * spec.step, spec.stop);
    }
    return grid;
}

SweepRow evaluate_point(const SweepSpec& spec, double x) {
    ChannelParams params = spec.fixed;
    (spec.variable == SweepVariable::Phi ? params.phi : params.p_l) = x;
    const Observables obs = observables_from_channel(params);

    SweepRow row;
    row.x = x;
    try {
        const auto report = keyrate_for_channel(params, spec.options);
        row.r = report.r;
        row.r_eff = report.r_eff;
    } catch (const NoAcceptedRounds&) {
    }
    try {
        const auto old = original_protocol_keyrate(obs);
        row.r_old = old.r;
        row.r_eff_old = old.r_eff;
    } catch (const NoAcceptedRounds&) {
    }
    row.bb84 = bb84_keyrate(params.phi);
    if (row.r_eff && row.r_eff_old && *row.r_eff_old > 0.0) {
        row.improvement_percent = (std::max(*row.r_eff, 0.0) - *row.r_eff_old) / *row.r_eff_old * 100.0;
    }
    return row;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    const auto grid = sweep_grid(spec);
    std::vector<SweepRow> rows(grid.size());
    const auto n = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < n; ++i) {
        rows[static_cast<std::size_t>(i)] = evaluate_point(spec, grid[static_cast<std::size_t>(i)]);
    }
    return rows;
}

std::vector<SweepRow> run_sweep_serial(const SweepSpec& spec) {
    std::vector<SweepRow> rows;
    for (double x : sweep_grid(spec)) rows.push_back(evaluate_point(spec, x));
    return rows;
}

const char* to_string(SweepVariable variable) {
    return variable == SweepVariable::Phi ? "phi" : "p_l";
}

std::string format_number(double value) { return fmt::format("{:.12g}", value); }

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::optional<double> clamped(const std::optional<double>& v) {
    if (!v) return std::nullopt;
    return std::max(*v, 0.0);
}

nlohmann::json json_value(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& out) {
    std::vector<std::string> header = {to_string(spec.variable)};
    if (spec.emit_r) header.insert(header.end(), {"r_raw", "r_clamped"});
    if (spec.emit_r_eff) header.insert(header.end(), {"r_eff_raw", "r_eff_clamped"});
    if (spec.emit_baselines) header.insert(header.end(), {"r_old", "r_eff_old", "bb84"});
    if (spec.emit_improvement) header.push_back("improvement_percent");
    out << fmt::format("{}\n", fmt::join(header, ","));

    for (const auto& row : rows) {
        std::vector<std::string> cells = {format_number(row.x)};
        if (spec.emit_r) cells.insert(cells.end(), {cell(row.r), cell(clamped(row.r))});
        if (spec.emit_r_eff) cells.insert(cells.end(), {cell(row.r_eff), cell(clamped(row.r_eff))});
        if (spec.emit_baselines) {
            cells.insert(cells.end(), {cell(row.r_old), cell(row.r_eff_old), format_number(row.bb84)});
        }
        if (spec.emit_improvement) cells.push_back(cell(row.improvement_percent));
        out << fmt::format("{}\n", fmt::join(cells, ","));
    }
}

void write_sweep_json(const SweepSpec& spec, const std::vector<SweepRow>& rows, std::ostream& out) {
    nlohmann::json doc;
    doc["variable"] = to_string(spec.variable);
    doc["mode"] = to_string(spec.options.mode);
    doc["bound_variant"] = to_string(spec.options.variant);
    doc["fixed"] = {{"phi", spec.fixed.phi}, {"p_l", spec.fixed.p_l}, {"p_d", spec.fixed.p_d}};
    auto& arr = doc["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json j;
        j[to_string(spec.variable)] = row.x;
        if (spec.emit_r) {
            j["r_raw"] = json_value(row.r);
            j["r_clamped"] = json_value(clamped(row.r));
        }
        if (spec.emit_r_eff) {
            j["r_eff_raw"] = json_value(row.r_eff);
            j["r_eff_clamped"] = json_value(clamped(row.r_eff));
        }
        if (spec.emit_baselines) {
            j["r_old"] = json_value(row.r_old);
            j["r_eff_old"] = json_value(row.r_eff_old);
            j["bb84"] = row.bb84;
        }
        if (spec.emit_improvement) j["improvement_percent"] = json_value(row.improvement_percent);
        arr.push_back(std::move(j));
    }
    out << doc.dump(2) << '\n';
}

}  // namespace msqkd
