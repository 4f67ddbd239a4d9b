#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "msqkd/attack.hpp"
#include "msqkd/keyrate.hpp"
#include "msqkd/protocol_mc.hpp"

namespace msqkd {

// AttackSpec files: {"alpha", "beta", "gamma", "d", "e0", "e1", "ev", "f0",
// ..., "gv"} with each vector a list of [re, im] pairs of length d.
nlohmann::json attack_to_json(const AttackSpec& spec);
AttackSpec attack_from_json(const nlohmann::json& doc);
AttackSpec load_attack(const std::string& path);
void save_attack(const AttackSpec& spec, const std::string& path);

nlohmann::json report_to_json(const KeyRateReport& report);
void write_report_text(const KeyRateReport& report, std::ostream& out);

nlohmann::json soundness_to_json(const SoundnessReport& report);

nlohmann::json sim_report_json(const SimStats& stats, const EmpiricalObservables* emp,
                               const std::vector<ZScore>* zscores);
void write_sim_report_text(const SimStats& stats, const EmpiricalObservables* emp,
                           const std::vector<ZScore>* zscores, std::ostream& out);

}  // namespace msqkd
