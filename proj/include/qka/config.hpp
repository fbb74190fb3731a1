#pragma once

#include <set>
#include <stdexcept>
#include <string>

#include "qka/analysis.hpp"

namespace qka {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key/value configuration mirroring every CLI flag; all fields have
// defaults, so a config file or flag set only needs what it changes.
struct CliConfig {
    ProtocolParams params;
    std::string attack = "none";
    std::string hops;                // comma-separated hop ids, or "all"
    std::string eve_unitary = "cnot"; // identity | cnot | random:<seed>
    std::string colluders = "AC";
    std::string strategy = "naive-align";
    std::string resend_distribution = "0.25,0.25,0.25,0.25";
    int trials = 1000;
    std::string sweep;        // sweep parameter name, empty = none
    std::string sweep_values; // comma-separated numbers
    double confidence_z = 3.0;
    int workers = 1;
    std::string format = "json";
    std::string out;
};

// Applies `key = value` lines from the file; '#' starts a comment.  Errors
// name the file, line, and offending key.
void apply_config_file(CliConfig& config, const std::string& path);

// One key/value assignment (the unit the file parser and flag layer share).
void apply_config_entry(CliConfig& config, const std::string& key, const std::string& value,
                        const std::string& where);

Mat4 parse_eve_unitary(std::string_view spec);
std::set<Hop> parse_hops(std::string_view text);
std::array<double, 4> parse_weights(std::string_view text);

std::optional<AttackDescriptor> build_attack(const CliConfig& config);
ExperimentPlan build_plan(const CliConfig& config);

} // namespace qka
