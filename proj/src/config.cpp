#include "qka/config.hpp"

#include <charconv>
#include <fstream>

namespace qka {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= s.size()) {
        const size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.emplace_back(trim(s.substr(start)));
            break;
        }
        parts.emplace_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
    return parts;
}

template <typename T>
T parse_number(const std::string& value, const std::string& where, const std::string& key) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ConfigError(where + ": key '" + key + "' expects a number, got '" + value + "'");
    return out;
}

bool parse_bool(const std::string& value, const std::string& where, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(where + ": key '" + key + "' expects true/false, got '" + value + "'");
}

} // namespace

void apply_config_entry(CliConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& where) {
    if (key == "m")
        cfg.params.m = parse_number<int>(value, where, key);
    else if (key == "l")
        cfg.params.l = parse_number<int>(value, where, key);
    else if (key == "decoy_count")
        cfg.params.decoy_count = parse_number<int>(value, where, key);
    else if (key == "qber_threshold")
        cfg.params.qber_threshold = parse_number<double>(value, where, key);
    else if (key == "check_sample_size")
        cfg.params.check_sample_size = parse_number<int>(value, where, key);
    else if (key == "seed")
        cfg.params.seed = parse_number<uint64_t>(value, where, key);
    else if (key == "channel_flip_prob")
        cfg.params.channel_flip_prob = parse_number<double>(value, where, key);
    else if (key == "wavelength_filter")
        cfg.params.wavelength_filter = parse_bool(value, where, key);
    else if (key == "photon_number_splitter")
        cfg.params.photon_number_splitter = parse_bool(value, where, key);
    else if (key == "attack")
        cfg.attack = value;
    else if (key == "hops")
        cfg.hops = value;
    else if (key == "eve_unitary")
        cfg.eve_unitary = value;
    else if (key == "colluders")
        cfg.colluders = value;
    else if (key == "strategy")
        cfg.strategy = value;
    else if (key == "resend_distribution")
        cfg.resend_distribution = value;
    else if (key == "trials")
        cfg.trials = parse_number<int>(value, where, key);
    else if (key == "sweep")
        cfg.sweep = value;
    else if (key == "sweep_values")
        cfg.sweep_values = value;
    else if (key == "confidence_z")
        cfg.confidence_z = parse_number<double>(value, where, key);
    else if (key == "workers")
        cfg.workers = parse_number<int>(value, where, key);
    else if (key == "format")
        cfg.format = value;
    else if (key == "out")
        cfg.out = value;
    else
        throw ConfigError(where + ": unknown key '" + key + "'");
}

void apply_config_file(CliConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const size_t eq = stripped.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + std::string(stripped) +
                              "'");
        const std::string key(trim(stripped.substr(0, eq)));
        const std::string value(trim(stripped.substr(eq + 1)));
        if (key.empty()) throw ConfigError(where + ": empty key");
        apply_config_entry(cfg, key, value, where);
    }
}

Mat4 parse_eve_unitary(std::string_view spec) {
    if (spec == "identity") return identity4();
    if (spec == "cnot") return controlled_not();
    if (spec.rfind("random:", 0) == 0) {
        const std::string seed_text(spec.substr(7));
        uint64_t seed{};
        const auto res =
            std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
        if (res.ec != std::errc{} || res.ptr != seed_text.data() + seed_text.size())
            throw ConfigError("eve_unitary random seed must be an unsigned integer, got '" +
                              seed_text + "'");
        Rng rng(seed);
        return random_unitary4(rng);
    }
    throw ConfigError("eve_unitary must be identity, cnot, or random:<seed>, got '" +
                      std::string(spec) + "'");
}

std::set<Hop> parse_hops(std::string_view text) {
    std::set<Hop> hops;
    if (text.empty()) return hops;
    if (text == "all") {
        for (int r = 0; r < 3; ++r)
            for (int leg = 1; leg <= 3; ++leg) hops.insert(Hop{static_cast<Ring>(r), leg});
        return hops;
    }
    for (const std::string& part : split(text, ',')) {
        try {
            hops.insert(Hop::from_string(part));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bad hop id: ") + e.what());
        }
    }
    return hops;
}

std::array<double, 4> parse_weights(std::string_view text) {
    const auto parts = split(text, ',');
    if (parts.size() != 4)
        throw ConfigError("resend_distribution expects 4 comma-separated weights, got '" +
                          std::string(text) + "'");
    std::array<double, 4> w{};
    for (size_t i = 0; i < 4; ++i)
        w[i] = parse_number<double>(parts[i], "resend_distribution", "resend_distribution");
    return w;
}

std::optional<AttackDescriptor> build_attack(const CliConfig& cfg) {
    if (cfg.attack.empty() || cfg.attack == "none") return std::nullopt;
    AttackDescriptor a;
    try {
        a.kind = attack_kind_from_name(cfg.attack);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    a.target_hops = parse_hops(cfg.hops);
    if (a.kind == AttackKind::EntangleMeasure) a.eve_unitary = parse_eve_unitary(cfg.eve_unitary);
    if (a.kind == AttackKind::InsideCollusion) {
        if (cfg.colluders.size() != 2)
            throw ConfigError("colluders must be two participant letters, got '" + cfg.colluders +
                              "'");
        try {
            a.colluders = {participant_from_letter(cfg.colluders[0]),
                           participant_from_letter(cfg.colluders[1])};
            a.strategy = strategy_from_name(cfg.strategy);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (a.kind == AttackKind::InterceptResend)
        a.resend_distribution = parse_weights(cfg.resend_distribution);
    try {
        a.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return a;
}

ExperimentPlan build_plan(const CliConfig& cfg) {
    ExperimentPlan plan;
    plan.base = cfg.params;
    plan.attack = build_attack(cfg);
    plan.trials = cfg.trials;
    try {
        plan.sweep = sweep_param_from_name(cfg.sweep);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!cfg.sweep_values.empty())
        for (const std::string& v : split(cfg.sweep_values, ','))
            plan.sweep_values.push_back(parse_number<double>(v, "sweep_values", "sweep_values"));
    plan.confidence_z = cfg.confidence_z;
    try {
        plan.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return plan;
}

} // namespace qka
