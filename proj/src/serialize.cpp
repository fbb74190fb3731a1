#include <stdexcept>

#include "qka/protocol.hpp"

namespace qka {

using nlohmann::ordered_json;

namespace {

ordered_json key_map(const std::array<SubKey, 3>& subkeys) {
    ordered_json j = ordered_json::object();
    j["a"] = bits_to_string(subkeys[0].bits());
    j["b"] = bits_to_string(subkeys[1].bits());
    j["c"] = bits_to_string(subkeys[2].bits());
    return j;
}

SubKey subkey_from_bits(Participant owner, std::string_view text) {
    const Bits bits = bits_from_string(text);
    if (bits.size() % 2 != 0)
        throw std::invalid_argument("sub-key bit string must have even length");
    SubKey key{owner, {}};
    for (size_t i = 0; i < bits.size(); i += 2)
        key.groups.push_back(PauliCode(bits[i] * 2 + bits[i + 1]));
    return key;
}

ordered_json params_to_json(const ProtocolParams& p) {
    ordered_json j = ordered_json::object();
    j["m"] = p.m;
    j["l"] = p.l;
    j["n"] = p.n();
    j["decoy_count"] = p.decoy_count;
    j["qber_threshold"] = p.qber_threshold;
    if (p.check_sample_size)
        j["check_sample_size"] = *p.check_sample_size;
    else
        j["check_sample_size"] = nullptr;
    j["seed"] = p.seed;
    j["channel_flip_prob"] = p.channel_flip_prob;
    j["wavelength_filter"] = p.wavelength_filter;
    j["photon_number_splitter"] = p.photon_number_splitter;
    return j;
}

ProtocolParams params_from_json(const ordered_json& j) {
    ProtocolParams p;
    p.m = j.at("m").get<int>();
    p.l = j.at("l").get<int>();
    p.decoy_count = j.at("decoy_count").get<int>();
    p.qber_threshold = j.at("qber_threshold").get<double>();
    if (!j.at("check_sample_size").is_null())
        p.check_sample_size = j.at("check_sample_size").get<int>();
    p.seed = j.at("seed").get<uint64_t>();
    p.channel_flip_prob = j.at("channel_flip_prob").get<double>();
    p.wavelength_filter = j.at("wavelength_filter").get<bool>();
    p.photon_number_splitter = j.at("photon_number_splitter").get<bool>();
    return p;
}

ordered_json eve_to_json(const EveRecord& e) {
    ordered_json j = ordered_json::object();
    j["kind"] = attack_kind_name(e.kind);
    j["photons_attacked"] = e.photons_attacked;
    ordered_json captured = ordered_json::array();
    for (const CapturedOutcome& c : e.captured) {
        ordered_json o = ordered_json::object();
        o["hop"] = c.hop;
        o["slot"] = c.slot_index;
        o["basis"] = std::string(1, c.basis);
        o["outcome"] = c.outcome;
        captured.push_back(std::move(o));
    }
    j["captured"] = std::move(captured);
    j["photons_retained"] = e.retained_photons.size();
    j["ancillas_retained"] = e.retained_ancillas.size();
    j["position_guess"] = e.position_guess ? ordered_json(*e.position_guess) : ordered_json(nullptr);
    j["position_guess_correct"] =
        e.position_guess_correct ? ordered_json(*e.position_guess_correct) : ordered_json(nullptr);
    j["inferred_key_guess"] = e.inferred_key_guess ? ordered_json(bits_to_string(*e.inferred_key_guess))
                                                   : ordered_json(nullptr);
    j["bits_correct_beyond_chance"] = e.bits_correct_beyond_chance
                                          ? ordered_json(*e.bits_correct_beyond_chance)
                                          : ordered_json(nullptr);
    j["trojan_outcome"] = e.trojan_outcome ? ordered_json(*e.trojan_outcome) : ordered_json(nullptr);
    return j;
}

EveRecord eve_from_json(const ordered_json& j) {
    EveRecord e;
    e.kind = attack_kind_from_name(j.at("kind").get<std::string>());
    e.photons_attacked = j.at("photons_attacked").get<int>();
    for (const auto& o : j.at("captured"))
        e.captured.push_back({o.at("hop").get<std::string>(), o.at("slot").get<int>(),
                              o.at("basis").get<std::string>().at(0), o.at("outcome").get<int>()});
    // Photon ids are run-internal; only the counts survive a round trip.
    e.retained_photons.assign(j.at("photons_retained").get<size_t>(), 0);
    e.retained_ancillas.assign(j.at("ancillas_retained").get<size_t>(), 0);
    if (!j.at("position_guess").is_null())
        e.position_guess = j.at("position_guess").get<std::vector<int>>();
    if (!j.at("position_guess_correct").is_null())
        e.position_guess_correct = j.at("position_guess_correct").get<bool>();
    if (!j.at("inferred_key_guess").is_null())
        e.inferred_key_guess = bits_from_string(j.at("inferred_key_guess").get<std::string>());
    if (!j.at("bits_correct_beyond_chance").is_null())
        e.bits_correct_beyond_chance = j.at("bits_correct_beyond_chance").get<double>();
    if (!j.at("trojan_outcome").is_null())
        e.trojan_outcome = j.at("trojan_outcome").get<std::string>();
    return e;
}

} // namespace

ordered_json attack_to_json(const AttackDescriptor& a) {
    ordered_json j = ordered_json::object();
    j["kind"] = attack_kind_name(a.kind);
    ordered_json hops = ordered_json::array();
    for (const Hop& h : a.target_hops) hops.push_back(h.to_string());
    j["target_hops"] = std::move(hops);
    if (a.eve_unitary) {
        ordered_json u = ordered_json::array();
        for (const cx& e : *a.eve_unitary) u.push_back(ordered_json::array({e.real(), e.imag()}));
        j["eve_unitary"] = std::move(u);
    } else {
        j["eve_unitary"] = nullptr;
    }
    if (a.colluders) {
        j["colluders"] = std::string{participant_letter(a.colluders->first),
                                     participant_letter(a.colluders->second)};
        j["strategy"] = strategy_name(a.strategy);
    } else {
        j["colluders"] = nullptr;
        j["strategy"] = nullptr;
    }
    j["resend_distribution"] = a.resend_distribution;
    return j;
}

AttackDescriptor attack_from_json(const ordered_json& j) {
    AttackDescriptor a;
    a.kind = attack_kind_from_name(j.at("kind").get<std::string>());
    for (const auto& h : j.at("target_hops")) a.target_hops.insert(Hop::from_string(h.get<std::string>()));
    if (!j.at("eve_unitary").is_null()) {
        Mat4 u;
        const auto& arr = j.at("eve_unitary");
        if (arr.size() != 16) throw std::invalid_argument("eve_unitary must have 16 entries");
        for (size_t i = 0; i < 16; ++i) u[i] = cx(arr[i][0].get<double>(), arr[i][1].get<double>());
        a.eve_unitary = u;
    }
    if (!j.at("colluders").is_null()) {
        const auto s = j.at("colluders").get<std::string>();
        if (s.size() != 2) throw std::invalid_argument("colluders must be two participant letters");
        a.colluders = {participant_from_letter(s[0]), participant_from_letter(s[1])};
        a.strategy = strategy_from_name(j.at("strategy").get<std::string>());
    }
    const auto& rd = j.at("resend_distribution");
    for (size_t i = 0; i < 4; ++i) a.resend_distribution[i] = rd[i].get<double>();
    return a;
}

ordered_json run_record_to_json(const RunRecord& rec) {
    ordered_json j = ordered_json::object();
    j["params"] = params_to_json(rec.params);
    j["subkeys"] = key_map(rec.subkeys);

    ordered_json anns = ordered_json::array();
    for (const Announcement& a : rec.announcements) {
        ordered_json o = ordered_json::object();
        o["ring"] = std::string(1, participant_letter(a.ring));
        o["inserter"] = std::string(1, participant_letter(a.inserter));
        o["single_positions"] = a.single_positions;
        anns.push_back(std::move(o));
    }
    j["announcements"] = std::move(anns);

    ordered_json rates = ordered_json::object();
    for (int r = 0; r < 3; ++r) {
        for (int leg = 1; leg <= 3; ++leg) {
            const Hop hop{static_cast<Ring>(r), leg};
            const auto& v = rec.decoy_error_rates[static_cast<size_t>(hop.index())];
            rates[hop.to_string()] = v ? ordered_json(*v) : ordered_json(nullptr);
        }
    }
    j["decoy_error_rates"] = std::move(rates);

    j["aborted"] = rec.aborted;
    j["abort_stage"] = rec.abort_stage ? ordered_json(*rec.abort_stage) : ordered_json(nullptr);

    if (rec.derived_keys.empty()) {
        j["derived_keys"] = nullptr;
    } else {
        ordered_json keys = ordered_json::object();
        for (const DerivedKey& k : rec.derived_keys) {
            std::string name(1, static_cast<char>('a' + static_cast<int>(k.source)));
            keys[name] = bits_to_string(k.bits);
        }
        j["derived_keys"] = std::move(keys);
    }

    j["check_positions"] = rec.check_positions;
    j["check_passed"] = rec.check_passed ? ordered_json(*rec.check_passed) : ordered_json(nullptr);
    j["attack"] = rec.attack ? attack_to_json(*rec.attack) : ordered_json(nullptr);
    j["eve"] = rec.eve ? eve_to_json(*rec.eve) : ordered_json(nullptr);
    j["photon_transmissions"] = rec.photon_transmissions;
    return j;
}

RunRecord run_record_from_json(const ordered_json& j) {
    RunRecord rec;
    rec.params = params_from_json(j.at("params"));
    rec.subkeys = {subkey_from_bits(Participant::A, j.at("subkeys").at("a").get<std::string>()),
                   subkey_from_bits(Participant::B, j.at("subkeys").at("b").get<std::string>()),
                   subkey_from_bits(Participant::C, j.at("subkeys").at("c").get<std::string>())};
    for (const auto& o : j.at("announcements")) {
        Announcement a{participant_from_letter(o.at("ring").get<std::string>().at(0)),
                       participant_from_letter(o.at("inserter").get<std::string>().at(0)),
                       o.at("single_positions").get<std::vector<int>>()};
        rec.announcements.push_back(std::move(a));
    }
    for (const auto& [key, value] : j.at("decoy_error_rates").items()) {
        const Hop hop = Hop::from_string(key);
        if (!value.is_null())
            rec.decoy_error_rates[static_cast<size_t>(hop.index())] = value.get<double>();
    }
    rec.aborted = j.at("aborted").get<bool>();
    if (!j.at("abort_stage").is_null()) rec.abort_stage = j.at("abort_stage").get<std::string>();
    if (!j.at("derived_keys").is_null()) {
        for (const auto& [key, value] : j.at("derived_keys").items())
            rec.derived_keys.push_back(DerivedKey{participant_from_letter(static_cast<char>(key.at(0) - 'a' + 'A')),
                                                  bits_from_string(value.get<std::string>())});
    }
    rec.check_positions = j.at("check_positions").get<std::vector<int>>();
    if (!j.at("check_passed").is_null()) rec.check_passed = j.at("check_passed").get<bool>();
    if (!j.at("attack").is_null()) rec.attack = attack_from_json(j.at("attack"));
    if (!j.at("eve").is_null()) rec.eve = eve_from_json(j.at("eve"));
    rec.photon_transmissions = j.at("photon_transmissions").get<uint64_t>();
    return rec;
}

std::string run_record_to_string(const RunRecord& rec) {
    return run_record_to_json(rec).dump(2) + "\n";
}

bool operator==(const RunRecord& a, const RunRecord& b) {
    return run_record_to_json(a) == run_record_to_json(b);
}

} // namespace qka
