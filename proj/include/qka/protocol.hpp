#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qka/adversary.hpp"
#include "qka/types.hpp"

namespace qka {

struct ProtocolParams {
    int m = 8;           // Bell pairs per ring
    int l = 2;           // inserted single photons per ring
    int decoy_count = 16; // decoys per hop (the kn knob)
    double qber_threshold = 0.10;
    std::optional<int> check_sample_size; // default: 10% of key bits, rounded up
    uint64_t seed = 0;
    double channel_flip_prob = 0.0; // per photon per hop; flips the measured bit in either basis
    bool wavelength_filter = false;
    bool photon_number_splitter = false;

    int n() const { return m + l; }
    void validate() const;

    friend bool operator==(const ProtocolParams&, const ProtocolParams&) = default;
};

struct SubKey {
    Participant owner;
    std::vector<PauliCode> groups; // n two-bit groups

    Bits bits() const; // 2n bits, x then z per group
    friend bool operator==(const SubKey&, const SubKey&) = default;
};

struct Announcement {
    Ring ring;
    Participant inserter;
    std::vector<int> single_positions; // ascending, < n

    friend bool operator==(const Announcement&, const Announcement&) = default;
};

struct DerivedKey {
    Participant source;
    Bits bits; // length 2(n - |P_union|) + |P_union|

    friend bool operator==(const DerivedKey&, const DerivedKey&) = default;
};

// Full deterministic transcript of one protocol execution.
struct RunRecord {
    ProtocolParams params;
    std::array<SubKey, 3> subkeys;
    std::vector<Announcement> announcements;
    std::array<std::optional<double>, 9> decoy_error_rates; // indexed by Hop::index()
    bool aborted = false;
    std::optional<std::string> abort_stage; // "decoy_check:<hop>" or "verify"
    std::vector<DerivedKey> derived_keys;   // all three when decoding was reached
    std::vector<int> check_positions;
    std::optional<bool> check_passed;
    std::optional<AttackDescriptor> attack;
    std::optional<EveRecord> eve;
    uint64_t photon_transmissions = 0;
};

// --- protocol operations (exposed for unit tests) ---------------------------

SubKey generate_subkey(Rng& rng, int n, Participant owner);

struct RingSetup {
    TravelSequence travel;
    std::vector<PhotonId> home; // second qubits, in pair order
};

RingSetup prepare_ring(Ring ring, const ProtocolParams& params, StateStore& store);

DecoyRecord insert_decoys(TravelSequence& seq, int count, StateStore& store, Rng& rng);

// Measures the announced decoys, removes them from the sequence, and returns
// the mismatch fraction (0 when count is 0).
double check_decoys(TravelSequence& seq, const DecoyRecord& record, StateStore& store, Rng& rng);

Announcement insert_singles(TravelSequence& seq, int l, StateStore& store, Rng& rng,
                            Participant inserter);

void encode(TravelSequence& seq, const SubKey& key, StateStore& store);

// Step-7 measurement: Bell codes in place for non-union positions, one bit
// (Z outcome or the Bell x bit) appended per union position.
Bits decode(const std::vector<PhotonId>& home, TravelSequence& seq,
            const std::vector<int>& union_positions, StateStore& store, Rng& rng);

Bits restructure_key(const SubKey& key, const std::vector<int>& union_positions);

DerivedKey derive_final(const Bits& k_star, const Bits& k_prime, Participant source);

bool verify_sample(const std::array<DerivedKey, 3>& keys, const std::vector<int>& positions);

RunRecord run_protocol(const ProtocolParams& params,
                       const std::optional<AttackDescriptor>& attack = std::nullopt);

// Test hook: same as run_protocol but with caller-supplied sub-keys.
RunRecord run_protocol_with_keys(const ProtocolParams& params,
                                 const std::optional<AttackDescriptor>& attack,
                                 const std::optional<std::array<SubKey, 3>>& forced_subkeys);

// The ring on which the given colluders can mount the step-5 measurement
// (the ring whose first encoder is the honest participant).
Ring collusion_ring(std::pair<Participant, Participant> colluders);

// --- serialization -----------------------------------------------------------

nlohmann::ordered_json attack_to_json(const AttackDescriptor& a);
AttackDescriptor attack_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json run_record_to_json(const RunRecord& rec);
RunRecord run_record_from_json(const nlohmann::ordered_json& j);
std::string run_record_to_string(const RunRecord& rec); // pretty JSON + newline

bool operator==(const RunRecord& a, const RunRecord& b);

} // namespace qka
