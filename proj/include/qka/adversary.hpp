#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qka/types.hpp"

namespace qka {

enum class AttackKind {
    InterceptResend,
    MeasureResend,
    EntangleMeasure,
    Trojan,
    InsideCollusion,
};

enum class CollusionStrategy { NaiveAlign, RandomPairing };

std::string attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(std::string_view name);
std::string strategy_name(CollusionStrategy s);
CollusionStrategy strategy_from_name(std::string_view name);

struct AttackDescriptor {
    AttackKind kind = AttackKind::InterceptResend;
    std::set<Hop> target_hops;
    std::optional<Mat4> eve_unitary;                              // entangle-measure only
    std::optional<std::pair<Participant, Participant>> colluders; // inside collusion only
    CollusionStrategy strategy = CollusionStrategy::NaiveAlign;
    // Eve's replacement-state weights over {|0>,|1>,|+>,|->} for
    // intercept-resend; uniform reproduces the paper's per-decoy pass rate 1/2.
    std::array<double, 4> resend_distribution = {0.25, 0.25, 0.25, 0.25};

    void validate() const;
    bool targets(Hop h) const { return target_hops.count(h) > 0; }
    bool is_outside_channel_attack() const {
        return kind == AttackKind::InterceptResend || kind == AttackKind::MeasureResend ||
               kind == AttackKind::EntangleMeasure;
    }
};

struct CapturedOutcome {
    std::string hop;
    int slot_index;
    char basis; // 'Z' or 'X'
    int outcome;
};

// What the adversary walks away with; embedded in the run transcript.
struct EveRecord {
    AttackKind kind;
    int photons_attacked = 0;
    std::vector<CapturedOutcome> captured;   // measure-resend outcomes
    std::vector<PhotonId> retained_photons;  // intercept-resend originals
    std::vector<PhotonId> retained_ancillas; // entangle-measure ancillas
    std::optional<std::vector<int>> position_guess;
    std::optional<bool> position_guess_correct;
    std::optional<Bits> inferred_key_guess;
    std::optional<double> bits_correct_beyond_chance;
    std::optional<std::string> trojan_outcome;
};

// Channel hooks for the three outside quantum attacks; applied to every slot
// (decoys included -- Eve cannot tell them apart) of a targeted hop.
void intercept_resend(StateStore& store, TravelSequence& seq,
                      const std::array<double, 4>& resend_distribution, Rng& rng, EveRecord& eve);
void measure_resend(StateStore& store, TravelSequence& seq, Hop hop, Rng& rng, EveRecord& eve);
void entangle_measure(StateStore& store, TravelSequence& seq, const Mat4& eve_unitary, Rng& rng,
                      EveRecord& eve);

void apply_outside_attack(const AttackDescriptor& attack, StateStore& store, TravelSequence& seq,
                          Hop hop, Rng& rng, EveRecord& eve);

// Closed-form decoy error probability under uniform decoy states for an
// entangle-measure unitary, from its ancilla decomposition.
double predicted_decoy_error(const Mat4& eve_unitary);

// Normalized nonzero ancilla components E_bp; pairwise overlap magnitude 1
// means the ancilla carries no information about the photon.
std::vector<Vec2> conditional_ancilla_states(const Mat4& eve_unitary);

struct CollusionGuess {
    std::vector<int> guessed_positions;      // ascending
    std::vector<PauliCode> guessed_groups;   // one per payload position
};

// Colluders' measurement of a ring payload against the retained home qubits
// under a pairing guess.  NaiveAlign pairs slot i with home i and writes off
// the trailing l slots as singles; RandomPairing guesses the l insertion
// positions uniformly.
CollusionGuess inside_collusion(StateStore& store, TravelSequence& seq,
                                std::span<const PhotonId> home, CollusionStrategy strategy, int l,
                                Rng& rng);

// Trojan-horse bookkeeping: blocked iff both countermeasures are installed.
std::string trojan_outcome(bool wavelength_filter, bool photon_number_splitter);

} // namespace qka
