#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qka/store.hpp"

namespace qka {

// Rings are named by their preparer: ring A is prepared by Alice and visits
// Bob then Charlie before returning.
enum class Participant : uint8_t { A = 0, B = 1, C = 2 };
using Ring = Participant;

char participant_letter(Participant p);
Participant participant_from_letter(char c);
Participant next_participant(Participant p);

// One of the nine channel transmissions: ring x leg, "A1" .. "C3".
struct Hop {
    Ring ring;
    int leg; // 1..3

    auto operator<=>(const Hop&) const = default;
    std::string to_string() const;
    static Hop from_string(std::string_view s);
    int index() const { return static_cast<int>(ring) * 3 + (leg - 1); } // 0..8
};

enum class SlotKind : uint8_t { BellHalf, InsertedSingle, Decoy };

struct Slot {
    SlotKind kind;
    int id; // pair id for BellHalf, decoy id within the hop for Decoy
    PhotonId photon;
};

struct TravelSequence {
    Ring ring;
    std::vector<Slot> slots;
};

enum class DecoyState : uint8_t { Zero, One, Plus, Minus };

BasisKind decoy_basis(DecoyState s);
int decoy_expected_bit(DecoyState s);
std::string decoy_label(DecoyState s);
StateVector decoy_state_vector(DecoyState s);

struct DecoyRecord {
    std::vector<int> positions; // ascending, indices into the travelling sequence
    std::vector<DecoyState> states;
};

// Bit strings are stored as 0/1 bytes and serialized as '0'/'1' text.
using Bits = std::vector<uint8_t>;

std::string bits_to_string(const Bits& b);
Bits bits_from_string(std::string_view s);
Bits bits_xor(const Bits& a, const Bits& b);

} // namespace qka
