#include "qka/types.hpp"

#include <stdexcept>

namespace qka {

char participant_letter(Participant p) { return static_cast<char>('A' + static_cast<int>(p)); }

Participant participant_from_letter(char c) {
    if (c < 'A' || c > 'C')
        throw std::invalid_argument(std::string("unknown participant '") + c + "'");
    return static_cast<Participant>(c - 'A');
}

Participant next_participant(Participant p) {
    return static_cast<Participant>((static_cast<int>(p) + 1) % 3);
}

std::string Hop::to_string() const {
    return std::string(1, participant_letter(ring)) + static_cast<char>('0' + leg);
}

Hop Hop::from_string(std::string_view s) {
    if (s.size() != 2 || s[1] < '1' || s[1] > '3')
        throw std::invalid_argument("hop id must be a ring letter and leg 1-3, got '" +
                                    std::string(s) + "'");
    return Hop{participant_from_letter(s[0]), s[1] - '0'};
}

BasisKind decoy_basis(DecoyState s) {
    return (s == DecoyState::Zero || s == DecoyState::One) ? BasisKind::Z : BasisKind::X;
}

int decoy_expected_bit(DecoyState s) {
    return (s == DecoyState::One || s == DecoyState::Minus) ? 1 : 0;
}

std::string decoy_label(DecoyState s) {
    switch (s) {
    case DecoyState::Zero: return "0";
    case DecoyState::One: return "1";
    case DecoyState::Plus: return "+";
    default: return "-";
    }
}

StateVector decoy_state_vector(DecoyState s) { return make_state(decoy_label(s)); }

std::string bits_to_string(const Bits& b) {
    std::string s(b.size(), '0');
    for (size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? '1' : '0';
    return s;
}

Bits bits_from_string(std::string_view s) {
    Bits b(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1')
            throw std::invalid_argument("bit string may contain only '0'/'1'");
        b[i] = static_cast<uint8_t>(s[i] - '0');
    }
    return b;
}

Bits bits_xor(const Bits& a, const Bits& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("bit string length mismatch: " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    Bits out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
    return out;
}

} // namespace qka
