#include "qka/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qka {

std::string attack_kind_name(AttackKind k) {
    switch (k) {
    case AttackKind::InterceptResend: return "intercept-resend";
    case AttackKind::MeasureResend: return "measure-resend";
    case AttackKind::EntangleMeasure: return "entangle-measure";
    case AttackKind::Trojan: return "trojan";
    case AttackKind::InsideCollusion: return "inside-collusion";
    }
    throw std::logic_error("unreachable");
}

AttackKind attack_kind_from_name(std::string_view name) {
    if (name == "intercept-resend") return AttackKind::InterceptResend;
    if (name == "measure-resend") return AttackKind::MeasureResend;
    if (name == "entangle-measure") return AttackKind::EntangleMeasure;
    if (name == "trojan") return AttackKind::Trojan;
    if (name == "inside-collusion") return AttackKind::InsideCollusion;
    throw std::invalid_argument("unknown attack kind '" + std::string(name) + "'");
}

std::string strategy_name(CollusionStrategy s) {
    return s == CollusionStrategy::NaiveAlign ? "naive-align" : "random-pairing";
}

CollusionStrategy strategy_from_name(std::string_view name) {
    if (name == "naive-align") return CollusionStrategy::NaiveAlign;
    if (name == "random-pairing") return CollusionStrategy::RandomPairing;
    throw std::invalid_argument("unknown collusion strategy '" + std::string(name) + "'");
}

void AttackDescriptor::validate() const {
    if (eve_unitary.has_value() != (kind == AttackKind::EntangleMeasure))
        throw std::invalid_argument("eve_unitary must be present exactly for entangle-measure");
    if (colluders.has_value() != (kind == AttackKind::InsideCollusion))
        throw std::invalid_argument("colluders must be present exactly for inside-collusion");
    if (colluders && colluders->first == colluders->second)
        throw std::invalid_argument("colluders must be two distinct participants");
    if (is_outside_channel_attack() && target_hops.empty())
        throw std::invalid_argument("channel attacks need at least one target hop");
    if (eve_unitary) {
        const double dev = unitarity_deviation(*eve_unitary);
        if (dev > kAlgebraTol)
            throw std::invalid_argument("eve_unitary is not unitary (deviation " +
                                        std::to_string(dev) + ")");
    }
    double wsum = 0;
    for (double w : resend_distribution) {
        if (w < 0) throw std::invalid_argument("resend_distribution weights must be nonnegative");
        wsum += w;
    }
    if (wsum <= 0) throw std::invalid_argument("resend_distribution weights must not all be zero");
}

namespace {

DecoyState sample_replacement(const std::array<double, 4>& weights, Rng& rng) {
    double total = 0;
    for (double w : weights) total += w;
    const double u = rng.next_double() * total;
    double acc = 0;
    for (int i = 0; i < 3; ++i) {
        acc += weights[i];
        if (u < acc) return static_cast<DecoyState>(i);
    }
    return DecoyState::Minus;
}

} // namespace

void intercept_resend(StateStore& store, TravelSequence& seq,
                      const std::array<double, 4>& resend_distribution, Rng& rng, EveRecord& eve) {
    for (Slot& slot : seq.slots) {
        eve.retained_photons.push_back(slot.photon);
        slot.photon = store.add_photon(decoy_state_vector(sample_replacement(resend_distribution, rng)));
        ++eve.photons_attacked;
    }
}

void measure_resend(StateStore& store, TravelSequence& seq, Hop hop, Rng& rng, EveRecord& eve) {
    for (size_t i = 0; i < seq.slots.size(); ++i) {
        const BasisKind basis = rng.next_bit() ? BasisKind::X : BasisKind::Z;
        const int out = store.measure_photon(seq.slots[i].photon, basis, rng);
        eve.captured.push_back(
            {hop.to_string(), static_cast<int>(i), basis == BasisKind::X ? 'X' : 'Z', out});
        ++eve.photons_attacked;
    }
}

void entangle_measure(StateStore& store, TravelSequence& seq, const Mat4& eve_unitary, Rng& rng,
                      EveRecord& eve) {
    (void)rng; // attaching the ancilla is deterministic
    for (Slot& slot : seq.slots) {
        eve.retained_ancillas.push_back(store.attach_ancilla(slot.photon, eve_unitary));
        ++eve.photons_attacked;
    }
}

void apply_outside_attack(const AttackDescriptor& attack, StateStore& store, TravelSequence& seq,
                          Hop hop, Rng& rng, EveRecord& eve) {
    switch (attack.kind) {
    case AttackKind::InterceptResend:
        intercept_resend(store, seq, attack.resend_distribution, rng, eve);
        return;
    case AttackKind::MeasureResend: measure_resend(store, seq, hop, rng, eve); return;
    case AttackKind::EntangleMeasure:
        entangle_measure(store, seq, *attack.eve_unitary, rng, eve);
        return;
    default: throw std::logic_error("apply_outside_attack: not a channel attack");
    }
}

double predicted_decoy_error(const Mat4& eve_unitary) {
    const EveDecomposition d = eve_decomposition(eve_unitary);
    Vec2 plus_err, minus_err;
    for (int a = 0; a < 2; ++a) {
        plus_err[a] = 0.5 * (d.e00[a] - d.e01[a] + d.e10[a] - d.e11[a]);
        minus_err[a] = 0.5 * (d.e00[a] + d.e01[a] - d.e10[a] - d.e11[a]);
    }
    return 0.25 * (norm_sq(d.e01) + norm_sq(d.e10) + norm_sq(plus_err) + norm_sq(minus_err));
}

std::vector<Vec2> conditional_ancilla_states(const Mat4& eve_unitary) {
    const EveDecomposition d = eve_decomposition(eve_unitary);
    std::vector<Vec2> out;
    for (const Vec2& e : {d.e00, d.e01, d.e10, d.e11}) {
        const double n = norm_sq(e);
        if (n < kAlgebraTol) continue;
        Vec2 v;
        const double s = std::sqrt(n);
        for (int a = 0; a < 2; ++a) v[a] = e[a] / s;
        out.push_back(v);
    }
    return out;
}

CollusionGuess inside_collusion(StateStore& store, TravelSequence& seq,
                                std::span<const PhotonId> home, CollusionStrategy strategy, int l,
                                Rng& rng) {
    const int n = static_cast<int>(seq.slots.size());
    const int m = static_cast<int>(home.size());
    if (n - m != l) throw std::invalid_argument("inside_collusion: l inconsistent with sequence");

    CollusionGuess guess;
    if (strategy == CollusionStrategy::NaiveAlign) {
        for (int i = m; i < n; ++i) guess.guessed_positions.push_back(i);
    } else {
        guess.guessed_positions = rng.sample_subset(l, n);
    }

    guess.guessed_groups.resize(static_cast<size_t>(n));
    int next_home = 0;
    for (int i = 0; i < n; ++i) {
        const bool presumed_single = std::binary_search(guess.guessed_positions.begin(),
                                                        guess.guessed_positions.end(), i);
        if (presumed_single) {
            // An encoded |0> reveals only the x bit; the z bit is unknowable
            // and guessed as 0.
            const int bit = store.measure_photon(seq.slots[i].photon, BasisKind::Z, rng);
            guess.guessed_groups[i] = PauliCode(bit * 2);
        } else {
            const PauliCode code = store.measure_bell(seq.slots[i].photon, home[next_home++], rng);
            guess.guessed_groups[i] = code;
        }
    }
    return guess;
}

std::string trojan_outcome(bool wavelength_filter, bool photon_number_splitter) {
    return (wavelength_filter && photon_number_splitter) ? "blocked" : "undetected by assumption";
}

} // namespace qka
