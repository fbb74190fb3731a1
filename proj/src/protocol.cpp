#include "qka/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qka {

namespace {

// Substream labels; every random decision in a run draws from
// derive_seed(master, tag, ...), so execution order can never matter.
enum SubstreamTag : uint64_t {
    kTagSubkey = 1,
    kTagDecoyGen = 2,
    kTagSingles = 3,
    kTagNoise = 4,
    kTagCheck = 5,
    kTagEve = 6,
    kTagDecode = 7,
    kTagVerify = 8,
    kTagCollude = 9,
};

constexpr std::array<Participant, 3> kParticipants = {Participant::A, Participant::B,
                                                      Participant::C};

int idx(Participant p) { return static_cast<int>(p); }

} // namespace

void ProtocolParams::validate() const {
    if (m < 1) throw std::invalid_argument("params: m must be >= 1");
    if (l < 0) throw std::invalid_argument("params: l must be >= 0");
    if (decoy_count < 0) throw std::invalid_argument("params: decoy_count must be >= 0");
    if (qber_threshold < 0.0 || qber_threshold > 1.0)
        throw std::invalid_argument("params: qber_threshold must be in [0,1]");
    if (channel_flip_prob < 0.0 || channel_flip_prob > 1.0)
        throw std::invalid_argument("params: channel_flip_prob must be in [0,1]");
    if (check_sample_size && *check_sample_size < 0)
        throw std::invalid_argument("params: check_sample_size must be >= 0");
}

Bits SubKey::bits() const {
    Bits out;
    out.reserve(groups.size() * 2);
    for (const PauliCode c : groups) {
        out.push_back(static_cast<uint8_t>(c.x_bit()));
        out.push_back(static_cast<uint8_t>(c.z_bit()));
    }
    return out;
}

SubKey generate_subkey(Rng& rng, int n, Participant owner) {
    if (n < 1) throw std::invalid_argument("generate_subkey: n must be >= 1");
    SubKey key{owner, {}};
    key.groups.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) key.groups.push_back(PauliCode(static_cast<int>(rng.next_below(4))));
    return key;
}

RingSetup prepare_ring(Ring ring, const ProtocolParams& params, StateStore& store) {
    RingSetup setup;
    setup.travel.ring = ring;
    setup.travel.slots.reserve(static_cast<size_t>(params.m));
    for (int i = 0; i < params.m; ++i) {
        const auto [first, second] = store.add_bell_pair();
        setup.travel.slots.push_back({SlotKind::BellHalf, i, first});
        setup.home.push_back(second);
    }
    return setup;
}

DecoyRecord insert_decoys(TravelSequence& seq, int count, StateStore& store, Rng& rng) {
    if (count < 0) throw std::invalid_argument("insert_decoys: count must be >= 0");
    DecoyRecord record;
    if (count == 0) return record;

    const int total = static_cast<int>(seq.slots.size()) + count;
    record.positions = rng.sample_subset(count, total);
    record.states.reserve(static_cast<size_t>(count));

    std::vector<Slot> out;
    out.reserve(static_cast<size_t>(total));
    size_t payload_next = 0;
    int decoy_next = 0;
    for (int pos = 0; pos < total; ++pos) {
        if (decoy_next < count && record.positions[decoy_next] == pos) {
            const auto state = static_cast<DecoyState>(rng.next_below(4));
            record.states.push_back(state);
            out.push_back({SlotKind::Decoy, decoy_next, store.add_photon(decoy_state_vector(state))});
            ++decoy_next;
        } else {
            out.push_back(seq.slots[payload_next++]);
        }
    }
    seq.slots = std::move(out);
    return record;
}

double check_decoys(TravelSequence& seq, const DecoyRecord& record, StateStore& store, Rng& rng) {
    int mismatches = 0;
    for (size_t i = 0; i < record.positions.size(); ++i) {
        const int pos = record.positions[i];
        if (pos < 0 || pos >= static_cast<int>(seq.slots.size()) ||
            seq.slots[static_cast<size_t>(pos)].kind != SlotKind::Decoy)
            throw std::invalid_argument("check_decoys: announced position " + std::to_string(pos) +
                                        " does not hold a decoy");
        const DecoyState expect = record.states[i];
        const int outcome =
            store.measure_photon(seq.slots[static_cast<size_t>(pos)].photon, decoy_basis(expect), rng);
        if (outcome != decoy_expected_bit(expect)) ++mismatches;
    }
    if (!record.positions.empty()) {
        std::vector<Slot> kept;
        kept.reserve(seq.slots.size() - record.positions.size());
        for (const Slot& s : seq.slots)
            if (s.kind != SlotKind::Decoy) kept.push_back(s);
        seq.slots = std::move(kept);
    }
    return record.positions.empty() ? 0.0
                                    : static_cast<double>(mismatches) /
                                          static_cast<double>(record.positions.size());
}

Announcement insert_singles(TravelSequence& seq, int l, StateStore& store, Rng& rng,
                            Participant inserter) {
    if (l < 0) throw std::invalid_argument("insert_singles: l must be >= 0");
    Announcement ann{seq.ring, inserter, {}};
    if (l == 0) return ann;

    const int total = static_cast<int>(seq.slots.size()) + l;
    ann.single_positions = rng.sample_subset(l, total);

    std::vector<Slot> out;
    out.reserve(static_cast<size_t>(total));
    size_t payload_next = 0;
    int single_next = 0;
    for (int pos = 0; pos < total; ++pos) {
        if (single_next < l && ann.single_positions[single_next] == pos) {
            out.push_back({SlotKind::InsertedSingle, single_next, store.add_photon(make_state("0"))});
            ++single_next;
        } else {
            out.push_back(seq.slots[payload_next++]);
        }
    }
    seq.slots = std::move(out);
    return ann;
}

void encode(TravelSequence& seq, const SubKey& key, StateStore& store) {
    for (const Slot& s : seq.slots)
        if (s.kind == SlotKind::Decoy)
            throw std::invalid_argument("encode: sequence still contains decoys");
    if (seq.slots.size() != key.groups.size())
        throw std::invalid_argument("encode: payload length " + std::to_string(seq.slots.size()) +
                                    " does not match key length " +
                                    std::to_string(key.groups.size()));
    for (size_t i = 0; i < seq.slots.size(); ++i)
        store.apply_code(seq.slots[i].photon, key.groups[i]);
}

Bits decode(const std::vector<PhotonId>& home, TravelSequence& seq,
            const std::vector<int>& union_positions, StateStore& store, Rng& rng) {
    Bits in_place, appended;
    for (size_t i = 0; i < seq.slots.size(); ++i) {
        const Slot& slot = seq.slots[i];
        const bool in_union = std::binary_search(union_positions.begin(), union_positions.end(),
                                                 static_cast<int>(i));
        if (!in_union) {
            if (slot.kind != SlotKind::BellHalf)
                throw std::logic_error("decode: non-union position " + std::to_string(i) +
                                       " does not hold a Bell half");
            const PauliCode code = store.measure_bell(slot.photon, home.at(static_cast<size_t>(slot.id)), rng);
            in_place.push_back(static_cast<uint8_t>(code.x_bit()));
            in_place.push_back(static_cast<uint8_t>(code.z_bit()));
        } else if (slot.kind == SlotKind::InsertedSingle) {
            appended.push_back(static_cast<uint8_t>(store.measure_photon(slot.photon, BasisKind::Z, rng)));
        } else if (slot.kind == SlotKind::BellHalf) {
            const PauliCode code = store.measure_bell(slot.photon, home.at(static_cast<size_t>(slot.id)), rng);
            appended.push_back(static_cast<uint8_t>(code.x_bit()));
        } else {
            throw std::logic_error("decode: sequence still contains decoys");
        }
    }
    in_place.insert(in_place.end(), appended.begin(), appended.end());
    return in_place;
}

Bits restructure_key(const SubKey& key, const std::vector<int>& union_positions) {
    Bits in_place, appended;
    for (size_t i = 0; i < key.groups.size(); ++i) {
        const PauliCode g = key.groups[i];
        if (std::binary_search(union_positions.begin(), union_positions.end(),
                               static_cast<int>(i))) {
            appended.push_back(static_cast<uint8_t>(g.x_bit()));
        } else {
            in_place.push_back(static_cast<uint8_t>(g.x_bit()));
            in_place.push_back(static_cast<uint8_t>(g.z_bit()));
        }
    }
    in_place.insert(in_place.end(), appended.begin(), appended.end());
    return in_place;
}

DerivedKey derive_final(const Bits& k_star, const Bits& k_prime, Participant source) {
    return DerivedKey{source, bits_xor(k_star, k_prime)};
}

bool verify_sample(const std::array<DerivedKey, 3>& keys, const std::vector<int>& positions) {
    for (const int pos : positions) {
        const size_t i = static_cast<size_t>(pos);
        if (keys[0].bits.at(i) != keys[1].bits.at(i) || keys[1].bits.at(i) != keys[2].bits.at(i))
            return false;
    }
    return true;
}

Ring collusion_ring(std::pair<Participant, Participant> colluders) {
    if (colluders.first == colluders.second)
        throw std::invalid_argument("colluders must be two distinct participants");
    // The honest participant is the one not in the pair; they are the first
    // encoder of the ring prepared two hops upstream of them.
    int honest = 0 + 1 + 2 - idx(colluders.first) - idx(colluders.second);
    return static_cast<Ring>((honest + 2) % 3);
}

RunRecord run_protocol(const ProtocolParams& params,
                       const std::optional<AttackDescriptor>& attack) {
    return run_protocol_with_keys(params, attack, std::nullopt);
}

RunRecord run_protocol_with_keys(const ProtocolParams& params,
                                 const std::optional<AttackDescriptor>& attack,
                                 const std::optional<std::array<SubKey, 3>>& forced_subkeys) {
    params.validate();
    if (attack) attack->validate();

    RunRecord rec;
    rec.params = params;
    rec.attack = attack;
    const int n = params.n();

    StateStore store;

    for (const Participant p : kParticipants) {
        if (forced_subkeys) {
            rec.subkeys[idx(p)] = (*forced_subkeys)[idx(p)];
        } else {
            Rng rng(derive_seed(params.seed, kTagSubkey, idx(p)));
            rec.subkeys[idx(p)] = generate_subkey(rng, n, p);
        }
    }

    std::optional<EveRecord> eve;
    if (attack) {
        eve = EveRecord{};
        eve->kind = attack->kind;
        if (attack->kind == AttackKind::Trojan)
            eve->trojan_outcome =
                trojan_outcome(params.wavelength_filter, params.photon_number_splitter);
    }

    struct RingCtx {
        RingSetup setup;
        DecoyRecord pending;
        Announcement ann;
        bool collusion = false;
        std::vector<PauliCode> fabricated; // measured groups reconstructed by colluders
    };
    std::array<RingCtx, 3> rings;

    std::optional<Ring> coll_ring;
    if (attack && attack->kind == AttackKind::InsideCollusion)
        coll_ring = collusion_ring(*attack->colluders);

    auto finish = [&]() -> RunRecord {
        rec.eve = std::move(eve);
        return std::move(rec);
    };

    auto transmit = [&](Ring r, int leg) {
        RingCtx& rc = rings[idx(r)];
        const Hop hop{r, leg};
        rec.photon_transmissions += rc.setup.travel.slots.size();
        if (attack && attack->is_outside_channel_attack() && attack->targets(hop)) {
            Rng eve_rng(derive_seed(params.seed, kTagEve, idx(r), leg));
            apply_outside_attack(*attack, store, rc.setup.travel, hop, eve_rng, *eve);
        }
        if (params.channel_flip_prob > 0) {
            Rng noise(derive_seed(params.seed, kTagNoise, idx(r), leg));
            for (const Slot& s : rc.setup.travel.slots)
                if (noise.bernoulli(params.channel_flip_prob))
                    store.apply_code(s.photon, PauliCode(3)); // flips the bit in Z and X alike
        }
    };

    // Returns the hop of the first check whose error rate exceeds the threshold.
    auto run_checks = [&](int leg) -> std::optional<Hop> {
        for (const Participant r : kParticipants) {
            RingCtx& rc = rings[idx(r)];
            const Hop hop{r, leg};
            Rng check_rng(derive_seed(params.seed, kTagCheck, idx(r), leg));
            const double rate = check_decoys(rc.setup.travel, rc.pending, store, check_rng);
            rec.decoy_error_rates[static_cast<size_t>(hop.index())] = rate;
            if (rate > params.qber_threshold) return hop;
        }
        return std::nullopt;
    };

    auto abort_at = [&](Hop hop) {
        rec.aborted = true;
        rec.abort_stage = "decoy_check:" + hop.to_string();
    };

    // Step 1: preparation and first transmission.
    for (const Participant r : kParticipants) {
        RingCtx& rc = rings[idx(r)];
        rc.setup = prepare_ring(r, params, store);
        Rng decoy_rng(derive_seed(params.seed, kTagDecoyGen, idx(r), 1));
        rc.pending = insert_decoys(rc.setup.travel, params.decoy_count, store, decoy_rng);
        transmit(r, 1);
    }
    // Step 2: first eavesdropping check.
    if (const auto hop = run_checks(1)) {
        abort_at(*hop);
        return finish();
    }

    // Step 3: single-photon insertion, first encoding, second transmission.
    for (const Participant r : kParticipants) {
        RingCtx& rc = rings[idx(r)];
        const Participant first_encoder = next_participant(r);
        Rng singles_rng(derive_seed(params.seed, kTagSingles, idx(r)));
        rc.ann = insert_singles(rc.setup.travel, params.l, store, singles_rng, first_encoder);
        encode(rc.setup.travel, rec.subkeys[idx(first_encoder)], store);
        Rng decoy_rng(derive_seed(params.seed, kTagDecoyGen, idx(r), 2));
        rc.pending = insert_decoys(rc.setup.travel, params.decoy_count, store, decoy_rng);
        transmit(r, 2);
    }
    // Step 4: second eavesdropping check.
    if (const auto hop = run_checks(2)) {
        abort_at(*hop);
        return finish();
    }

    // Step 5: second encoding (or the colluders' measurement), third transmission.
    for (const Participant r : kParticipants) {
        RingCtx& rc = rings[idx(r)];
        const Participant first_encoder = next_participant(r);
        const Participant second_encoder = next_participant(first_encoder);
        if (coll_ring && *coll_ring == r) {
            Rng coll_rng(derive_seed(params.seed, kTagCollude, idx(r)));
            const CollusionGuess guess = inside_collusion(
                store, rc.setup.travel, rc.setup.home, attack->strategy, params.l, coll_rng);
            eve->position_guess = guess.guessed_positions;
            eve->position_guess_correct = (guess.guessed_positions == rc.ann.single_positions);
            Bits guess_bits;
            for (const PauliCode g : guess.guessed_groups) {
                guess_bits.push_back(static_cast<uint8_t>(g.x_bit()));
                guess_bits.push_back(static_cast<uint8_t>(g.z_bit()));
            }
            eve->inferred_key_guess = guess_bits;
            const Bits truth = rec.subkeys[idx(first_encoder)].bits();
            int matched = 0;
            for (size_t i = 0; i < truth.size(); ++i)
                if (truth[i] == guess_bits[i]) ++matched;
            eve->bits_correct_beyond_chance =
                static_cast<double>(matched) / static_cast<double>(truth.size()) - 0.5;
            eve->photons_attacked += n;
            rc.collusion = true;
            // The colluders re-prepare consistently with their guess; folding
            // the second encoder's key in classically is equivalent because
            // the preparer (a colluder) holds the ring at decode time.
            rc.fabricated.resize(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i)
                rc.fabricated[static_cast<size_t>(i)] =
                    compose_codes(guess.guessed_groups[static_cast<size_t>(i)],
                                  rec.subkeys[idx(second_encoder)].groups[static_cast<size_t>(i)]);
        } else {
            encode(rc.setup.travel, rec.subkeys[idx(second_encoder)], store);
        }
        Rng decoy_rng(derive_seed(params.seed, kTagDecoyGen, idx(r), 3));
        rc.pending = insert_decoys(rc.setup.travel, params.decoy_count, store, decoy_rng);
        transmit(r, 3);
    }

    // Step 6: position announcements, correctness-check sample, third check.
    rec.announcements = {rings[0].ann, rings[1].ann, rings[2].ann};
    std::vector<int> union_positions;
    for (const RingCtx& rc : rings)
        union_positions.insert(union_positions.end(), rc.ann.single_positions.begin(),
                               rc.ann.single_positions.end());
    std::sort(union_positions.begin(), union_positions.end());
    union_positions.erase(std::unique(union_positions.begin(), union_positions.end()),
                          union_positions.end());

    const int key_len = 2 * (n - static_cast<int>(union_positions.size())) +
                        static_cast<int>(union_positions.size());
    const int sample_size =
        params.check_sample_size
            ? *params.check_sample_size
            : static_cast<int>((key_len + 9) / 10); // 10% rounded up
    if (sample_size > key_len)
        throw std::invalid_argument("check_sample_size " + std::to_string(sample_size) +
                                    " exceeds final key length " + std::to_string(key_len));
    Rng verify_rng(derive_seed(params.seed, kTagVerify));
    rec.check_positions = verify_rng.sample_subset(sample_size, key_len);

    if (const auto hop = run_checks(3)) {
        abort_at(*hop);
        return finish();
    }

    // Step 7: decoding and key derivation.
    std::array<DerivedKey, 3> keys;
    for (const Participant r : kParticipants) {
        RingCtx& rc = rings[idx(r)];
        Bits k_prime;
        if (rc.collusion) {
            k_prime = restructure_key(SubKey{r, rc.fabricated}, union_positions);
        } else {
            Rng decode_rng(derive_seed(params.seed, kTagDecode, idx(r)));
            k_prime = decode(rc.setup.home, rc.setup.travel, union_positions, store, decode_rng);
        }
        const Bits k_star = restructure_key(rec.subkeys[idx(r)], union_positions);
        keys[idx(r)] = derive_final(k_star, k_prime, r);
    }
    rec.derived_keys = {keys[0], keys[1], keys[2]};
    rec.check_passed = verify_sample(keys, rec.check_positions);
    if (!*rec.check_passed) {
        rec.aborted = true;
        rec.abort_stage = "verify";
    }
    return finish();
}

} // namespace qka
