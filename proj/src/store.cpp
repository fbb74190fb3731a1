#include "qka/store.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qka {

namespace {

StateVector bell_state_for_code(PauliCode code) {
    switch (code.value) {
    case 0: return make_state("phi+");
    case 1: return make_state("phi-");
    case 2: return make_state("psi+");
    default: return make_state("psi-");
    }
}

StateVector zx_state_for_outcome(BasisKind basis, int outcome) {
    if (basis == BasisKind::Z) return make_state(outcome ? "1" : "0");
    return make_state(outcome ? "-" : "+");
}

} // namespace

PhotonId StateStore::add_photon(StateVector one_qubit) {
    if (one_qubit.num_qubits() != 1)
        throw std::invalid_argument("StateStore::add_photon: expected a single-qubit state");
    const PhotonId id = static_cast<PhotonId>(locs_.size());
    locs_.push_back({static_cast<int>(states_.size()), 0});
    members_.push_back({id});
    states_.push_back(std::move(one_qubit));
    return id;
}

std::pair<PhotonId, PhotonId> StateStore::add_bell_pair() {
    const PhotonId a = static_cast<PhotonId>(locs_.size());
    const PhotonId b = a + 1;
    const int s = static_cast<int>(states_.size());
    locs_.push_back({s, 0});
    locs_.push_back({s, 1});
    members_.push_back({a, b});
    states_.push_back(make_state("phi+"));
    return {a, b};
}

const StateVector& StateStore::state_of(PhotonId p) const { return states_[locs_.at(p).state]; }

int StateStore::qubit_of(PhotonId p) const { return locs_.at(p).qubit; }

bool StateStore::same_state(PhotonId a, PhotonId b) const {
    return locs_.at(a).state == locs_.at(b).state;
}

void StateStore::apply_code(PhotonId p, PauliCode code) {
    apply_single(p, pauli_matrix(code));
}

void StateStore::apply_single(PhotonId p, const Mat2& u) {
    const Loc loc = locs_.at(p);
    states_[loc.state] = apply_single_qubit(states_[loc.state], u, loc.qubit);
}

int StateStore::merge(int sa, int sb) {
    if (sa == sb) return sa;
    const int na = states_[sa].num_qubits();
    const int nb = states_[sb].num_qubits();
    if (na + nb > 4)
        throw std::invalid_argument("StateStore: joint state would exceed 4 qubits");
    states_[sa] = tensor(states_[sa], states_[sb]);
    for (const PhotonId p : members_[sb]) {
        locs_[p].state = sa;
        locs_[p].qubit += na;
        members_[sa].push_back(p);
    }
    members_[sb].clear();
    // keep a valid placeholder in the vacated slot
    states_[sb] = make_state("0");
    return sa;
}

PhotonId StateStore::attach_ancilla(PhotonId p, const Mat4& u) {
    const PhotonId anc = add_photon(make_state("0"));
    const int s = merge(locs_[p].state, locs_[anc].state);
    states_[s] = apply_unitary(states_[s], u, locs_[p].qubit, locs_[anc].qubit);
    return anc;
}

void StateStore::split_out(int state, std::vector<int> qubits, const StateVector& factor) {
    const int n = states_[state].num_qubits();
    const int k = static_cast<int>(qubits.size());
    if (n == k) return; // the factor is the whole state

    // Contract the known factor out: rest[o] = sum_s conj(factor[s]) amp[s,o].
    std::vector<int> rest_qubits;
    for (int q = 0; q < n; ++q)
        if (std::find(qubits.begin(), qubits.end(), q) == qubits.end()) rest_qubits.push_back(q);

    std::vector<cx> rest(size_t{1} << (n - k), cx(0));
    const auto amps = states_[state].amplitudes();
    for (size_t i = 0; i < amps.size(); ++i) {
        size_t s = 0, o = 0;
        for (int j = 0; j < k; ++j)
            s = (s << 1) | ((i >> (n - 1 - qubits[j])) & 1);
        for (int j = 0; j < n - k; ++j)
            o = (o << 1) | ((i >> (n - 1 - rest_qubits[j])) & 1);
        rest[o] += std::conj(factor.amplitude(s)) * amps[i];
    }
    const double norm = std::sqrt(norm_sq(rest));
    if (std::abs(norm - 1.0) > 1e-6)
        throw std::logic_error("StateStore::split_out: measured subsystem not separable");
    for (cx& a : rest) a /= norm;

    // Rebuild bookkeeping: measured photons get their own state, the rest stay.
    std::vector<PhotonId> measured_members, rest_members;
    for (int q : qubits) measured_members.push_back(members_[state][q]);
    for (int q : rest_qubits) rest_members.push_back(members_[state][q]);

    const int new_state = static_cast<int>(states_.size());
    states_.push_back(factor);
    members_.push_back(measured_members);
    for (int j = 0; j < k; ++j) locs_[measured_members[j]] = {new_state, j};

    states_[state] = StateVector(n - k, std::move(rest));
    members_[state] = rest_members;
    for (int j = 0; j < n - k; ++j) locs_[rest_members[j]] = {state, j};
}

int StateStore::measure_photon(PhotonId p, BasisKind basis, Rng& rng) {
    if (basis == BasisKind::Bell)
        throw std::invalid_argument("measure_photon: use measure_bell for Bell measurements");
    const Loc loc = locs_.at(p);
    const std::array<int, 1> idx = {loc.qubit};
    const MeasurementOutcome out = measure(states_[loc.state], basis, idx, rng);
    states_[loc.state] = out.collapsed;
    split_out(loc.state, {loc.qubit}, zx_state_for_outcome(basis, out.bit()));
    return out.bit();
}

PauliCode StateStore::measure_bell(PhotonId first, PhotonId second, Rng& rng) {
    const int s = merge(locs_[first].state, locs_[second].state);
    const std::array<int, 2> idx = {locs_[first].qubit, locs_[second].qubit};
    const MeasurementOutcome out = measure(states_[s], BasisKind::Bell, idx, rng);
    states_[s] = out.collapsed;
    split_out(s, {locs_[first].qubit, locs_[second].qubit}, bell_state_for_code(out.code()));
    return out.code();
}

std::vector<double> StateStore::photon_distribution(PhotonId p, BasisKind basis) const {
    const Loc loc = locs_.at(p);
    const std::array<int, 1> idx = {loc.qubit};
    return measurement_distribution(states_[loc.state], basis, idx);
}

} // namespace qka
