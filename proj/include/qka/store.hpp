#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qka/qcore.hpp"

namespace qka {

using PhotonId = uint32_t;

// Joint-state store for a protocol run.  Photons live inside shared
// StateVectors; entangling operations merge states, and measurements factor
// the measured subsystem back out into its own state, so no state ever holds
// more than four qubits (a Bell pair plus up to two eavesdropper ancillas).
class StateStore {
  public:
    PhotonId add_photon(StateVector one_qubit);

    // Fresh |phi+> pair; returns (first, second) photon ids.
    std::pair<PhotonId, PhotonId> add_bell_pair();

    const StateVector& state_of(PhotonId p) const;
    int qubit_of(PhotonId p) const;
    bool same_state(PhotonId a, PhotonId b) const;

    void apply_code(PhotonId p, PauliCode code);
    void apply_single(PhotonId p, const Mat2& u);

    // Joins the photon with a fresh |0> ancilla and applies u on the ordered
    // pair (photon, ancilla).  Returns the ancilla's photon id.
    PhotonId attach_ancilla(PhotonId p, const Mat4& u);

    // Measures one photon in Z or X and factors it out of its joint state.
    int measure_photon(PhotonId p, BasisKind basis, Rng& rng);

    // Bell measurement on an ordered pair (merging their states first); the
    // pair is factored out, leaving any ancillas in a separate state.
    PauliCode measure_bell(PhotonId first, PhotonId second, Rng& rng);

    std::vector<double> photon_distribution(PhotonId p, BasisKind basis) const;

    size_t photon_count() const { return locs_.size(); }

  private:
    struct Loc {
        int state;
        int qubit;
    };

    int merge(int sa, int sb);                       // returns merged state index
    void split_out(int state, std::vector<int> qubits, const StateVector& factor);

    std::vector<StateVector> states_;
    std::vector<std::vector<PhotonId>> members_; // qubit order per state
    std::vector<Loc> locs_;                      // per photon
};

} // namespace qka
