#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qka/rng.hpp"

namespace qka {

using cx = std::complex<double>;
using Mat2 = std::array<cx, 4>;  // row-major 2x2
using Mat4 = std::array<cx, 16>; // row-major 4x4
using Vec2 = std::array<cx, 2>;

// Tolerance for algebraic identities (normalization, unitarity, phase
// equality).  Sampled frequencies state their own tolerance per test.
inline constexpr double kAlgebraTol = 1e-9;

// Two-bit dense-coding label: high bit = x component, low bit = z component.
// As an operation it names 00 -> I, 01 -> sigma_z, 10 -> sigma_x,
// 11 -> i*sigma_y; the same two bits name Bell states (00 = phi+, 01 = phi-,
// 10 = psi+, 11 = psi-) and the participants' key groups.
struct PauliCode {
    uint8_t value = 0;

    constexpr PauliCode() = default;
    explicit PauliCode(int v);

    constexpr int x_bit() const { return (value >> 1) & 1; }
    constexpr int z_bit() const { return value & 1; }

    friend constexpr PauliCode operator^(PauliCode a, PauliCode b) {
        PauliCode r;
        r.value = static_cast<uint8_t>(a.value ^ b.value);
        return r;
    }
    friend constexpr bool operator==(PauliCode, PauliCode) = default;

    std::string to_string() const; // e.g. "10"
    static PauliCode from_string(std::string_view s);
};

enum class BasisKind { Z, X, Bell };

// Dense normalized amplitude vector over 1..4 qubits.  Qubit 0 is the most
// significant bit of the amplitude index, so |q0 q1> has amplitude index
// q0*2 + q1.  Immutable after construction; operations return new values.
class StateVector {
  public:
    StateVector(int num_qubits, std::vector<cx> amplitudes);

    static StateVector computational(int num_qubits, size_t basis_index);

    int num_qubits() const { return num_qubits_; }
    size_t dim() const { return amps_.size(); }
    std::span<const cx> amplitudes() const { return amps_; }
    cx amplitude(size_t i) const { return amps_[i]; }

  private:
    int num_qubits_;
    std::vector<cx> amps_;
};

struct MeasurementOutcome {
    BasisKind basis;
    uint8_t value; // bit for Z/X, two-bit Bell code for Bell
    StateVector collapsed;

    int bit() const { return value & 1; }
    PauliCode code() const { return PauliCode(value); }
};

// The four ancilla components of a photon-ancilla unitary applied to
// |0>|e0> and |1>|e0>: |b>|e0> -> |0>|E_b0> + |1>|E_b1>.  Unnormalized.
struct EveDecomposition {
    Vec2 e00, e01, e10, e11;
};

// --- state construction ----------------------------------------------------

// Canonical named states: "0", "1", "+", "-", "phi+", "phi-", "psi+", "psi-".
StateVector make_state(std::string_view label);

StateVector tensor(const StateVector& a, const StateVector& b);

// --- unitaries --------------------------------------------------------------

Mat2 pauli_matrix(PauliCode code);

Mat4 identity4();
// CNOT with the first qubit of the pair as control.
Mat4 controlled_not();
Mat4 kron(const Mat2& a, const Mat2& b);

// Haar-like random unitary: orthonormalized complex Gaussian matrix.
Mat2 random_unitary2(Rng& rng);
Mat4 random_unitary4(Rng& rng);

// Max-abs deviation of m * m^dagger from the identity.
double unitarity_deviation(const Mat4& m);

StateVector apply_pauli(const StateVector& state, PauliCode code, int qubit_index);
StateVector apply_single_qubit(const StateVector& state, const Mat2& u, int qubit_index);
// Two-qubit unitary on an ordered pair; q0 indexes the high bit of the 4x4.
StateVector apply_unitary(const StateVector& state, const Mat4& u, int q0, int q1);

// --- measurement ------------------------------------------------------------

// Outcome probabilities without sampling: size 2 for Z/X (indices: bit value,
// with 0 = |+> and 1 = |-> in X), size 4 for Bell (indices: code value).
std::vector<double> measurement_distribution(const StateVector& state, BasisKind basis,
                                             std::span<const int> indices);

MeasurementOutcome measure(const StateVector& state, BasisKind basis,
                           std::span<const int> indices, Rng& rng);

// --- code algebra and analysis helpers --------------------------------------

// XOR of the two-bit labels; equals sequential application up to global phase.
PauliCode compose_codes(PauliCode a, PauliCode b);

EveDecomposition eve_decomposition(const Mat4& u);

cx overlap(std::span<const cx> a, std::span<const cx> b);
cx overlap(const StateVector& a, const StateVector& b);

double norm_sq(std::span<const cx> v);

// |<a|b>| >= 1 - tol for normalized inputs; the equality notion used for all
// state comparisons (global phase is unobservable).
bool equal_up_to_phase(const StateVector& a, const StateVector& b, double tol = kAlgebraTol);

} // namespace qka
