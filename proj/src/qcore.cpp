#include "qka/qcore.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qka {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

size_t checked_dim(int num_qubits, size_t len) {
    if (num_qubits < 1 || num_qubits > 4)
        throw std::invalid_argument("StateVector: num_qubits must be in [1,4], got " +
                                    std::to_string(num_qubits));
    const size_t want = size_t{1} << num_qubits;
    if (len != want)
        throw std::invalid_argument("StateVector: expected " + std::to_string(want) +
                                    " amplitudes, got " + std::to_string(len));
    return want;
}

int bit_position(const StateVector& s, int qubit) {
    if (qubit < 0 || qubit >= s.num_qubits())
        throw std::invalid_argument("qubit index " + std::to_string(qubit) +
                                    " out of range for " + std::to_string(s.num_qubits()) +
                                    " qubits");
    return s.num_qubits() - 1 - qubit;
}

// Bell basis vectors over the pair sub-index s = q0*2 + q1, ordered by code.
constexpr std::array<std::array<double, 4>, 4> kBellBasis = {{
    {kInvSqrt2, 0, 0, kInvSqrt2},  // 00 phi+
    {kInvSqrt2, 0, 0, -kInvSqrt2}, // 01 phi-
    {0, kInvSqrt2, kInvSqrt2, 0},  // 10 psi+
    {0, kInvSqrt2, -kInvSqrt2, 0}, // 11 psi-
}};

const Mat2 kHadamard = {cx(kInvSqrt2), cx(kInvSqrt2), cx(kInvSqrt2), cx(-kInvSqrt2)};

} // namespace

PauliCode::PauliCode(int v) {
    if (v < 0 || v > 3)
        throw std::invalid_argument("PauliCode: value must be in {0,1,2,3}, got " +
                                    std::to_string(v));
    value = static_cast<uint8_t>(v);
}

std::string PauliCode::to_string() const {
    std::string s(2, '0');
    s[0] = static_cast<char>('0' + x_bit());
    s[1] = static_cast<char>('0' + z_bit());
    return s;
}

PauliCode PauliCode::from_string(std::string_view s) {
    if (s.size() != 2 || (s[0] != '0' && s[0] != '1') || (s[1] != '0' && s[1] != '1'))
        throw std::invalid_argument("PauliCode: expected two bits, got '" + std::string(s) + "'");
    return PauliCode((s[0] - '0') * 2 + (s[1] - '0'));
}

StateVector::StateVector(int num_qubits, std::vector<cx> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    checked_dim(num_qubits_, amps_.size());
    const double n = norm_sq(amps_);
    if (std::abs(n - 1.0) > kAlgebraTol)
        throw std::invalid_argument("StateVector: amplitudes not normalized (|norm^2 - 1| = " +
                                    std::to_string(std::abs(n - 1.0)) + ")");
}

StateVector StateVector::computational(int num_qubits, size_t basis_index) {
    std::vector<cx> a(size_t{1} << num_qubits, cx(0));
    a.at(basis_index) = cx(1);
    return StateVector(num_qubits, std::move(a));
}

StateVector make_state(std::string_view label) {
    if (label == "0") return StateVector(1, {cx(1), cx(0)});
    if (label == "1") return StateVector(1, {cx(0), cx(1)});
    if (label == "+") return StateVector(1, {cx(kInvSqrt2), cx(kInvSqrt2)});
    if (label == "-") return StateVector(1, {cx(kInvSqrt2), cx(-kInvSqrt2)});
    if (label == "phi+") return StateVector(2, {cx(kInvSqrt2), cx(0), cx(0), cx(kInvSqrt2)});
    if (label == "phi-") return StateVector(2, {cx(kInvSqrt2), cx(0), cx(0), cx(-kInvSqrt2)});
    if (label == "psi+") return StateVector(2, {cx(0), cx(kInvSqrt2), cx(kInvSqrt2), cx(0)});
    if (label == "psi-") return StateVector(2, {cx(0), cx(kInvSqrt2), cx(-kInvSqrt2), cx(0)});
    throw std::invalid_argument("make_state: unknown label '" + std::string(label) + "'");
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    std::vector<cx> out(a.dim() * b.dim());
    for (size_t i = 0; i < a.dim(); ++i)
        for (size_t j = 0; j < b.dim(); ++j)
            out[i * b.dim() + j] = a.amplitude(i) * b.amplitude(j);
    return StateVector(a.num_qubits() + b.num_qubits(), std::move(out));
}

Mat2 pauli_matrix(PauliCode code) {
    switch (code.value) {
    case 0: return {cx(1), cx(0), cx(0), cx(1)};   // I
    case 1: return {cx(1), cx(0), cx(0), cx(-1)};  // sigma_z
    case 2: return {cx(0), cx(1), cx(1), cx(0)};   // sigma_x
    default: return {cx(0), cx(1), cx(-1), cx(0)}; // i*sigma_y
    }
}

Mat4 identity4() {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) m[i * 4 + i] = cx(1);
    return m;
}

Mat4 controlled_not() {
    Mat4 m{};
    m[0 * 4 + 0] = cx(1);
    m[1 * 4 + 1] = cx(1);
    m[2 * 4 + 3] = cx(1);
    m[3 * 4 + 2] = cx(1);
    return m;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 m{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    m[(i * 2 + k) * 4 + (j * 2 + l)] = a[i * 2 + j] * b[k * 2 + l];
    return m;
}

namespace {

// Modified Gram-Schmidt on the columns of a complex Gaussian matrix.
template <size_t N>
std::array<cx, N * N> gaussian_unitary(Rng& rng) {
    std::array<std::array<cx, N>, N> col;
    for (size_t c = 0; c < N; ++c)
        for (size_t r = 0; r < N; ++r)
            col[c][r] = cx(rng.next_gaussian(), rng.next_gaussian());
    for (size_t c = 0; c < N; ++c) {
        for (size_t p = 0; p < c; ++p) {
            cx dot(0);
            for (size_t r = 0; r < N; ++r) dot += std::conj(col[p][r]) * col[c][r];
            for (size_t r = 0; r < N; ++r) col[c][r] -= dot * col[p][r];
        }
        double n = 0;
        for (size_t r = 0; r < N; ++r) n += std::norm(col[c][r]);
        n = std::sqrt(n);
        for (size_t r = 0; r < N; ++r) col[c][r] /= n;
    }
    std::array<cx, N * N> m;
    for (size_t r = 0; r < N; ++r)
        for (size_t c = 0; c < N; ++c)
            m[r * N + c] = col[c][r];
    return m;
}

} // namespace

Mat2 random_unitary2(Rng& rng) { return gaussian_unitary<2>(rng); }
Mat4 random_unitary4(Rng& rng) { return gaussian_unitary<4>(rng); }

double unitarity_deviation(const Mat4& m) {
    double dev = 0;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            cx e(0);
            for (int k = 0; k < 4; ++k) e += m[r * 4 + k] * std::conj(m[c * 4 + k]);
            if (r == c) e -= cx(1);
            dev = std::max(dev, std::abs(e));
        }
    }
    return dev;
}

StateVector apply_single_qubit(const StateVector& state, const Mat2& u, int qubit_index) {
    const int pos = bit_position(state, qubit_index);
    const size_t mask = size_t{1} << pos;
    std::vector<cx> a(state.amplitudes().begin(), state.amplitudes().end());
    for (size_t i = 0; i < a.size(); ++i) {
        if (i & mask) continue;
        const cx lo = a[i];
        const cx hi = a[i | mask];
        a[i] = u[0] * lo + u[1] * hi;
        a[i | mask] = u[2] * lo + u[3] * hi;
    }
    return StateVector(state.num_qubits(), std::move(a));
}

StateVector apply_pauli(const StateVector& state, PauliCode code, int qubit_index) {
    return apply_single_qubit(state, pauli_matrix(code), qubit_index);
}

StateVector apply_unitary(const StateVector& state, const Mat4& u, int q0, int q1) {
    if (q0 == q1) throw std::invalid_argument("apply_unitary: qubit indices must be distinct");
    const double dev = unitarity_deviation(u);
    if (dev > kAlgebraTol)
        throw std::invalid_argument("apply_unitary: matrix not unitary (deviation " +
                                    std::to_string(dev) + ")");
    const size_t m0 = size_t{1} << bit_position(state, q0);
    const size_t m1 = size_t{1} << bit_position(state, q1);
    std::vector<cx> a(state.amplitudes().begin(), state.amplitudes().end());
    for (size_t i = 0; i < a.size(); ++i) {
        if (i & (m0 | m1)) continue;
        const std::array<size_t, 4> idx = {i, i | m1, i | m0, i | m0 | m1};
        std::array<cx, 4> in;
        for (int s = 0; s < 4; ++s) in[s] = a[idx[s]];
        for (int s = 0; s < 4; ++s) {
            cx acc(0);
            for (int t = 0; t < 4; ++t) acc += u[s * 4 + t] * in[t];
            a[idx[s]] = acc;
        }
    }
    return StateVector(state.num_qubits(), std::move(a));
}

namespace {

std::vector<double> z_distribution(const StateVector& state, int qubit) {
    const size_t mask = size_t{1} << bit_position(state, qubit);
    double p1 = 0;
    for (size_t i = 0; i < state.dim(); ++i)
        if (i & mask) p1 += std::norm(state.amplitude(i));
    return {1.0 - p1, p1};
}

StateVector z_collapse(const StateVector& state, int qubit, int outcome, double prob) {
    const size_t mask = size_t{1} << bit_position(state, qubit);
    const double scale = 1.0 / std::sqrt(prob);
    std::vector<cx> a(state.dim());
    for (size_t i = 0; i < state.dim(); ++i) {
        const bool one = (i & mask) != 0;
        a[i] = (one == (outcome == 1)) ? state.amplitude(i) * scale : cx(0);
    }
    return StateVector(state.num_qubits(), std::move(a));
}

struct BellProjection {
    std::array<double, 4> probs;
    // Overlap coefficients per code, indexed by the configuration of the
    // remaining qubits (packed index).
    std::array<std::vector<cx>, 4> coeffs;
    size_t m0, m1;
};

BellProjection bell_project(const StateVector& state, int q0, int q1) {
    BellProjection bp;
    bp.m0 = size_t{1} << bit_position(state, q0);
    bp.m1 = size_t{1} << bit_position(state, q1);
    const size_t rest = state.dim() / 4;
    for (auto& v : bp.coeffs) v.assign(rest, cx(0));
    bp.probs = {0, 0, 0, 0};
    size_t o = 0;
    for (size_t i = 0; i < state.dim(); ++i) {
        if (i & (bp.m0 | bp.m1)) continue;
        const std::array<size_t, 4> idx = {i, i | bp.m1, i | bp.m0, i | bp.m0 | bp.m1};
        for (int k = 0; k < 4; ++k) {
            cx w(0);
            for (int s = 0; s < 4; ++s) w += kBellBasis[k][s] * state.amplitude(idx[s]);
            bp.coeffs[k][o] = w;
            bp.probs[k] += std::norm(w);
        }
        ++o;
    }
    return bp;
}

StateVector bell_collapse(const StateVector& state, const BellProjection& bp, int code) {
    const double scale = 1.0 / std::sqrt(bp.probs[code]);
    std::vector<cx> a(state.dim(), cx(0));
    size_t o = 0;
    for (size_t i = 0; i < state.dim(); ++i) {
        if (i & (bp.m0 | bp.m1)) continue;
        const std::array<size_t, 4> idx = {i, i | bp.m1, i | bp.m0, i | bp.m0 | bp.m1};
        for (int s = 0; s < 4; ++s)
            a[idx[s]] = kBellBasis[code][s] * bp.coeffs[code][o] * scale;
        ++o;
    }
    return StateVector(state.num_qubits(), std::move(a));
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
    const double u = rng.next_double();
    double acc = 0;
    for (size_t k = 0; k + 1 < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
}

} // namespace

std::vector<double> measurement_distribution(const StateVector& state, BasisKind basis,
                                             std::span<const int> indices) {
    switch (basis) {
    case BasisKind::Z:
        if (indices.size() != 1)
            throw std::invalid_argument("measure: Z basis takes exactly one qubit index");
        return z_distribution(state, indices[0]);
    case BasisKind::X: {
        if (indices.size() != 1)
            throw std::invalid_argument("measure: X basis takes exactly one qubit index");
        return z_distribution(apply_single_qubit(state, kHadamard, indices[0]), indices[0]);
    }
    case BasisKind::Bell: {
        if (indices.size() != 2)
            throw std::invalid_argument("measure: Bell basis takes an ordered pair of indices");
        if (indices[0] == indices[1])
            throw std::invalid_argument("measure: Bell pair indices must be distinct");
        const auto bp = bell_project(state, indices[0], indices[1]);
        return {bp.probs.begin(), bp.probs.end()};
    }
    }
    throw std::logic_error("unreachable");
}

MeasurementOutcome measure(const StateVector& state, BasisKind basis,
                           std::span<const int> indices, Rng& rng) {
    switch (basis) {
    case BasisKind::Z: {
        const auto dist = measurement_distribution(state, basis, indices);
        const int out = sample_categorical(dist, rng);
        return {basis, static_cast<uint8_t>(out), z_collapse(state, indices[0], out, dist[out])};
    }
    case BasisKind::X: {
        // Rotate to Z, collapse, rotate back: outcome 0 is |+>, 1 is |->.
        const StateVector rotated = apply_single_qubit(state, kHadamard, indices[0]);
        const auto dist = z_distribution(rotated, indices[0]);
        const int out = sample_categorical(dist, rng);
        const StateVector collapsed = apply_single_qubit(
            z_collapse(rotated, indices[0], out, dist[out]), kHadamard, indices[0]);
        return {basis, static_cast<uint8_t>(out), collapsed};
    }
    case BasisKind::Bell: {
        measurement_distribution(state, basis, indices); // arity validation
        const auto bp = bell_project(state, indices[0], indices[1]);
        const int code = sample_categorical(bp.probs, rng);
        return {basis, static_cast<uint8_t>(code), bell_collapse(state, bp, code)};
    }
    }
    throw std::logic_error("unreachable");
}

PauliCode compose_codes(PauliCode a, PauliCode b) { return a ^ b; }

EveDecomposition eve_decomposition(const Mat4& u) {
    const double dev = unitarity_deviation(u);
    if (dev > kAlgebraTol)
        throw std::invalid_argument("eve_decomposition: matrix not unitary (deviation " +
                                    std::to_string(dev) + ")");
    // Column b*2+0 is the image of |b>|e0>; row p*2+a indexes |p>|a>.
    EveDecomposition d;
    for (int a = 0; a < 2; ++a) {
        d.e00[a] = u[(0 * 2 + a) * 4 + 0];
        d.e01[a] = u[(1 * 2 + a) * 4 + 0];
        d.e10[a] = u[(0 * 2 + a) * 4 + 2];
        d.e11[a] = u[(1 * 2 + a) * 4 + 2];
    }
    return d;
}

cx overlap(std::span<const cx> a, std::span<const cx> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("overlap: dimension mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    cx acc(0);
    for (size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

cx overlap(const StateVector& a, const StateVector& b) {
    return overlap(a.amplitudes(), b.amplitudes());
}

double norm_sq(std::span<const cx> v) {
    double n = 0;
    for (const cx& a : v) n += std::norm(a);
    return n;
}

bool equal_up_to_phase(const StateVector& a, const StateVector& b, double tol) {
    if (a.dim() != b.dim()) return false;
    return std::abs(overlap(a, b)) >= 1.0 - tol;
}

} // namespace qka
