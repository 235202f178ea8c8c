#include "qmeta/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "qmeta/errors.hpp"

namespace qmeta {

namespace {

constexpr int kMaxQubits = 20;

void check_qubit(const Statevector& state, int qubit, const char* role) {
    if (qubit < 0 || qubit >= state.num_qubits) {
        throw ConfigError(std::string("gate ") + role + " qubit " + std::to_string(qubit) +
                          " out of range for " + std::to_string(state.num_qubits) + " qubits");
    }
}

// Applies a 2x2 matrix [[a, b], [c, d]] to the target qubit. Indices are
// enumerated so that i0 has the target bit clear and i1 = i0 | bit.
void apply_single_qubit(Eigen::VectorXcd& amps, int target, std::complex<double> a,
                        std::complex<double> b, std::complex<double> c,
                        std::complex<double> d) {
    const Eigen::Index bit = Eigen::Index(1) << target;
    const Eigen::Index low_mask = bit - 1;
    const Eigen::Index pairs = amps.size() / 2;
    for (Eigen::Index k = 0; k < pairs; ++k) {
        const Eigen::Index i0 = ((k & ~low_mask) << 1) | (k & low_mask);
        const Eigen::Index i1 = i0 | bit;
        const std::complex<double> v0 = amps[i0];
        const std::complex<double> v1 = amps[i1];
        amps[i0] = a * v0 + b * v1;
        amps[i1] = c * v0 + d * v1;
    }
}

}  // namespace

Statevector zero_state(int num_qubits) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
        throw ConfigError("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                          "], got " + std::to_string(num_qubits));
    }
    Statevector state;
    state.num_qubits = num_qubits;
    state.amplitudes = Eigen::VectorXcd::Zero(Eigen::Index(1) << num_qubits);
    state.amplitudes[0] = 1.0;
    return state;
}

void apply_gate_in_place(Statevector& state, const GateOp& op) {
    check_qubit(state, op.target, "target");
    const double half = 0.5 * op.angle;
    const std::complex<double> i(0.0, 1.0);
    switch (op.kind) {
        case GateKind::Rx:
            apply_single_qubit(state.amplitudes, op.target, std::cos(half),
                               -i * std::sin(half), -i * std::sin(half), std::cos(half));
            break;
        case GateKind::Ry:
            apply_single_qubit(state.amplitudes, op.target, std::cos(half), -std::sin(half),
                               std::sin(half), std::cos(half));
            break;
        case GateKind::Rz:
            apply_single_qubit(state.amplitudes, op.target, std::exp(-i * half), 0.0, 0.0,
                               std::exp(i * half));
            break;
        case GateKind::Cz: {
            check_qubit(state, op.control, "control");
            if (op.control == op.target) {
                throw ConfigError("cz control and target must differ");
            }
            const Eigen::Index mask =
                (Eigen::Index(1) << op.target) | (Eigen::Index(1) << op.control);
            for (Eigen::Index idx = 0; idx < state.amplitudes.size(); ++idx) {
                if ((idx & mask) == mask) state.amplitudes[idx] = -state.amplitudes[idx];
            }
            break;
        }
    }
}

Statevector apply_gate(const Statevector& state, const GateOp& op) {
    Statevector next = state;
    apply_gate_in_place(next, op);
    return next;
}

void apply_circuit_in_place(Statevector& state, const std::vector<GateOp>& ops) {
    for (const GateOp& op : ops) apply_gate_in_place(state, op);
}

double expectation_z(const Statevector& state, const std::vector<int>& qubits) {
    if (qubits.empty()) throw ConfigError("expectation_z needs at least one qubit");
    Eigen::Index mask = 0;
    for (int q : qubits) {
        check_qubit(state, q, "observable");
        const Eigen::Index bit = Eigen::Index(1) << q;
        if (mask & bit) throw ConfigError("expectation_z qubits must be distinct");
        mask |= bit;
    }
    double value = 0.0;
    for (Eigen::Index idx = 0; idx < state.amplitudes.size(); ++idx) {
        const double prob = std::norm(state.amplitudes[idx]);
        const int parity = std::popcount(static_cast<std::uint64_t>(idx & mask)) & 1;
        value += parity ? -prob : prob;
    }
    return value;
}

double sample_expectation_z(const Statevector& state, const std::vector<int>& qubits,
                            int shots, Rng& rng) {
    if (shots < 1) throw ConfigError("shot count must be >= 1");
    const double exact = expectation_z(state, qubits);
    const double p_up = std::clamp(0.5 * (1.0 + exact), 0.0, 1.0);
    long long ups = 0;
    for (int s = 0; s < shots; ++s) {
        if (rng.bernoulli(p_up)) ++ups;
    }
    return 2.0 * static_cast<double>(ups) / static_cast<double>(shots) - 1.0;
}

}  // namespace qmeta
