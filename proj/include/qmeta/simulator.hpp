#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qmeta/rng.hpp"

namespace qmeta {

// Dense statevector over `num_qubits` qubits. amplitudes.size() == 2^num_qubits.
// Basis index convention: qubit j is bit j of the basis index (qubit 0 is the
// least significant bit).
struct Statevector {
    int num_qubits = 0;
    Eigen::VectorXcd amplitudes;
};

enum class GateKind { Rx, Ry, Rz, Cz };

// One gate in a circuit. Rotations use the half-angle convention
// R(phi) = exp(-i * phi * sigma / 2); Cz = diag(1, 1, 1, -1).
struct GateOp {
    GateKind kind = GateKind::Rx;
    int target = 0;
    int control = -1;  // Cz only; -1 for single-qubit gates
    double angle = 0.0;

    static GateOp rx(int target, double angle) { return {GateKind::Rx, target, -1, angle}; }
    static GateOp ry(int target, double angle) { return {GateKind::Ry, target, -1, angle}; }
    static GateOp rz(int target, double angle) { return {GateKind::Rz, target, -1, angle}; }
    static GateOp cz(int control, int target) { return {GateKind::Cz, target, control, 0.0}; }
};

// |0...0> over num_qubits in [1, 20].
Statevector zero_state(int num_qubits);

// Strided in-place pair update; never materializes a 2^q x 2^q matrix.
void apply_gate_in_place(Statevector& state, const GateOp& op);

// Pure form of the same update.
Statevector apply_gate(const Statevector& state, const GateOp& op);

void apply_circuit_in_place(Statevector& state, const std::vector<GateOp>& ops);

// <psi| Z_{q1} x Z_{q2} x ... |psi> for a non-empty list of distinct qubits.
double expectation_z(const Statevector& state, const std::vector<int>& qubits);

// Finite-shot estimate of the same expectation: each shot is +1 with
// probability (1 + <Z...Z>)/2, and the estimate is the mean of the +-1 draws.
double sample_expectation_z(const Statevector& state, const std::vector<int>& qubits,
                            int shots, Rng& rng);

}  // namespace qmeta
