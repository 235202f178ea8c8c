#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qmeta/evaluation.hpp"
#include "qmeta/rng.hpp"
#include "qmeta/simulator.hpp"

namespace qmeta {

enum class AnsatzFamily { LayeredRxRy, SpheresRy, StronglyEntangling };

// How the measured qubits reduce to one scalar output.
//   SingleZ:               <Z> on observable[0]
//   ProductZ:              one tensor observable <Z x Z x ... x Z>
//   ProductOfExpectations: product of per-qubit <Z_i> readings
enum class Reduction { SingleZ, ProductZ, ProductOfExpectations };

struct AnsatzSpec {
    AnsatzFamily family = AnsatzFamily::LayeredRxRy;
    int num_qubits = 1;
    int num_layers = 1;
    std::vector<int> observable{0};
    Reduction reduction = Reduction::SingleZ;
};

// Angle-embedding classifier: RX(x_j) per qubit, then num_layers blocks of
// one RY parameter per qubit followed by a CZ ring.
AnsatzSpec build_layered(int num_qubits, int num_layers);

// Three-qubit variant with RY data embedding, used for 3-d point-cloud data.
AnsatzSpec build_spheres(int num_layers = 4);

// No data embedding; per layer each qubit gets an RZ-RY-RZ triple, then CZ on
// every qubit pair. Output is the all-qubit Z product.
AnsatzSpec build_strongly_entangling(int num_qubits = 4, int num_layers = 5);

// Trainable parameter count for the family and size.
int param_count(const AnsatzSpec& spec);

// Full gate list for one input: data embedding first, then parameterized
// layers with their entanglers. theta is consumed layer-major, qubit-minor
// (for the RZ-RY-RZ triple: in application order).
std::vector<GateOp> circuit_gates(const AnsatzSpec& spec,
                                  const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& theta);

// Runs the circuit on |0...0> and reduces to a scalar in [-1, 1].
// Counts as exactly one circuit evaluation.
double forward(const AnsatzSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& theta, const ShotBudget& shots,
               EvalCounter& counter, Rng& rng);

}  // namespace qmeta
