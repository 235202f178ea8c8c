#include "qmeta/ansatz.hpp"

#include <string>

#include "qmeta/errors.hpp"

namespace qmeta {

namespace {

std::vector<int> all_qubits(int num_qubits) {
    std::vector<int> qs(num_qubits);
    for (int j = 0; j < num_qubits; ++j) qs[j] = j;
    return qs;
}

// Nearest-neighbour CZ ring (i, i+1 mod q). One qubit has no entangler;
// two qubits degenerate to the single pair (0, 1).
void append_ring(std::vector<GateOp>& ops, int num_qubits) {
    if (num_qubits < 2) return;
    if (num_qubits == 2) {
        ops.push_back(GateOp::cz(0, 1));
        return;
    }
    for (int j = 0; j < num_qubits; ++j) ops.push_back(GateOp::cz(j, (j + 1) % num_qubits));
}

void check_sizes(const AnsatzSpec& spec, Eigen::Index x_size, Eigen::Index theta_size) {
    const bool embeds = spec.family != AnsatzFamily::StronglyEntangling;
    if (embeds && x_size != spec.num_qubits) {
        throw ConfigError("input dimension " + std::to_string(x_size) +
                          " must equal qubit count " + std::to_string(spec.num_qubits));
    }
    if (!embeds && x_size != 0) {
        throw ConfigError("this ansatz takes no data input");
    }
    if (theta_size != param_count(spec)) {
        throw ConfigError("theta has " + std::to_string(theta_size) + " entries, expected " +
                          std::to_string(param_count(spec)));
    }
}

}  // namespace

AnsatzSpec build_layered(int num_qubits, int num_layers) {
    if (num_qubits < 1) throw ConfigError("layered ansatz needs at least one qubit");
    if (num_layers < 1) throw ConfigError("layer count must be >= 1");
    AnsatzSpec spec;
    spec.family = AnsatzFamily::LayeredRxRy;
    spec.num_qubits = num_qubits;
    spec.num_layers = num_layers;
    spec.observable = {0};
    spec.reduction = Reduction::SingleZ;
    return spec;
}

AnsatzSpec build_spheres(int num_layers) {
    if (num_layers < 1) throw ConfigError("layer count must be >= 1");
    AnsatzSpec spec;
    spec.family = AnsatzFamily::SpheresRy;
    spec.num_qubits = 3;
    spec.num_layers = num_layers;
    spec.observable = {0};
    spec.reduction = Reduction::SingleZ;
    return spec;
}

AnsatzSpec build_strongly_entangling(int num_qubits, int num_layers) {
    if (num_qubits < 2) throw ConfigError("strongly entangling ansatz needs >= 2 qubits");
    if (num_layers < 1) throw ConfigError("layer count must be >= 1");
    AnsatzSpec spec;
    spec.family = AnsatzFamily::StronglyEntangling;
    spec.num_qubits = num_qubits;
    spec.num_layers = num_layers;
    spec.observable = all_qubits(num_qubits);
    spec.reduction = Reduction::ProductZ;
    return spec;
}

int param_count(const AnsatzSpec& spec) {
    const int per_layer = (spec.family == AnsatzFamily::StronglyEntangling)
                              ? 3 * spec.num_qubits
                              : spec.num_qubits;
    return spec.num_layers * per_layer;
}

std::vector<GateOp> circuit_gates(const AnsatzSpec& spec,
                                  const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& theta) {
    check_sizes(spec, x.size(), theta.size());
    const int q = spec.num_qubits;
    std::vector<GateOp> ops;
    int p = 0;
    switch (spec.family) {
        case AnsatzFamily::LayeredRxRy:
            for (int j = 0; j < q; ++j) ops.push_back(GateOp::rx(j, x[j]));
            for (int layer = 0; layer < spec.num_layers; ++layer) {
                for (int j = 0; j < q; ++j) ops.push_back(GateOp::ry(j, theta[p++]));
                append_ring(ops, q);
            }
            break;
        case AnsatzFamily::SpheresRy:
            for (int j = 0; j < q; ++j) ops.push_back(GateOp::ry(j, x[j]));
            for (int layer = 0; layer < spec.num_layers; ++layer) {
                for (int j = 0; j < q; ++j) ops.push_back(GateOp::ry(j, theta[p++]));
                append_ring(ops, q);
            }
            break;
        case AnsatzFamily::StronglyEntangling:
            for (int layer = 0; layer < spec.num_layers; ++layer) {
                for (int j = 0; j < q; ++j) {
                    ops.push_back(GateOp::rz(j, theta[p++]));
                    ops.push_back(GateOp::ry(j, theta[p++]));
                    ops.push_back(GateOp::rz(j, theta[p++]));
                }
                for (int a = 0; a < q; ++a)
                    for (int b = a + 1; b < q; ++b) ops.push_back(GateOp::cz(a, b));
            }
            break;
    }
    return ops;
}

double forward(const AnsatzSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& theta, const ShotBudget& shots,
               EvalCounter& counter, Rng& rng) {
    Statevector state = zero_state(spec.num_qubits);
    apply_circuit_in_place(state, circuit_gates(spec, x, theta));
    counter.add(1);

    auto read = [&](const std::vector<int>& qubits) {
        return shots.is_exact() ? expectation_z(state, qubits)
                                : sample_expectation_z(state, qubits, shots.shots, rng);
    };

    switch (spec.reduction) {
        case Reduction::SingleZ:
            if (spec.observable.size() != 1)
                throw ConfigError("SingleZ reduction expects one observable qubit");
            return read(spec.observable);
        case Reduction::ProductZ:
            return read(spec.observable);
        case Reduction::ProductOfExpectations: {
            double product = 1.0;
            for (int qubit : spec.observable) product *= read({qubit});
            return product;
        }
    }
    throw ConfigError("unknown reduction");
}

}  // namespace qmeta
