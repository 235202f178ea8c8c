#pragma once

#include <Eigen/Dense>

#include "qmeta/qnn.hpp"

namespace qmeta {

// Exact two-point rule for half-angle rotation gates:
// df/dtheta_i = coeff * (f(theta_i + shift) - f(theta_i - shift)).
struct ShiftRule {
    double coeff = 0.5;
    double shift = M_PI / 2.0;
};

// Exact MSE gradient. The rule is applied to each per-point circuit output
// and chained through the squared error:
//   dC/dtheta_i = (1/m) sum_j 2 (f_j - y_j) * coeff * (f_j(+shift) - f_j(-shift)).
// preds_at_theta are the unshifted outputs (from the cost evaluation the
// caller already paid for), so this adds exactly 2 * N * m evaluations.
Eigen::VectorXd parameter_shift_gradient(const AnsatzSpec& spec, const LabeledDataset& data,
                                         const Eigen::Ref<const Eigen::VectorXd>& theta,
                                         const Eigen::Ref<const Eigen::VectorXd>& preds_at_theta,
                                         const ShiftRule& rule, const ShotBudget& shots,
                                         EvalCounter& counter, Rng& rng);

// Same rule applied directly to a scalar objective (dataset-free runs).
// Adds 2 * N objective evaluations.
Eigen::VectorXd parameter_shift_gradient(const Objective& objective,
                                         const Eigen::Ref<const Eigen::VectorXd>& theta,
                                         const ShiftRule& rule);

// Simultaneous-perturbation schedule: c_k = a / (k + 1)^gamma.
struct SpsaConfig {
    double a = 0.1;
    double gamma = 0.101;
};

double spsa_ck(const SpsaConfig& cfg, int step);

struct SpsaEstimate {
    Eigen::VectorXd gradient;
    double cost_at_theta = 0.0;  // nominal evaluation, logged by optimizer loops
};

// Three objective evaluations: theta +- c_k * delta with one Rademacher draw
// per component, plus the nominal point.
//   estimate_i = [C(theta + c_k delta) - C(theta - c_k delta)] / (2 c_k delta_i)
SpsaEstimate spsa_gradient(const Objective& objective,
                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                           const SpsaConfig& cfg, int step, Rng& rng);

// Deterministic variant used by tests and the meta-level perturbation: the
// caller supplies the sign vector.
SpsaEstimate spsa_gradient_with_delta(const Objective& objective,
                                      const Eigen::Ref<const Eigen::VectorXd>& theta,
                                      const Eigen::Ref<const Eigen::VectorXd>& delta,
                                      double ck, bool eval_nominal = true);

}  // namespace qmeta
