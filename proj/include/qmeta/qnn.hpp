#pragma once

#include <Eigen/Dense>
#include <functional>

#include "qmeta/ansatz.hpp"
#include "qmeta/datasets.hpp"
#include "qmeta/evaluation.hpp"

namespace qmeta {

// One visited point of an optimization trajectory. delta_cost is
// previous cost minus this cost when a predecessor exists, else 1.0.
struct CostPoint {
    Eigen::VectorXd theta;
    double cost = 0.0;
    double delta_cost = 1.0;
};

// Per-point circuit outputs f(x_i; theta). Counts m circuit evaluations.
Eigen::VectorXd predictions(const AnsatzSpec& spec, const LabeledDataset& data,
                            const Eigen::Ref<const Eigen::VectorXd>& theta,
                            const ShotBudget& shots, EvalCounter& counter, Rng& rng);

// Mean squared error against the +-1 labels; free of circuit evaluations.
double cost_from_predictions(const LabeledDataset& data,
                             const Eigen::Ref<const Eigen::VectorXd>& preds);

// Full-batch cost C(theta) = (1/m) sum_i (y_i - f(x_i; theta))^2.
// Counts m circuit evaluations.
double cost(const AnsatzSpec& spec, const LabeledDataset& data,
            const Eigen::Ref<const Eigen::VectorXd>& theta, const ShotBudget& shots,
            EvalCounter& counter, Rng& rng);

// Gradient-free progress signal: previous cost minus current cost.
double pseudo_gradient(double previous_cost, double current_cost);

// Black-box objective abstraction shared by the optimizers; evaluation
// accounting lives inside the closure.
using Objective = std::function<double(const Eigen::VectorXd&)>;

// Binds cost() over a dataset. The references must outlive the closure.
Objective make_mse_objective(const AnsatzSpec& spec, const LabeledDataset& data,
                             const ShotBudget& shots, EvalCounter& counter, Rng& rng);

// Objective for dataset-free runs: the raw reduced observable, one circuit
// evaluation per call.
Objective make_observable_objective(const AnsatzSpec& spec, const ShotBudget& shots,
                                    EvalCounter& counter, Rng& rng);

}  // namespace qmeta
