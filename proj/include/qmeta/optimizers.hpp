#pragma once

#include <Eigen/Dense>

namespace qmeta {

enum class OptimizerKind { Sgd, Adam, RmsProp };

// First/second-moment state for the gradient baselines. Moment vectors are
// sized lazily on the first step.
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double decay = 0.9;  // RMSProp second-moment smoothing
    double epsilon = 1e-8;
    long step_count = 0;
    Eigen::VectorXd m;  // first moment (Adam)
    Eigen::VectorXd v;  // second moment (Adam, RMSProp)
};

struct StepResult {
    Eigen::VectorXd theta;
    OptimizerState state;
};

// One update; pure in (state, theta, grad). Throws NumericError on
// non-finite gradients.
StepResult step(OptimizerState state, const Eigen::Ref<const Eigen::VectorXd>& theta,
                const Eigen::Ref<const Eigen::VectorXd>& grad);

}  // namespace qmeta
