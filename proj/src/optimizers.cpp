#include "qmeta/optimizers.hpp"

#include <cmath>

#include "qmeta/errors.hpp"

namespace qmeta {

StepResult step(OptimizerState state, const Eigen::Ref<const Eigen::VectorXd>& theta,
                const Eigen::Ref<const Eigen::VectorXd>& grad) {
    if (state.lr <= 0.0) throw ConfigError("learning rate must be > 0");
    if (grad.size() != theta.size()) throw ConfigError("gradient size != theta size");
    if (!grad.allFinite()) throw NumericError("gradient is not finite");

    if (state.m.size() != theta.size()) state.m = Eigen::VectorXd::Zero(theta.size());
    if (state.v.size() != theta.size()) state.v = Eigen::VectorXd::Zero(theta.size());
    ++state.step_count;

    StepResult out;
    switch (state.kind) {
        case OptimizerKind::Sgd:
            out.theta = theta - state.lr * grad;
            break;
        case OptimizerKind::Adam: {
            state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
            state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
            const double bc1 = 1.0 - std::pow(state.beta1, double(state.step_count));
            const double bc2 = 1.0 - std::pow(state.beta2, double(state.step_count));
            const Eigen::VectorXd m_hat = state.m / bc1;
            const Eigen::VectorXd v_hat = state.v / bc2;
            out.theta = theta.array() -
                        state.lr * m_hat.array() / (v_hat.array().sqrt() + state.epsilon);
            break;
        }
        case OptimizerKind::RmsProp:
            state.v = state.decay * state.v + (1.0 - state.decay) * grad.cwiseProduct(grad);
            out.theta = theta.array() -
                        state.lr * grad.array() / (state.v.array().sqrt() + state.epsilon);
            break;
    }
    out.state = std::move(state);
    return out;
}

}  // namespace qmeta
