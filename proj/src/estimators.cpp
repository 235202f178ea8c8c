#include "qmeta/estimators.hpp"

#include <cmath>

#include "qmeta/errors.hpp"

namespace qmeta {

Eigen::VectorXd parameter_shift_gradient(const AnsatzSpec& spec, const LabeledDataset& data,
                                         const Eigen::Ref<const Eigen::VectorXd>& theta,
                                         const Eigen::Ref<const Eigen::VectorXd>& preds_at_theta,
                                         const ShiftRule& rule, const ShotBudget& shots,
                                         EvalCounter& counter, Rng& rng) {
    if (rule.shift == 0.0) throw ConfigError("shift rule offset must be nonzero");
    if (preds_at_theta.size() != data.size()) {
        throw ConfigError("preds_at_theta size != dataset size");
    }
    const Eigen::Index n = theta.size();
    const double m = static_cast<double>(data.size());
    // residuals_j = 2 (f_j - y_j) / m, constant across components
    const Eigen::VectorXd residuals = 2.0 * (preds_at_theta - data.labels) / m;

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd shifted = theta;
    for (Eigen::Index i = 0; i < n; ++i) {
        shifted[i] = theta[i] + rule.shift;
        const Eigen::VectorXd up = predictions(spec, data, shifted, shots, counter, rng);
        shifted[i] = theta[i] - rule.shift;
        const Eigen::VectorXd down = predictions(spec, data, shifted, shots, counter, rng);
        shifted[i] = theta[i];
        grad[i] = residuals.dot(rule.coeff * (up - down));
    }
    return grad;
}

Eigen::VectorXd parameter_shift_gradient(const Objective& objective,
                                         const Eigen::Ref<const Eigen::VectorXd>& theta,
                                         const ShiftRule& rule) {
    if (rule.shift == 0.0) throw ConfigError("shift rule offset must be nonzero");
    Eigen::VectorXd grad(theta.size());
    Eigen::VectorXd shifted = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        shifted[i] = theta[i] + rule.shift;
        const double up = objective(shifted);
        shifted[i] = theta[i] - rule.shift;
        const double down = objective(shifted);
        shifted[i] = theta[i];
        grad[i] = rule.coeff * (up - down);
    }
    return grad;
}

double spsa_ck(const SpsaConfig& cfg, int step) {
    if (cfg.a <= 0.0) throw ConfigError("spsa perturbation scale a must be > 0");
    if (step < 0) throw ConfigError("spsa step index must be >= 0");
    return cfg.a / std::pow(static_cast<double>(step) + 1.0, cfg.gamma);
}

SpsaEstimate spsa_gradient(const Objective& objective,
                           const Eigen::Ref<const Eigen::VectorXd>& theta,
                           const SpsaConfig& cfg, int step, Rng& rng) {
    Eigen::VectorXd delta(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) delta[i] = rng.rademacher();
    return spsa_gradient_with_delta(objective, theta, delta, spsa_ck(cfg, step));
}

SpsaEstimate spsa_gradient_with_delta(const Objective& objective,
                                      const Eigen::Ref<const Eigen::VectorXd>& theta,
                                      const Eigen::Ref<const Eigen::VectorXd>& delta,
                                      double ck, bool eval_nominal) {
    if (ck <= 0.0) throw ConfigError("spsa perturbation size must be > 0");
    if (delta.size() != theta.size()) throw ConfigError("delta size != theta size");
    const double up = objective(theta + ck * delta);
    const double down = objective(theta - ck * delta);
    SpsaEstimate est;
    // delta_i is +-1, so dividing by delta_i equals multiplying by it.
    est.gradient = (up - down) / (2.0 * ck) * delta;
    est.cost_at_theta = eval_nominal ? objective(theta) : 0.0;
    return est;
}

}  // namespace qmeta
