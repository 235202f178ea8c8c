#include "qmeta/qnn.hpp"

#include <cmath>

#include "qmeta/errors.hpp"

namespace qmeta {

Eigen::VectorXd predictions(const AnsatzSpec& spec, const LabeledDataset& data,
                            const Eigen::Ref<const Eigen::VectorXd>& theta,
                            const ShotBudget& shots, EvalCounter& counter, Rng& rng) {
    if (data.size() == 0) throw ConfigError("dataset is empty");
    Eigen::VectorXd preds(data.size());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        preds[i] = forward(spec, data.points.row(i).transpose(), theta, shots, counter, rng);
    }
    return preds;
}

double cost_from_predictions(const LabeledDataset& data,
                             const Eigen::Ref<const Eigen::VectorXd>& preds) {
    if (preds.size() != data.size()) throw ConfigError("prediction count != dataset size");
    return (data.labels - preds).squaredNorm() / static_cast<double>(data.size());
}

double cost(const AnsatzSpec& spec, const LabeledDataset& data,
            const Eigen::Ref<const Eigen::VectorXd>& theta, const ShotBudget& shots,
            EvalCounter& counter, Rng& rng) {
    return cost_from_predictions(data, predictions(spec, data, theta, shots, counter, rng));
}

double pseudo_gradient(double previous_cost, double current_cost) {
    return previous_cost - current_cost;
}

Objective make_mse_objective(const AnsatzSpec& spec, const LabeledDataset& data,
                             const ShotBudget& shots, EvalCounter& counter, Rng& rng) {
    return [&spec, &data, shots, &counter, &rng](const Eigen::VectorXd& theta) {
        const double value = cost(spec, data, theta, shots, counter, rng);
        if (!std::isfinite(value)) throw NumericError("cost is not finite");
        return value;
    };
}

Objective make_observable_objective(const AnsatzSpec& spec, const ShotBudget& shots,
                                    EvalCounter& counter, Rng& rng) {
    return [&spec, shots, &counter, &rng](const Eigen::VectorXd& theta) {
        const double value =
            forward(spec, Eigen::VectorXd(0), theta, shots, counter, rng);
        if (!std::isfinite(value)) throw NumericError("observable is not finite");
        return value;
    };
}

}  // namespace qmeta
