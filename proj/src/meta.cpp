#include "qmeta/meta.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "qmeta/errors.hpp"
#include "qmeta/estimators.hpp"

namespace qmeta {

namespace {

constexpr double kMaxExpInput = 20.0;

void warn_clamped_once() {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
        std::fprintf(stderr, "warning: LSTM input exponent clamped to [-%g, %g]\n",
                     kMaxExpInput, kMaxExpInput);
    }
}

Eigen::VectorXd episode_costs(const EpisodeRecord& episode) {
    Eigen::VectorXd costs(static_cast<Eigen::Index>(episode.steps.size()));
    for (Eigen::Index t = 0; t < costs.size(); ++t)
        costs[t] = episode.steps[static_cast<std::size_t>(t)].cost;
    return costs;
}

Eigen::VectorXd effective_weights(const MetaConfig& cfg) {
    if (cfg.loss_weights.size() == 0)
        return Eigen::VectorXd::Ones(cfg.unroll_horizon);
    return cfg.loss_weights;
}

}  // namespace

void validate_meta_config(const MetaConfig& cfg) {
    if (cfg.alpha <= 0.0) throw ConfigError("meta: alpha must be positive");
    if (cfg.p <= 0.0) throw ConfigError("meta: input normalizer p must be positive");
    if (cfg.unroll_horizon < 1) throw ConfigError("meta: unroll horizon must be >= 1");
    if (cfg.loss_weights.size() != 0 && cfg.loss_weights.size() != cfg.unroll_horizon)
        throw ConfigError("meta: loss weights must be empty or match the unroll horizon");
    if (cfg.tau0 <= 0.0 || cfg.tau0 > 1.0) throw ConfigError("meta: tau0 must be in (0, 1]");
    if (cfg.zeta < 0.0) throw ConfigError("meta: zeta must be non-negative");
    if (cfg.eps_stop < 0.0) throw ConfigError("meta: eps_stop must be non-negative");
    if (cfg.hidden_size < 1) throw ConfigError("meta: hidden size must be >= 1");
    if (cfg.meta_iterations < 1) throw ConfigError("meta: meta iterations must be >= 1");
    if (cfg.replay_capacity < 1) throw ConfigError("meta: replay capacity must be >= 1");
    if (cfg.phi_lr <= 0.0) throw ConfigError("meta: phi learning rate must be positive");
    if (cfg.phi_spsa_a <= 0.0) throw ConfigError("meta: phi SPSA scale must be positive");
    if (cfg.phi_spsa_gamma <= 0.0) throw ConfigError("meta: phi SPSA decay must be positive");
}

Eigen::VectorXd preprocess_input(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                 double delta_cost, double p) {
    if (p <= 0.0) throw ConfigError("preprocess: normalizer p must be positive");
    Eigen::VectorXd out(theta.size() + 1);
    out.head(theta.size()) = theta;
    out[theta.size()] = delta_cost;
    bool clamped = false;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (out[i] > kMaxExpInput || out[i] < -kMaxExpInput) {
            out[i] = std::clamp(out[i], -kMaxExpInput, kMaxExpInput);
            clamped = true;
        }
        out[i] = std::exp(out[i]) / p;
    }
    if (clamped) warn_clamped_once();
    return out;
}

Eigen::VectorXd apply_update(const Eigen::Ref<const Eigen::VectorXd>& theta,
                             const Eigen::Ref<const Eigen::VectorXd>& omega, double alpha) {
    if (theta.size() != omega.size())
        throw ConfigError("apply_update: parameter and output sizes differ");
    return theta + alpha * omega.array().tanh().matrix();
}

LstmState init_hidden(HiddenInit kind, Eigen::Index hidden_size, Rng& rng) {
    LstmState state = LstmState::zeros(hidden_size);
    switch (kind) {
        case HiddenInit::Zero:
            break;
        case HiddenInit::Uniform01:
            for (Eigen::Index i = 0; i < hidden_size; ++i) state.h[i] = rng.uniform();
            for (Eigen::Index i = 0; i < hidden_size; ++i) state.c[i] = rng.uniform();
            break;
        case HiddenInit::Normal01:
            for (Eigen::Index i = 0; i < hidden_size; ++i) state.h[i] = rng.normal();
            for (Eigen::Index i = 0; i < hidden_size; ++i) state.c[i] = rng.normal();
            break;
    }
    return state;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(ReplayEntry entry) {
    if (!(entry.delta_cost > 0.0))
        throw std::logic_error("replay buffer only stores strictly improving steps");
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(std::move(entry));
}

const ReplayEntry& ReplayBuffer::sample() const {
    if (entries_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
    std::size_t best = 0;
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].delta_cost >= entries_[best].delta_cost) best = i;
    }
    return entries_[best];
}

SeededStart seed_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta_end,
                            const ReplayEntry& entry, double tau) {
    if (theta_end.size() != entry.theta.size())
        throw ConfigError("seed_parameters: parameter sizes differ");
    if (tau <= 0.0 || tau > 1.0) throw ConfigError("seed_parameters: tau must be in (0, 1]");
    SeededStart seeded;
    seeded.theta = tau * theta_end + (1.0 - tau) * entry.theta;
    seeded.state = entry.hidden;
    return seeded;
}

double decay_tau(double tau, double zeta, long global_step) {
    if (tau <= 0.0) throw ConfigError("decay_tau: tau must be positive");
    if (zeta < 0.0) throw ConfigError("decay_tau: zeta must be non-negative");
    if (global_step < 0) throw ConfigError("decay_tau: step must be non-negative");
    return tau / (1.0 + zeta * static_cast<double>(global_step));
}

double meta_loss(const Eigen::Ref<const Eigen::VectorXd>& costs,
                 const Eigen::Ref<const Eigen::VectorXd>& weights) {
    if (costs.size() != weights.size())
        throw ConfigError("meta_loss: cost and weight sizes differ");
    return costs.dot(weights);
}

EpisodeRecord run_meta_iteration(const Objective& objective, const LstmWeights& weights,
                                 Eigen::VectorXd theta, LstmState state,
                                 std::optional<double> prev_cost, const MetaConfig& cfg,
                                 ReplayBuffer* buffer, bool explore, Rng& rng,
                                 const StepHook& hook) {
    validate_meta_config(cfg);
    check_shapes(weights);
    if (weights.output_dim() != theta.size())
        throw ConfigError("meta iteration: LSTM output size must match the parameter count");
    if (weights.input_dim() != theta.size() + 1)
        throw ConfigError("meta iteration: LSTM input size must be parameter count + 1");
    if (state.h.size() != weights.hidden_size())
        throw ConfigError("meta iteration: hidden state size mismatch");

    EpisodeRecord episode;
    episode.theta_start = theta;
    episode.state_start = state;
    episode.prev_cost_start = prev_cost;
    episode.inputs.reserve(static_cast<std::size_t>(cfg.unroll_horizon));
    episode.updates.reserve(static_cast<std::size_t>(cfg.unroll_horizon));
    episode.steps.reserve(static_cast<std::size_t>(cfg.unroll_horizon));

    for (int t = 0; t < cfg.unroll_horizon; ++t) {
        const double cost = objective(theta);
        if (!std::isfinite(cost)) throw NumericError("meta iteration: objective is not finite");
        const double delta = prev_cost ? *prev_cost - cost : 1.0;
        if (buffer != nullptr && prev_cost && delta > 0.0)
            buffer->push(ReplayEntry{theta, cost, delta, state});

        CostPoint point{theta, cost, delta};
        if (hook) hook(point);
        episode.steps.push_back(point);

        Eigen::VectorXd input = preprocess_input(theta, delta, cfg.p);
        LstmOutput out = lstm_forward(weights, input, state);
        Eigen::VectorXd update = cfg.alpha * out.omega.array().tanh().matrix();
        if (explore) {
            for (Eigen::Index i = 0; i < update.size(); ++i) {
                update[i] = std::clamp(update[i] + kReinforceStd * rng.normal(),
                                       -cfg.alpha, cfg.alpha);
            }
        }
        episode.inputs.push_back(std::move(input));
        episode.updates.push_back(update);

        theta += update;
        state = out.state;
        prev_cost = cost;
    }

    episode.theta_end = std::move(theta);
    episode.state_end = std::move(state);
    episode.last_cost = episode.steps.back().cost;
    return episode;
}

namespace {

LstmWeights phi_step(const LstmWeights& weights, const Eigen::VectorXd& grad_flat,
                     const MetaConfig& cfg, PhiTrainer& trainer) {
    if (trainer.adam.step_count == 0) {
        trainer.adam.kind = OptimizerKind::Adam;
        trainer.adam.lr = cfg.phi_lr;
    }
    StepResult result = step(trainer.adam, flatten(weights), grad_flat);
    trainer.adam = std::move(result.state);
    return unflatten(result.theta, weights.input_dim(), weights.hidden_size(),
                     weights.output_dim());
}

LstmWeights update_phi_spsa(const LstmWeights& weights, const EpisodeRecord& episode,
                            const Objective& objective, const MetaConfig& cfg,
                            PhiTrainer& trainer, Rng& rng) {
    const Eigen::VectorXd flat = flatten(weights);
    const double ck =
        spsa_ck(SpsaConfig{cfg.phi_spsa_a, cfg.phi_spsa_gamma}, trainer.update_count);
    Eigen::VectorXd delta(flat.size());
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta[i] = rng.rademacher();

    const Eigen::VectorXd w = effective_weights(cfg);
    Rng scratch = rng.child(static_cast<std::uint64_t>(trainer.update_count));
    auto unroll_loss = [&](const Eigen::VectorXd& flat_shifted) {
        LstmWeights shifted = unflatten(flat_shifted, weights.input_dim(),
                                        weights.hidden_size(), weights.output_dim());
        Rng local = scratch;  // both arms see identical draws
        EpisodeRecord ep = run_meta_iteration(objective, shifted, episode.theta_start,
                                              episode.state_start, episode.prev_cost_start,
                                              cfg, nullptr, false, local);
        return meta_loss(episode_costs(ep), w);
    };
    const double up = unroll_loss(flat + ck * delta);
    const double down = unroll_loss(flat - ck * delta);
    const Eigen::VectorXd grad = ((up - down) / (2.0 * ck)) * delta;
    return phi_step(weights, grad, cfg, trainer);
}

LstmWeights update_phi_reinforce(const LstmWeights& weights, const EpisodeRecord& episode,
                                 const MetaConfig& cfg, PhiTrainer& trainer) {
    const std::size_t horizon = episode.steps.size();
    if (horizon < 2) return weights;  // no action has an observed consequence

    // Action t is credited with the weighted cost it led to at step t + 1;
    // the final action is uncredited. Baseline: mean credited return.
    const Eigen::VectorXd w = effective_weights(cfg);
    std::vector<double> advantages(horizon, 0.0);
    double baseline = 0.0;
    for (std::size_t t = 0; t + 1 < horizon; ++t) {
        advantages[t] = -w[static_cast<Eigen::Index>(t + 1)] * episode.steps[t + 1].cost;
        baseline += advantages[t];
    }
    baseline /= static_cast<double>(horizon - 1);
    for (std::size_t t = 0; t + 1 < horizon; ++t) advantages[t] -= baseline;

    ReinforceGrad rg = reinforce_loss_and_gradient(weights, episode.state_start, episode.inputs,
                                                   episode.updates, advantages, cfg.alpha,
                                                   kReinforceStd);
    return phi_step(weights, flatten(rg.grad), cfg, trainer);
}

}  // namespace

LstmWeights update_phi(const LstmWeights& weights, const EpisodeRecord& episode,
                       const Objective& objective, const MetaConfig& cfg,
                       PhiTrainer& trainer, Rng& rng) {
    if (cfg.phi_train == PhiTrain::Frozen) return weights;
    LstmWeights updated = cfg.phi_train == PhiTrain::SpsaOnPhi
                              ? update_phi_spsa(weights, episode, objective, cfg, trainer, rng)
                              : update_phi_reinforce(weights, episode, cfg, trainer);
    ++trainer.update_count;
    return updated;
}

TrainResult train_meta(const Objective& objective, const Eigen::VectorXd& theta0,
                       const MetaConfig& cfg, Rng& rng, const LstmWeights* initial_weights,
                       LstmWeights* weights_out, const MetaStepHook& hook) {
    validate_meta_config(cfg);
    if (theta0.size() == 0) throw ConfigError("meta training: empty initial parameters");

    const Eigen::Index n = theta0.size();
    LstmWeights weights;
    if (initial_weights != nullptr) {
        check_shapes(*initial_weights);
        if (initial_weights->output_dim() != n || initial_weights->input_dim() != n + 1)
            throw ConfigError("meta training: supplied LSTM weights do not fit the problem");
        weights = *initial_weights;
    } else {
        weights = init_lstm_weights(n + 1, cfg.hidden_size, n, rng);
    }

    ReplayBuffer buffer(static_cast<std::size_t>(cfg.replay_capacity));
    ReplayBuffer* buffer_ptr = cfg.use_replay ? &buffer : nullptr;
    PhiTrainer trainer;
    trainer.adam.kind = OptimizerKind::Adam;
    trainer.adam.lr = cfg.phi_lr;

    TrainResult result;
    result.best_cost = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta = theta0;

    Eigen::VectorXd theta = theta0;
    LstmState state = init_hidden(cfg.h0_init, weights.hidden_size(), rng);
    std::optional<double> prev_cost;
    std::optional<double> prev_mean;
    double tau = cfg.tau0;
    long global_step = 0;
    const bool explore = cfg.phi_train == PhiTrain::Reinforce;

    for (int k = 0; k < cfg.meta_iterations; ++k) {
        auto record = [&](const CostPoint& point) {
            result.trace.push_back(MetaStepTrace{k, point});
            if (point.cost < result.best_cost) {
                result.best_cost = point.cost;
                best_theta = point.theta;
            }
            if (hook) hook(k, point);
        };
        EpisodeRecord episode = run_meta_iteration(objective, weights, theta, state, prev_cost,
                                                   cfg, buffer_ptr, explore, rng, record);
        global_step += cfg.unroll_horizon;
        const double mean_cost = episode_costs(episode).mean();

        weights = update_phi(weights, episode, objective, cfg, trainer, rng);

        theta = episode.theta_end;
        state = episode.state_end;
        prev_cost = episode.last_cost;

        if (prev_mean && std::abs(mean_cost - *prev_mean) <= cfg.eps_stop) {
            result.status = TrainStatus::Converged;
            break;
        }
        if (prev_mean && mean_cost > *prev_mean && buffer_ptr != nullptr && !buffer.empty()) {
            SeededStart seeded = seed_parameters(theta, buffer.sample(), tau);
            theta = std::move(seeded.theta);
            state = std::move(seeded.state);
            tau = decay_tau(tau, cfg.zeta, global_step);
            result.seeded_after_iteration.push_back(k);
        }
        prev_mean = mean_cost;
    }

    result.final_theta = theta;
    result.theta = result.status == TrainStatus::Converged ? theta : best_theta;
    if (weights_out != nullptr) *weights_out = weights;
    return result;
}

}  // namespace qmeta
