#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "qmeta/lstm.hpp"
#include "qmeta/optimizers.hpp"
#include "qmeta/qnn.hpp"
#include "qmeta/rng.hpp"

namespace qmeta {

enum class HiddenInit { Zero, Uniform01, Normal01 };
enum class PhiTrain { SpsaOnPhi, Reinforce, Frozen };

struct MetaConfig {
    double alpha = 0.1;           // update scale; every step satisfies |dtheta|_inf <= alpha
    double p = 50.0;              // input normalizer: I = exp([theta; dC]) / p
    int unroll_horizon = 10;      // steps per meta-iteration (T)
    Eigen::VectorXd loss_weights; // per-step weights w_t; empty = uniform ones
    double tau0 = 0.9;            // initial blend toward current params when re-seeding
    double zeta = 0.99;           // tau decay rate
    double eps_stop = 1e-4;       // |mean cost change| between iterations to stop
    HiddenInit h0_init = HiddenInit::Normal01;
    int hidden_size = 20;
    PhiTrain phi_train = PhiTrain::SpsaOnPhi;
    int meta_iterations = 5;
    int replay_capacity = 16;
    bool use_replay = true;
    double phi_lr = 1e-3;         // Adam rate for the LSTM weights
    double phi_spsa_a = 0.1;      // perturbation schedule for SpsaOnPhi
    double phi_spsa_gamma = 0.101;
};

void validate_meta_config(const MetaConfig& cfg);

// Gaussian policy std for the Reinforce mechanism. Exploration noise is
// clamped so the alpha bound on updates stays exact.
inline constexpr double kReinforceStd = 0.01;

// exp([theta; delta_cost]) / p with exponent inputs clamped to +-20 (a
// warning is logged once per process when the clamp engages).
Eigen::VectorXd preprocess_input(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                 double delta_cost, double p);

// theta + alpha * tanh(omega); the tanh keeps |update|_inf <= alpha.
Eigen::VectorXd apply_update(const Eigen::Ref<const Eigen::VectorXd>& theta,
                             const Eigen::Ref<const Eigen::VectorXd>& omega, double alpha);

LstmState init_hidden(HiddenInit kind, Eigen::Index hidden_size, Rng& rng);

// Snapshot of a step whose cost improved on its predecessor.
struct ReplayEntry {
    Eigen::VectorXd theta;
    double cost = 0.0;
    double delta_cost = 0.0;  // > 0 by construction
    LstmState hidden;
};

// Bounded FIFO of improving steps. Sampling returns the entry with the
// largest improvement; ties prefer the most recent.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(ReplayEntry entry);
    const ReplayEntry& sample() const;
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }
    const std::deque<ReplayEntry>& entries() const { return entries_; }

  private:
    std::size_t capacity_;
    std::deque<ReplayEntry> entries_;
};

// Blend back toward a sampled good point: tau * theta_end + (1 - tau) * entry
// parameters, adopting the entry's hidden state.
struct SeededStart {
    Eigen::VectorXd theta;
    LstmState state;
};
SeededStart seed_parameters(const Eigen::Ref<const Eigen::VectorXd>& theta_end,
                            const ReplayEntry& entry, double tau);

// tau / (1 + zeta * global_step); applied after each re-seeding event.
double decay_tau(double tau, double zeta, long global_step);

// Weighted sum of per-step costs.
double meta_loss(const Eigen::Ref<const Eigen::VectorXd>& costs,
                 const Eigen::Ref<const Eigen::VectorXd>& weights);

// Everything needed to replay or re-evaluate one unroll.
struct EpisodeRecord {
    Eigen::VectorXd theta_start;
    LstmState state_start;
    std::optional<double> prev_cost_start;
    std::vector<Eigen::VectorXd> inputs;   // LSTM inputs per step
    std::vector<Eigen::VectorXd> updates;  // realized parameter deltas per step
    std::vector<CostPoint> steps;
    Eigen::VectorXd theta_end;
    LstmState state_end;
    double last_cost = 0.0;
};

using StepHook = std::function<void(const CostPoint&)>;

// One unroll of `unroll_horizon` steps. Per step: evaluate the objective,
// form the cost delta (1.0 when no predecessor exists), push to the buffer
// when the cost strictly improved on an actual predecessor, then let the
// LSTM propose the next parameters. `explore` adds the clamped Gaussian
// policy noise used by Reinforce. `buffer` may be null (no recording).
EpisodeRecord run_meta_iteration(const Objective& objective, const LstmWeights& weights,
                                 Eigen::VectorXd theta, LstmState state,
                                 std::optional<double> prev_cost, const MetaConfig& cfg,
                                 ReplayBuffer* buffer, bool explore, Rng& rng,
                                 const StepHook& hook = nullptr);

// Optimizer state threaded through successive LSTM-weight updates.
struct PhiTrainer {
    OptimizerState adam;
    int update_count = 0;
};

// One LSTM-weight update from a finished episode.
//   SpsaOnPhi: two fresh unrolls from the episode's start at weights +- c_k
//     on a Rademacher direction; both consume objective evaluations.
//   Reinforce: score-function gradient from the recorded episode; the
//     objective is never called. Actions are credited with the cost observed
//     at the following step, baseline-subtracted; the final action of the
//     unroll has no observed consequence and gets zero advantage.
//   Frozen: returns the weights unchanged.
LstmWeights update_phi(const LstmWeights& weights, const EpisodeRecord& episode,
                       const Objective& objective, const MetaConfig& cfg,
                       PhiTrainer& trainer, Rng& rng);

enum class TrainStatus { Converged, MaxIterations };

struct MetaStepTrace {
    int meta_iter = 0;
    CostPoint point;
};

struct TrainResult {
    Eigen::VectorXd theta;        // best-so-far on MaxIterations, final on convergence
    Eigen::VectorXd final_theta;
    double best_cost = 0.0;
    TrainStatus status = TrainStatus::MaxIterations;
    std::vector<MetaStepTrace> trace;
    std::vector<int> seeded_after_iteration;  // iterations followed by a re-seed
};

using MetaStepHook = std::function<void(int meta_iter, const CostPoint&)>;

// Full meta-optimization: up to `meta_iterations` unrolls with LSTM-weight
// updates between them; stops early when the mean cost of consecutive
// iterations changes by at most eps_stop. A divergent iteration (mean cost
// above the previous iteration's) re-seeds from the replay buffer with the
// decaying tau blend.
TrainResult train_meta(const Objective& objective, const Eigen::VectorXd& theta0,
                       const MetaConfig& cfg, Rng& rng,
                       const LstmWeights* initial_weights = nullptr,
                       LstmWeights* weights_out = nullptr,
                       const MetaStepHook& hook = nullptr);

}  // namespace qmeta
