#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qmeta/rng.hpp"

namespace qmeta {

// Single-layer LSTM with an affine output head. Gate matrices act on the
// concatenation [x; h] with x of size input_dim and h of size hidden_size;
// the head maps h to output_dim values.
struct LstmWeights {
    Eigen::MatrixXd w_i, w_f, w_g, w_o;  // hidden_size x (input_dim + hidden_size)
    Eigen::VectorXd b_i, b_f, b_g, b_o;  // hidden_size
    Eigen::MatrixXd w_out;               // output_dim x hidden_size
    Eigen::VectorXd b_out;               // output_dim

    Eigen::Index input_dim() const { return w_i.cols() - w_i.rows(); }
    Eigen::Index hidden_size() const { return w_i.rows(); }
    Eigen::Index output_dim() const { return w_out.rows(); }

    static LstmWeights zeros(Eigen::Index input_dim, Eigen::Index hidden_size,
                             Eigen::Index output_dim);
};

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;

    static LstmState zeros(Eigen::Index hidden_size) {
        return {Eigen::VectorXd::Zero(hidden_size), Eigen::VectorXd::Zero(hidden_size)};
    }
};

// Weights ~ N(0, 0.1^2), zero biases except the forget-gate bias at +1 so
// early training keeps cell memory.
LstmWeights init_lstm_weights(Eigen::Index input_dim, Eigen::Index hidden_size,
                              Eigen::Index output_dim, Rng& rng);

// Throws ConfigError if any block disagrees on dimensions.
void check_shapes(const LstmWeights& w);

struct LstmOutput {
    Eigen::VectorXd omega;
    LstmState state;
};

// i = sig(W_i z + b_i), f = sig(...), g = tanh(...), o = sig(...)
// c' = f . c + i . g,  h' = o . tanh(c'),  omega = W_out h' + b_out
LstmOutput lstm_forward(const LstmWeights& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const LstmState& state);

// Flat parameter vector in block order W_i, W_f, W_g, W_o (row-major),
// b_i, b_f, b_g, b_o, W_out (row-major), b_out.
Eigen::VectorXd flatten(const LstmWeights& w);
LstmWeights unflatten(const Eigen::Ref<const Eigen::VectorXd>& values,
                      Eigen::Index input_dim, Eigen::Index hidden_size,
                      Eigen::Index output_dim);

// JSON checkpoint: {"input_dim", "hidden_size", "output_dim", "values"} with
// values in flatten() order.
void save_checkpoint(const LstmWeights& w, const std::string& path);
LstmWeights load_checkpoint(const std::string& path);

struct ReinforceGrad {
    double loss = 0.0;
    LstmWeights grad;
};

// Score-function loss for a recorded unroll. Each step's realized update u_t
// is scored against a Gaussian policy with mean alpha * tanh(omega_t) and
// fixed std sigma:
//   loss = -sum_t advantage_t * log N(u_t | mean_t, sigma^2 I)
// The gradient is exact backpropagation through the LSTM and head over the
// whole sequence; inputs, updates, and advantages are treated as constants.
ReinforceGrad reinforce_loss_and_gradient(const LstmWeights& w, const LstmState& s0,
                                          const std::vector<Eigen::VectorXd>& inputs,
                                          const std::vector<Eigen::VectorXd>& updates,
                                          const std::vector<double>& advantages,
                                          double alpha, double sigma);

}  // namespace qmeta
