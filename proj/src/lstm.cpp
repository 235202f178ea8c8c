#include "qmeta/lstm.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "qmeta/errors.hpp"

namespace qmeta {

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
    return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

Eigen::MatrixXd randn(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = stddev * rng.normal();
    return m;
}

// Forward intermediates kept for backpropagation.
struct StepCache {
    Eigen::VectorXd z, i, f, g, o, c_prev, c, tanh_c, omega, h;
};

StepCache forward_cached(const LstmWeights& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const LstmState& state) {
    StepCache cache;
    cache.z.resize(x.size() + state.h.size());
    cache.z << x, state.h;
    cache.i = sigmoid(w.w_i * cache.z + w.b_i);
    cache.f = sigmoid(w.w_f * cache.z + w.b_f);
    cache.g = (w.w_g * cache.z + w.b_g).array().tanh();
    cache.o = sigmoid(w.w_o * cache.z + w.b_o);
    cache.c_prev = state.c;
    cache.c = cache.f.cwiseProduct(state.c) + cache.i.cwiseProduct(cache.g);
    cache.tanh_c = cache.c.array().tanh();
    cache.h = cache.o.cwiseProduct(cache.tanh_c);
    cache.omega = w.w_out * cache.h + w.b_out;
    return cache;
}

void flatten_block(const Eigen::MatrixXd& m, Eigen::VectorXd& out, Eigen::Index& at) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out[at++] = m(r, c);
}

void unflatten_block(const Eigen::Ref<const Eigen::VectorXd>& values, Eigen::MatrixXd& m,
                     Eigen::Index& at) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = values[at++];
}

}  // namespace

LstmWeights LstmWeights::zeros(Eigen::Index input_dim, Eigen::Index hidden_size,
                               Eigen::Index output_dim) {
    LstmWeights w;
    const Eigen::Index cols = input_dim + hidden_size;
    w.w_i = Eigen::MatrixXd::Zero(hidden_size, cols);
    w.w_f = Eigen::MatrixXd::Zero(hidden_size, cols);
    w.w_g = Eigen::MatrixXd::Zero(hidden_size, cols);
    w.w_o = Eigen::MatrixXd::Zero(hidden_size, cols);
    w.b_i = Eigen::VectorXd::Zero(hidden_size);
    w.b_f = Eigen::VectorXd::Zero(hidden_size);
    w.b_g = Eigen::VectorXd::Zero(hidden_size);
    w.b_o = Eigen::VectorXd::Zero(hidden_size);
    w.w_out = Eigen::MatrixXd::Zero(output_dim, hidden_size);
    w.b_out = Eigen::VectorXd::Zero(output_dim);
    return w;
}

LstmWeights init_lstm_weights(Eigen::Index input_dim, Eigen::Index hidden_size,
                              Eigen::Index output_dim, Rng& rng) {
    if (input_dim < 1 || hidden_size < 1 || output_dim < 1) {
        throw ConfigError("lstm dimensions must be >= 1");
    }
    LstmWeights w = LstmWeights::zeros(input_dim, hidden_size, output_dim);
    const double stddev = 0.1;
    w.w_i = randn(hidden_size, input_dim + hidden_size, stddev, rng);
    w.w_f = randn(hidden_size, input_dim + hidden_size, stddev, rng);
    w.w_g = randn(hidden_size, input_dim + hidden_size, stddev, rng);
    w.w_o = randn(hidden_size, input_dim + hidden_size, stddev, rng);
    w.w_out = randn(output_dim, hidden_size, stddev, rng);
    w.b_f.setOnes();
    return w;
}

void check_shapes(const LstmWeights& w) {
    const Eigen::Index h = w.w_i.rows();
    const Eigen::Index cols = w.w_i.cols();
    if (h < 1 || cols <= h) throw ConfigError("lstm gate matrix shape is invalid");
    for (const auto* m : {&w.w_f, &w.w_g, &w.w_o}) {
        if (m->rows() != h || m->cols() != cols)
            throw ConfigError("lstm gate matrices disagree on shape");
    }
    for (const auto* b : {&w.b_i, &w.b_f, &w.b_g, &w.b_o}) {
        if (b->size() != h) throw ConfigError("lstm bias size != hidden size");
    }
    if (w.w_out.cols() != h) throw ConfigError("output head width != hidden size");
    if (w.b_out.size() != w.w_out.rows()) throw ConfigError("output bias size mismatch");
}

LstmOutput lstm_forward(const LstmWeights& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const LstmState& state) {
    check_shapes(w);
    if (x.size() != w.input_dim()) throw ConfigError("lstm input size mismatch");
    if (state.h.size() != w.hidden_size() || state.c.size() != w.hidden_size()) {
        throw ConfigError("lstm state size mismatch");
    }
    const StepCache cache = forward_cached(w, x, state);
    return {cache.omega, {cache.h, cache.c}};
}

Eigen::VectorXd flatten(const LstmWeights& w) {
    const Eigen::Index gate = w.w_i.size();
    const Eigen::Index h = w.hidden_size();
    Eigen::VectorXd out(4 * gate + 4 * h + w.w_out.size() + w.b_out.size());
    Eigen::Index at = 0;
    for (const auto* m : {&w.w_i, &w.w_f, &w.w_g, &w.w_o}) flatten_block(*m, out, at);
    for (const auto* b : {&w.b_i, &w.b_f, &w.b_g, &w.b_o}) out.segment(at, h) = *b, at += h;
    flatten_block(w.w_out, out, at);
    out.segment(at, w.b_out.size()) = w.b_out;
    return out;
}

LstmWeights unflatten(const Eigen::Ref<const Eigen::VectorXd>& values,
                      Eigen::Index input_dim, Eigen::Index hidden_size,
                      Eigen::Index output_dim) {
    LstmWeights w = LstmWeights::zeros(input_dim, hidden_size, output_dim);
    const Eigen::Index expected = flatten(w).size();
    if (values.size() != expected) {
        throw ConfigError("checkpoint has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(expected));
    }
    Eigen::Index at = 0;
    for (auto* m : {&w.w_i, &w.w_f, &w.w_g, &w.w_o}) unflatten_block(values, *m, at);
    for (auto* b : {&w.b_i, &w.b_f, &w.b_g, &w.b_o})
        *b = values.segment(at, hidden_size), at += hidden_size;
    unflatten_block(values, w.w_out, at);
    w.b_out = values.segment(at, output_dim);
    return w;
}

void save_checkpoint(const LstmWeights& w, const std::string& path) {
    check_shapes(w);
    nlohmann::json doc;
    doc["input_dim"] = w.input_dim();
    doc["hidden_size"] = w.hidden_size();
    doc["output_dim"] = w.output_dim();
    const Eigen::VectorXd values = flatten(w);
    doc["values"] = std::vector<double>(values.data(), values.data() + values.size());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out << doc.dump(2) << "\n";
}

LstmWeights load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
        const auto values = doc.at("values").get<std::vector<double>>();
        return unflatten(
            Eigen::Map<const Eigen::VectorXd>(values.data(), Eigen::Index(values.size())),
            doc.at("input_dim").get<Eigen::Index>(), doc.at("hidden_size").get<Eigen::Index>(),
            doc.at("output_dim").get<Eigen::Index>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed checkpoint " + path + ": " + e.what());
    }
}

ReinforceGrad reinforce_loss_and_gradient(const LstmWeights& w, const LstmState& s0,
                                          const std::vector<Eigen::VectorXd>& inputs,
                                          const std::vector<Eigen::VectorXd>& updates,
                                          const std::vector<double>& advantages,
                                          double alpha, double sigma) {
    check_shapes(w);
    const std::size_t steps = inputs.size();
    if (updates.size() != steps || advantages.size() != steps) {
        throw ConfigError("unroll record lengths disagree");
    }
    if (sigma <= 0.0) throw ConfigError("policy std must be > 0");

    // Forward pass, keeping every intermediate.
    std::vector<StepCache> caches(steps);
    LstmState state = s0;
    for (std::size_t t = 0; t < steps; ++t) {
        caches[t] = forward_cached(w, inputs[t], state);
        state = {caches[t].h, caches[t].c};
    }

    ReinforceGrad out;
    out.grad = LstmWeights::zeros(w.input_dim(), w.hidden_size(), w.output_dim());
    const double log_norm =
        0.5 * std::log(2.0 * M_PI) + std::log(sigma);  // per update component

    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(w.hidden_size());
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(w.hidden_size());
    for (std::size_t ti = steps; ti-- > 0;) {
        const StepCache& cc = caches[ti];
        const Eigen::VectorXd tanh_omega = cc.omega.array().tanh();
        const Eigen::VectorXd mean = alpha * tanh_omega;
        const Eigen::VectorXd diff = updates[ti] - mean;

        out.loss += advantages[ti] *
                    (diff.squaredNorm() / (2.0 * sigma * sigma) +
                     log_norm * static_cast<double>(diff.size()));

        // dLoss/dmean = -A (u - mean) / sigma^2; chain through mean = alpha tanh(omega)
        const Eigen::VectorXd dmean = -advantages[ti] / (sigma * sigma) * diff;
        const Eigen::VectorXd domega = dmean.cwiseProduct(
            alpha * (1.0 - tanh_omega.array().square()).matrix());

        out.grad.w_out += domega * cc.h.transpose();
        out.grad.b_out += domega;

        Eigen::VectorXd dh = w.w_out.transpose() * domega + dh_next;
        const Eigen::VectorXd d_o = dh.cwiseProduct(cc.tanh_c);
        Eigen::VectorXd dc =
            dh.cwiseProduct(cc.o).cwiseProduct(
                (1.0 - cc.tanh_c.array().square()).matrix()) +
            dc_next;

        const Eigen::VectorXd da_o =
            d_o.cwiseProduct(cc.o).cwiseProduct((1.0 - cc.o.array()).matrix());
        const Eigen::VectorXd da_i = dc.cwiseProduct(cc.g).cwiseProduct(cc.i).cwiseProduct(
            (1.0 - cc.i.array()).matrix());
        const Eigen::VectorXd da_g =
            dc.cwiseProduct(cc.i).cwiseProduct((1.0 - cc.g.array().square()).matrix());
        const Eigen::VectorXd da_f =
            dc.cwiseProduct(cc.c_prev).cwiseProduct(cc.f).cwiseProduct(
                (1.0 - cc.f.array()).matrix());

        out.grad.w_i += da_i * cc.z.transpose();
        out.grad.w_f += da_f * cc.z.transpose();
        out.grad.w_g += da_g * cc.z.transpose();
        out.grad.w_o += da_o * cc.z.transpose();
        out.grad.b_i += da_i;
        out.grad.b_f += da_f;
        out.grad.b_g += da_g;
        out.grad.b_o += da_o;

        const Eigen::VectorXd dz = w.w_i.transpose() * da_i + w.w_f.transpose() * da_f +
                                   w.w_g.transpose() * da_g + w.w_o.transpose() * da_o;
        dh_next = dz.tail(w.hidden_size());
        dc_next = dc.cwiseProduct(cc.f);
    }
    return out;
}

}  // namespace qmeta
