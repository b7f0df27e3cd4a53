#include "autoinv/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "autoinv/errors.hpp"
#include "autoinv/kernels.hpp"

namespace autoinv {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, AdamParams adam, std::size_t n)
    : kind_(kind), lr_(learning_rate), adam_(adam) {
    if (kind_ == OptimizerKind::Adam) {
        m_.assign(n, 0.0);
        v_.assign(n, 0.0);
    }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
    require_dim("Optimizer::step", params.size(), grad.size());
    const auto& k = kernels::ops();
    if (kind_ == OptimizerKind::SGD) {
        k.axpy(-lr_, grad.data(), params.data(), params.size());
        return;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(adam_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(adam_.beta2, static_cast<double>(t_));
    k.adam_step(params.data(), m_.data(), v_.data(), grad.data(), params.size(), lr_,
                adam_.beta1, adam_.beta2, adam_.eps, bc1, bc2);
}

namespace {

// One minibatch of summed-over-dims MSE: fills grad (mean over the batch)
// and returns the mean sample loss.
double mse_batch(const Mlp& net, const Matrix& x, const Matrix& y,
                 std::span<const std::size_t> rows, MlpScratch& scratch,
                 std::vector<double>& grad, std::vector<double>& cot) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    double loss = 0.0;
    for (std::size_t r : rows) {
        mlp_forward_cached(net, x.row(r), scratch);
        const auto& pred = scratch.act.back();
        const auto target = y.row(r);
        double sample = 0.0;
        for (std::size_t d = 0; d < cot.size(); ++d) {
            const double resid = pred[d] - target[d];
            sample += resid * resid;
            cot[d] = 2.0 * resid * inv_n;
        }
        loss += sample * inv_n;
        mlp_backward(net, scratch, cot, {}, &grad);
    }
    return loss;
}

}  // namespace

TrainResult train_mse(Mlp& net, const Matrix& x_norm, const Matrix& y_norm,
                      const TrainConfig& cfg) {
    cfg.validate();
    if (x_norm.rows == 0) throw std::invalid_argument("train_mse: empty dataset");
    if (x_norm.rows != y_norm.rows) {
        throw DimensionError("train_mse rows", x_norm.rows, y_norm.rows);
    }
    require_dim("train_mse input dim", net.input_dim(), x_norm.cols);
    require_dim("train_mse output dim", net.output_dim(), y_norm.cols);

    TrainResult result;
    if (cfg.epochs == 0) return result;

    Rng rng(derive_seed(cfg.seed, 0x7261696eULL));  // shuffle stream
    Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.adam, net.param_count());
    MlpScratch scratch;
    std::vector<double> grad(net.param_count());
    std::vector<double> cot(net.output_dim());
    std::vector<std::size_t> order(x_norm.rows);
    std::iota(order.begin(), order.end(), 0);

    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.index(i)]);
        }
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, order.size() - start);
            const double loss = mse_batch(net, x_norm, y_norm, {order.data() + start, len},
                                          scratch, grad, cot);
            if (!std::isfinite(loss)) throw DivergenceError("train_mse", epoch);
            opt.step(net.params, grad);
            epoch_loss += loss;
            ++batches;
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(batches));
    }
    return result;
}

TrainResult train_mse(Mlp& net, const Dataset& data, const TrainConfig& cfg) {
    return train_mse(net, data.normalized_designs(), data.normalized_performances(), cfg);
}

}  // namespace autoinv
