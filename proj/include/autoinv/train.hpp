#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autoinv/dataset.hpp"
#include "autoinv/mlp.hpp"

namespace autoinv {

enum class OptimizerKind { SGD, Adam };

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    long epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::Adam;
    AdamParams adam;

    void validate() const;
};

// First-order stepper over a flat parameter vector. Adam keeps its moment
// buffers here so callers can drive several parameter blocks independently.
class Optimizer {
public:
    Optimizer(OptimizerKind kind, double learning_rate, AdamParams adam, std::size_t n);

    void step(std::span<double> params, std::span<const double> grad);

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }

private:
    OptimizerKind kind_;
    double lr_;
    AdamParams adam_;
    std::vector<double> m_;
    std::vector<double> v_;
    long t_ = 0;
};

struct TrainResult {
    std::vector<double> loss_history;  // one entry per epoch (mean batch loss)
};

// Minibatch MSE training in normalized space. Deterministic for a fixed
// seed; epochs == 0 leaves the network untouched.
TrainResult train_mse(Mlp& net, const Matrix& x_norm, const Matrix& y_norm,
                      const TrainConfig& cfg);
TrainResult train_mse(Mlp& net, const Dataset& data, const TrainConfig& cfg);

}  // namespace autoinv
