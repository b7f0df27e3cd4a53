#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "autoinv/activation.hpp"
#include "autoinv/matrix.hpp"
#include "autoinv/rng.hpp"

namespace autoinv {

struct LayerShape {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation act;
};

// Dense feed-forward network. All weights and biases live in one contiguous
// parameter vector (row-major weight block then bias block per layer), which
// keeps optimizer updates a single strided pass.
struct Mlp {
    std::vector<LayerShape> layers;
    std::vector<double> params;
    std::vector<std::size_t> w_off;
    std::vector<std::size_t> b_off;

    static Mlp make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                    std::size_t output_dim, Activation hidden_act,
                    Activation output_act = Activation::identity());
    static Mlp from_shapes(std::vector<LayerShape> shapes);

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }
    std::size_t layer_count() const { return layers.size(); }
    std::size_t param_count() const { return params.size(); }
    std::size_t max_width() const;

    std::span<double> weights(std::size_t k) {
        return {params.data() + w_off[k], layers[k].in * layers[k].out};
    }
    std::span<const double> weights(std::size_t k) const {
        return {params.data() + w_off[k], layers[k].in * layers[k].out};
    }
    std::span<double> biases(std::size_t k) { return {params.data() + b_off[k], layers[k].out}; }
    std::span<const double> biases(std::size_t k) const {
        return {params.data() + b_off[k], layers[k].out};
    }

    // Checks layer chaining and parameter finiteness; throws on violation.
    void validate() const;

    void init_glorot(Rng& rng);
};

// Reusable forward/backward buffers. act[0] is the input copy; act[k+1] and
// pre[k] hold layer k's post- and pre-activation values.
struct MlpScratch {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
    std::vector<double> delta;
    std::vector<double> delta_prev;

    void prepare(const Mlp& net);
};

// Forward pass caching pre-activations for a later backward pass. The output
// lands in scratch.act.back().
void mlp_forward_cached(const Mlp& net, std::span<const double> x, MlpScratch& scratch);

void mlp_forward(const Mlp& net, std::span<const double> x, std::span<double> y,
                 MlpScratch& scratch);
std::vector<double> mlp_forward(const Mlp& net, std::span<const double> x);

// Backward pass from an output-space cotangent, using the cached forward in
// scratch. Fills x_grad (may be empty to skip) and, when param_grad_acc is
// non-null, accumulates parameter gradients into it (same layout as params).
void mlp_backward(const Mlp& net, MlpScratch& scratch, std::span<const double> out_cotangent,
                  std::span<double> x_grad, std::vector<double>* param_grad_acc);

// upstream^T * d f/d x evaluated at x.
std::vector<double> grad_wrt_input(const Mlp& net, std::span<const double> x,
                                   std::span<const double> upstream);

enum class LossKind { MSE };

struct ParamGradResult {
    std::vector<double> grad;  // same layout as Mlp::params
    double loss = 0.0;         // mean over samples of the per-sample loss
};

// Exact gradient of the mean batch loss over every parameter. The per-sample
// MSE loss is the squared residual summed over output dims.
ParamGradResult grad_wrt_params(const Mlp& net, const Matrix& x, const Matrix& y,
                                LossKind loss = LossKind::MSE);

}  // namespace autoinv
