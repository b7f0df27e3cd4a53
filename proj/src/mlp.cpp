#include "autoinv/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "autoinv/errors.hpp"
#include "autoinv/kernels.hpp"

namespace autoinv {

Mlp Mlp::make(std::size_t input_dim, const std::vector<std::size_t>& hidden,
              std::size_t output_dim, Activation hidden_act, Activation output_act) {
    std::vector<LayerShape> shapes;
    std::size_t prev = input_dim;
    for (std::size_t h : hidden) {
        shapes.push_back({prev, h, hidden_act});
        prev = h;
    }
    shapes.push_back({prev, output_dim, output_act});
    return from_shapes(std::move(shapes));
}

Mlp Mlp::from_shapes(std::vector<LayerShape> shapes) {
    if (shapes.empty()) throw std::invalid_argument("Mlp needs at least one layer");
    Mlp net;
    net.layers = std::move(shapes);
    std::size_t total = 0;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const auto& l = net.layers[k];
        if (l.in == 0 || l.out == 0) throw std::invalid_argument("Mlp layer with zero dimension");
        if (k > 0 && net.layers[k - 1].out != l.in) {
            throw DimensionError("Mlp layer chaining", net.layers[k - 1].out, l.in);
        }
        net.w_off.push_back(total);
        total += l.in * l.out;
        net.b_off.push_back(total);
        total += l.out;
    }
    net.params.assign(total, 0.0);
    return net;
}

std::size_t Mlp::max_width() const {
    std::size_t w = input_dim();
    for (const auto& l : layers) w = std::max(w, l.out);
    return w;
}

void Mlp::validate() const {
    if (layers.empty()) throw std::invalid_argument("Mlp has no layers");
    for (std::size_t k = 1; k < layers.size(); ++k) {
        if (layers[k - 1].out != layers[k].in) {
            throw DimensionError("Mlp layer chaining", layers[k - 1].out, layers[k].in);
        }
    }
    for (double p : params) {
        if (!std::isfinite(p)) throw std::runtime_error("Mlp has non-finite parameters");
    }
}

void Mlp::init_glorot(Rng& rng) {
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& l = layers[k];
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
        for (double& w : weights(k)) w = rng.uniform(-limit, limit);
        for (double& b : biases(k)) b = 0.0;
    }
}

void MlpScratch::prepare(const Mlp& net) {
    pre.resize(net.layer_count());
    act.resize(net.layer_count() + 1);
    act[0].resize(net.input_dim());
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        pre[k].resize(net.layers[k].out);
        act[k + 1].resize(net.layers[k].out);
    }
    delta.resize(net.max_width());
    delta_prev.resize(net.max_width());
}

void mlp_forward_cached(const Mlp& net, std::span<const double> x, MlpScratch& s) {
    require_dim("Mlp forward input", net.input_dim(), x.size());
    s.prepare(net);
    std::copy(x.begin(), x.end(), s.act[0].begin());
    const auto& k = kernels::ops();
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const auto& l = net.layers[i];
        k.matvec(net.weights(i).data(), s.act[i].data(), net.biases(i).data(),
                 s.pre[i].data(), l.out, l.in);
        for (std::size_t j = 0; j < l.out; ++j) s.act[i + 1][j] = l.act.value(s.pre[i][j]);
    }
}

void mlp_forward(const Mlp& net, std::span<const double> x, std::span<double> y, MlpScratch& s) {
    require_dim("Mlp forward output", net.output_dim(), y.size());
    mlp_forward_cached(net, x, s);
    const auto& out = s.act.back();
    std::copy(out.begin(), out.end(), y.begin());
}

std::vector<double> mlp_forward(const Mlp& net, std::span<const double> x) {
    MlpScratch s;
    mlp_forward_cached(net, x, s);
    return s.act.back();
}

void mlp_backward(const Mlp& net, MlpScratch& s, std::span<const double> out_cotangent,
                  std::span<double> x_grad, std::vector<double>* param_grad_acc) {
    require_dim("Mlp backward cotangent", net.output_dim(), out_cotangent.size());
    if (param_grad_acc && param_grad_acc->size() != net.param_count()) {
        throw DimensionError("Mlp backward parameter gradient", net.param_count(),
                             param_grad_acc->size());
    }
    const auto& k = kernels::ops();
    std::copy(out_cotangent.begin(), out_cotangent.end(), s.delta.begin());
    for (std::size_t i = net.layer_count(); i-- > 0;) {
        const auto& l = net.layers[i];
        // through the activation: delta_pre = delta_post * act'(z)
        for (std::size_t j = 0; j < l.out; ++j) s.delta[j] *= l.act.deriv(s.pre[i][j]);
        if (param_grad_acc) {
            double* g = param_grad_acc->data();
            k.ger_acc(g + net.w_off[i], s.delta.data(), s.act[i].data(), l.out, l.in);
            k.axpy(1.0, s.delta.data(), g + net.b_off[i], l.out);
        }
        if (i > 0 || !x_grad.empty()) {
            k.matvec_t(net.weights(i).data(), s.delta.data(), s.delta_prev.data(), l.out, l.in);
            std::swap(s.delta, s.delta_prev);
        }
    }
    if (!x_grad.empty()) {
        require_dim("Mlp backward input gradient", net.input_dim(), x_grad.size());
        std::copy_n(s.delta.begin(), net.input_dim(), x_grad.begin());
    }
}

std::vector<double> grad_wrt_input(const Mlp& net, std::span<const double> x,
                                   std::span<const double> upstream) {
    MlpScratch s;
    mlp_forward_cached(net, x, s);
    std::vector<double> grad(net.input_dim());
    mlp_backward(net, s, upstream, grad, nullptr);
    return grad;
}

ParamGradResult grad_wrt_params(const Mlp& net, const Matrix& x, const Matrix& y, LossKind loss) {
    if (loss != LossKind::MSE) throw std::invalid_argument("unsupported loss kind");
    if (x.rows == 0) throw std::invalid_argument("grad_wrt_params: empty batch");
    if (x.rows != y.rows) throw DimensionError("grad_wrt_params batch rows", x.rows, y.rows);
    require_dim("grad_wrt_params input dim", net.input_dim(), x.cols);
    require_dim("grad_wrt_params output dim", net.output_dim(), y.cols);

    ParamGradResult res;
    res.grad.assign(net.param_count(), 0.0);
    MlpScratch s;
    std::vector<double> cot(net.output_dim());
    const double inv_n = 1.0 / static_cast<double>(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (double v : y.row(r)) {
            if (!std::isfinite(v)) throw std::runtime_error("grad_wrt_params: NaN in batch targets");
        }
        mlp_forward_cached(net, x.row(r), s);
        const auto& pred = s.act.back();
        const auto target = y.row(r);
        double sample_loss = 0.0;
        for (std::size_t d = 0; d < cot.size(); ++d) {
            const double resid = pred[d] - target[d];
            sample_loss += resid * resid;
            cot[d] = 2.0 * resid * inv_n;
        }
        res.loss += sample_loss * inv_n;
        mlp_backward(net, s, cot, {}, &res.grad);
    }
    return res;
}

}  // namespace autoinv
