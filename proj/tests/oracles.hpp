// Test-only oracles, independent of the library's gradient/backprop paths:
// central finite differences, Monte-Carlo mixture moments, and brute-force
// Pareto utilities.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "autoinv/ensemble.hpp"
#include "autoinv/mlp.hpp"
#include "autoinv/pareto.hpp"
#include "autoinv/rng.hpp"

namespace oracles {

inline double relative_error(std::span<const double> got, std::span<const double> want) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += (got[i] - want[i]) * (got[i] - want[i]);
        den += want[i] * want[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

// d/dx of scalar(x), componentwise central differences
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double h = 1e-5) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = f(x);
        x[i] = saved - h;
        const double down = f(x);
        x[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

// upstream^T df/dx via finite differences of the projected output
inline std::vector<double> fd_input_gradient(const autoinv::Mlp& net, std::vector<double> x,
                                             std::span<const double> upstream, double h = 1e-5) {
    return fd_gradient(
        [&](std::span<const double> p) {
            const auto y = autoinv::mlp_forward(net, p);
            double acc = 0.0;
            for (std::size_t d = 0; d < y.size(); ++d) acc += upstream[d] * y[d];
            return acc;
        },
        std::move(x), h);
}

inline double batch_mse_loss(const autoinv::Mlp& net, const autoinv::Matrix& x,
                             const autoinv::Matrix& y) {
    double loss = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        const auto pred = autoinv::mlp_forward(net, x.row(r));
        const auto target = y.row(r);
        for (std::size_t d = 0; d < pred.size(); ++d) {
            loss += (pred[d] - target[d]) * (pred[d] - target[d]);
        }
    }
    return loss / static_cast<double>(x.rows);
}

inline std::vector<double> fd_param_gradient(autoinv::Mlp net, const autoinv::Matrix& x,
                                             const autoinv::Matrix& y, double h = 1e-5) {
    std::vector<double> grad(net.param_count());
    for (std::size_t i = 0; i < grad.size(); ++i) {
        const double saved = net.params[i];
        net.params[i] = saved + h;
        const double up = batch_mse_loss(net, x, y);
        net.params[i] = saved - h;
        const double down = batch_mse_loss(net, x, y);
        net.params[i] = saved;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

inline const std::vector<autoinv::Activation>& all_activations() {
    static const std::vector<autoinv::Activation> kinds = {
        autoinv::Activation::identity(),   autoinv::Activation::tanh(),
        autoinv::Activation::relu(),       autoinv::Activation::leaky_relu(0.01),
        autoinv::Activation::elu(1.0),     autoinv::Activation::celu(0.7),
        autoinv::Activation::hardswish(),  autoinv::Activation::softplus(),
    };
    return kinds;
}

inline std::vector<double> activation_kinks(const autoinv::Activation& act) {
    switch (act.kind) {
        case autoinv::ActKind::ReLU:
        case autoinv::ActKind::LeakyReLU:
        case autoinv::ActKind::ELU:
        case autoinv::ActKind::CELU:
            return {0.0};
        case autoinv::ActKind::Hardswish:
            return {-3.0, 3.0};
        default:
            return {};
    }
}

// all pre-activations at least margin away from the activation's kinks
inline bool away_from_kinks(const autoinv::Mlp& net, std::span<const double> x, double margin) {
    autoinv::MlpScratch s;
    autoinv::mlp_forward_cached(net, x, s);
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        for (double kink : activation_kinks(net.layers[k].act)) {
            for (double z : s.pre[k]) {
                if (std::abs(z - kink) < margin) return false;
            }
        }
    }
    return true;
}

inline autoinv::Mlp random_net(autoinv::Rng& rng, std::size_t input_dim, std::size_t output_dim,
                               const autoinv::Activation& hidden_act, std::size_t depth = 2,
                               std::size_t width = 6) {
    std::vector<std::size_t> hidden(depth, width);
    auto net = autoinv::Mlp::make(input_dim, hidden, output_dim, hidden_act);
    net.init_glorot(rng);
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        for (double& b : net.biases(k)) b = rng.uniform(-0.3, 0.3);
    }
    return net;
}

// rejects probe points whose pre-activations sit near a kink
inline std::vector<double> kink_free_probe(const autoinv::Mlp& net, autoinv::Rng& rng,
                                           double margin = 1e-3) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<double> x(net.input_dim());
        for (double& v : x) v = rng.uniform(-1.5, 1.5);
        if (away_from_kinks(net, x, margin)) return x;
    }
    throw std::runtime_error("kink_free_probe: no kink-free point found");
}

struct MixtureMoments {
    std::vector<double> mean;
    std::vector<double> variance;
};

// Empirical moments of the uniform Gaussian mixture over the ensemble's
// members, sampled directly from member predictions.
inline MixtureMoments mc_mixture_moments(const autoinv::DeepEnsemble& ens,
                                         std::span<const double> x, std::size_t draws,
                                         std::uint64_t seed) {
    const std::size_t dims = ens.output_dim();
    std::vector<std::vector<double>> mu;
    std::vector<std::vector<double>> sigma;
    for (const auto& member : ens.members) {
        mu.push_back(autoinv::mlp_forward(member.mean_net, x));
        const auto raw = autoinv::mlp_forward(member.var_net, x);
        std::vector<double> s(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            s[d] = std::sqrt(autoinv::Activation::softplus_value(raw[d]) + ens.variance_floor);
        }
        sigma.push_back(std::move(s));
    }
    autoinv::Rng rng(seed);
    std::vector<double> sum(dims, 0.0);
    std::vector<double> sum_sq(dims, 0.0);
    for (std::size_t i = 0; i < draws; ++i) {
        const std::size_t m = rng.index(ens.member_count());
        for (std::size_t d = 0; d < dims; ++d) {
            const double v = mu[m][d] + sigma[m][d] * rng.normal();
            sum[d] += v;
            sum_sq[d] += v * v;
        }
    }
    MixtureMoments out;
    out.mean.resize(dims);
    out.variance.resize(dims);
    const double inv_n = 1.0 / static_cast<double>(draws);
    for (std::size_t d = 0; d < dims; ++d) {
        out.mean[d] = sum[d] * inv_n;
        out.variance[d] = sum_sq[d] * inv_n - out.mean[d] * out.mean[d];
    }
    return out;
}

// O(n^2) non-dominated filter, then peel for full fronts.
inline std::vector<std::size_t> brute_force_front(std::span<const autoinv::Individual> pop,
                                                  std::span<const std::size_t> alive) {
    std::vector<std::size_t> front;
    for (std::size_t i : alive) {
        bool dominated = false;
        for (std::size_t j : alive) {
            if (i != j && autoinv::dominates(pop[j], pop[i])) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(i);
    }
    return front;
}

inline std::vector<std::vector<std::size_t>> brute_force_fronts(
    std::span<const autoinv::Individual> pop) {
    std::vector<std::size_t> alive(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) alive[i] = i;
    std::vector<std::vector<std::size_t>> fronts;
    while (!alive.empty()) {
        auto front = brute_force_front(pop, alive);
        std::vector<std::size_t> rest;
        for (std::size_t i : alive) {
            bool in_front = false;
            for (std::size_t f : front) {
                if (f == i) in_front = true;
            }
            if (!in_front) rest.push_back(i);
        }
        fronts.push_back(std::move(front));
        alive = std::move(rest);
    }
    return fronts;
}

}  // namespace oracles
