#include "autoinv/tandem.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "autoinv/errors.hpp"

namespace autoinv {

void TandemTrainConfig::validate() const {
    base.validate();
    weights.validate();
    if (candidate_count < 1) {
        throw std::invalid_argument("TandemTrainConfig: candidate_count must be >= 1");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("TandemTrainConfig: validation_fraction must be in (0,1)");
    }
}

namespace {

// The training engine is shared between tandem and UA-tandem; only the
// frozen forward evaluator differs. Both evaluators return the composition
// loss for one target and the gradient of that loss w.r.t. the queried
// design.
struct MlpForwardEval {
    const Mlp* net;
    MlpScratch scratch;
    std::vector<double> cot;

    explicit MlpForwardEval(const Mlp& n) : net(&n), cot(n.output_dim()) {}

    double operator()(std::span<const double> x, std::span<const double> y_target,
                      std::span<double> x_grad) {
        mlp_forward_cached(*net, x, scratch);
        const auto& pred = scratch.act.back();
        double loss = 0.0;
        for (std::size_t d = 0; d < cot.size(); ++d) {
            const double resid = pred[d] - y_target[d];
            loss += resid * resid;
            cot[d] = 2.0 * resid;
        }
        mlp_backward(*net, scratch, cot, x_grad, nullptr);
        return loss;
    }
};

struct EnsembleForwardEval {
    const DeepEnsemble* ens;
    UncertaintyWeights weights;
    EnsembleScratch scratch;

    EnsembleForwardEval(const DeepEnsemble& e, UncertaintyWeights w) : ens(&e), weights(w) {}

    double operator()(std::span<const double> x, std::span<const double> y_target,
                      std::span<double> x_grad) {
        return grad_uana_objective(*ens, x, y_target, weights, x_grad, scratch).loss;
    }
};

template <class ForwardEval>
TandemTrainResult train_inverse(ForwardEval&& forward_eval, std::size_t design_dim,
                                std::size_t performance_dim, const Matrix& targets,
                                const TandemTrainConfig& cfg) {
    cfg.validate();
    if (targets.rows == 0) throw std::invalid_argument("tandem training: empty target set");
    require_dim("tandem training target dim", performance_dim, targets.cols);

    TandemTrainResult result;
    result.inverse.net = Mlp::make(performance_dim, cfg.hidden, design_dim, cfg.hidden_act);
    Rng init_rng(derive_seed(cfg.base.seed, 0x696e7631ULL));
    result.inverse.net.init_glorot(init_rng);
    if (cfg.base.epochs == 0) return result;

    Mlp& inv = result.inverse.net;
    Optimizer opt(cfg.base.optimizer, cfg.base.learning_rate, cfg.base.adam, inv.param_count());
    MlpScratch inv_scratch;
    std::vector<double> grad(inv.param_count());
    std::vector<double> x_grad(design_dim);
    Rng shuffle_rng(derive_seed(cfg.base.seed, 0x73687566ULL));
    std::vector<std::size_t> order(targets.rows);
    std::iota(order.begin(), order.end(), 0);

    result.loss_history.reserve(static_cast<std::size_t>(cfg.base.epochs));
    for (long epoch = 0; epoch < cfg.base.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.index(i)]);
        }
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.base.batch_size) {
            const std::size_t len = std::min(cfg.base.batch_size, order.size() - start);
            const double inv_n = 1.0 / static_cast<double>(len);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t i = 0; i < len; ++i) {
                const auto y_target = targets.row(order[start + i]);
                mlp_forward_cached(inv, y_target, inv_scratch);
                const auto& design = inv_scratch.act.back();
                batch_loss += forward_eval(design, y_target, x_grad) * inv_n;
                for (double& g : x_grad) g *= inv_n;
                mlp_backward(inv, inv_scratch, x_grad, {}, &grad);
            }
            if (!std::isfinite(batch_loss)) throw DivergenceError("tandem training", epoch);
            opt.step(inv.params, grad);
            epoch_loss += batch_loss;
            ++batches;
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(batches));
    }
    return result;
}

}  // namespace

TandemTrainResult train_tandem(const Mlp& frozen_forward, const Matrix& targets_norm,
                               const TandemTrainConfig& cfg) {
    return train_inverse(MlpForwardEval(frozen_forward), frozen_forward.input_dim(),
                         frozen_forward.output_dim(), targets_norm, cfg);
}

TandemTrainResult train_ua_tandem(const DeepEnsemble& frozen_ensemble, const Matrix& targets_norm,
                                  const TandemTrainConfig& cfg) {
    frozen_ensemble.validate();
    return train_inverse(EnsembleForwardEval(frozen_ensemble, cfg.weights),
                         frozen_ensemble.input_dim(), frozen_ensemble.output_dim(), targets_norm,
                         cfg);
}

std::vector<double> query(const InverseNet& inv, std::span<const double> y_target_norm) {
    require_dim("query target", inv.performance_dim(), y_target_norm.size());
    return mlp_forward(inv.net, y_target_norm);
}

Matrix query_batch(const InverseNet& inv, const Matrix& targets_norm) {
    require_dim("query_batch target dim", inv.performance_dim(), targets_norm.cols);
    Matrix designs(targets_norm.rows, inv.design_dim());
    MlpScratch scratch;
    for (std::size_t r = 0; r < targets_norm.rows; ++r) {
        mlp_forward(inv.net, targets_norm.row(r), designs.row(r), scratch);
    }
    return designs;
}

InverseSelection select_inverse_model(std::span<const InverseNet> candidates, const NfpSpec& nfp,
                                      const Matrix& validation_targets_norm,
                                      const Normalizer& design_norm,
                                      const Normalizer& performance_norm) {
    if (candidates.empty()) throw std::invalid_argument("select_inverse_model: no candidates");
    if (validation_targets_norm.rows == 0) {
        throw std::invalid_argument("select_inverse_model: no validation targets");
    }
    InverseSelection sel;
    sel.validation_nfp_errors.reserve(candidates.size());
    for (const auto& cand : candidates) {
        double acc = 0.0;
        MlpScratch scratch;
        std::vector<double> design_norm_space(cand.design_dim());
        for (std::size_t r = 0; r < validation_targets_norm.rows; ++r) {
            const auto y_norm = validation_targets_norm.row(r);
            mlp_forward(cand.net, y_norm, design_norm_space, scratch);
            const auto design_raw = design_norm.denormalize(design_norm_space);
            const auto y_nfp = nfp_forward(nfp, design_raw);
            acc += performance_mse(performance_norm.normalize(y_nfp), y_norm);
        }
        sel.validation_nfp_errors.push_back(acc / static_cast<double>(validation_targets_norm.rows));
    }
    sel.best_index = 0;
    for (std::size_t i = 1; i < sel.validation_nfp_errors.size(); ++i) {
        if (sel.validation_nfp_errors[i] < sel.validation_nfp_errors[sel.best_index]) {
            sel.best_index = i;
        }
    }
    return sel;
}

}  // namespace autoinv
