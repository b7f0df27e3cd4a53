#include "autoinv/inversion.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "autoinv/errors.hpp"
#include "autoinv/kernels.hpp"
#include "autoinv/nfp.hpp"
#include "autoinv/parallel.hpp"

namespace autoinv {

InitSpec InitSpec::gaussian(std::vector<double> mean, std::vector<double> std) {
    InitSpec s;
    s.kind = InitKind::Gaussian;
    s.mean = std::move(mean);
    s.std = std::move(std);
    return s;
}

InitSpec InitSpec::fixed(std::vector<double> point) {
    InitSpec s;
    s.kind = InitKind::Fixed;
    s.mean = std::move(point);
    return s;
}

RegularizerSpec RegularizerSpec::boundary(std::vector<double> mu_x, std::vector<double> r_x,
                                          double weight) {
    RegularizerSpec r;
    r.kind = RegKind::Boundary;
    r.weight = weight;
    r.mu_x = std::move(mu_x);
    r.r_x = std::move(r_x);
    return r;
}

RegularizerSpec RegularizerSpec::smoothness(std::vector<std::size_t> skip_indices, double weight) {
    RegularizerSpec r;
    r.kind = RegKind::Smoothness;
    r.weight = weight;
    r.skip_indices = std::move(skip_indices);
    return r;
}

void RegularizerSpec::validate(std::size_t design_dim) const {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw std::invalid_argument("RegularizerSpec: weight must be finite and >= 0");
    }
    if (kind == RegKind::Boundary) {
        require_dim("boundary regularizer center", design_dim, mu_x.size());
        require_dim("boundary regularizer range", design_dim, r_x.size());
        for (double r : r_x) {
            if (!(r > 0.0)) throw std::invalid_argument("RegularizerSpec: boundary range must be > 0");
        }
    } else {
        if (design_dim < 3) {
            throw std::invalid_argument("RegularizerSpec: smoothness needs design dim >= 3");
        }
    }
}

void InversionConfig::validate(std::size_t design_dim) const {
    if (!(step_size > 0.0)) throw std::invalid_argument("InversionConfig: step_size must be > 0");
    if (max_iters < 1) throw std::invalid_argument("InversionConfig: max_iters must be >= 1");
    if (restarts < 1) throw std::invalid_argument("InversionConfig: restarts must be >= 1");
    weights.validate();
    for (const auto& reg : regularizers) reg.validate(design_dim);
    switch (init.kind) {
        case InitKind::UniformInDataBox:
            require_dim("InversionConfig box lower bounds", design_dim, box_lo.size());
            require_dim("InversionConfig box upper bounds", design_dim, box_hi.size());
            break;
        case InitKind::Gaussian:
            require_dim("InversionConfig Gaussian init mean", design_dim, init.mean.size());
            require_dim("InversionConfig Gaussian init std", design_dim, init.std.size());
            break;
        case InitKind::Fixed:
            require_dim("InversionConfig fixed init", design_dim, init.mean.size());
            break;
    }
}

std::pair<double, std::vector<double>> boundary_loss(std::span<const double> x,
                                                     std::span<const double> mu_x,
                                                     std::span<const double> r_x) {
    require_dim("boundary_loss center", x.size(), mu_x.size());
    require_dim("boundary_loss range", x.size(), r_x.size());
    double loss = 0.0;
    std::vector<double> grad(x.size(), 0.0);
    for (std::size_t d = 0; d < x.size(); ++d) {
        const double dist = std::abs(x[d] - mu_x[d]) - 0.5 * r_x[d];
        if (dist > 0.0) {
            loss += dist;
            grad[d] = x[d] >= mu_x[d] ? 1.0 : -1.0;
        }
    }
    return {loss, std::move(grad)};
}

std::pair<double, std::vector<double>> smoothness_reg(std::span<const double> x,
                                                      std::span<const std::size_t> skip_indices) {
    if (x.size() < 3) {
        throw std::invalid_argument("smoothness_reg: needs at least 3 components");
    }
    auto skipped = [&](std::size_t i) {
        for (std::size_t s : skip_indices) {
            if (s == i) return true;
        }
        return false;
    };
    double loss = 0.0;
    std::vector<double> grad(x.size(), 0.0);
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        if (skipped(i)) continue;
        const double second = 0.5 * (x[i + 1] - 2.0 * x[i] + x[i - 1]);
        loss += second * second;
        grad[i - 1] += second;
        grad[i] += -2.0 * second;
        grad[i + 1] += second;
    }
    return {loss, std::move(grad)};
}

const Candidate& select_best(std::span<const Candidate> candidates, SelectionCriterion criterion) {
    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
        if (c.failed) continue;
        if (!best) {
            best = &c;
            continue;
        }
        const double value = criterion == SelectionCriterion::SurrogateError ? c.surrogate_error
                                                                             : c.total_loss;
        const double incumbent = criterion == SelectionCriterion::SurrogateError
                                     ? best->surrogate_error
                                     : best->total_loss;
        if (value < incumbent) best = &c;  // ties keep the lower restart index
    }
    if (!best) throw std::runtime_error("select_best: no non-failed candidates");
    return *best;
}

namespace {

// loss and gradient of the full inversion objective at x; also reports the
// re-prediction squared residual separately for candidate bookkeeping
using ObjectiveFn =
    std::function<double(std::span<const double> x, std::span<double> grad, double& surr_err)>;

double apply_regularizers(const InversionConfig& cfg, std::span<const double> x,
                          std::span<double> grad) {
    double total = 0.0;
    for (const auto& reg : cfg.regularizers) {
        const auto [value, g] = reg.kind == RegKind::Boundary
                                    ? boundary_loss(x, reg.mu_x, reg.r_x)
                                    : smoothness_reg(x, reg.skip_indices);
        total += reg.weight * value;
        kernels::ops().axpy(reg.weight, g.data(), grad.data(), grad.size());
    }
    return total;
}

std::vector<double> draw_init(const InversionConfig& cfg, std::size_t dims, Rng& rng) {
    std::vector<double> x(dims);
    switch (cfg.init.kind) {
        case InitKind::UniformInDataBox:
            for (std::size_t d = 0; d < dims; ++d) {
                x[d] = rng.uniform(cfg.box_lo[d], cfg.box_hi[d]);
            }
            break;
        case InitKind::Gaussian:
            for (std::size_t d = 0; d < dims; ++d) {
                x[d] = rng.normal(cfg.init.mean[d], cfg.init.std[d]);
            }
            break;
        case InitKind::Fixed:
            x = cfg.init.mean;
            break;
    }
    return x;
}

double grad_norm(std::span<const double> g) {
    return std::sqrt(kernels::ops().dot(g.data(), g.data(), g.size()));
}

// Shared multi-restart first-order descent. SGD falls back to step halving
// when a step would increase the loss, which keeps its per-restart loss
// trace non-increasing.
InversionOutcome run_inversion(const ObjectiveFn& objective, std::size_t dims,
                               const InversionConfig& cfg) {
    cfg.validate(dims);
    InversionOutcome outcome;
    outcome.all_candidates.resize(cfg.restarts);
    if (cfg.record_trace) outcome.traces.resize(cfg.restarts);

    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        Rng rng(derive_seed(cfg.seed, 0x72737430ULL, r));
        std::vector<double> x = draw_init(cfg, dims, rng);
        std::vector<double> grad(dims);
        std::vector<double> trial(dims);
        std::vector<double> trial_grad(dims);
        Optimizer opt(cfg.optimizer, cfg.step_size, cfg.adam, dims);

        Candidate cand;
        cand.restart_index = r;
        double surr = 0.0;
        double loss = objective(x, grad, surr);
        long iters = 0;
        bool failed = !std::isfinite(loss);
        std::vector<double>* trace = cfg.record_trace ? &outcome.traces[r] : nullptr;
        if (trace) trace->push_back(loss);

        while (!failed && iters < cfg.max_iters && grad_norm(grad) >= cfg.grad_tolerance) {
            if (cfg.optimizer == OptimizerKind::SGD) {
                double step = cfg.step_size;
                double new_loss = loss;
                bool accepted = false;
                for (int halving = 0; halving < 40; ++halving) {
                    trial = x;
                    kernels::ops().axpy(-step, grad.data(), trial.data(), dims);
                    new_loss = objective(trial, trial_grad, surr);
                    if (!std::isfinite(new_loss)) {
                        failed = true;
                        break;
                    }
                    if (new_loss <= loss) {
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                ++iters;
                if (failed || !accepted) break;  // no descent direction left
                x.swap(trial);
                grad.swap(trial_grad);
                loss = new_loss;
            } else {
                opt.step(x, grad);
                ++iters;
                loss = objective(x, grad, surr);
                if (!std::isfinite(loss)) {
                    failed = true;
                    break;
                }
            }
            if (trace) trace->push_back(loss);
        }

        if (!failed) {
            // final evaluation pins the candidate's bookkeeping to x
            loss = objective(x, grad, surr);
            failed = !std::isfinite(loss);
        }
        cand.design = std::move(x);
        cand.total_loss = loss;
        cand.surrogate_error = surr;
        cand.iterations_used = iters;
        cand.failed = failed;
        outcome.all_candidates[r] = std::move(cand);
    }

    outcome.best = select_best(outcome.all_candidates, cfg.selection);
    return outcome;
}

ObjectiveFn make_na_objective(const Mlp& surrogate, std::span<const double> y_target,
                              const InversionConfig& cfg) {
    struct State {
        MlpScratch scratch;
        std::vector<double> cot;
    };
    auto state = std::make_shared<State>();
    state->cot.resize(surrogate.output_dim());
    std::vector<double> target(y_target.begin(), y_target.end());
    return [&surrogate, target, &cfg, state](std::span<const double> x, std::span<double> grad,
                                             double& surr_err) {
        mlp_forward_cached(surrogate, x, state->scratch);
        const auto& pred = state->scratch.act.back();
        double mse = 0.0;
        for (std::size_t d = 0; d < target.size(); ++d) {
            const double resid = pred[d] - target[d];
            mse += resid * resid;
            state->cot[d] = 2.0 * resid;
        }
        mlp_backward(surrogate, state->scratch, state->cot, grad, nullptr);
        surr_err = mse;
        return mse + apply_regularizers(cfg, x, grad);
    };
}

ObjectiveFn make_uana_objective(const DeepEnsemble& ens, std::span<const double> y_target,
                                const UncertaintyWeights& weights, const InversionConfig& cfg) {
    auto scratch = std::make_shared<EnsembleScratch>();
    std::vector<double> target(y_target.begin(), y_target.end());
    return [&ens, target, weights, &cfg, scratch](std::span<const double> x,
                                                  std::span<double> grad, double& surr_err) {
        const auto value = grad_uana_objective(ens, x, target, weights, grad, *scratch);
        surr_err = value.mse;
        return value.loss + apply_regularizers(cfg, x, grad);
    };
}

void attach_prediction(const DeepEnsemble& ens, InversionOutcome& outcome) {
    for (auto& c : outcome.all_candidates) {
        if (!c.failed) c.uncertainty = predict(ens, c.design);
    }
    outcome.best.uncertainty = predict(ens, outcome.best.design);
}

}  // namespace

InversionOutcome na_invert(const Mlp& surrogate, std::span<const double> y_target,
                           const InversionConfig& cfg) {
    require_dim("na_invert target", surrogate.output_dim(), y_target.size());
    auto outcome = run_inversion(make_na_objective(surrogate, y_target, cfg),
                                 surrogate.input_dim(), cfg);
    // single-network candidates carry the plain prediction, zero uncertainty
    for (auto& c : outcome.all_candidates) {
        if (c.failed) continue;
        c.uncertainty.mu = mlp_forward(surrogate, c.design);
        c.uncertainty.sigma_aleatoric.assign(surrogate.output_dim(), 0.0);
        c.uncertainty.sigma_epistemic.assign(surrogate.output_dim(), 0.0);
    }
    outcome.best.uncertainty.mu = mlp_forward(surrogate, outcome.best.design);
    outcome.best.uncertainty.sigma_aleatoric.assign(surrogate.output_dim(), 0.0);
    outcome.best.uncertainty.sigma_epistemic.assign(surrogate.output_dim(), 0.0);
    return outcome;
}

InversionOutcome uana_invert(const DeepEnsemble& ens, std::span<const double> y_target,
                             const InversionConfig& cfg) {
    ens.validate();
    require_dim("uana_invert target", ens.output_dim(), y_target.size());
    auto outcome = run_inversion(make_uana_objective(ens, y_target, cfg.weights, cfg),
                                 ens.input_dim(), cfg);
    attach_prediction(ens, outcome);
    return outcome;
}

InversionOutcome na_ensemble_invert(const DeepEnsemble& ens, std::span<const double> y_target,
                                    const InversionConfig& cfg) {
    ens.validate();
    require_dim("na_ensemble_invert target", ens.output_dim(), y_target.size());
    auto outcome = run_inversion(make_uana_objective(ens, y_target, UncertaintyWeights{}, cfg),
                                 ens.input_dim(), cfg);
    attach_prediction(ens, outcome);
    return outcome;
}

namespace {

template <class Solve>
std::vector<InversionOutcome> batch_run(const Matrix& targets, const InversionConfig& cfg,
                                        std::size_t threads, Solve&& solve) {
    std::vector<InversionOutcome> out(targets.rows);
    parallel_for(targets.rows, [&](std::size_t t) {
        InversionConfig per_target = cfg;
        per_target.seed = derive_seed(cfg.seed, t);
        out[t] = solve(targets.row(t), per_target);
    }, threads);
    return out;
}

}  // namespace

std::vector<InversionOutcome> na_invert_batch(const Mlp& surrogate, const Matrix& targets,
                                              const InversionConfig& cfg, std::size_t threads) {
    return batch_run(targets, cfg, threads,
                     [&](std::span<const double> y, const InversionConfig& c) {
                         return na_invert(surrogate, y, c);
                     });
}

std::vector<InversionOutcome> uana_invert_batch(const DeepEnsemble& ens, const Matrix& targets,
                                                const InversionConfig& cfg, std::size_t threads) {
    return batch_run(targets, cfg, threads,
                     [&](std::span<const double> y, const InversionConfig& c) {
                         return uana_invert(ens, y, c);
                     });
}

std::vector<InversionOutcome> na_ensemble_invert_batch(const DeepEnsemble& ens,
                                                       const Matrix& targets,
                                                       const InversionConfig& cfg,
                                                       std::size_t threads) {
    return batch_run(targets, cfg, threads,
                     [&](std::span<const double> y, const InversionConfig& c) {
                         return na_ensemble_invert(ens, y, c);
                     });
}

}  // namespace autoinv
