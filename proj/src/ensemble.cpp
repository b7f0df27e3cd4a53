#include "autoinv/ensemble.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "autoinv/errors.hpp"
#include "autoinv/kernels.hpp"
#include "autoinv/parallel.hpp"

namespace autoinv {

void DeepEnsemble::validate() const {
    if (member_count() < 2) {
        throw std::invalid_argument("DeepEnsemble needs at least 2 members");
    }
    if (!(variance_floor > 0.0)) {
        throw std::invalid_argument("DeepEnsemble variance_floor must be > 0");
    }
    for (const auto& m : members) {
        require_dim("ensemble member input dim", input_dim(), m.mean_net.input_dim());
        require_dim("ensemble member output dim", output_dim(), m.mean_net.output_dim());
        require_dim("ensemble variance-net input dim", input_dim(), m.var_net.input_dim());
        require_dim("ensemble variance-net output dim", output_dim(), m.var_net.output_dim());
    }
}

void UncertaintyWeights::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha) || !(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("UncertaintyWeights must be finite and nonnegative");
    }
}

double nll_loss(std::span<const double> mu, std::span<const double> sigma2,
                std::span<const double> y) {
    require_dim("nll_loss sigma2", mu.size(), sigma2.size());
    require_dim("nll_loss target", mu.size(), y.size());
    double acc = 0.0;
    for (std::size_t d = 0; d < mu.size(); ++d) {
        if (!(sigma2[d] > 0.0)) throw std::invalid_argument("nll_loss: nonpositive variance");
        const double resid = y[d] - mu[d];
        acc += 0.5 * std::log(sigma2[d]) + resid * resid / (2.0 * sigma2[d]);
    }
    return acc / static_cast<double>(mu.size());
}

std::vector<Activation> default_roster(std::size_t member_count) {
    static const Activation cycle[] = {
        Activation::tanh(),      Activation::relu(), Activation::celu(1.0),
        Activation::leaky_relu(0.01), Activation::elu(1.0), Activation::hardswish(),
    };
    std::vector<Activation> roster(member_count);
    for (std::size_t i = 0; i < member_count; ++i) roster[i] = cycle[i % 6];
    return roster;
}

double member_variance_floor_raw(double variance_floor) {
    // softplus(raw) + floor == 1  =>  raw = log(e^(1-floor) - 1)
    return std::log(std::expm1(1.0 - variance_floor));
}

namespace {

void member_variances(const EnsembleMember& m, double floor, std::span<const double> x,
                      MlpScratch& scratch, std::span<double> sigma2,
                      std::span<double> raw_out) {
    mlp_forward_cached(m.var_net, x, scratch);
    const auto& raw = scratch.act.back();
    for (std::size_t d = 0; d < sigma2.size(); ++d) {
        if (!raw_out.empty()) raw_out[d] = raw[d];
        sigma2[d] = Activation::softplus_value(raw[d]) + floor;
    }
}

}  // namespace

Prediction predict(const DeepEnsemble& ens, std::span<const double> x) {
    require_dim("predict input", ens.input_dim(), x.size());
    const std::size_t m_count = ens.member_count();
    const std::size_t dims = ens.output_dim();
    const double inv_m = 1.0 / static_cast<double>(m_count);

    Matrix mu(m_count, dims);
    Prediction pred;
    pred.mu.assign(dims, 0.0);
    pred.sigma_aleatoric.assign(dims, 0.0);
    pred.sigma_epistemic.assign(dims, 0.0);

    MlpScratch scratch;
    std::vector<double> sigma2(dims);
    for (std::size_t m = 0; m < m_count; ++m) {
        mlp_forward_cached(ens.members[m].mean_net, x, scratch);
        const auto& out = scratch.act.back();
        std::copy(out.begin(), out.end(), mu.row(m).begin());
        member_variances(ens.members[m], ens.variance_floor, x, scratch, sigma2, {});
        for (std::size_t d = 0; d < dims; ++d) pred.sigma_aleatoric[d] += sigma2[d];
    }
    for (std::size_t d = 0; d < dims; ++d) {
        double acc = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) acc += mu.at(m, d);
        pred.mu[d] = acc * inv_m;
        pred.sigma_aleatoric[d] *= inv_m;
    }
    // centered form of (1/M) sum mu_m^2 - F_mu^2; identical algebraically,
    // nonnegative structurally
    for (std::size_t d = 0; d < dims; ++d) {
        double acc = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            const double diff = mu.at(m, d) - pred.mu[d];
            acc += diff * diff;
        }
        pred.sigma_epistemic[d] = acc * inv_m;
    }
    return pred;
}

double combined_uncertainty(const Prediction& pred, const UncertaintyWeights& w) {
    double sa = 0.0;
    double se = 0.0;
    for (double v : pred.sigma_aleatoric) sa += v;
    for (double v : pred.sigma_epistemic) se += v;
    return w.alpha * sa + w.beta * se;
}

UanaObjectiveValue grad_uana_objective(const DeepEnsemble& ens, std::span<const double> x,
                                       std::span<const double> y_target,
                                       const UncertaintyWeights& w,
                                       std::span<double> x_grad, EnsembleScratch& s) {
    require_dim("grad_uana_objective input", ens.input_dim(), x.size());
    require_dim("grad_uana_objective target", ens.output_dim(), y_target.size());
    require_dim("grad_uana_objective gradient", ens.input_dim(), x_grad.size());

    const std::size_t m_count = ens.member_count();
    const std::size_t dims = ens.output_dim();
    const double inv_m = 1.0 / static_cast<double>(m_count);
    const bool want_aleatoric = w.alpha > 0.0;
    const bool want_epistemic = w.beta > 0.0;

    s.mean_scratch.resize(m_count);
    s.var_scratch.resize(m_count);
    if (s.mu.rows != m_count || s.mu.cols != dims) s.mu = Matrix(m_count, dims);
    if (want_aleatoric && (s.raw.rows != m_count || s.raw.cols != dims)) {
        s.raw = Matrix(m_count, dims);
    }
    s.f_mu.assign(dims, 0.0);
    s.cot.resize(dims);
    s.x_grad_tmp.resize(x.size());
    std::fill(x_grad.begin(), x_grad.end(), 0.0);

    UanaObjectiveValue value;

    std::vector<double> sigma2(dims);
    double aleatoric_sum = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
        mlp_forward_cached(ens.members[m].mean_net, x, s.mean_scratch[m]);
        const auto& out = s.mean_scratch[m].act.back();
        std::copy(out.begin(), out.end(), s.mu.row(m).begin());
        if (want_aleatoric) {
            member_variances(ens.members[m], ens.variance_floor, x, s.var_scratch[m], sigma2,
                             s.raw.row(m));
            for (double v : sigma2) aleatoric_sum += v;
        }
    }
    for (std::size_t d = 0; d < dims; ++d) {
        double acc = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) acc += s.mu.at(m, d);
        s.f_mu[d] = acc * inv_m;
    }

    for (std::size_t d = 0; d < dims; ++d) {
        const double resid = s.f_mu[d] - y_target[d];
        value.mse += resid * resid;
    }
    value.loss = value.mse;
    if (want_aleatoric) {
        value.uncertainty += w.alpha * aleatoric_sum * inv_m;
    }
    if (want_epistemic) {
        double epi = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            for (std::size_t m = 0; m < m_count; ++m) {
                const double diff = s.mu.at(m, d) - s.f_mu[d];
                epi += diff * diff;
            }
        }
        value.uncertainty += w.beta * epi * inv_m;
    }
    value.loss += value.uncertainty;

    // per-member back-propagated contributions, summed (Eq. 4 style)
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t d = 0; d < dims; ++d) {
            double c = 2.0 * (s.f_mu[d] - y_target[d]) * inv_m;
            if (want_epistemic) {
                c += w.beta * 2.0 * (s.mu.at(m, d) - s.f_mu[d]) * inv_m;
            }
            s.cot[d] = c;
        }
        mlp_backward(ens.members[m].mean_net, s.mean_scratch[m], s.cot, s.x_grad_tmp, nullptr);
        kernels::ops().axpy(1.0, s.x_grad_tmp.data(), x_grad.data(), x_grad.size());
        if (want_aleatoric) {
            for (std::size_t d = 0; d < dims; ++d) {
                s.cot[d] = w.alpha * inv_m * Activation::sigmoid(s.raw.at(m, d));
            }
            mlp_backward(ens.members[m].var_net, s.var_scratch[m], s.cot, s.x_grad_tmp, nullptr);
            kernels::ops().axpy(1.0, s.x_grad_tmp.data(), x_grad.data(), x_grad.size());
        }
    }
    return value;
}

void EnsembleTrainConfig::validate() const {
    if (member_count < 2) throw std::invalid_argument("EnsembleTrainConfig: member_count must be >= 2");
    if (!roster.empty() && roster.size() != member_count) {
        throw DimensionError("EnsembleTrainConfig roster", member_count, roster.size());
    }
    if (stage2_epochs < 0) throw std::invalid_argument("EnsembleTrainConfig: stage2_epochs must be >= 0");
    if (!(variance_floor > 0.0)) throw std::invalid_argument("EnsembleTrainConfig: variance_floor must be > 0");
    stage1.validate();
}

namespace {

struct NllGradBuffers {
    MlpScratch mean_scratch;
    MlpScratch var_scratch;
    std::vector<double> mean_grad;
    std::vector<double> var_grad;
    std::vector<double> mean_cot;
    std::vector<double> var_cot;
};

// Joint NLL over one minibatch: fills both gradient buffers (mean over the
// batch) and returns the mean sample NLL.
double nll_batch(const EnsembleMember& member, double floor, const Matrix& x, const Matrix& y,
                 std::span<const std::size_t> rows, NllGradBuffers& b) {
    const std::size_t dims = member.mean_net.output_dim();
    std::fill(b.mean_grad.begin(), b.mean_grad.end(), 0.0);
    std::fill(b.var_grad.begin(), b.var_grad.end(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    const double inv_d = 1.0 / static_cast<double>(dims);
    double loss = 0.0;
    for (std::size_t r : rows) {
        mlp_forward_cached(member.mean_net, x.row(r), b.mean_scratch);
        mlp_forward_cached(member.var_net, x.row(r), b.var_scratch);
        const auto& mu = b.mean_scratch.act.back();
        const auto& raw = b.var_scratch.act.back();
        const auto target = y.row(r);
        double sample = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            const double s2 = Activation::softplus_value(raw[d]) + floor;
            const double resid = target[d] - mu[d];
            sample += 0.5 * std::log(s2) + resid * resid / (2.0 * s2);
            b.mean_cot[d] = -resid / s2 * inv_d * inv_n;
            const double dl_ds2 = (0.5 / s2 - resid * resid / (2.0 * s2 * s2)) * inv_d * inv_n;
            b.var_cot[d] = dl_ds2 * Activation::sigmoid(raw[d]);
        }
        loss += sample * inv_d * inv_n;
        mlp_backward(member.mean_net, b.mean_scratch, b.mean_cot, {}, &b.mean_grad);
        mlp_backward(member.var_net, b.var_scratch, b.var_cot, {}, &b.var_grad);
    }
    return loss;
}

double dataset_nll(const EnsembleMember& member, double floor, const Matrix& x, const Matrix& y,
                   bool unit_variance) {
    MlpScratch mean_scratch;
    MlpScratch var_scratch;
    std::vector<double> sigma2(member.mean_net.output_dim(), 1.0);
    double acc = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        mlp_forward_cached(member.mean_net, x.row(r), mean_scratch);
        if (!unit_variance) {
            member_variances(member, floor, x.row(r), var_scratch, sigma2, {});
        }
        acc += nll_loss(mean_scratch.act.back(), sigma2, y.row(r));
    }
    return acc / static_cast<double>(x.rows);
}

}  // namespace

DeepEnsemble train_ensemble(const Dataset& data, const EnsembleTrainConfig& cfg,
                            EnsembleTrainReport* report) {
    cfg.validate();
    if (data.size() == 0) throw std::invalid_argument("train_ensemble: empty dataset");

    const Matrix x = data.normalized_designs();
    const Matrix y = data.normalized_performances();

    DeepEnsemble ens;
    ens.variance_floor = cfg.variance_floor;
    ens.roster = cfg.roster.empty() ? default_roster(cfg.member_count) : cfg.roster;
    ens.members.resize(cfg.member_count);
    if (report) report->members.assign(cfg.member_count, {});

    parallel_for(cfg.member_count, [&](std::size_t m) {
        const std::uint64_t member_seed = derive_seed(cfg.seed, 0x6d656d62ULL, m);
        EnsembleMember member;

        // stage 1: MSE pretraining of the mean network
        member.mean_net = Mlp::make(data.design_dim(), cfg.mean_hidden, data.performance_dim(),
                                    ens.roster[m]);
        Rng init_rng(derive_seed(member_seed, 0x696e6974ULL));
        member.mean_net.init_glorot(init_rng);
        TrainConfig stage1 = cfg.stage1;
        stage1.seed = derive_seed(member_seed, 0x73746731ULL);
        train_mse(member.mean_net, x, y, stage1);

        if (report) {
            report->members[m].nll_unit_variance_stage1 =
                dataset_nll(member, cfg.variance_floor, x, y, /*unit_variance=*/true);
        }

        // stage 2: joint NLL training of variance net + mean fine-tune
        member.var_net = Mlp::make(data.design_dim(), cfg.var_hidden, data.performance_dim(),
                                   ens.roster[m]);
        Rng var_rng(derive_seed(member_seed, 0x76696e69ULL));
        member.var_net.init_glorot(var_rng);
        {
            // start near sigma^2 = 1 so the first NLL steps are well scaled
            const double raw0 = member_variance_floor_raw(cfg.variance_floor);
            const std::size_t last = member.var_net.layer_count() - 1;
            for (double& b : member.var_net.biases(last)) b = raw0;
        }

        const double stage2_lr = cfg.stage1.learning_rate * cfg.stage2_lr_factor;
        Optimizer mean_opt(cfg.stage1.optimizer, stage2_lr, cfg.stage1.adam,
                           member.mean_net.param_count());
        Optimizer var_opt(cfg.stage1.optimizer, stage2_lr, cfg.stage1.adam,
                          member.var_net.param_count());
        NllGradBuffers buf;
        buf.mean_grad.resize(member.mean_net.param_count());
        buf.var_grad.resize(member.var_net.param_count());
        buf.mean_cot.resize(data.performance_dim());
        buf.var_cot.resize(data.performance_dim());

        Rng shuffle_rng(derive_seed(member_seed, 0x73746732ULL));
        std::vector<std::size_t> order(x.rows);
        std::iota(order.begin(), order.end(), 0);
        for (long epoch = 0; epoch < cfg.stage2_epochs; ++epoch) {
            for (std::size_t i = order.size(); i > 1; --i) {
                std::swap(order[i - 1], order[shuffle_rng.index(i)]);
            }
            for (std::size_t start = 0; start < order.size(); start += cfg.stage1.batch_size) {
                const std::size_t len = std::min(cfg.stage1.batch_size, order.size() - start);
                const double loss = nll_batch(member, cfg.variance_floor, x, y,
                                              {order.data() + start, len}, buf);
                if (!std::isfinite(loss)) throw DivergenceError("train_ensemble stage 2", epoch);
                mean_opt.step(member.mean_net.params, buf.mean_grad);
                var_opt.step(member.var_net.params, buf.var_grad);
            }
        }

        if (report) {
            report->members[m].nll_stage2 =
                dataset_nll(member, cfg.variance_floor, x, y, /*unit_variance=*/false);
        }
        ens.members[m] = std::move(member);
    }, cfg.threads);

    ens.validate();
    return ens;
}

DeepEnsemble clone_ensemble(const EnsembleMember& member, std::size_t count,
                            double variance_floor) {
    if (count < 2) throw std::invalid_argument("clone_ensemble: count must be >= 2");
    DeepEnsemble ens;
    ens.variance_floor = variance_floor;
    ens.members.assign(count, member);
    ens.roster.assign(count, member.mean_net.layers.front().act);
    ens.validate();
    return ens;
}

}  // namespace autoinv
