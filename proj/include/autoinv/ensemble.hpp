#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autoinv/dataset.hpp"
#include "autoinv/mlp.hpp"
#include "autoinv/train.hpp"

namespace autoinv {

// One ensemble member: a mean network and a separate, smaller variance
// network whose raw outputs map to sigma^2 through softplus plus a floor, so
// positivity is structural rather than hoped for.
struct EnsembleMember {
    Mlp mean_net;
    Mlp var_net;
};

struct DeepEnsemble {
    std::vector<EnsembleMember> members;
    std::vector<Activation> roster;  // activation used by each member
    double variance_floor = 1e-6;

    std::size_t member_count() const { return members.size(); }
    std::size_t input_dim() const { return members.empty() ? 0 : members.front().mean_net.input_dim(); }
    std::size_t output_dim() const { return members.empty() ? 0 : members.front().mean_net.output_dim(); }

    void validate() const;  // M >= 2, consistent dims
};

// Ensemble prediction with the mixture variance split per output dimension
// into its aleatoric (mean member variance) and epistemic (member spread)
// parts.
struct Prediction {
    std::vector<double> mu;
    std::vector<double> sigma_aleatoric;
    std::vector<double> sigma_epistemic;
};

struct UncertaintyWeights {
    double alpha = 0.0;
    double beta = 0.0;

    void validate() const;
};

// Mean over output dims of log(sigma^2)/2 + (y-mu)^2 / (2 sigma^2).
double nll_loss(std::span<const double> mu, std::span<const double> sigma2,
                std::span<const double> y);

// Cycling this order yields the reference 10-member roster (Tanh x2, ReLU x2,
// CELU x2, LeakyReLU x2, ELU, Hardswish) while keeping any prefix diverse.
std::vector<Activation> default_roster(std::size_t member_count);

double member_variance_floor_raw(double variance_floor);  // raw output giving sigma^2 == 1

Prediction predict(const DeepEnsemble& ens, std::span<const double> x);

// alpha * sum(sigma_aleatoric) + beta * sum(sigma_epistemic), summed over
// output dims.
double combined_uncertainty(const Prediction& pred, const UncertaintyWeights& w);

// Scratch for repeated objective evaluations at different x.
struct EnsembleScratch {
    std::vector<MlpScratch> mean_scratch;
    std::vector<MlpScratch> var_scratch;
    Matrix mu;   // member x dim
    Matrix raw;  // member x dim, raw variance-net outputs
    std::vector<double> f_mu;
    std::vector<double> cot;
    std::vector<double> x_grad_tmp;
};

struct UanaObjectiveValue {
    double loss = 0.0;            // mse + alpha * sum sA + beta * sum sE
    double mse = 0.0;             // squared L2 residual of the ensemble mean
    double uncertainty = 0.0;     // the weighted uncertainty part
};

// Loss and exact design-space gradient of the uncertainty-aware inversion
// objective; the gradient is assembled by summing every member's
// back-propagated contribution. Variance networks are only evaluated when
// alpha > 0 and the epistemic term only enters when beta > 0.
UanaObjectiveValue grad_uana_objective(const DeepEnsemble& ens, std::span<const double> x,
                                       std::span<const double> y_target,
                                       const UncertaintyWeights& w,
                                       std::span<double> x_grad, EnsembleScratch& scratch);

struct EnsembleTrainConfig {
    std::size_t member_count = 10;
    std::vector<Activation> roster;  // empty -> default_roster(member_count)
    std::vector<std::size_t> mean_hidden = {32, 32};
    std::vector<std::size_t> var_hidden = {16, 16};
    TrainConfig stage1;          // MSE pretraining of the mean networks
    long stage2_epochs = 100;    // joint NLL fine-tuning
    double stage2_lr_factor = 0.1;
    double variance_floor = 1e-6;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct MemberTrainDiagnostics {
    double nll_unit_variance_stage1 = 0.0;  // NLL at sigma^2 = 1 with stage-1 weights
    double nll_stage2 = 0.0;                // NLL with learned variances after stage 2
};

struct EnsembleTrainReport {
    std::vector<MemberTrainDiagnostics> members;
};

// Three steps: (1) MSE-pretrain each mean network, (2) train the variance
// network and fine-tune the mean network jointly under the NLL, (3) assemble
// the ensemble. Members are independent and train in parallel, each on its
// own derived seed, so results do not depend on scheduling.
DeepEnsemble train_ensemble(const Dataset& data, const EnsembleTrainConfig& cfg,
                            EnsembleTrainReport* report = nullptr);

// Ensemble whose members are all copies of one (mean, var) pair; used by the
// reduction identities between single-net and ensemble methods.
DeepEnsemble clone_ensemble(const EnsembleMember& member, std::size_t count,
                            double variance_floor = 1e-6);

}  // namespace autoinv
