#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autoinv/ensemble.hpp"
#include "autoinv/mlp.hpp"
#include "autoinv/nfp.hpp"
#include "autoinv/train.hpp"

namespace autoinv {

// Inverse network mapping normalized performance to normalized design.
struct InverseNet {
    Mlp net;

    std::size_t performance_dim() const { return net.input_dim(); }
    std::size_t design_dim() const { return net.output_dim(); }
};

struct TandemTrainConfig {
    TrainConfig base;
    UncertaintyWeights weights;  // UA-tandem only
    std::size_t candidate_count = 5;
    double validation_fraction = 0.1;
    std::vector<std::size_t> hidden = {32, 32};
    Activation hidden_act = Activation::relu();

    void validate() const;
};

struct TandemTrainResult {
    InverseNet inverse;
    std::vector<double> loss_history;
};

// Trains the inverse network against the frozen forward surrogate by
// minimizing || f(f_inv(y*)) - y* ||^2 over the inverse parameters. The
// forward network is never touched.
TandemTrainResult train_tandem(const Mlp& frozen_forward, const Matrix& targets_norm,
                               const TandemTrainConfig& cfg);

// Same, against a frozen ensemble, with the uncertainty terms of the
// uncertainty-aware objective added (weights from cfg).
TandemTrainResult train_ua_tandem(const DeepEnsemble& frozen_ensemble, const Matrix& targets_norm,
                                  const TandemTrainConfig& cfg);

std::vector<double> query(const InverseNet& inv, std::span<const double> y_target_norm);
Matrix query_batch(const InverseNet& inv, const Matrix& targets_norm);

struct InverseSelection {
    std::size_t best_index = 0;
    std::vector<double> validation_nfp_errors;  // mean per candidate
};

// Picks the candidate with the lowest mean NFP error on the validation
// targets; ties go to the lower index.
InverseSelection select_inverse_model(std::span<const InverseNet> candidates, const NfpSpec& nfp,
                                      const Matrix& validation_targets_norm,
                                      const Normalizer& design_norm,
                                      const Normalizer& performance_norm);

}  // namespace autoinv
