#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "autoinv/ensemble.hpp"
#include "autoinv/mlp.hpp"
#include "autoinv/train.hpp"

namespace autoinv {

enum class InitKind { UniformInDataBox, Gaussian, Fixed };

struct InitSpec {
    InitKind kind = InitKind::UniformInDataBox;
    std::vector<double> mean;  // Gaussian mean / Fixed point
    std::vector<double> std;   // Gaussian std

    static InitSpec uniform_in_data_box() { return {}; }
    static InitSpec gaussian(std::vector<double> mean, std::vector<double> std);
    static InitSpec fixed(std::vector<double> point);
};

enum class RegKind { Boundary, Smoothness };

struct RegularizerSpec {
    RegKind kind = RegKind::Boundary;
    double weight = 0.0;               // lambda
    std::vector<double> mu_x;          // boundary: box center
    std::vector<double> r_x;           // boundary: box extent per dim
    std::vector<std::size_t> skip_indices;  // smoothness: interior indices to skip

    static RegularizerSpec boundary(std::vector<double> mu_x, std::vector<double> r_x,
                                    double weight);
    static RegularizerSpec smoothness(std::vector<std::size_t> skip_indices, double weight);

    void validate(std::size_t design_dim) const;
};

enum class SelectionCriterion { SurrogateError, TotalLoss };

struct InversionConfig {
    double step_size = 0.01;  // delta
    long max_iters = 2000;
    std::size_t restarts = 50;
    InitSpec init;
    OptimizerKind optimizer = OptimizerKind::Adam;
    AdamParams adam;
    UncertaintyWeights weights;  // used by uana_invert
    std::vector<RegularizerSpec> regularizers;
    std::uint64_t seed = 0;

    // Axis-aligned design box in normalized units; required by
    // UniformInDataBox initialization.
    std::vector<double> box_lo;
    std::vector<double> box_hi;

    double grad_tolerance = 1e-9;
    SelectionCriterion selection = SelectionCriterion::SurrogateError;
    bool record_trace = false;

    void validate(std::size_t design_dim) const;
};

struct Candidate {
    std::vector<double> design;       // normalized design space
    double surrogate_error = 0.0;     // squared L2 residual of the re-prediction
    Prediction uncertainty;
    double total_loss = 0.0;          // objective incl. uncertainty + regularizers
    std::size_t restart_index = 0;
    long iterations_used = 0;
    bool failed = false;
};

struct InversionOutcome {
    Candidate best;
    std::vector<Candidate> all_candidates;           // one per restart
    std::vector<std::vector<double>> traces;         // per-iteration losses, when recorded
};

// Per-dim ReLU(|x - mu| - R/2), summed; the subgradient is 0 anywhere inside
// (or on) the box.
std::pair<double, std::vector<double>> boundary_loss(std::span<const double> x,
                                                     std::span<const double> mu_x,
                                                     std::span<const double> r_x);

// Squared discrete second differences over interior indices not in
// skip_indices.
std::pair<double, std::vector<double>> smoothness_reg(std::span<const double> x,
                                                      std::span<const std::size_t> skip_indices);

const Candidate& select_best(std::span<const Candidate> candidates, SelectionCriterion criterion);

InversionOutcome na_invert(const Mlp& surrogate, std::span<const double> y_target,
                           const InversionConfig& cfg);
InversionOutcome uana_invert(const DeepEnsemble& ens, std::span<const double> y_target,
                             const InversionConfig& cfg);
InversionOutcome na_ensemble_invert(const DeepEnsemble& ens, std::span<const double> y_target,
                                    const InversionConfig& cfg);

// Batched drivers: target t runs with seed derive_seed(cfg.seed, t), so a
// batch matches t independent solves with those per-target seeds. Targets
// run in parallel.
std::vector<InversionOutcome> na_invert_batch(const Mlp& surrogate, const Matrix& targets,
                                              const InversionConfig& cfg, std::size_t threads = 0);
std::vector<InversionOutcome> uana_invert_batch(const DeepEnsemble& ens, const Matrix& targets,
                                                const InversionConfig& cfg,
                                                std::size_t threads = 0);
std::vector<InversionOutcome> na_ensemble_invert_batch(const DeepEnsemble& ens,
                                                       const Matrix& targets,
                                                       const InversionConfig& cfg,
                                                       std::size_t threads = 0);

}  // namespace autoinv
