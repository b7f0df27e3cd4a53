#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autoinv/ensemble.hpp"

namespace autoinv {

struct Individual {
    std::vector<double> design;
    double mse = 0.0;                // mean squared residual of the ensemble mean
    double uncertainty_score = 0.0;  // alpha * sum sigma_A + beta * sum sigma_E
    int rank = 0;
    double crowding = 0.0;
};

// a dominates b iff a is no worse in both objectives and better in one.
bool dominates(const Individual& a, const Individual& b);

// Fast non-dominated sort; front 0 holds the individuals dominated by
// nobody, and each later front is dominated only by earlier ones.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const Individual> pop);

struct Nsga2Config {
    std::size_t population = 1000;  // must be even and >= 4
    std::size_t generations = 100;
    double sbx_eta = 15.0;
    double mutation_eta = 20.0;
    double mutation_rate = -1.0;  // < 0 selects 1/design_dim
    double crossover_rate = 0.9;
    std::vector<double> bounds_lo;
    std::vector<double> bounds_hi;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Nsga2Stats {
    std::vector<double> best_mse;          // per generation
    std::vector<double> best_uncertainty;  // per generation
};

// NSGA-II over (mse, uncertainty_score), both evaluated through the ensemble
// at normalized designs. Returns the final non-dominated front.
std::vector<Individual> nsga2_run(const DeepEnsemble& ens, std::span<const double> y_target_norm,
                                  const UncertaintyWeights& weights, const Nsga2Config& cfg,
                                  Nsga2Stats* stats = nullptr);

}  // namespace autoinv
