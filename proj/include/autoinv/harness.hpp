#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "autoinv/ensemble.hpp"
#include "autoinv/inversion.hpp"
#include "autoinv/nfp.hpp"
#include "autoinv/tandem.hpp"
#include "autoinv/train.hpp"

namespace autoinv {

enum class Method { NA, UANA, NAEnsemble, Tandem, UATandem };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
std::vector<Method> all_methods();

struct SurrogateTrainSpec {
    std::vector<std::size_t> hidden = {64, 64, 64};
    Activation hidden_act = Activation::relu();
    TrainConfig train;
};

struct ExperimentConfig {
    NfpSpec nfp = NfpSpec::robot_arm();
    CorruptionSpec corruption;
    std::size_t sample_count = 2000;

    SurrogateTrainSpec surrogate;  // single forward net for NA / tandem
    EnsembleTrainConfig ensemble;  // shared by UANA / NA-ensemble / UA-tandem
    InversionConfig inversion;     // box bounds are filled from the data
    TandemTrainConfig tandem;

    std::size_t target_count = 100;
    std::size_t repeat_count = 3;
    // Fairness protocol: methods without hyperparameters train this many
    // independently seeded models and keep the one with the best NFP error
    // on the validation split.
    std::size_t no_hyperparam_seeds = 5;
    double validation_fraction = 0.1;

    std::uint64_t seed = 0;
    std::size_t threads = 0;

    void validate() const;
    std::size_t validation_count() const;  // max(1, floor(fraction * targets))
};

struct ReportRow {
    std::string method;
    std::size_t repeat = 0;
    std::size_t target_id = 0;
    std::vector<double> design;    // raw design space
    double surrogate_error = 0.0;  // normalized MSE of the re-prediction
    double nfp_error = 0.0;        // normalized MSE on the native process
    double sigma_aleatoric_sum = 0.0;
    double sigma_epistemic_sum = 0.0;
    std::uint64_t seed = 0;
    std::size_t restart_index = 0;
    // Informational only; report files exclude it so a fixed master seed
    // reproduces them byte for byte.
    double wall_time_s = 0.0;
};

struct MethodAggregate {
    std::string method;
    double nfp_mean = 0.0;
    double nfp_std = 0.0;
    double nfp_median = 0.0;
    double surrogate_mean = 0.0;
    double surrogate_std = 0.0;
    double surrogate_median = 0.0;
    std::string error;  // set when the method failed; other fields then zero
};

struct BenchmarkReport {
    std::vector<ReportRow> rows;
    std::vector<MethodAggregate> aggregates;
    std::vector<Matrix> targets_per_repeat;  // raw performance targets
};

BenchmarkReport run_benchmark(const ExperimentConfig& cfg);
BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const std::vector<Method>& methods);

void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report);
void write_benchmark_json(std::ostream& out, const BenchmarkReport& report);

struct SweepGrid {
    std::vector<std::pair<double, double>> coarse = {{0.1, 1.0}, {1.0, 10.0}, {10.0, 100.0}};
    int refine_steps = 2;
    double validation_fraction = 0.1;
};

struct SweepEntry {
    double alpha = 0.0;
    double beta = 0.0;
    double validation_nfp_error = 0.0;
};

struct SweepResult {
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<SweepEntry> log;  // exactly coarse + refine_steps entries
};

// Coarse evaluation of the grid pairs on the validation split, then
// refine_steps multiplicative refinements (factor sqrt(10), then its square
// roots) stepped toward the better-scoring side.
SweepResult sweep_hyperparams(const SweepGrid& grid, const ExperimentConfig& cfg);

struct AvoidanceReport {
    std::string method;
    std::string variant;               // standard | sparse | noisy
    std::vector<std::size_t> counts;   // per design dim: best designs with value >= threshold
    std::size_t target_count = 0;
    std::size_t flagged_dim = 0;
    double threshold = 0.0;
};

// Counts, per design dimension, how many best designs exceed the threshold
// (raw units). The flagged dimension is the one the variant corrupted.
std::vector<AvoidanceReport> avoidance_study(const ExperimentConfig& cfg, std::size_t flagged_dim,
                                             double threshold, const std::vector<Method>& methods,
                                             const std::string& variant_name);

void write_avoidance_csv(std::ostream& out, const std::vector<AvoidanceReport>& reports);

struct AxisSpec {
    std::size_t dim = 0;            // which normalized design dim varies
    std::vector<double> base;       // values of the fixed dims
    double lo = -1.0;
    double hi = 1.0;
    std::size_t steps = 101;
};

struct ProfilePoint {
    double x = 0.0;                 // varied coordinate
    double sigma_aleatoric = 0.0;   // summed over output dims
    double sigma_epistemic = 0.0;
};

std::vector<ProfilePoint> uncertainty_profile(const DeepEnsemble& ens, const AxisSpec& axis);
void write_profile_csv(std::ostream& out, const std::vector<ProfilePoint>& profile);

struct AblationRow {
    std::size_t members = 0;
    double nfp_error_median = 0.0;  // median over repeats of per-repeat median
};

// Trains the largest ensemble once per repeat and evaluates every requested
// size as a member prefix (members are seeded independently of the ensemble
// size, so the prefix equals a directly trained smaller ensemble).
std::vector<AblationRow> ensemble_size_ablation(const ExperimentConfig& cfg,
                                                const std::vector<std::size_t>& sizes);

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace autoinv
