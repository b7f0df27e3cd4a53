#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "autoinv/dataset.hpp"
#include "autoinv/ensemble.hpp"
#include "autoinv/mlp.hpp"
#include "autoinv/rng.hpp"

namespace autoinv {

enum class NfpKind { RobotArm, Sine1D, Toy2D };

// Analytic native forward process plus its design-sampling prior. RobotArm
// maps (base offset, three joint angles) to the arm tip position; Sine1D is
// amplitude * sin(2 pi f x); Toy2D is (2x, x^2 + y^2).
struct NfpSpec {
    NfpKind kind = NfpKind::RobotArm;

    // RobotArm parameters
    std::array<double, 3> segment_lengths{0.5, 0.5, 1.0};
    double base_std = 0.25;
    double angle_std = 1.5707963267948966;

    // Sine1D parameters
    double amplitude = 1.0;
    double frequency = 1.0;

    // Sampling box per design dim. Gaussian priors (RobotArm) are truncated
    // to it; Sine1D/Toy2D sample uniformly inside it.
    std::vector<double> box_lo;
    std::vector<double> box_hi;

    static NfpSpec robot_arm();
    static NfpSpec sine1d(double amplitude = 1.0, double frequency = 1.0);
    static NfpSpec toy2d();

    std::size_t design_dim() const;
    std::size_t performance_dim() const;
    void validate() const;
};

// Axis-aligned design-space region; dims left at +-infinity are
// unconstrained.
struct IntervalRegion {
    std::vector<double> lo;
    std::vector<double> hi;

    static IntervalRegion dim_above(std::size_t dims, std::size_t dim, double threshold);
    static IntervalRegion dim_range(std::size_t dims, std::size_t dim, double lo, double hi);

    bool contains(std::span<const double> x) const;
};

struct NoiseRegion {
    IntervalRegion region;
    double noise_std = 0.0;
};

struct CorruptionSpec {
    std::vector<NoiseRegion> noise_regions;
    std::vector<IntervalRegion> sparse_regions;

    bool empty() const { return noise_regions.empty() && sparse_regions.empty(); }
    void validate(std::size_t design_dim) const;
};

struct SampledDataset {
    Dataset data;
    NfpSpec spec;
    CorruptionSpec corruption;
    std::uint64_t seed = 0;
    std::size_t sample_count = 0;
};

std::vector<double> nfp_forward(const NfpSpec& spec, std::span<const double> x);

// One design draw from the sampling prior (no corruption).
std::vector<double> sample_design(const NfpSpec& spec, Rng& rng);

// n design/performance pairs. Designs falling in a sparse region are
// rejected and redrawn (at most 100x oversampling in total); performances of
// designs inside a noise region get i.i.d. Gaussian noise added in raw
// units, before normalization stats are fitted.
SampledDataset sample_dataset(const NfpSpec& spec, std::size_t n, std::uint64_t seed,
                              const CorruptionSpec& corruption = {});

// Clean target performances: NFP images of fresh prior designs.
Matrix sample_performance_targets(const NfpSpec& spec, std::size_t n, std::uint64_t seed);

// Mean squared difference over dims.
double performance_mse(std::span<const double> a, std::span<const double> b);

// MSE between the NFP's evaluation of a raw design and a raw target, in
// normalized performance units.
double nfp_error(const NfpSpec& spec, std::span<const double> x_raw,
                 std::span<const double> y_target_raw, const Normalizer& perf_norm);

// MSE between the surrogate's re-prediction and the target (both normalized).
double surrogate_error(const Mlp& net, std::span<const double> x_norm,
                       std::span<const double> y_target_norm);
double surrogate_error(const DeepEnsemble& ens, std::span<const double> x_norm,
                       std::span<const double> y_target_norm);

}  // namespace autoinv
