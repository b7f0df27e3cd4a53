#include "autoinv/nfp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "autoinv/errors.hpp"

namespace autoinv {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

NfpSpec NfpSpec::robot_arm() {
    NfpSpec s;
    s.kind = NfpKind::RobotArm;
    s.box_lo = {-1.0, -kPi, -kPi, -kPi};
    s.box_hi = {1.0, kPi, kPi, kPi};
    return s;
}

NfpSpec NfpSpec::sine1d(double amplitude, double frequency) {
    NfpSpec s;
    s.kind = NfpKind::Sine1D;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.box_lo = {-1.0};
    s.box_hi = {1.0};
    return s;
}

NfpSpec NfpSpec::toy2d() {
    NfpSpec s;
    s.kind = NfpKind::Toy2D;
    s.box_lo = {-1.0, -1.0};
    s.box_hi = {1.0, 1.0};
    return s;
}

std::size_t NfpSpec::design_dim() const {
    switch (kind) {
        case NfpKind::RobotArm: return 4;
        case NfpKind::Sine1D: return 1;
        case NfpKind::Toy2D: return 2;
    }
    return 0;
}

std::size_t NfpSpec::performance_dim() const {
    switch (kind) {
        case NfpKind::RobotArm: return 2;
        case NfpKind::Sine1D: return 1;
        case NfpKind::Toy2D: return 2;
    }
    return 0;
}

void NfpSpec::validate() const {
    require_dim("NfpSpec box lower bounds", design_dim(), box_lo.size());
    require_dim("NfpSpec box upper bounds", design_dim(), box_hi.size());
    for (std::size_t d = 0; d < box_lo.size(); ++d) {
        if (!(box_lo[d] < box_hi[d])) {
            throw std::invalid_argument("NfpSpec: degenerate sampling box");
        }
    }
    if (kind == NfpKind::RobotArm) {
        if (!(base_std > 0.0) || !(angle_std > 0.0)) {
            throw std::invalid_argument("NfpSpec: robot prior stds must be > 0");
        }
    }
}

IntervalRegion IntervalRegion::dim_above(std::size_t dims, std::size_t dim, double threshold) {
    return dim_range(dims, dim, threshold, kInf);
}

IntervalRegion IntervalRegion::dim_range(std::size_t dims, std::size_t dim, double lo, double hi) {
    IntervalRegion r;
    r.lo.assign(dims, -kInf);
    r.hi.assign(dims, kInf);
    r.lo[dim] = lo;
    r.hi[dim] = hi;
    return r;
}

bool IntervalRegion::contains(std::span<const double> x) const {
    if (x.size() != lo.size()) return false;
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (x[d] < lo[d] || x[d] > hi[d]) return false;
    }
    return true;
}

void CorruptionSpec::validate(std::size_t design_dim) const {
    for (const auto& nr : noise_regions) {
        require_dim("CorruptionSpec noise region", design_dim, nr.region.lo.size());
        if (!(nr.noise_std >= 0.0)) {
            throw std::invalid_argument("CorruptionSpec: noise std must be >= 0");
        }
    }
    for (const auto& sr : sparse_regions) {
        require_dim("CorruptionSpec sparse region", design_dim, sr.lo.size());
    }
}

std::vector<double> nfp_forward(const NfpSpec& spec, std::span<const double> x) {
    require_dim("nfp_forward input", spec.design_dim(), x.size());
    switch (spec.kind) {
        case NfpKind::RobotArm: {
            // tip of a planar 3-segment arm whose base slides along the
            // second axis: y1 = sum l_i cos(Theta_i), y2 = x1 + sum l_i sin(Theta_i)
            double theta = 0.0;
            double c = 0.0;
            double s = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                theta += x[1 + i];
                c += spec.segment_lengths[i] * std::cos(theta);
                s += spec.segment_lengths[i] * std::sin(theta);
            }
            return {c, x[0] + s};
        }
        case NfpKind::Sine1D:
            return {spec.amplitude * std::sin(kTwoPi * spec.frequency * x[0])};
        case NfpKind::Toy2D:
            return {2.0 * x[0], x[0] * x[0] + x[1] * x[1]};
    }
    throw std::logic_error("nfp_forward: unknown kind");
}

namespace {

double truncated_normal(Rng& rng, double mean, double std, double lo, double hi) {
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.normal(mean, std);
        if (v >= lo && v <= hi) return v;
    }
    throw std::runtime_error("truncated_normal: sampling box rejects the prior");
}

}  // namespace

std::vector<double> sample_design(const NfpSpec& spec, Rng& rng) {
    std::vector<double> x(spec.design_dim());
    switch (spec.kind) {
        case NfpKind::RobotArm:
            x[0] = truncated_normal(rng, 0.0, spec.base_std, spec.box_lo[0], spec.box_hi[0]);
            for (std::size_t i = 1; i < 4; ++i) {
                x[i] = truncated_normal(rng, 0.0, spec.angle_std, spec.box_lo[i], spec.box_hi[i]);
            }
            break;
        case NfpKind::Sine1D:
        case NfpKind::Toy2D:
            for (std::size_t d = 0; d < x.size(); ++d) {
                x[d] = rng.uniform(spec.box_lo[d], spec.box_hi[d]);
            }
            break;
    }
    return x;
}

SampledDataset sample_dataset(const NfpSpec& spec, std::size_t n, std::uint64_t seed,
                              const CorruptionSpec& corruption) {
    spec.validate();
    corruption.validate(spec.design_dim());
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");

    Rng rng(derive_seed(seed, 0x64617461ULL));
    Matrix designs(n, spec.design_dim());
    Matrix performances(n, spec.performance_dim());

    const std::size_t max_draws = 100 * n;
    std::size_t draws = 0;
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> x;
        for (;;) {
            if (draws >= max_draws) {
                throw std::runtime_error(
                    "sample_dataset: sparse regions rejected more than 100x oversampling");
            }
            ++draws;
            x = sample_design(spec, rng);
            bool rejected = false;
            for (const auto& sr : corruption.sparse_regions) {
                if (sr.contains(x)) {
                    rejected = true;
                    break;
                }
            }
            if (!rejected) break;
        }
        std::vector<double> y = nfp_forward(spec, x);
        for (const auto& nr : corruption.noise_regions) {
            if (nr.region.contains(x)) {
                for (double& v : y) v += rng.normal(0.0, nr.noise_std);
                break;  // first matching region applies
            }
        }
        std::copy(x.begin(), x.end(), designs.row(r).begin());
        std::copy(y.begin(), y.end(), performances.row(r).begin());
    }

    SampledDataset out;
    out.data = Dataset::from_rows(std::move(designs), std::move(performances));
    out.spec = spec;
    out.corruption = corruption;
    out.seed = seed;
    out.sample_count = n;
    return out;
}

Matrix sample_performance_targets(const NfpSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    Rng rng(derive_seed(seed, 0x74617267ULL));
    Matrix targets(n, spec.performance_dim());
    for (std::size_t r = 0; r < n; ++r) {
        const auto x = sample_design(spec, rng);
        const auto y = nfp_forward(spec, x);
        std::copy(y.begin(), y.end(), targets.row(r).begin());
    }
    return targets;
}

double performance_mse(std::span<const double> a, std::span<const double> b) {
    require_dim("performance_mse", a.size(), b.size());
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        acc += diff * diff;
    }
    return acc / static_cast<double>(a.size());
}

double nfp_error(const NfpSpec& spec, std::span<const double> x_raw,
                 std::span<const double> y_target_raw, const Normalizer& perf_norm) {
    const auto y = nfp_forward(spec, x_raw);
    return performance_mse(perf_norm.normalize(y), perf_norm.normalize(y_target_raw));
}

double surrogate_error(const Mlp& net, std::span<const double> x_norm,
                       std::span<const double> y_target_norm) {
    return performance_mse(mlp_forward(net, x_norm), y_target_norm);
}

double surrogate_error(const DeepEnsemble& ens, std::span<const double> x_norm,
                       std::span<const double> y_target_norm) {
    return performance_mse(predict(ens, x_norm).mu, y_target_norm);
}

}  // namespace autoinv
