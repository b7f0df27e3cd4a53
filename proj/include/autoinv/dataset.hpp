#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autoinv/matrix.hpp"

namespace autoinv {

// Per-dimension z-score statistics. Constant columns get std 1 so the
// transform stays invertible.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> std;

    static Normalizer fit(const Matrix& rows);
    static Normalizer identity(std::size_t dims);

    std::size_t dims() const { return mean.size(); }

    void normalize(std::span<const double> raw, std::span<double> out) const;
    void denormalize(std::span<const double> norm, std::span<double> out) const;
    std::vector<double> normalize(std::span<const double> raw) const;
    std::vector<double> denormalize(std::span<const double> norm) const;
    Matrix normalize_rows(const Matrix& raw) const;
};

// Paired design/performance samples in raw (un-normalized) units, with the
// z-score stats fitted on them. Training and inversion always work in the
// normalized spaces.
struct Dataset {
    Matrix designs;       // N x D_in
    Matrix performances;  // N x D_out
    Normalizer design_norm;
    Normalizer performance_norm;

    static Dataset from_rows(Matrix designs, Matrix performances);

    std::size_t size() const { return designs.rows; }
    std::size_t design_dim() const { return designs.cols; }
    std::size_t performance_dim() const { return performances.cols; }

    Matrix normalized_designs() const { return design_norm.normalize_rows(designs); }
    Matrix normalized_performances() const {
        return performance_norm.normalize_rows(performances);
    }

    // Axis-aligned bounding box of the designs, in normalized units.
    void normalized_design_box(std::vector<double>& lo, std::vector<double>& hi) const;
};

}  // namespace autoinv
