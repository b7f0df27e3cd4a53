#include "autoinv/dataset.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "autoinv/errors.hpp"

namespace autoinv {

Normalizer Normalizer::fit(const Matrix& rows) {
    if (rows.rows == 0) throw std::invalid_argument("Normalizer::fit on empty matrix");
    Normalizer n;
    n.mean.assign(rows.cols, 0.0);
    n.std.assign(rows.cols, 0.0);
    const double inv = 1.0 / static_cast<double>(rows.rows);
    for (std::size_t r = 0; r < rows.rows; ++r) {
        const auto row = rows.row(r);
        for (std::size_t c = 0; c < rows.cols; ++c) n.mean[c] += row[c];
    }
    for (double& m : n.mean) m *= inv;
    for (std::size_t r = 0; r < rows.rows; ++r) {
        const auto row = rows.row(r);
        for (std::size_t c = 0; c < rows.cols; ++c) {
            const double d = row[c] - n.mean[c];
            n.std[c] += d * d;
        }
    }
    for (double& s : n.std) {
        s = std::sqrt(s * inv);
        if (s <= 0.0 || !std::isfinite(s)) s = 1.0;  // degenerate constant column
    }
    return n;
}

Normalizer Normalizer::identity(std::size_t dims) {
    Normalizer n;
    n.mean.assign(dims, 0.0);
    n.std.assign(dims, 1.0);
    return n;
}

void Normalizer::normalize(std::span<const double> raw, std::span<double> out) const {
    require_dim("Normalizer::normalize", dims(), raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - mean[i]) / std[i];
}

void Normalizer::denormalize(std::span<const double> norm, std::span<double> out) const {
    require_dim("Normalizer::denormalize", dims(), norm.size());
    for (std::size_t i = 0; i < norm.size(); ++i) out[i] = norm[i] * std[i] + mean[i];
}

std::vector<double> Normalizer::normalize(std::span<const double> raw) const {
    std::vector<double> out(raw.size());
    normalize(raw, out);
    return out;
}

std::vector<double> Normalizer::denormalize(std::span<const double> norm) const {
    std::vector<double> out(norm.size());
    denormalize(norm, out);
    return out;
}

Matrix Normalizer::normalize_rows(const Matrix& raw) const {
    Matrix out(raw.rows, raw.cols);
    for (std::size_t r = 0; r < raw.rows; ++r) normalize(raw.row(r), out.row(r));
    return out;
}

Dataset Dataset::from_rows(Matrix designs, Matrix performances) {
    if (designs.rows == 0) throw std::invalid_argument("Dataset needs at least one row");
    if (designs.rows != performances.rows) {
        throw DimensionError("Dataset row counts", designs.rows, performances.rows);
    }
    Dataset d;
    d.design_norm = Normalizer::fit(designs);
    d.performance_norm = Normalizer::fit(performances);
    d.designs = std::move(designs);
    d.performances = std::move(performances);
    return d;
}

void Dataset::normalized_design_box(std::vector<double>& lo, std::vector<double>& hi) const {
    lo.assign(design_dim(), std::numeric_limits<double>::infinity());
    hi.assign(design_dim(), -std::numeric_limits<double>::infinity());
    std::vector<double> norm(design_dim());
    for (std::size_t r = 0; r < designs.rows; ++r) {
        design_norm.normalize(designs.row(r), norm);
        for (std::size_t c = 0; c < norm.size(); ++c) {
            lo[c] = std::min(lo[c], norm[c]);
            hi[c] = std::max(hi[c], norm[c]);
        }
    }
}

}  // namespace autoinv
