#include "autoinv/kernels.hpp"

#include <cmath>

namespace autoinv::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* w, const double* x, const double* b, double* y,
                   std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b ? b[r] : 0.0;
        const double* wr = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        y[r] = acc;
    }
}

void matvec_t_scalar(const double* w, const double* v, double* out,
                     std::size_t rows, std::size_t cols) {
    for (std::size_t c = 0; c < cols; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* wr = w + r * cols;
        const double vr = v[r];
        for (std::size_t c = 0; c < cols; ++c) out[c] += vr * wr[c];
    }
}

void ger_acc_scalar(double* a, const double* u, const double* v,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* ar = a + r * cols;
        const double ur = u[r];
        for (std::size_t c = 0; c < cols; ++c) ar[c] += ur * v[c];
    }
}

void adam_step_scalar(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar",       dot_scalar,     axpy_scalar,
                         matvec_scalar,  matvec_t_scalar, ger_acc_scalar,
                         adam_step_scalar};
    return ops;
}

}  // namespace autoinv::kernels
