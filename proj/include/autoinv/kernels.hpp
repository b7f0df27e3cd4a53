#pragma once

#include <cstddef>
#include <string>

namespace autoinv::kernels {

// Dense double-precision primitives behind the network code. Every entry has
// a scalar reference implementation and, on x86 with AVX2+FMA, a vectorized
// variant. The two are equivalence-tested; the active backend is picked once
// at startup and stays fixed for the process, so runs are deterministic on a
// given machine.
struct Ops {
    const char* name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);

    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // y = W x + b, W row-major [rows x cols], b may be null
    void (*matvec)(const double* w, const double* x, const double* b, double* y,
                   std::size_t rows, std::size_t cols);

    // out = W^T v, W row-major [rows x cols], out has cols entries
    void (*matvec_t)(const double* w, const double* v, double* out,
                     std::size_t rows, std::size_t cols);

    // A += u v^T, A row-major [rows x cols]
    void (*ger_acc)(double* a, const double* u, const double* v,
                    std::size_t rows, std::size_t cols);

    // One bias-corrected Adam update over n parameters:
    //   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
    //   p -= lr * (m/bc1) / (sqrt(v/bc2) + eps)
    void (*adam_step)(double* p, double* m, double* v, const double* g,
                      std::size_t n, double lr, double b1, double b2,
                      double eps, double bc1, double bc2);
};

const Ops& scalar_ops();

// Null when this build/CPU cannot run the AVX2 path.
const Ops* avx2_ops();

// Active backend. Honors AUTOINV_KERNELS=scalar|avx2 (checked once); without
// an override, picks AVX2 when the CPU supports it.
const Ops& ops();

std::string active_backend_name();

}  // namespace autoinv::kernels
