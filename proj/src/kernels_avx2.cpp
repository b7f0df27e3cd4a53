// AVX2+FMA variants of the dense kernels. This translation unit is compiled
// with -mavx2 -mfma; callers must check avx2_ops() != nullptr, which gates on
// a runtime CPUID probe so the binary stays safe on older x86 parts.

#include "autoinv/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define AUTOINV_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define AUTOINV_HAVE_AVX2_BUILD 0
#endif

namespace autoinv::kernels {

#if AUTOINV_HAVE_AVX2_BUILD
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_avx2(const double* w, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = (b ? b[r] : 0.0) + dot_avx2(w + r * cols, x, cols);
    }
}

void matvec_t_avx2(const double* w, const double* v, double* out,
                   std::size_t rows, std::size_t cols) {
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) _mm256_storeu_pd(out + c, _mm256_setzero_pd());
    for (; c < cols; ++c) out[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        axpy_avx2(v[r], w + r * cols, out, cols);
    }
}

void ger_acc_avx2(double* a, const double* u, const double* v,
                  std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        axpy_avx2(u[r], v, a + r * cols, cols);
    }
}

void adam_step_avx2(double* p, double* m, double* v, const double* g,
                    std::size_t n, double lr, double b1, double b2,
                    double eps, double bc1, double bc2) {
    const __m256d vb1 = _mm256_set1_pd(b1);
    const __m256d vb1c = _mm256_set1_pd(1.0 - b1);
    const __m256d vb2 = _mm256_set1_pd(b2);
    const __m256d vb2c = _mm256_set1_pd(1.0 - b2);
    const __m256d vlr = _mm256_set1_pd(lr);
    const __m256d veps = _mm256_set1_pd(eps);
    const __m256d vibc1 = _mm256_set1_pd(1.0 / bc1);
    const __m256d vibc2 = _mm256_set1_pd(1.0 / bc2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vg = _mm256_loadu_pd(g + i);
        __m256d vm = _mm256_loadu_pd(m + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        vm = _mm256_fmadd_pd(vb1, vm, _mm256_mul_pd(vb1c, vg));
        vv = _mm256_fmadd_pd(vb2, vv, _mm256_mul_pd(vb2c, _mm256_mul_pd(vg, vg)));
        _mm256_storeu_pd(m + i, vm);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_mul_pd(vm, vibc1);
        const __m256d vhat = _mm256_mul_pd(vv, vibc2);
        const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        __m256d vp = _mm256_loadu_pd(p + i);
        vp = _mm256_sub_pd(vp, _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom));
        _mm256_storeu_pd(p + i, vp);
    }
    if (i < n) {
        scalar_ops().adam_step(p + i, m + i, v + i, g + i, n - i, lr, b1, b2, eps, bc1, bc2);
    }
}

bool cpu_has_avx2_fma() {
#if defined(__GNUC__) || defined(__clang__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

}  // namespace

const Ops* avx2_ops() {
    static const bool supported = cpu_has_avx2_fma();
    if (!supported) return nullptr;
    static const Ops ops{"avx2",      dot_avx2,     axpy_avx2,   matvec_avx2,
                         matvec_t_avx2, ger_acc_avx2, adam_step_avx2};
    return &ops;
}

#else

const Ops* avx2_ops() { return nullptr; }

#endif  // AUTOINV_HAVE_AVX2_BUILD

}  // namespace autoinv::kernels
