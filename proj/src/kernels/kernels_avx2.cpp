// Compiled with -mavx2 -mfma; only reached through avx2_table() after a
// runtime CPU check.
#include "bregproj/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace bregproj::kernels {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(y + j + 4), acc1);
    }
    for (; j + 4 <= n; j += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) s += x[j] * y[j];
    return s;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + j));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + j + 4));
    }
    for (; j + 4 <= n; j += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + j));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < n; ++j) s += x[j];
    return s;
}

double max_abs_avx2(const double* x, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    bool saw_nan = false;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d v = _mm256_andnot_pd(sign, _mm256_loadu_pd(x + j));
        saw_nan |= _mm256_movemask_pd(_mm256_cmp_pd(v, v, _CMP_UNORD_Q)) != 0;
        m = _mm256_max_pd(m, v);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = lanes[0];
    for (int l = 1; l < 4; ++l) r = lanes[l] > r ? lanes[l] : r;
    for (; j < n; ++j) {
        const double a = std::abs(x[j]);
        if (a > r) r = a;
        saw_nan |= std::isnan(a);
    }
    return saw_nan ? std::nan("") : r;
}

void scale_avx2(double* x, double alpha, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) _mm256_storeu_pd(x + j, _mm256_mul_pd(_mm256_loadu_pd(x + j), a));
    for (; j < n; ++j) x[j] *= alpha;
}

void mul_avx2(double* x, const double* y, std::size_t n) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        _mm256_storeu_pd(x + j, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    }
    for (; j < n; ++j) x[j] *= y[j];
}

void add_avx2(double* acc, const double* x, std::size_t n) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        _mm256_storeu_pd(acc + j, _mm256_add_pd(_mm256_loadu_pd(acc + j), _mm256_loadu_pd(x + j)));
    }
    for (; j < n; ++j) acc[j] += x[j];
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d a = _mm256_set1_pd(alpha);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        _mm256_storeu_pd(y + j, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    }
    for (; j < n; ++j) y[j] += alpha * x[j];
}

} // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{"avx2",    dot_avx2, sum_avx2, max_abs_avx2,
                                   scale_avx2, mul_avx2, add_avx2, axpy_avx2};
    return &table;
}

} // namespace bregproj::kernels
