#include "repboot/kernels.hpp"

// AVX2+FMA variants of the dense kernels. This translation unit is the only
// one compiled with -mavx2 -mfma; dispatch happens at runtime in kernels.cpp.
//
// The Adam update is purely elementwise and written with the same expression
// shape as the scalar kernel, so it produces bit-identical results. dot/sum
// use lane-blocked accumulators and may differ from the scalar reference in
// the final ulps.

#if defined(REPBOOT_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace repboot::kernels {

namespace {

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double total = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) total += x[i] * y[i];
    return total;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yi = _mm256_loadu_pd(y + i);
        yi = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yi);
        _mm256_storeu_pd(y + i, yi);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
    __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += x[i];
    return total;
}

double max_avx2(const double* x, std::size_t n) {
    if (n < 4) {
        double best = x[0];
        for (std::size_t i = 1; i < n; ++i)
            if (x[i] > best) best = x[i];
        return best;
    }
    __m256d acc = _mm256_loadu_pd(x);
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    }
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    double best = _mm_cvtsd_f64(_mm_max_sd(lo, swapped));
    for (; i < n; ++i)
        if (x[i] > best) best = x[i];
    return best;
}

void adam_avx2(double* param, double* m, double* v, const double* grad, std::size_t n,
               double rate, double beta1, double beta2, double eps, double bias1,
               double bias2) {
    __m256d b1 = _mm256_set1_pd(beta1);
    __m256d b2 = _mm256_set1_pd(beta2);
    __m256d one_minus_b1 = _mm256_set1_pd(1.0 - beta1);
    __m256d one_minus_b2 = _mm256_set1_pd(1.0 - beta2);
    __m256d bias1v = _mm256_set1_pd(bias1);
    __m256d bias2v = _mm256_set1_pd(bias2);
    __m256d epsv = _mm256_set1_pd(eps);
    __m256d ratev = _mm256_set1_pd(rate);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d g = _mm256_loadu_pd(grad + i);
        // No FMA here: mul then add keeps the rounding identical to the
        // scalar reference so both backends stay bit-for-bit equal.
        __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                   _mm256_mul_pd(one_minus_b1, g));
        __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                   _mm256_mul_pd(one_minus_b2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        __m256d m_hat = _mm256_div_pd(mi, bias1v);
        __m256d v_hat = _mm256_div_pd(vi, bias2v);
        __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), epsv);
        __m256d step = _mm256_mul_pd(ratev, _mm256_div_pd(m_hat, denom));
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
    }
    for (; i < n; ++i) {
        double g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
        double m_hat = m[i] / bias1;
        double v_hat = v[i] / bias2;
        param[i] -= rate * (m_hat / (std::sqrt(v_hat) + eps));
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops = {
        "avx2", dot_avx2, axpy_avx2, scale_avx2, sum_avx2, max_avx2, adam_avx2,
    };
    return ops;
}

}  // namespace repboot::kernels

#endif  // REPBOOT_HAVE_AVX2
