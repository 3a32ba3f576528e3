#include <cmath>
#include <cstddef>

#include "repboot/kernels.hpp"

// Reference kernels. Plain loops, one rounding per multiply and add, no
// reassociation; the AVX2 variants are checked against these.

namespace repboot::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double max_scalar(const double* x, std::size_t n) {
    double best = x[0];
    for (std::size_t i = 1; i < n; ++i)
        if (x[i] > best) best = x[i];
    return best;
}

void adam_scalar(double* param, double* m, double* v, const double* grad, std::size_t n,
                 double rate, double beta1, double beta2, double eps, double bias1,
                 double bias2) {
    for (std::size_t i = 0; i < n; ++i) {
        double g = grad[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (g * g);
        double m_hat = m[i] / bias1;
        double v_hat = v[i] / bias2;
        param[i] -= rate * (m_hat / (std::sqrt(v_hat) + eps));
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar", dot_scalar, axpy_scalar, scale_scalar, sum_scalar, max_scalar, adam_scalar,
    };
    return ops;
}

}  // namespace repboot::kernels
