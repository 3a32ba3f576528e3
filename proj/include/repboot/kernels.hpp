#pragma once

#include <cstddef>
#include <string>

namespace repboot::kernels {

// Dense inner loops of the trainers (dot products, accumulate-scaled rows,
// optimizer updates, reductions). A scalar reference implementation always
// exists; an AVX2+FMA variant is selected at runtime when the CPU supports
// it. Both variants are equivalence-tested against each other.
//
// Re-runs on the same machine pick the same backend, so seeded pipelines stay
// byte-identical. Across machines with different backends the lane-blocked
// reductions may differ in the last bits; all consumers tolerate that.
struct Ops {
    const char* name;

    // Inner product of x and y.
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x[i] *= a
    void (*scale)(double a, double* x, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*max_value)(const double* x, std::size_t n);
    // One Adam update over a parameter block. bias1/bias2 are the
    // step-dependent moment corrections 1-beta1^t and 1-beta2^t.
    void (*adam_update)(double* param, double* m, double* v, const double* grad,
                        std::size_t n, double rate, double beta1, double beta2,
                        double eps, double bias1, double bias2);
};

enum class Backend { Scalar, Avx2 };

const Ops& scalar_ops();
bool avx2_available();       // compiled in and supported by this CPU
const Ops& active();         // currently selected backend
Backend active_backend();
std::string active_name();

// Override the automatic selection (used by the equivalence tests and the
// REPBOOT_KERNELS=scalar|avx2 environment switch). Throws if the requested
// backend is unavailable.
void force_backend(Backend backend);

inline double dot(const double* x, const double* y, std::size_t n) {
    return active().dot(x, y, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
    active().axpy(a, x, y, n);
}
inline void scale(double a, double* x, std::size_t n) { active().scale(a, x, n); }
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline double max_value(const double* x, std::size_t n) { return active().max_value(x, n); }
inline void adam_update(double* param, double* m, double* v, const double* grad,
                        std::size_t n, double rate, double beta1, double beta2, double eps,
                        double bias1, double bias2) {
    active().adam_update(param, m, v, grad, n, rate, beta1, beta2, eps, bias1, bias2);
}

}  // namespace repboot::kernels
