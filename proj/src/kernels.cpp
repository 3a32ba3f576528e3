#include "repboot/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "repboot/errors.hpp"

namespace repboot::kernels {

#if defined(REPBOOT_HAVE_AVX2)
const Ops& avx2_ops();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(REPBOOT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* pick_default() {
    if (const char* env = std::getenv("REPBOOT_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
#if defined(REPBOOT_HAVE_AVX2)
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return &avx2_ops();
#endif
    }
#if defined(REPBOOT_HAVE_AVX2)
    if (cpu_has_avx2()) return &avx2_ops();
#endif
    return &scalar_ops();
}

std::atomic<const Ops*> g_active{nullptr};

const Ops* load_active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = pick_default();
        g_active.store(ops, std::memory_order_release);
    }
    return ops;
}

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }

const Ops& active() { return *load_active(); }

Backend active_backend() {
    return load_active() == &scalar_ops() ? Backend::Scalar : Backend::Avx2;
}

std::string active_name() { return load_active()->name; }

void force_backend(Backend backend) {
    switch (backend) {
        case Backend::Scalar:
            g_active.store(&scalar_ops(), std::memory_order_release);
            return;
        case Backend::Avx2:
#if defined(REPBOOT_HAVE_AVX2)
            if (cpu_has_avx2()) {
                g_active.store(&avx2_ops(), std::memory_order_release);
                return;
            }
#endif
            throw ConfigError("avx2 kernels are not available on this machine");
    }
    throw ConfigError("unknown kernel backend");
}

}  // namespace repboot::kernels
