#include "crossflow/kernels.hpp"

#include <stdexcept>

namespace crossflow {

const char* kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::Auto: return "auto";
        case KernelKind::Scalar: return "scalar";
        case KernelKind::Avx2: return "avx2";
    }
    return "?";
}

bool avx2_available() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

KernelKind resolve_kernel(KernelKind kind) {
    if (kind != KernelKind::Auto) return kind;
    return avx2_available() ? KernelKind::Avx2 : KernelKind::Scalar;
}

PropagateFn propagate_kernel(Policy policy, KernelKind kind) {
    switch (resolve_kernel(kind)) {
        case KernelKind::Scalar:
            return policy == Policy::Fifo ? kernels::fifo_scalar : kernels::fo_scalar;
        case KernelKind::Avx2:
            if (!avx2_available())
                throw std::runtime_error("avx2 kernel requested but not supported");
            return policy == Policy::Fifo ? kernels::fifo_avx2 : kernels::fo_avx2;
        default:
            throw std::logic_error("unresolved kernel kind");
    }
}

}  // namespace crossflow
