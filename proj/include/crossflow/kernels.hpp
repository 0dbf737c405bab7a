#pragma once

#include <cstddef>
#include <cstdint>

#include "params.hpp"

namespace crossflow {

enum class KernelKind { Auto, Scalar, Avx2 };

const char* kernel_name(KernelKind kind);

// Advances n independent states one arrival each, in place.
//   gap[i]   - headway drawn for particle i
//   lane[i]  - arriving lane (1 or 2) for particle i
//   t1/t2[i] - lane delay state, updated in place
//   delay_out[i] - if non-null, receives the vehicle-delay increment
// Implementations share one operation order (adds, subs, max, compares; no
// fused contractions), so every kernel produces bit-identical doubles.
using PropagateFn = void (*)(std::size_t n, const double* gap,
                             const std::uint8_t* lane, double delta_d,
                             double delta_s, double floor, double* t1,
                             double* t2, double* delay_out);

bool avx2_available();

// Resolves Auto to the widest kernel the CPU supports.
KernelKind resolve_kernel(KernelKind kind);

PropagateFn propagate_kernel(Policy policy, KernelKind kind);

namespace kernels {

void fifo_scalar(std::size_t n, const double* gap, const std::uint8_t* lane,
                 double delta_d, double delta_s, double floor, double* t1,
                 double* t2, double* delay_out);
void fo_scalar(std::size_t n, const double* gap, const std::uint8_t* lane,
               double delta_d, double delta_s, double floor, double* t1,
               double* t2, double* delay_out);
void fifo_avx2(std::size_t n, const double* gap, const std::uint8_t* lane,
               double delta_d, double delta_s, double floor, double* t1,
               double* t2, double* delay_out);
void fo_avx2(std::size_t n, const double* gap, const std::uint8_t* lane,
             double delta_d, double delta_s, double floor, double* t1,
             double* t2, double* delay_out);

}  // namespace kernels

}  // namespace crossflow
