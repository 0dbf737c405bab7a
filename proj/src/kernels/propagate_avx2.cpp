// Compiled with -mavx2 -ffp-contract=off. Every arithmetic step mirrors the
// scalar path in step_math.hpp operation for operation (adds, subs, max,
// compares, blends), so results are bit-identical to the scalar kernels.

#include "crossflow/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace crossflow::kernels {

namespace {

inline __m256i lane_mask(const std::uint8_t* lane) {
    __m256i lv = _mm256_setr_epi64x(lane[0], lane[1], lane[2], lane[3]);
    return _mm256_cmpeq_epi64(lv, _mm256_set1_epi64x(1));
}

}  // namespace

void fifo_avx2(std::size_t n, const double* gap, const std::uint8_t* lane,
               double delta_d, double delta_s, double floor, double* t1,
               double* t2, double* delay_out) {
    const __m256d dd = _mm256_set1_pd(delta_d);
    const __m256d ds = _mm256_set1_pd(delta_s);
    const __m256d fl = _mm256_set1_pd(floor);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_castsi256_pd(lane_mask(lane + i));
        __m256d v1 = _mm256_loadu_pd(t1 + i);
        __m256d v2 = _mm256_loadu_pd(t2 + i);
        __m256d x = _mm256_loadu_pd(gap + i);
        __m256d ta = _mm256_blendv_pd(v2, v1, mask);
        __m256d tb = _mm256_blendv_pd(v1, v2, mask);

        __m256d tbx = _mm256_sub_pd(tb, x);
        __m256d ea_raw = _mm256_sub_pd(_mm256_add_pd(ta, ds), x);
        __m256d cross = _mm256_add_pd(tbx, dd);
        __m256d ego = _mm256_max_pd(_mm256_max_pd(ea_raw, cross), zero);
        __m256d other = _mm256_max_pd(tbx, fl);

        if (delay_out) {
            __m256d drift = _mm256_max_pd(tbx, fl);
            __m256d d = _mm256_add_pd(
                _mm256_max_pd(ego, zero),
                _mm256_max_pd(_mm256_sub_pd(other, drift), zero));
            _mm256_storeu_pd(delay_out + i, d);
        }
        _mm256_storeu_pd(t1 + i, _mm256_blendv_pd(other, ego, mask));
        _mm256_storeu_pd(t2 + i, _mm256_blendv_pd(ego, other, mask));
    }
    if (i < n)
        fifo_scalar(n - i, gap + i, lane + i, delta_d, delta_s, floor, t1 + i,
                    t2 + i, delay_out ? delay_out + i : nullptr);
}

void fo_avx2(std::size_t n, const double* gap, const std::uint8_t* lane,
             double delta_d, double delta_s, double floor, double* t1,
             double* t2, double* delay_out) {
    const __m256d dd = _mm256_set1_pd(delta_d);
    const __m256d ds = _mm256_set1_pd(delta_s);
    const __m256d fl = _mm256_set1_pd(floor);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_castsi256_pd(lane_mask(lane + i));
        __m256d v1 = _mm256_loadu_pd(t1 + i);
        __m256d v2 = _mm256_loadu_pd(t2 + i);
        __m256d x = _mm256_loadu_pd(gap + i);
        __m256d ta = _mm256_blendv_pd(v2, v1, mask);
        __m256d tb = _mm256_blendv_pd(v1, v2, mask);

        __m256d ea = _mm256_max_pd(_mm256_sub_pd(_mm256_add_pd(ta, ds), x), zero);
        __m256d lb = _mm256_sub_pd(tb, x);
        __m256d ea_dd = _mm256_add_pd(ea, dd);
        __m256d overtake = _mm256_cmp_pd(lb, ea, _CMP_GT_OQ);
        __m256d push = _mm256_cmp_pd(lb, ea_dd, _CMP_LE_OQ);
        __m256d tb_over = _mm256_blendv_pd(lb, ea_dd, push);
        __m256d ego = _mm256_max_pd(ea, _mm256_add_pd(lb, dd));
        __m256d other = _mm256_max_pd(lb, fl);
        __m256d ta_new = _mm256_blendv_pd(ego, ea, overtake);
        __m256d tb_new = _mm256_blendv_pd(other, tb_over, overtake);

        if (delay_out) {
            __m256d drift = _mm256_max_pd(lb, fl);
            __m256d d = _mm256_add_pd(
                _mm256_max_pd(ta_new, zero),
                _mm256_max_pd(_mm256_sub_pd(tb_new, drift), zero));
            _mm256_storeu_pd(delay_out + i, d);
        }
        _mm256_storeu_pd(t1 + i, _mm256_blendv_pd(tb_new, ta_new, mask));
        _mm256_storeu_pd(t2 + i, _mm256_blendv_pd(ta_new, tb_new, mask));
    }
    if (i < n)
        fo_scalar(n - i, gap + i, lane + i, delta_d, delta_s, floor, t1 + i,
                  t2 + i, delay_out ? delay_out + i : nullptr);
}

}  // namespace crossflow::kernels

#else  // !__AVX2__: fall back to the scalar kernels so the symbol exists.

namespace crossflow::kernels {

void fifo_avx2(std::size_t n, const double* gap, const std::uint8_t* lane,
               double delta_d, double delta_s, double floor, double* t1,
               double* t2, double* delay_out) {
    fifo_scalar(n, gap, lane, delta_d, delta_s, floor, t1, t2, delay_out);
}

void fo_avx2(std::size_t n, const double* gap, const std::uint8_t* lane,
             double delta_d, double delta_s, double floor, double* t1,
             double* t2, double* delay_out) {
    fo_scalar(n, gap, lane, delta_d, delta_s, floor, t1, t2, delay_out);
}

}  // namespace crossflow::kernels

#endif
