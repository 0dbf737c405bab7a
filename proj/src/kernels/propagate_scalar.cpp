#include "crossflow/kernels.hpp"
#include "crossflow/step_math.hpp"

namespace crossflow::kernels {

void fifo_scalar(std::size_t n, const double* gap, const std::uint8_t* lane,
                 double delta_d, double delta_s, double floor, double* t1,
                 double* t2, double* delay_out) {
    for (std::size_t i = 0; i < n; ++i) {
        bool lane1 = lane[i] == 1;
        double ta = lane1 ? t1[i] : t2[i];
        double tb = lane1 ? t2[i] : t1[i];
        step::Next nx = step::fifo(ta, tb, gap[i], delta_d, delta_s, floor);
        if (delay_out)
            delay_out[i] = step::delay_increment(nx.ta, tb, nx.tb, gap[i], floor);
        t1[i] = lane1 ? nx.ta : nx.tb;
        t2[i] = lane1 ? nx.tb : nx.ta;
    }
}

void fo_scalar(std::size_t n, const double* gap, const std::uint8_t* lane,
               double delta_d, double delta_s, double floor, double* t1,
               double* t2, double* delay_out) {
    for (std::size_t i = 0; i < n; ++i) {
        bool lane1 = lane[i] == 1;
        double ta = lane1 ? t1[i] : t2[i];
        double tb = lane1 ? t2[i] : t1[i];
        step::Next nx = step::fo(ta, tb, gap[i], delta_d, delta_s, floor);
        if (delay_out)
            delay_out[i] = step::delay_increment(nx.ta, tb, nx.tb, gap[i], floor);
        t1[i] = lane1 ? nx.ta : nx.tb;
        t2[i] = lane1 ? nx.tb : nx.ta;
    }
}

}  // namespace crossflow::kernels
