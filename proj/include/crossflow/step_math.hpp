#pragma once

#include <algorithm>

namespace crossflow::step {

// Ego/other update rules shared by the step functions and the batch kernels.
// `ta`/`tb` are the arriving lane's delay and the other lane's delay. The
// operation order here is mirrored verbatim by the SIMD kernels; the math is
// adds/subs/max only, so scalar and vector paths agree bit for bit.

struct Next {
    double ta;      // arriving lane after the event
    double tb;      // other lane after the event
};

inline Next fifo(double ta, double tb, double x, double dd, double ds, double floor) {
    double ea_raw = (ta + ds) - x;
    double cross = (tb - x) + dd;
    double ego = std::max(std::max(ea_raw, cross), 0.0);
    double other = std::max(tb - x, floor);
    return {ego, other};
}

inline Next fo(double ta, double tb, double x, double dd, double ds, double floor) {
    double ea = std::max((ta + ds) - x, 0.0);
    double lb = tb - x;
    if (lb > ea) {                      // new vehicle passes first
        if (lb <= ea + dd)              // displaced vehicle must yield
            return {ea, ea + dd};
        return {ea, lb};
    }
    double ego = std::max(ea, lb + dd);
    double other = std::max(lb, floor);
    return {ego, other};
}

// Delay introduced by the event: the new vehicle's own delay plus whatever the
// other lane's last vehicle was pushed beyond its undisturbed drift.
inline double delay_increment(double ta_after, double tb_before, double tb_after,
                              double x, double floor) {
    double drift = std::max(tb_before - x, floor);
    return std::max(ta_after, 0.0) + std::max(tb_after - drift, 0.0);
}

}  // namespace crossflow::step
