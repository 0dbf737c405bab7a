#include "crossflow/transition.hpp"

#include <algorithm>

#include "crossflow/step_math.hpp"

namespace crossflow {

namespace {

// Orients the state so the arriving lane comes first.
struct Oriented {
    double ta, tb;
};

Oriented orient(const DelayState& s, int lane) {
    return lane == 1 ? Oriented{s.t1, s.t2} : Oriented{s.t2, s.t1};
}

DelayState unorient(double ta, double tb, int lane) {
    return lane == 1 ? DelayState{ta, tb} : DelayState{tb, ta};
}

// Row index of the arrival map, arriving-lane form. Boundaries follow
// ascending-row order with strict inequalities widened on the later row, so
// ties land on the earlier row.
int fifo_region(double ta, double tb, double x, double dd, double ds) {
    bool cross_live = tb >= x - dd;  // other lane still blocks the crossing
    if (!cross_live) return ta < x - ds ? 1 : 2;
    return tb > ta ? 4 : 3;
}

int fo_region(double ta, double tb, double x, double dd, double ds) {
    double ea = std::max((ta + ds) - x, 0.0);
    double lb = tb - x;
    if (lb > ea) {  // newcomer slots in front of the other lane's tail
        if (lb <= ea + dd) return ta < x - ds ? 5 : 6;
        return ta < x - ds ? 7 : 8;
    }
    return fifo_region(ta, tb, x, dd, ds);
}

}  // namespace

std::pair<DelayState, MapRegion> fifo_step(const DelayState& state,
                                           const ArrivalEvent& event,
                                           const IntersectionParams& params) {
    Oriented o = orient(state, event.lane);
    step::Next n = step::fifo(o.ta, o.tb, event.gap, params.delta_d,
                              params.delta_s, params.clamp_floor());
    int region = fifo_region(o.ta, o.tb, event.gap, params.delta_d, params.delta_s);
    return {unorient(n.ta, n.tb, event.lane), MapRegion{Policy::Fifo, region}};
}

std::pair<DelayState, MapRegion> fo_step(const DelayState& state,
                                         const ArrivalEvent& event,
                                         const IntersectionParams& params) {
    Oriented o = orient(state, event.lane);
    step::Next n = step::fo(o.ta, o.tb, event.gap, params.delta_d,
                            params.delta_s, params.clamp_floor());
    int region = fo_region(o.ta, o.tb, event.gap, params.delta_d, params.delta_s);
    return {unorient(n.ta, n.tb, event.lane), MapRegion{Policy::Fo, region}};
}

std::pair<DelayState, MapRegion> policy_step(Policy policy, const DelayState& state,
                                             const ArrivalEvent& event,
                                             const IntersectionParams& params) {
    return policy == Policy::Fifo ? fifo_step(state, event, params)
                                  : fo_step(state, event, params);
}

double vehicle_delay_increment(const DelayState& before, const DelayState& after,
                               const ArrivalEvent& event,
                               const IntersectionParams& params) {
    Oriented b = orient(before, event.lane);
    Oriented a = orient(after, event.lane);
    return step::delay_increment(a.ta, b.tb, a.tb, event.gap, params.clamp_floor());
}

}  // namespace crossflow
