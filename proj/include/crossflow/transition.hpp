#pragma once

#include <stdexcept>
#include <utility>

#include "params.hpp"

namespace crossflow {

// Which row of the event map fired: 1-4 for FIFO, 1-8 for FO (5-8 are the
// overtake rows). Lane-2 events are classified after conjugation, so the
// index always refers to the arriving-lane form of the table.
struct MapRegion {
    Policy policy;
    int index;
};

struct NoRegionMatched : std::logic_error {
    using std::logic_error::logic_error;
};

std::pair<DelayState, MapRegion> fifo_step(const DelayState& state,
                                           const ArrivalEvent& event,
                                           const IntersectionParams& params);

std::pair<DelayState, MapRegion> fo_step(const DelayState& state,
                                         const ArrivalEvent& event,
                                         const IntersectionParams& params);

std::pair<DelayState, MapRegion> policy_step(Policy policy, const DelayState& state,
                                             const ArrivalEvent& event,
                                             const IntersectionParams& params);

// Clamp-aware per-event vehicle delay: the arriving vehicle's own delay plus
// the push inflicted on the other lane's last vehicle.
double vehicle_delay_increment(const DelayState& before, const DelayState& after,
                               const ArrivalEvent& event,
                               const IntersectionParams& params);

}  // namespace crossflow
