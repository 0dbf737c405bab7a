#pragma once

#include <stdexcept>
#include <vector>

#include "params.hpp"

namespace crossflow {

struct VehicleArrival {
    double desired_time = 0;  // traffic-free passing time
    int lane = 1;
};

struct UnsortedInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Passing times of all vehicles seen so far, in arrival-index order.
struct EquilibriumSchedule {
    std::vector<double> passing_times;
};

// First-in-first-out: each vehicle passes after every earlier conflicting or
// same-lane vehicle; earlier vehicles' times never change.
EquilibriumSchedule fifo_schedule(const std::vector<VehicleArrival>& vehicles,
                                  const ConflictGraph& graph,
                                  const IntersectionParams& params);

// Flexible order: each arrival re-ranks all vehicles by current passing time
// (ties keep the smaller index first) and reassigns times in rank order, so a
// newcomer that can pass earlier than the other lane's tail slots in front.
EquilibriumSchedule fo_schedule(const std::vector<VehicleArrival>& vehicles,
                                const ConflictGraph& graph,
                                const IntersectionParams& params);

// Snapshot of passing times after each arrival (entry i holds i+1 times).
// FIFO snapshots are prefixes of the final schedule; FO times can change.
std::vector<std::vector<double>> fifo_schedule_history(
    const std::vector<VehicleArrival>& vehicles, const ConflictGraph& graph,
    const IntersectionParams& params);
std::vector<std::vector<double>> fo_schedule_history(
    const std::vector<VehicleArrival>& vehicles, const ConflictGraph& graph,
    const IntersectionParams& params);

// Per-lane delay after the first `count` arrivals: max passing time in the
// lane minus the newest vehicle's desired time, clamped below; lanes with no
// vehicle yet sit at the clamp floor.
std::vector<double> lane_delays(const std::vector<double>& passing_times,
                                const std::vector<VehicleArrival>& vehicles,
                                const IntersectionParams& params,
                                std::size_t count);

// Final delay of every vehicle: settled passing time minus desired time.
std::vector<double> vehicle_delays(const EquilibriumSchedule& schedule,
                                   const std::vector<VehicleArrival>& vehicles);

}  // namespace crossflow
