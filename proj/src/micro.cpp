#include "crossflow/micro.hpp"

#include <algorithm>
#include <numeric>

namespace crossflow {

namespace {

void check_sorted(const std::vector<VehicleArrival>& vehicles) {
    for (std::size_t i = 1; i < vehicles.size(); ++i)
        if (vehicles[i].desired_time < vehicles[i - 1].desired_time)
            throw UnsortedInput("arrivals must be ordered by desired time");
}

// Settle the newest arrival, first-in-first-out: it yields to every earlier
// conflicting vehicle and to its own lane's tail; nobody already settled moves.
void fifo_append(std::vector<double>& times,
                 const std::vector<VehicleArrival>& vehicles,
                 const ConflictGraph& graph, const IntersectionParams& p) {
    std::size_t i = times.size();
    double t = vehicles[i].desired_time;
    for (std::size_t j = 0; j < i; ++j) {
        if (vehicles[j].lane == vehicles[i].lane)
            t = std::max(t, times[j] + p.delta_s);
        else if (graph.conflicting(vehicles[j].lane, vehicles[i].lane))
            t = std::max(t, times[j] + p.delta_d);
    }
    times.push_back(t);
}

// Settle the newest arrival, flexible order: give it a provisional time that
// only respects its own lane's tail, rank everyone by current time (ties keep
// the smaller index first), then hand out times in rank order so a pushed
// vehicle passes its push down the line.
void fo_append(std::vector<double>& times,
               const std::vector<VehicleArrival>& vehicles,
               const ConflictGraph& graph, const IntersectionParams& p) {
    std::size_t i = times.size();
    double pending = vehicles[i].desired_time;
    for (std::size_t j = 0; j < i; ++j)
        if (vehicles[j].lane == vehicles[i].lane)
            pending = std::max(pending, times[j] + p.delta_s);
    times.push_back(pending);

    std::vector<std::size_t> rank(times.size());
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        return times[a] < times[b];
    });

    std::vector<double> settled(times.size());
    for (std::size_t qa = 0; qa < rank.size(); ++qa) {
        std::size_t a = rank[qa];
        double t = vehicles[a].desired_time;
        for (std::size_t qb = 0; qb < qa; ++qb) {
            std::size_t b = rank[qb];
            if (vehicles[b].lane == vehicles[a].lane)
                t = std::max(t, settled[b] + p.delta_s);
            else if (graph.conflicting(vehicles[b].lane, vehicles[a].lane))
                t = std::max(t, settled[b] + p.delta_d);
        }
        settled[a] = t;
    }
    times = std::move(settled);
}

}  // namespace

EquilibriumSchedule fifo_schedule(const std::vector<VehicleArrival>& vehicles,
                                  const ConflictGraph& graph,
                                  const IntersectionParams& params) {
    check_sorted(vehicles);
    EquilibriumSchedule out;
    out.passing_times.reserve(vehicles.size());
    for (std::size_t i = 0; i < vehicles.size(); ++i)
        fifo_append(out.passing_times, vehicles, graph, params);
    return out;
}

EquilibriumSchedule fo_schedule(const std::vector<VehicleArrival>& vehicles,
                                const ConflictGraph& graph,
                                const IntersectionParams& params) {
    check_sorted(vehicles);
    EquilibriumSchedule out;
    out.passing_times.reserve(vehicles.size());
    for (std::size_t i = 0; i < vehicles.size(); ++i)
        fo_append(out.passing_times, vehicles, graph, params);
    return out;
}

std::vector<std::vector<double>> fifo_schedule_history(
    const std::vector<VehicleArrival>& vehicles, const ConflictGraph& graph,
    const IntersectionParams& params) {
    check_sorted(vehicles);
    std::vector<std::vector<double>> history;
    std::vector<double> times;
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        fifo_append(times, vehicles, graph, params);
        history.push_back(times);
    }
    return history;
}

std::vector<std::vector<double>> fo_schedule_history(
    const std::vector<VehicleArrival>& vehicles, const ConflictGraph& graph,
    const IntersectionParams& params) {
    check_sorted(vehicles);
    std::vector<std::vector<double>> history;
    std::vector<double> times;
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        fo_append(times, vehicles, graph, params);
        history.push_back(times);
    }
    return history;
}

std::vector<double> lane_delays(const std::vector<double>& passing_times,
                                const std::vector<VehicleArrival>& vehicles,
                                const IntersectionParams& params,
                                std::size_t count) {
    if (count == 0 || count > passing_times.size() || count > vehicles.size())
        throw std::invalid_argument("lane_delays: count out of range");
    double now = vehicles[count - 1].desired_time;
    double floor = params.clamp_floor();
    std::vector<double> delays(2, floor);
    for (std::size_t j = 0; j < count; ++j) {
        int k = vehicles[j].lane;
        if (k < 1 || k > 2) throw std::invalid_argument("lane_delays: lane out of range");
        delays[k - 1] = std::max(delays[k - 1], passing_times[j] - now);
    }
    return delays;
}

std::vector<double> vehicle_delays(const EquilibriumSchedule& schedule,
                                   const std::vector<VehicleArrival>& vehicles) {
    std::vector<double> out(vehicles.size());
    for (std::size_t i = 0; i < vehicles.size(); ++i)
        out[i] = schedule.passing_times[i] - vehicles[i].desired_time;
    return out;
}

}  // namespace crossflow
