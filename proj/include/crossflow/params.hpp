#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crossflow {

enum class Policy { Fifo, Fo };

inline const char* policy_name(Policy p) { return p == Policy::Fifo ? "fifo" : "fo"; }

struct NonPositiveRate : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NegativeGap : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Arrival rates and temporal gaps of the two-lane intersection model.
struct IntersectionParams {
    double lambda1 = 0;
    double lambda2 = 0;
    double delta_d = 0;  // cross-direction gap
    double delta_s = 0;  // same-direction gap

    double lambda_total() const { return lambda1 + lambda2; }
    double ratio() const { return lambda1 / lambda2; }
    double lane_prob(int lane) const {
        return (lane == 1 ? lambda1 : lambda2) / lambda_total();
    }
    // Lowest representable lane delay. The same-direction gap keeps a lane's
    // own history relevant for delta_s seconds, so the floor must reach back
    // max(delta_d, delta_s), not just delta_d.
    double clamp_floor() const { return -std::max(delta_d, delta_s); }
};

inline IntersectionParams validate(IntersectionParams p) {
    if (!(p.lambda1 > 0) || !(p.lambda2 > 0))
        throw NonPositiveRate("arrival rates must be positive");
    if (p.delta_d < 0 || p.delta_s < 0)
        throw NegativeGap("temporal gaps must be nonnegative");
    return p;
}

inline IntersectionParams make_params(double lambda1, double lambda2,
                                      double delta_d, double delta_s) {
    return validate(IntersectionParams{lambda1, lambda2, delta_d, delta_s});
}

// Build from total density and ratio r = lambda1/lambda2.
inline IntersectionParams params_from_ratio(double lambda, double r,
                                            double delta_d, double delta_s) {
    double l2 = lambda / (1.0 + r);
    return make_params(lambda - l2, l2, delta_d, delta_s);
}

// Lane-delay vector T = (T^1, T^2), clamped below at the floor.
struct DelayState {
    double t1 = 0;
    double t2 = 0;

    static DelayState clamped(double t1, double t2, const IntersectionParams& p) {
        double f = p.clamp_floor();
        return DelayState{std::max(t1, f), std::max(t2, f)};
    }
    static DelayState empty_intersection(const IntersectionParams& p) {
        double f = p.clamp_floor();
        return DelayState{f, f};
    }
};

// Inter-arrival gap and lane of the next vehicle.
struct ArrivalEvent {
    double gap = 0;
    int lane = 1;
};

// Symmetric, irreflexive conflict relation over lanes 1..lane_count.
struct ConflictGraph {
    int lane_count = 2;
    std::vector<std::pair<int, int>> conflicts;

    bool conflicting(int a, int b) const {
        for (auto& [u, v] : conflicts)
            if ((u == a && v == b) || (u == b && v == a)) return true;
        return false;
    }
    static ConflictGraph two_lane() { return ConflictGraph{2, {{1, 2}}}; }
};

}  // namespace crossflow
