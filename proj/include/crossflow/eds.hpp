#pragma once

#include <cstdint>
#include <vector>

#include "empirical.hpp"
#include "kernels.hpp"
#include "params.hpp"

namespace crossflow {

// Structure-of-arrays bundle of independent delay-state trajectories, one
// self-seeded random stream per particle so results never depend on how the
// work is split.
struct ParticleEnsemble {
    IntersectionParams params;
    std::uint64_t master_seed = 0;
    std::uint64_t step_count = 0;
    std::vector<double> t1, t2;
    std::vector<std::uint64_t> rng;  // per-particle stream state

    static ParticleEnsemble init(std::size_t particles, std::uint64_t seed,
                                 const IntersectionParams& params);
    std::size_t size() const { return t1.size(); }
};

struct PropagateOptions {
    KernelKind kernel = KernelKind::Auto;
    unsigned threads = 1;
};

// Per-arrival vehicle-delay increments streamed into a histogram (exact
// counters at the atom sites) plus per-particle running sums, so the mean and
// its standard error come from independent per-particle averages.
struct DelayCollector {
    EmpiricalDistribution dist;
    std::vector<double> particle_sum;
    std::vector<std::uint64_t> particle_events;
    double upper = 0;                // histogram shape, reused for partials
    std::vector<double> atom_sites;

    static DelayCollector create(std::size_t particles, double upper,
                                 std::vector<double> atom_sites);
    double mean() const;
    double stderr_of_mean() const;  // sd of per-particle means / sqrt(P)
};

// Advances every particle `steps` arrivals.  Work is cut into fixed-size
// particle blocks and any cross-particle reduction is merged in block-index
// order, so output bytes are identical for any thread count.
void propagate(ParticleEnsemble& ensemble, Policy policy, std::uint64_t steps,
               const PropagateOptions& options = {});
void propagate_collect(ParticleEnsemble& ensemble, Policy policy,
                       std::uint64_t steps, const PropagateOptions& options,
                       DelayCollector& collector);

// One more arrival per particle, returning the increments as a sorted-sample
// distribution: one independent draw per particle.
EmpiricalDistribution vehicle_delay_snapshot(
    ParticleEnsemble& ensemble, Policy policy,
    const PropagateOptions& options = {});

// Sub-distribution of lane `lane`'s state delay on the event that it exceeds
// the other lane's; `mass` is the fraction of particles in that event.
struct LaneDelaySample {
    EmpiricalDistribution dist;
    double mass = 0;
};
LaneDelaySample lane_delay_distribution(const ParticleEnsemble& ensemble,
                                        int lane);

// Fraction of particles whose state sits on the comb the first-in-first-out
// law concentrates on: min(t1,t2) = -delta_d, or |t1-t2| = delta_d+n*delta_s
// for some integer n >= 0, to absolute tolerance `tol`.
double stripe_fraction(const ParticleEnsemble& ensemble, double tol = 1e-6);

struct ProbeOptions {
    std::size_t particles = 4096;
    std::uint64_t burn_in = 1000;
    std::size_t windows = 8;
    std::uint64_t window_events = 500;
    PropagateOptions propagate;
};

// Trend test on the ensemble mean of t1+t2: least-squares slope over window
// means versus arrival index, flagged as diverging when the slope exceeds
// `slope_threshold` with one-sided regression-t significance 0.01.
struct DivergenceProbe {
    bool diverging = false;
    double slope = 0;       // seconds per arrival
    double t_stat = 0;
    double t_critical = 0;  // one-sided 0.99 quantile, df = windows - 2
    std::vector<double> window_means;
};

DivergenceProbe divergence_probe(const IntersectionParams& params,
                                 Policy policy, std::uint64_t seed,
                                 const ProbeOptions& options = {},
                                 double slope_threshold = 1e-3);

// True when the probe finds no significant upward drift.
bool stationarity_check(const IntersectionParams& params, Policy policy,
                        std::uint64_t seed, const ProbeOptions& options = {});

}  // namespace crossflow
