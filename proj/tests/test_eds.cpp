#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "crossflow/analytic.hpp"
#include "crossflow/eds.hpp"
#include "crossflow/rng.hpp"

using namespace crossflow;

namespace {

bool same_state(const ParticleEnsemble& a, const ParticleEnsemble& b) {
    return a.t1 == b.t1 && a.t2 == b.t2 && a.rng == b.rng &&
           a.step_count == b.step_count;
}

}  // namespace

TEST_CASE("ensemble initialization: empty intersection, self-seeded streams") {
    auto p = make_params(0.3, 0.5, 2, 1);
    auto e = ParticleEnsemble::init(1000, 77, p);
    CHECK(e.size() == 1000);
    CHECK(e.step_count == 0);
    CHECK(e.master_seed == 77);
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(e.t1[i] == p.clamp_floor());
        CHECK(e.t2[i] == p.clamp_floor());
        CHECK(e.rng[i] == particle_stream(77, i).state);
    }
    // Propagating zero arrivals changes nothing.
    auto before = e;
    propagate(e, Policy::Fifo, 0);
    CHECK(same_state(e, before));
}

TEST_CASE("propagation is byte-identical across threads and kernels") {
    auto p = make_params(0.3, 0.5, 2, 0.7);
    for (auto policy : {Policy::Fifo, Policy::Fo}) {
        auto a = ParticleEnsemble::init(10000, 5, p);
        auto b = ParticleEnsemble::init(10000, 5, p);
        propagate(a, policy, 400, {KernelKind::Scalar, 1});
        propagate(b, policy, 400, {KernelKind::Scalar, 4});
        CHECK(same_state(a, b));
        if (avx2_available()) {
            auto c = ParticleEnsemble::init(10000, 5, p);
            propagate(c, policy, 400, {KernelKind::Avx2, 3});
            CHECK(same_state(a, c));
        }
        auto d = ParticleEnsemble::init(10000, 5, p);
        propagate(d, policy, 400, {KernelKind::Auto, 2});
        CHECK(same_state(a, d));
    }
}

TEST_CASE("collector bookkeeping and thread-count invariance") {
    auto p = make_params(0.3, 0.5, 2, 0);
    auto e1 = ParticleEnsemble::init(500, 9, p);
    auto c1 = DelayCollector::create(500, 3.0, {0.0, 2.0});
    propagate_collect(e1, Policy::Fo, 80, {KernelKind::Auto, 1}, c1);
    CHECK(c1.dist.count() == 500 * 80);
    std::uint64_t events = 0;
    double sum = 0;
    for (std::size_t i = 0; i < 500; ++i) {
        events += c1.particle_events[i];
        sum += c1.particle_sum[i];
        CHECK(c1.particle_events[i] == 80);
    }
    CHECK(events == c1.dist.count());
    CHECK(c1.mean() == doctest::Approx(sum / events).epsilon(1e-12));
    CHECK(c1.mean() == doctest::Approx(c1.dist.mean()).epsilon(1e-12));
    CHECK(c1.stderr_of_mean() > 0.0);

    auto e2 = ParticleEnsemble::init(500, 9, p);
    auto c2 = DelayCollector::create(500, 3.0, {0.0, 2.0});
    propagate_collect(e2, Policy::Fo, 80, {KernelKind::Auto, 4}, c2);
    CHECK(same_state(e1, e2));
    CHECK(c1.particle_sum == c2.particle_sum);
    CHECK(c1.mean() == c2.mean());
    for (double t : {0.0, 0.3, 1.1, 2.0, 2.9}) CHECK(c1.dist.cdf(t) == c2.dist.cdf(t));
}

TEST_CASE("first arrival into an empty intersection is never delayed") {
    auto p = make_params(0.4, 0.9, 1.5, 0.8);
    for (auto policy : {Policy::Fifo, Policy::Fo}) {
        auto e = ParticleEnsemble::init(10000, 3, p);
        auto snap = vehicle_delay_snapshot(e, policy);
        CHECK(snap.count() == 10000);
        CHECK(snap.atom_mass(0.0) == 1.0);
        CHECK(e.step_count == 1);
    }
}

TEST_CASE("flexible-order states stay on the crossing-gap comb") {
    auto p = make_params(0.3, 0.5, 2, 0);
    auto e = ParticleEnsemble::init(20000, 11, p);
    propagate(e, Policy::Fo, 1000);
    for (std::size_t i = 0; i < e.size(); ++i) {
        double mx = std::max(e.t1[i], e.t2[i]);
        double mn = std::min(e.t1[i], e.t2[i]);
        CHECK(std::abs((mx - mn) - 2.0) <= 1e-9);
        CHECK(mx <= 2.0 + 1e-9);
        CHECK(mn <= 1e-9);
        CHECK(mn >= -2.0 - 1e-9);
    }
}

TEST_CASE("first-in-first-out states concentrate on the comb") {
    auto p = make_params(0.25, 0.25, 2, 0);
    auto e = ParticleEnsemble::init(20000, 13, p);
    propagate(e, Policy::Fifo, 1500);
    CHECK(stripe_fraction(e) >= 0.999);

    // Distributional stationarity: per-arrival delay snapshots taken 500
    // arrivals apart agree within twin DKW bands.
    auto s1 = vehicle_delay_snapshot(e, Policy::Fifo);
    propagate(e, Policy::Fifo, 500);
    auto s2 = vehicle_delay_snapshot(e, Policy::Fifo);
    double band = 2.0 * dkw_epsilon(20000, 0.005);
    double ks = s1.ks_distance([&](double t) { return s2.cdf(t); },
                               [&](double t) { return s2.cdf_left(t); });
    CHECK(ks <= band);
}

TEST_CASE("comb geometry separates the policies when both gaps are active") {
    auto p = make_params(0.1, 0.5, 2, 1);
    auto ff = ParticleEnsemble::init(10000, 21, p);
    propagate(ff, Policy::Fifo, 2500);
    CHECK(stripe_fraction(ff) >= 0.99);
    auto fo = ParticleEnsemble::init(10000, 21, p);
    propagate(fo, Policy::Fo, 2500);
    CHECK(stripe_fraction(fo) < 0.99);
}

TEST_CASE("first-in-first-out lane dominance follows the arrival shares") {
    auto p = params_from_ratio(0.5, 0.5, 2, 0);
    auto e = ParticleEnsemble::init(40000, 31, p);
    propagate(e, Policy::Fifo, 1200);
    auto l1 = lane_delay_distribution(e, 1);
    auto l2 = lane_delay_distribution(e, 2);
    CHECK(l1.mass == doctest::Approx(1.0 / 3.0).epsilon(0.06));
    CHECK(l1.mass + l2.mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(lane_delay_distribution(e, 3), std::invalid_argument);
}

TEST_CASE("flexible-order simulation reproduces the flow-balance closure") {
    auto p = make_params(0.3, 0.5, 2, 0);
    auto e = ParticleEnsemble::init(100000, 4242, p);
    propagate(e, Policy::Fo, 1200);

    // Lane-1 dominance mass matches the flow-balance value and stays well
    // away from the arrival share the lane-share closure would impose.
    auto l1 = lane_delay_distribution(e, 1);
    CHECK(std::abs(l1.mass - 0.44984690693016341) < 0.02);
    CHECK(std::abs(l1.mass - 0.375) > 0.03);

    // Normalized dominant-lane laws: close to flow-balance, far from
    // lane-share.
    auto fb1 = fo_lane_distribution(p, 1, FoSolution::FlowBalance);
    auto ls1 = fo_lane_distribution(p, 1, FoSolution::LaneShare);
    double fb_mass = fb1.total_mass(), ls_mass = ls1.total_mass();
    double ks_fb = l1.dist.ks_distance(
        [&](double t) { return fb1.cdf(t) / fb_mass; },
        [&](double t) { return fb1.cdf_left(t) / fb_mass; });
    double ks_ls = l1.dist.ks_distance(
        [&](double t) { return ls1.cdf(t) / ls_mass; },
        [&](double t) { return ls1.cdf_left(t) / ls_mass; });
    CHECK(ks_fb <= 0.015);
    CHECK(ks_ls > 0.03);

    // Per-arrival delay increments against the vehicle laws.
    auto col = DelayCollector::create(e.size(), 2.0, {0.0, 2.0});
    propagate_collect(e, Policy::Fo, 400, {}, col);
    auto vfb = fo_vehicle_delay(p, FoSolution::FlowBalance);
    auto vls = fo_vehicle_delay(p, FoSolution::LaneShare);
    double ksv = col.dist.ks_distance([&](double t) { return vfb.cdf(t); },
                                      [&](double t) { return vfb.cdf_left(t); });
    CHECK(ksv <= 0.01);
    CHECK(std::abs(col.dist.atom_mass(0.0) - vfb.atom_mass(0.0)) <= 0.005);
    CHECK(std::abs(col.dist.atom_mass(0.0) - vls.atom_mass(0.0)) >= 0.008);
    CHECK(std::abs(col.mean() - vfb.mean()) <= 0.01);
}

TEST_CASE("unit-density flexible-order summary statistics") {
    auto p = params_from_ratio(1.0, 0.5, 2, 0);
    auto e = ParticleEnsemble::init(100000, 97, p);
    propagate(e, Policy::Fo, 1000);
    auto col = DelayCollector::create(e.size(), 2.0, {0.0, 2.0});
    propagate_collect(e, Policy::Fo, 300, {}, col);
    CHECK(std::abs(col.dist.atom_mass(0.0) - 0.30890424038181323) < 0.01);
    CHECK(std::abs(col.mean() - 0.73625723074316614) < 0.01);
}

TEST_CASE("nearly empty road: almost every vehicle crosses undelayed") {
    // At equal lane rates the zero-delay mass sits exactly on the 0.99 line
    // (delayed fraction ~ (2*l1*l2/lam^2)(1 - exp(-lam*dd))), so pin that
    // boundary analytically and give the sampled check an unequal split.
    auto sym = fifo_vehicle_delay(make_params(0.005, 0.005, 2, 0), FifoApprox::Approx1);
    CHECK(sym.atom_mass(0.0) >= 0.99);
    CHECK(sym.atom_mass(0.0) <= 0.9901);

    auto p = params_from_ratio(0.01, 0.5, 2, 0);
    auto e = ParticleEnsemble::init(50000, 1234, p);
    propagate(e, Policy::Fifo, 50);
    auto col = DelayCollector::create(e.size(), 2.5, {0.0, 2.0});
    propagate_collect(e, Policy::Fifo, 400, {}, col);
    CHECK(col.dist.atom_mass(0.0) >= 0.99);
}

TEST_CASE("divergence probe separates stable and saturated regimes") {
    ProbeOptions opt;
    CHECK(stationarity_check(params_from_ratio(0.5, 0.5, 2, 0), Policy::Fifo, 7, opt));
    auto probe = divergence_probe(params_from_ratio(1.2, 0.5, 2, 0), Policy::Fifo, 7, opt);
    CHECK(probe.diverging);
    CHECK(probe.slope > 1e-3);
    CHECK(probe.t_stat > probe.t_critical);
    CHECK(probe.t_critical == doctest::Approx(3.142668403290985).epsilon(1e-12));
    CHECK(probe.window_means.size() == opt.windows);
    CHECK(stationarity_check(params_from_ratio(4.0, 0.5, 2, 0), Policy::Fo, 7, opt));

    ProbeOptions bad;
    bad.windows = 4;
    CHECK_THROWS_AS(divergence_probe(params_from_ratio(0.5, 0.5, 2, 0), Policy::Fifo,
                                     7, bad),
                    std::invalid_argument);
}
