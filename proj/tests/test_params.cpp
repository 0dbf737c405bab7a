#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "crossflow/empirical.hpp"
#include "crossflow/params.hpp"
#include "crossflow/rng.hpp"

using namespace crossflow;

TEST_CASE("make_params accepts valid rates and fills derived quantities") {
    auto p = make_params(0.3, 0.5, 2.0, 0.0);
    CHECK(p.lambda_total() == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(p.ratio() == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(p.lane_prob(1) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(p.lane_prob(2) == doctest::Approx(0.625).epsilon(1e-15));

    auto q = make_params(1.0, 1.0, 0.0, 0.0);
    CHECK(q.ratio() == 1.0);
    CHECK(q.lane_prob(1) == 0.5);
}

TEST_CASE("make_params rejects degenerate inputs") {
    CHECK_THROWS_AS(make_params(0.0, 1.0, 2.0, 0.0), NonPositiveRate);
    CHECK_THROWS_AS(make_params(1.0, -0.1, 2.0, 0.0), NonPositiveRate);
    CHECK_THROWS_AS(make_params(1.0, 1.0, -0.1, 0.0), NegativeGap);
    CHECK_THROWS_AS(make_params(1.0, 1.0, 2.0, -1.0), NegativeGap);
}

TEST_CASE("params_from_ratio splits the total rate") {
    auto p = params_from_ratio(1.0, 0.5, 2.0, 0.0);
    CHECK(p.lambda1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(p.lambda2 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    auto q = params_from_ratio(0.8, 0.6, 2.0, 0.0);
    CHECK(q.lambda1 == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(q.lambda2 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("clamp floor reaches back the larger of the two gaps") {
    CHECK(make_params(1, 1, 2.0, 1.0).clamp_floor() == -2.0);
    CHECK(make_params(1, 1, 1.0, 1.5).clamp_floor() == -1.5);
    CHECK(make_params(1, 1, 0.0, 0.0).clamp_floor() == 0.0);
}

TEST_CASE("delay states clamp below the floor") {
    auto p = make_params(1, 1, 2.0, 0.0);
    auto s = DelayState::clamped(-5.0, 1.0, p);
    CHECK(s.t1 == -2.0);
    CHECK(s.t2 == 1.0);
    auto e = DelayState::empty_intersection(p);
    CHECK(e.t1 == -2.0);
    CHECK(e.t2 == -2.0);
}

TEST_CASE("two-lane conflict graph") {
    auto g = ConflictGraph::two_lane();
    CHECK(g.lane_count == 2);
    CHECK(g.conflicting(1, 2));
    CHECK(g.conflicting(2, 1));
    CHECK_FALSE(g.conflicting(1, 1));
    CHECK_FALSE(g.conflicting(2, 2));
}

TEST_CASE("policy names") {
    CHECK(std::string(policy_name(Policy::Fifo)) == "fifo");
    CHECK(std::string(policy_name(Policy::Fo)) == "fo");
}

TEST_CASE("splitmix streams are deterministic and unit draws stay in (0,1]") {
    SplitMix64 a{42}, b{42};
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    SplitMix64 c{7};
    for (int i = 0; i < 10000; ++i) {
        double u = c.next_unit();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
}

TEST_CASE("particle substreams differ by index and repeat by seed") {
    auto s0 = particle_stream(99, 0);
    auto s1 = particle_stream(99, 1);
    auto s0b = particle_stream(99, 0);
    CHECK(s0.state != s1.state);
    CHECK(s0.state == s0b.state);
    CHECK(s0.next() == s0b.next());
}

TEST_CASE("arrival sampling matches the exponential gap and lane split") {
    auto p = make_params(0.3, 0.5, 2.0, 0.0);
    SplitMix64 rng{2024};
    const int n = 1'000'000;
    double gap_sum = 0;
    int lane1 = 0;
    for (int i = 0; i < n; ++i) {
        ArrivalEvent ev = sample_arrival(rng, p);
        CHECK(ev.gap > 0.0);
        gap_sum += ev.gap;
        lane1 += ev.lane == 1;
    }
    CHECK(gap_sum / n == doctest::Approx(1.25).epsilon(0.008));
    CHECK(static_cast<double>(lane1) / n == doctest::Approx(0.375).epsilon(0.0053));
}

TEST_CASE("arrival sampling repeats exactly under a fixed seed") {
    auto p = make_params(0.3, 0.5, 2.0, 0.0);
    SplitMix64 a{31415}, b{31415};
    for (int i = 0; i < 1000; ++i) {
        ArrivalEvent ea = sample_arrival(a, p);
        ArrivalEvent eb = sample_arrival(b, p);
        CHECK(ea.gap == eb.gap);
        CHECK(ea.lane == eb.lane);
    }
}

TEST_CASE("gap sampler passes a chi-square fit against the exponential law") {
    auto p = make_params(0.3, 0.5, 2.0, 0.0);
    const std::size_t n = 100'000;
    const std::size_t cells = 64;
    // Equiprobable cells of Exponential(lambda): edges at -log(1-k/cells)/lambda.
    std::vector<std::size_t> counts(cells, 0);
    SplitMix64 rng{555};
    double lam = p.lambda_total();
    for (std::size_t i = 0; i < n; ++i) {
        double gap = sample_arrival(rng, p).gap;
        double u = 1.0 - std::exp(-lam * gap);  // probability transform
        auto cell = static_cast<std::size_t>(u * cells);
        if (cell >= cells) cell = cells - 1;
        ++counts[cell];
    }
    double expected = static_cast<double>(n) / cells;
    double stat = 0;
    for (std::size_t c : counts) {
        double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    CHECK(stat < chi_square_critical(0.01, cells - 1));
}
