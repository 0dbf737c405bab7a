#include "crossflow/eds.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "crossflow/rng.hpp"

namespace crossflow {

namespace {

constexpr std::size_t kBlockParticles = 4096;
constexpr std::size_t kHistogramBins = 4096;

// One-sided 0.99 quantiles of Student's t, indexed by degrees of freedom
// (1-based up to 20; larger df clamps to the df=20 value, which only makes
// the divergence verdict more conservative).
constexpr double kT99[21] = {
    0.0,
    31.820515953773956, 6.964556734283583, 4.540702858698419,
    3.7469473879811366, 3.3649299989072743, 3.142668403290985,
    2.9979515668685277, 2.896459442760522,  2.8214379233005493,
    2.763769457447889,  2.718079442021448,  2.680997992459779,
    2.6503088378527137, 2.624494067560231,  2.6024802929901663,
    2.583487184917844,  2.5669339837199035, 2.5523796301575245,
    2.539483190735889,  2.5279770027415937};

// Advances particles [lo, hi) by `steps` arrivals, optionally recording each
// delay increment into the block-local histogram and per-particle sums.
void run_block(ParticleEnsemble& e, PropagateFn fn, std::uint64_t steps,
               std::size_t lo, std::size_t hi, DelayCollector* collector,
               EmpiricalDistribution* partial) {
    std::size_t n = hi - lo;
    std::vector<double> gap(n);
    std::vector<std::uint8_t> lane(n);
    std::vector<double> delay;
    double* delay_ptr = nullptr;
    if (collector) {
        delay.resize(n);
        delay_ptr = delay.data();
    }
    const double dd = e.params.delta_d;
    const double ds = e.params.delta_s;
    const double fl = e.params.clamp_floor();
    for (std::uint64_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            SplitMix64 r{e.rng[lo + i]};
            ArrivalEvent ev = sample_arrival(r, e.params);
            e.rng[lo + i] = r.state;
            gap[i] = ev.gap;
            lane[i] = static_cast<std::uint8_t>(ev.lane);
        }
        fn(n, gap.data(), lane.data(), dd, ds, fl, e.t1.data() + lo,
           e.t2.data() + lo, delay_ptr);
        if (collector) {
            for (std::size_t i = 0; i < n; ++i) {
                partial->add(delay[i]);
                collector->particle_sum[lo + i] += delay[i];
                collector->particle_events[lo + i] += 1;
            }
        }
    }
}

void propagate_impl(ParticleEnsemble& e, Policy policy, std::uint64_t steps,
                    const PropagateOptions& options, DelayCollector* collector) {
    if (steps == 0 || e.size() == 0) return;
    PropagateFn fn = propagate_kernel(policy, options.kernel);
    std::size_t n = e.size();
    std::size_t blocks = (n + kBlockParticles - 1) / kBlockParticles;

    std::vector<EmpiricalDistribution> partials;
    if (collector)
        for (std::size_t b = 0; b < blocks; ++b)
            partials.push_back(EmpiricalDistribution::histogram(
                collector->upper, kHistogramBins, collector->atom_sites));

    auto work = [&](std::size_t b) {
        std::size_t lo = b * kBlockParticles;
        std::size_t hi = std::min(n, lo + kBlockParticles);
        run_block(e, fn, steps, lo, hi, collector,
                  collector ? &partials[b] : nullptr);
    };

    unsigned threads = std::max(1u, options.threads);
    if (threads == 1 || blocks == 1) {
        for (std::size_t b = 0; b < blocks; ++b) work(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        unsigned workers = std::min<std::size_t>(threads, blocks);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t b = next.fetch_add(1); b < blocks;
                     b = next.fetch_add(1))
                    work(b);
            });
        for (auto& th : pool) th.join();
    }

    // Blocks merge in index order so the result never depends on scheduling.
    if (collector)
        for (std::size_t b = 0; b < blocks; ++b) collector->dist.merge(partials[b]);
    e.step_count += steps;
}

}  // namespace

ParticleEnsemble ParticleEnsemble::init(std::size_t particles, std::uint64_t seed,
                                        const IntersectionParams& params) {
    validate(params);
    ParticleEnsemble e;
    e.params = params;
    e.master_seed = seed;
    double f = params.clamp_floor();
    e.t1.assign(particles, f);
    e.t2.assign(particles, f);
    e.rng.resize(particles);
    for (std::size_t i = 0; i < particles; ++i)
        e.rng[i] = particle_stream(seed, i).state;
    return e;
}

DelayCollector DelayCollector::create(std::size_t particles, double upper,
                                      std::vector<double> atom_sites) {
    DelayCollector c;
    c.upper = upper;
    c.atom_sites = atom_sites;
    c.dist = EmpiricalDistribution::histogram(upper, kHistogramBins,
                                              std::move(atom_sites));
    c.particle_sum.assign(particles, 0.0);
    c.particle_events.assign(particles, 0);
    return c;
}

double DelayCollector::mean() const {
    double sum = 0;
    std::uint64_t events = 0;
    for (std::size_t i = 0; i < particle_sum.size(); ++i) {
        sum += particle_sum[i];
        events += particle_events[i];
    }
    return events ? sum / static_cast<double>(events) : 0.0;
}

double DelayCollector::stderr_of_mean() const {
    std::vector<double> means;
    means.reserve(particle_sum.size());
    for (std::size_t i = 0; i < particle_sum.size(); ++i)
        if (particle_events[i] > 0)
            means.push_back(particle_sum[i] /
                            static_cast<double>(particle_events[i]));
    if (means.size() < 2) return 0.0;
    double m = 0;
    for (double v : means) m += v;
    m /= static_cast<double>(means.size());
    double ss = 0;
    for (double v : means) ss += (v - m) * (v - m);
    double var = ss / static_cast<double>(means.size() - 1);
    return std::sqrt(var / static_cast<double>(means.size()));
}

void propagate(ParticleEnsemble& ensemble, Policy policy, std::uint64_t steps,
               const PropagateOptions& options) {
    propagate_impl(ensemble, policy, steps, options, nullptr);
}

void propagate_collect(ParticleEnsemble& ensemble, Policy policy,
                       std::uint64_t steps, const PropagateOptions& options,
                       DelayCollector& collector) {
    if (collector.particle_sum.size() != ensemble.size())
        throw std::invalid_argument("collector sized for a different ensemble");
    propagate_impl(ensemble, policy, steps, options, &collector);
}

EmpiricalDistribution vehicle_delay_snapshot(ParticleEnsemble& ensemble,
                                             Policy policy,
                                             const PropagateOptions& options) {
    std::size_t n = ensemble.size();
    std::vector<double> gap(n), delays(n);
    std::vector<std::uint8_t> lane(n);
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix64 r{ensemble.rng[i]};
        ArrivalEvent ev = sample_arrival(r, ensemble.params);
        ensemble.rng[i] = r.state;
        gap[i] = ev.gap;
        lane[i] = static_cast<std::uint8_t>(ev.lane);
    }
    PropagateFn fn = propagate_kernel(policy, options.kernel);
    fn(n, gap.data(), lane.data(), ensemble.params.delta_d,
       ensemble.params.delta_s, ensemble.params.clamp_floor(),
       ensemble.t1.data(), ensemble.t2.data(), delays.data());
    ensemble.step_count += 1;
    return EmpiricalDistribution::from_samples(std::move(delays));
}

LaneDelaySample lane_delay_distribution(const ParticleEnsemble& ensemble,
                                        int lane) {
    if (lane != 1 && lane != 2)
        throw std::invalid_argument("lane must be 1 or 2");
    std::vector<double> dominant;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        double own = lane == 1 ? ensemble.t1[i] : ensemble.t2[i];
        double other = lane == 1 ? ensemble.t2[i] : ensemble.t1[i];
        if (own > other) dominant.push_back(own);
    }
    LaneDelaySample out;
    out.mass = ensemble.size()
                   ? static_cast<double>(dominant.size()) /
                         static_cast<double>(ensemble.size())
                   : 0.0;
    out.dist = EmpiricalDistribution::from_samples(std::move(dominant));
    return out;
}

double stripe_fraction(const ParticleEnsemble& ensemble, double tol) {
    const double dd = ensemble.params.delta_d;
    const double ds = ensemble.params.delta_s;
    std::size_t on = 0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        double mn = std::min(ensemble.t1[i], ensemble.t2[i]);
        double diff = std::abs(ensemble.t1[i] - ensemble.t2[i]);
        bool hit = std::abs(mn + dd) <= tol;
        if (!hit) {
            if (ds > 0.0) {
                double k = std::round((diff - dd) / ds);
                hit = k >= 0.0 && std::abs(diff - (dd + k * ds)) <= tol;
            } else {
                hit = std::abs(diff - dd) <= tol;
            }
        }
        if (hit) ++on;
    }
    return ensemble.size()
               ? static_cast<double>(on) / static_cast<double>(ensemble.size())
               : 0.0;
}

DivergenceProbe divergence_probe(const IntersectionParams& params, Policy policy,
                                 std::uint64_t seed, const ProbeOptions& options,
                                 double slope_threshold) {
    if (options.windows < 5)
        throw std::invalid_argument("divergence probe needs at least 5 windows");
    ParticleEnsemble e = ParticleEnsemble::init(options.particles, seed, params);
    propagate(e, policy, options.burn_in, options.propagate);

    DivergenceProbe probe;
    std::vector<double> xs;
    for (std::size_t w = 0; w < options.windows; ++w) {
        double acc = 0;
        for (std::uint64_t k = 0; k < options.window_events; ++k) {
            propagate(e, policy, 1, options.propagate);
            double s = 0;
            for (std::size_t i = 0; i < e.size(); ++i) s += e.t1[i] + e.t2[i];
            acc += s / static_cast<double>(e.size());
        }
        probe.window_means.push_back(acc / static_cast<double>(options.window_events));
        xs.push_back(static_cast<double>(options.burn_in) +
                     (static_cast<double>(w) + 0.5) *
                         static_cast<double>(options.window_events));
    }

    // Ordinary least squares of window mean against arrival index.
    std::size_t w = options.windows;
    double xbar = 0, ybar = 0;
    for (std::size_t i = 0; i < w; ++i) {
        xbar += xs[i];
        ybar += probe.window_means[i];
    }
    xbar /= static_cast<double>(w);
    ybar /= static_cast<double>(w);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < w; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (probe.window_means[i] - ybar);
    }
    probe.slope = sxy / sxx;
    double sse = 0;
    for (std::size_t i = 0; i < w; ++i) {
        double resid = probe.window_means[i] - ybar - probe.slope * (xs[i] - xbar);
        sse += resid * resid;
    }
    double df = static_cast<double>(w - 2);
    double se = std::sqrt(sse / df / sxx);
    probe.t_stat = se > 0 ? probe.slope / se : (probe.slope > 0 ? 1e300 : 0.0);
    probe.t_critical = kT99[std::min<std::size_t>(w - 2, 20)];
    probe.diverging = probe.slope > slope_threshold && probe.t_stat > probe.t_critical;
    return probe;
}

bool stationarity_check(const IntersectionParams& params, Policy policy,
                        std::uint64_t seed, const ProbeOptions& options) {
    return !divergence_probe(params, policy, seed, options).diverging;
}

}  // namespace crossflow
