// crossflow: delay laws at a two-lane unmanaged intersection, computed two
// ways (closed form and event-driven simulation) with CSV/JSON emission.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crossflow/analytic.hpp"
#include "crossflow/eds.hpp"
#include "crossflow/empirical.hpp"
#include "crossflow/kernels.hpp"
#include "crossflow/params.hpp"

namespace {

using crossflow::IntersectionParams;
using crossflow::Policy;
using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

struct Options {
    std::string policy;
    double lambda1 = NAN, lambda2 = NAN, lambda = NAN, ratio = NAN;
    double delta_d = NAN, delta_s = 0.0;
    std::uint64_t particles = 10000, steps = 500, burn_in = 1000;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned threads = 1;
    int approx = 1;
    std::string kernel = "auto";
    std::string grid, out, cdf_out, config_path, format = "csv";
    std::vector<std::string> vary;
};

struct OptionHandles {
    std::map<std::string, CLI::Option*> byname;
};

OptionHandles add_shared(CLI::App* cmd, Options& o) {
    OptionHandles h;
    h.byname["policy"] =
        cmd->add_option("--policy", o.policy, "queueing policy")
            ->check(CLI::IsMember({"fifo", "fo"}));
    h.byname["lambda1"] = cmd->add_option("--lambda1", o.lambda1, "lane 1 rate");
    h.byname["lambda2"] = cmd->add_option("--lambda2", o.lambda2, "lane 2 rate");
    h.byname["lambda"] = cmd->add_option("--lambda", o.lambda, "total rate");
    h.byname["ratio"] = cmd->add_option("--ratio", o.ratio, "rate ratio lambda1/lambda2");
    h.byname["delta-d"] = cmd->add_option("--delta-d", o.delta_d, "cross-direction gap");
    h.byname["delta-s"] = cmd->add_option("--delta-s", o.delta_s, "same-direction gap");
    h.byname["particles"] = cmd->add_option("--particles", o.particles, "ensemble size");
    h.byname["steps"] = cmd->add_option("--steps", o.steps, "recorded arrivals per particle");
    h.byname["burn-in"] = cmd->add_option("--burn-in", o.burn_in, "warmup arrivals per particle");
    h.byname["seed"] = cmd->add_option("--seed", o.seed, "master seed (fallback: CROSSFLOW_SEED)");
    h.byname["threads"] = cmd->add_option("--threads", o.threads, "worker threads");
    h.byname["approx"] =
        cmd->add_option("--approx", o.approx, "first-in-first-out tail closure (1 or 2)")
            ->check(CLI::IsMember({1, 2}));
    h.byname["kernel"] = cmd->add_option("--kernel", o.kernel, "propagation kernel")
                             ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
    h.byname["grid"] = cmd->add_option("--grid", o.grid, "CDF grid start:step:stop");
    h.byname["out"] = cmd->add_option("--out", o.out, "output CSV path");
    h.byname["cdf-out"] = cmd->add_option("--cdf-out", o.cdf_out, "CDF CSV path (simulate)");
    h.byname["config"] = cmd->add_option("--config", o.config_path, "JSON config file");
    h.byname["format"] = cmd->add_option("--format", o.format, "report format")
                             ->check(CLI::IsMember({"csv", "json"}));
    h.byname["vary"] = cmd->add_option("--vary", o.vary,
                                       "sweep axis name=start:step:stop (repeatable)");
    return h;
}

// Config file supplies any flag the command line left unset.
void merge_config(Options& o, const OptionHandles& h) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + o.config_path);
    json cfg = json::parse(in);
    auto unset = [&](const char* key) {
        auto it = h.byname.find(key);
        return cfg.contains(key) && it != h.byname.end() && it->second->count() == 0;
    };
    if (unset("policy")) o.policy = cfg["policy"].get<std::string>();
    if (unset("lambda1")) o.lambda1 = cfg["lambda1"].get<double>();
    if (unset("lambda2")) o.lambda2 = cfg["lambda2"].get<double>();
    if (unset("lambda")) o.lambda = cfg["lambda"].get<double>();
    if (unset("ratio")) o.ratio = cfg["ratio"].get<double>();
    if (unset("delta-d")) o.delta_d = cfg["delta-d"].get<double>();
    if (unset("delta-s")) o.delta_s = cfg["delta-s"].get<double>();
    if (unset("particles")) o.particles = cfg["particles"].get<std::uint64_t>();
    if (unset("steps")) o.steps = cfg["steps"].get<std::uint64_t>();
    if (unset("burn-in")) o.burn_in = cfg["burn-in"].get<std::uint64_t>();
    if (unset("seed")) {
        o.seed = cfg["seed"].get<std::uint64_t>();
        o.seed_given = true;
    }
    if (unset("threads")) o.threads = cfg["threads"].get<unsigned>();
    if (unset("approx")) o.approx = cfg["approx"].get<int>();
    if (unset("kernel")) o.kernel = cfg["kernel"].get<std::string>();
    if (unset("grid")) o.grid = cfg["grid"].get<std::string>();
    if (unset("out")) o.out = cfg["out"].get<std::string>();
    if (unset("cdf-out")) o.cdf_out = cfg["cdf-out"].get<std::string>();
    if (unset("format")) o.format = cfg["format"].get<std::string>();
    if (unset("vary")) o.vary = cfg["vary"].get<std::vector<std::string>>();
}

void resolve_seed(Options& o, const OptionHandles& h) {
    if (h.byname.at("seed")->count() > 0) o.seed_given = true;
    if (!o.seed_given) {
        if (const char* env = std::getenv("CROSSFLOW_SEED")) {
            o.seed = std::strtoull(env, nullptr, 10);
            o.seed_given = true;
        }
    }
}

IntersectionParams build_params(const Options& o) {
    bool direct = !std::isnan(o.lambda1) || !std::isnan(o.lambda2);
    bool ratioed = !std::isnan(o.lambda) || !std::isnan(o.ratio);
    if (direct == ratioed)
        throw std::invalid_argument(
            "give rates as either --lambda1/--lambda2 or --lambda/--ratio");
    if (std::isnan(o.delta_d)) throw std::invalid_argument("--delta-d is required");
    if (direct) {
        if (std::isnan(o.lambda1) || std::isnan(o.lambda2))
            throw std::invalid_argument("--lambda1 and --lambda2 must both be given");
        return crossflow::make_params(o.lambda1, o.lambda2, o.delta_d, o.delta_s);
    }
    if (std::isnan(o.lambda) || std::isnan(o.ratio))
        throw std::invalid_argument("--lambda and --ratio must both be given");
    return crossflow::params_from_ratio(o.lambda, o.ratio, o.delta_d, o.delta_s);
}

Policy parse_policy(const Options& o) {
    if (o.policy == "fifo") return Policy::Fifo;
    if (o.policy == "fo") return Policy::Fo;
    throw std::invalid_argument("--policy is required (fifo or fo)");
}

crossflow::KernelKind parse_kernel(const Options& o) {
    if (o.kernel == "scalar") return crossflow::KernelKind::Scalar;
    if (o.kernel == "avx2") return crossflow::KernelKind::Avx2;
    return crossflow::KernelKind::Auto;
}

std::vector<double> parse_grid(const std::string& spec) {
    double start, step, stop;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &step, &stop) != 3)
        throw std::invalid_argument("grid must be start:step:stop");
    if (!(step > 0)) throw std::invalid_argument("grid step must be > 0");
    if (stop < start) throw std::invalid_argument("grid range is empty");
    auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = start + static_cast<double>(i) * step;
    return g;
}

void emit_report(const json& report, const std::string& format) {
    if (format == "json") {
        std::cout << report.dump(2) << "\n";
        return;
    }
    std::cout << "key,value\n";
    for (auto& [key, value] : report.items()) {
        if (value.is_number_float())
            std::cout << key << "," << fmt(value.get<double>()) << "\n";
        else if (value.is_string())
            std::cout << key << "," << value.get<std::string>() << "\n";
        else
            std::cout << key << "," << value.dump() << "\n";
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

void put_params(json& r, const IntersectionParams& p) {
    r["lambda1"] = p.lambda1;
    r["lambda2"] = p.lambda2;
    r["delta_d"] = p.delta_d;
    r["delta_s"] = p.delta_s;
    r["margin_fifo"] = crossflow::fifo_convergence_margin(p);
    r["margin_fo"] = crossflow::fo_convergence_margin(p);
}

int cmd_analyze(const Options& o) {
    IntersectionParams p = build_params(o);
    Policy policy = parse_policy(o);
    json r;
    r["command"] = "analyze";
    r["policy"] = o.policy;
    put_params(r, p);
    crossflow::SteadyStateDistribution dist;
    if (policy == Policy::Fifo) {
        auto approx = o.approx == 2 ? crossflow::FifoApprox::Approx2
                                    : crossflow::FifoApprox::Approx1;
        if (crossflow::fifo_convergence_margin(p) <= 0.0)
            throw crossflow::UnstableRegime(
                "Unstable: first-in-first-out margin = " +
                fmt(crossflow::fifo_convergence_margin(p)) +
                " <= 0; no steady state at these rates");
        dist = crossflow::fifo_vehicle_delay(p, approx);
        r["approx"] = o.approx;
        if (p.delta_d > 0.0) {
            auto root = crossflow::solve_characteristic_root(p);
            r["root_a"] = root.value;
            r["root_residual"] = root.residual;
        }
        auto [g1, g2] = crossflow::fifo_ghat0(p, approx);
        r["ghat1_0"] = g1;
        r["ghat2_0"] = g2;
    } else {
        crossflow::FoConstants c = crossflow::fo_constants(p);
        dist = crossflow::fo_vehicle_delay(p);
        r["c1"] = c.c1;
        r["c2"] = c.c2;
        r["g1_0"] = c.g1_zero;
        r["g2_0"] = c.g2_zero;
        r["g1_dd"] = c.g1_dd;
        r["g2_dd"] = c.g2_dd;
    }
    r["p0"] = dist.cdf(0.0);
    r["p_at_gap"] = dist.cdf(p.delta_d);
    r["expected_delay"] = dist.mean();
    r["total_mass"] = dist.total_mass();
    if (!o.grid.empty() && !o.out.empty()) {
        auto grid = parse_grid(o.grid);
        std::ofstream f = open_out(o.out);
        f << "t,P_analytic,P_eds\n";
        for (double t : grid) f << fmt(t) << "," << fmt(dist.cdf(t)) << ",\n";
        r["cdf_csv"] = o.out;
    }
    emit_report(r, o.format);
    return 0;
}

int cmd_simulate(const Options& o) {
    IntersectionParams p = build_params(o);
    Policy policy = parse_policy(o);
    crossflow::PropagateOptions popt{parse_kernel(o), o.threads};
    auto ensemble = crossflow::ParticleEnsemble::init(o.particles, o.seed, p);
    crossflow::propagate(ensemble, policy, o.burn_in, popt);

    double upper = std::max({4.0 * (p.delta_d + p.delta_s), 64.0 / p.lambda_total(), 1.0});
    std::vector<double> atoms{0.0};
    if (p.delta_d > 0.0) atoms.push_back(p.delta_d);
    auto collector = crossflow::DelayCollector::create(o.particles, upper, atoms);
    crossflow::propagate_collect(ensemble, policy, o.steps, popt, collector);

    auto lane1 = crossflow::lane_delay_distribution(ensemble, 1);
    auto lane2 = crossflow::lane_delay_distribution(ensemble, 2);
    auto probe = crossflow::divergence_probe(p, policy, o.seed,
                                             crossflow::ProbeOptions{});

    json r;
    r["command"] = "simulate";
    r["policy"] = o.policy;
    put_params(r, p);
    r["particles"] = o.particles;
    r["steps"] = o.steps;
    r["burn_in"] = o.burn_in;
    r["seed"] = o.seed;
    r["threads"] = o.threads;
    r["kernel"] = crossflow::kernel_name(crossflow::resolve_kernel(parse_kernel(o)));
    r["expected_delay"] = collector.mean();
    r["expected_delay_stderr"] = collector.stderr_of_mean();
    r["p0"] = collector.dist.atom_mass(0.0);
    if (p.delta_d > 0.0) r["p_atom_at_gap"] = collector.dist.atom_mass(p.delta_d);
    r["lane1_mass"] = lane1.mass;
    r["lane2_mass"] = lane2.mass;
    r["lane1_atom0"] = lane1.mass * lane1.dist.atom_mass(0.0);
    r["lane2_atom0"] = lane2.mass * lane2.dist.atom_mass(0.0);
    if (p.delta_d > 0.0) {
        r["lane1_atom_at_gap"] = lane1.mass * lane1.dist.atom_mass(p.delta_d);
        r["lane2_atom_at_gap"] = lane2.mass * lane2.dist.atom_mass(p.delta_d);
    }
    r["stripe_fraction"] = crossflow::stripe_fraction(ensemble);
    r["diverging"] = probe.diverging;
    r["drift_slope"] = probe.slope;
    r["drift_t_stat"] = probe.t_stat;

    if (!o.out.empty()) {
        std::ofstream f = open_out(o.out);
        f << "particle,t1,t2\n";
        for (std::size_t i = 0; i < ensemble.size(); ++i)
            f << i << "," << fmt(ensemble.t1[i]) << "," << fmt(ensemble.t2[i]) << "\n";
        r["joint_csv"] = o.out;
    }
    if (!o.cdf_out.empty()) {
        if (o.grid.empty())
            throw std::invalid_argument("--cdf-out requires --grid");
        auto grid = parse_grid(o.grid);
        std::ofstream f = open_out(o.cdf_out);
        f << "t,P_analytic,P_eds\n";
        for (double t : grid) f << fmt(t) << ",," << fmt(collector.dist.cdf(t)) << "\n";
        r["cdf_csv"] = o.cdf_out;
    }
    emit_report(r, o.format);
    return 0;
}

int cmd_compare(const Options& o) {
    IntersectionParams p = build_params(o);
    Policy policy = parse_policy(o);
    crossflow::PropagateOptions popt{parse_kernel(o), o.threads};
    auto ensemble = crossflow::ParticleEnsemble::init(o.particles, o.seed, p);
    crossflow::propagate(ensemble, policy, o.burn_in, popt);

    double upper = std::max({4.0 * (p.delta_d + p.delta_s), 64.0 / p.lambda_total(), 1.0});
    std::vector<double> atoms{0.0};
    if (p.delta_d > 0.0) atoms.push_back(p.delta_d);
    auto collector = crossflow::DelayCollector::create(o.particles, upper, atoms);
    std::uint64_t window = o.steps > 1 ? o.steps - 1 : 0;
    crossflow::propagate_collect(ensemble, policy, window, popt, collector);
    // The last arrival of each particle gives one independent delay draw.
    auto snapshot = crossflow::vehicle_delay_snapshot(ensemble, policy, popt);

    json r;
    r["command"] = "compare";
    r["policy"] = o.policy;
    put_params(r, p);
    r["particles"] = o.particles;
    r["steps"] = o.steps;
    r["burn_in"] = o.burn_in;
    r["seed"] = o.seed;
    r["eds_expected_delay"] = collector.mean();
    r["eds_expected_delay_stderr"] = collector.stderr_of_mean();
    r["eds_p0"] = snapshot.atom_mass(0.0);
    r["dkw_epsilon_99"] = crossflow::dkw_epsilon(snapshot.count(), 0.01);

    auto measure = [&](const std::string& tag,
                       const crossflow::SteadyStateDistribution& dist) {
        auto cdf = [&](double t) { return dist.cdf(t); };
        auto cdf_left = [&](double t) { return dist.cdf_left(t); };
        r[tag + "_supnorm"] = snapshot.ks_distance(cdf, cdf_left);
        r[tag + "_p0"] = dist.cdf(0.0);
        r[tag + "_p0_diff"] = std::abs(dist.cdf(0.0) - snapshot.atom_mass(0.0));
        r[tag + "_expected_delay"] = dist.mean();
        r[tag + "_expected_delay_diff"] = std::abs(dist.mean() - collector.mean());
        r[tag + "_underestimates"] =
            dist.mean() <= collector.mean() + 2.0 * collector.stderr_of_mean();
    };
    crossflow::SteadyStateDistribution grid_dist;
    if (policy == Policy::Fifo) {
        auto d1 = crossflow::fifo_vehicle_delay(p, crossflow::FifoApprox::Approx1);
        auto d2 = crossflow::fifo_vehicle_delay(p, crossflow::FifoApprox::Approx2);
        measure("approx1", d1);
        measure("approx2", d2);
        grid_dist = d1;
    } else {
        auto d = crossflow::fo_vehicle_delay(p);
        measure("exact", d);
        grid_dist = d;
    }
    if (!o.grid.empty() && !o.out.empty()) {
        auto grid = parse_grid(o.grid);
        std::ofstream f = open_out(o.out);
        f << "t,P_analytic,P_eds\n";
        for (double t : grid)
            f << fmt(t) << "," << fmt(grid_dist.cdf(t)) << "," << fmt(snapshot.cdf(t))
              << "\n";
        r["cdf_csv"] = o.out;
    }
    emit_report(r, o.format);
    return 0;
}

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

SweepAxis parse_axis(const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("--vary expects name=start:step:stop");
    SweepAxis axis;
    axis.name = spec.substr(0, eq);
    const std::vector<std::string> known{"lambda1", "lambda2", "lambda",
                                         "ratio",   "delta-d", "delta-s"};
    if (std::find(known.begin(), known.end(), axis.name) == known.end())
        throw std::invalid_argument("unknown sweep axis: " + axis.name);
    axis.values = parse_grid(spec.substr(eq + 1));
    return axis;
}

void apply_axis(Options& o, const std::string& name, double value) {
    if (name == "lambda1") o.lambda1 = value;
    else if (name == "lambda2") o.lambda2 = value;
    else if (name == "lambda") o.lambda = value;
    else if (name == "ratio") o.ratio = value;
    else if (name == "delta-d") o.delta_d = value;
    else if (name == "delta-s") o.delta_s = value;
}

int cmd_sweep(const Options& o) {
    if (o.vary.empty() || o.vary.size() > 2)
        throw std::invalid_argument("sweep needs one or two --vary axes");
    std::vector<SweepAxis> axes;
    for (const auto& spec : o.vary) axes.push_back(parse_axis(spec));

    std::vector<Policy> policies;
    if (o.policy.empty())
        policies = {Policy::Fifo, Policy::Fo};
    else
        policies = {parse_policy(o)};

    std::ostream* outp = &std::cout;
    std::ofstream file;
    if (!o.out.empty()) {
        file = open_out(o.out);
        outp = &file;
    }
    std::ostream& out = *outp;
    out << "policy,lambda1,lambda2,delta_d,delta_s,margin_fifo,margin_fo,p0,"
           "expected_delay,status\n";

    auto emit_row = [&](const Options& point) {
        IntersectionParams p = build_params(point);
        for (Policy policy : policies) {
            std::string p0, ed, status = "ok";
            try {
                crossflow::SteadyStateDistribution dist =
                    policy == Policy::Fifo
                        ? crossflow::fifo_vehicle_delay(
                              p, point.approx == 2 ? crossflow::FifoApprox::Approx2
                                                   : crossflow::FifoApprox::Approx1)
                        : crossflow::fo_vehicle_delay(p);
                p0 = fmt(dist.cdf(0.0));
                ed = fmt(dist.mean());
            } catch (const crossflow::UnstableRegime&) {
                status = "unstable";
            } catch (const crossflow::UnsupportedDeltaS&) {
                status = "unsupported_delta_s";
            }
            out << crossflow::policy_name(policy) << "," << fmt(p.lambda1) << ","
                << fmt(p.lambda2) << "," << fmt(p.delta_d) << "," << fmt(p.delta_s)
                << "," << fmt(crossflow::fifo_convergence_margin(p)) << ","
                << fmt(crossflow::fo_convergence_margin(p)) << "," << p0 << "," << ed
                << "," << status << "\n";
        }
    };

    if (axes.size() == 1) {
        for (double v : axes[0].values) {
            Options point = o;
            apply_axis(point, axes[0].name, v);
            emit_row(point);
        }
    } else {
        for (double v0 : axes[0].values)
            for (double v1 : axes[1].values) {
                Options point = o;
                apply_axis(point, axes[0].name, v0);
                apply_axis(point, axes[1].name, v1);
                emit_row(point);
            }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"traffic delay distributions at a two-lane unmanaged intersection"};
    app.require_subcommand(1);
    Options o;
    auto* analyze = app.add_subcommand("analyze", "closed-form steady-state report");
    auto* simulate = app.add_subcommand("simulate", "event-driven ensemble simulation");
    auto* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
    auto* compare = app.add_subcommand("compare", "closed form vs simulation");
    OptionHandles ha = add_shared(analyze, o);
    OptionHandles hs = add_shared(simulate, o);
    OptionHandles hw = add_shared(sweep, o);
    OptionHandles hc = add_shared(compare, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (analyze->parsed()) {
            merge_config(o, ha);
            resolve_seed(o, ha);
            return cmd_analyze(o);
        }
        if (simulate->parsed()) {
            merge_config(o, hs);
            resolve_seed(o, hs);
            return cmd_simulate(o);
        }
        if (sweep->parsed()) {
            merge_config(o, hw);
            resolve_seed(o, hw);
            return cmd_sweep(o);
        }
        merge_config(o, hc);
        resolve_seed(o, hc);
        return cmd_compare(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
