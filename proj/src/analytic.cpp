#include "crossflow/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace crossflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Integral of amp * exp(rate * t) dt over [lo, hi]; hi may be +inf if rate < 0.
double exp_mass(double amp, double rate, double lo, double hi) {
    if (rate == 0.0) return amp * (hi - lo);
    double upper = std::isinf(hi) ? 0.0 : std::exp(rate * hi);
    return amp / rate * (upper - std::exp(rate * lo));
}

// Integral of t * amp * exp(rate * t) dt over [lo, hi]; hi may be +inf if rate < 0.
double exp_first_moment(double amp, double rate, double lo, double hi) {
    if (rate == 0.0) return amp * 0.5 * (hi * hi - lo * lo);
    auto antider = [&](double t) {
        return amp * std::exp(rate * t) * (rate * t - 1.0) / (rate * rate);
    };
    double upper = std::isinf(hi) ? 0.0 : antider(hi);
    return upper - antider(lo);
}

void require_delta_s_zero(const IntersectionParams& p) {
    if (p.delta_s != 0.0)
        throw UnsupportedDeltaS(
            "closed-form delay laws are only available for delta_s = 0");
}

double characteristic(double a, double l1, double l2, double dd) {
    return (a - l1) * (a - l2) - l1 * l2 * std::exp(-2.0 * a * dd);
}

double characteristic_slope(double a, double l1, double l2, double dd) {
    return 2.0 * a - l1 - l2 + 2.0 * dd * l1 * l2 * std::exp(-2.0 * a * dd);
}

}  // namespace

double SteadyStateDistribution::cdf(double t) const {
    double acc = 0;
    for (const Atom& atom : atoms)
        if (atom.location <= t) acc += atom.weight;
    for (const Segment& seg : segments) {
        if (t <= seg.lo) continue;
        double hi = std::min(t, seg.hi);
        for (const DensityTerm& dt : seg.terms)
            acc += exp_mass(dt.amp, dt.rate, seg.lo, hi);
    }
    return acc;
}

double SteadyStateDistribution::cdf_left(double t) const {
    double acc = 0;
    for (const Atom& atom : atoms)
        if (atom.location < t) acc += atom.weight;
    for (const Segment& seg : segments) {
        if (t <= seg.lo) continue;
        double hi = std::min(t, seg.hi);
        for (const DensityTerm& dt : seg.terms)
            acc += exp_mass(dt.amp, dt.rate, seg.lo, hi);
    }
    return acc;
}

double SteadyStateDistribution::total_mass() const {
    double acc = 0;
    for (const Atom& atom : atoms) acc += atom.weight;
    for (const Segment& seg : segments)
        for (const DensityTerm& dt : seg.terms)
            acc += exp_mass(dt.amp, dt.rate, seg.lo, seg.hi);
    return acc;
}

double SteadyStateDistribution::mean() const {
    double acc = 0;
    for (const Atom& atom : atoms) acc += atom.weight * atom.location;
    for (const Segment& seg : segments)
        for (const DensityTerm& dt : seg.terms)
            acc += exp_first_moment(dt.amp, dt.rate, seg.lo, seg.hi);
    return acc;
}

double SteadyStateDistribution::atom_mass(double location) const {
    double acc = 0;
    for (const Atom& atom : atoms)
        if (atom.location == location) acc += atom.weight;
    return acc;
}

double fifo_convergence_margin(const IntersectionParams& p) {
    return p.lambda_total() - (2.0 * p.lambda1 * p.lambda2 * p.delta_d +
                               (p.lambda1 * p.lambda1 + p.lambda2 * p.lambda2) * p.delta_s);
}

double fo_convergence_margin(const IntersectionParams& p) {
    double y1 = std::exp(-p.lambda1 * p.delta_d);
    double y2 = std::exp(-p.lambda2 * p.delta_d);
    double cross = p.lambda1 * p.lambda2;
    return p.lambda_total() -
           (cross * (y1 + y2) * p.delta_d +
            (p.lambda1 * p.lambda1 + p.lambda2 * p.lambda2 + cross * (2.0 - y1 - y2)) *
                p.delta_s);
}

double fifo_critical_density(double ratio, double delta_d) {
    return (1.0 + ratio) * (1.0 + ratio) / (2.0 * delta_d * ratio);
}

double e_lambda(double lambda, double delta_d) {
    if (std::abs(lambda) < 1e-8) return lambda * delta_d * delta_d / 2.0;
    return (1.0 + std::exp(delta_d * lambda) * (delta_d * lambda - 1.0)) / lambda;
}

CharacteristicRoot solve_characteristic_root(const IntersectionParams& p) {
    if (fifo_convergence_margin(p) <= 0.0)
        throw NoNegativeRoot("no negative characteristic root: margin <= 0");
    double l1 = p.lambda1, l2 = p.lambda2, dd = p.delta_d;
    if (dd == 0.0)
        throw NoNegativeRoot("no negative characteristic root: delta_d = 0");
    double lo = -10.0 * p.lambda_total();
    double hi = -1e-12;
    int guard = 0;
    while (characteristic(lo, l1, l2, dd) > 0.0) {
        lo *= 2.0;
        if (++guard > 1000)
            throw NoNegativeRoot("no negative characteristic root: no sign change");
    }
    // h(lo) <= 0 < h(hi); keep that orientation while halving the bracket.
    while (hi - lo > 1e-14) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (characteristic(mid, l1, l2, dd) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    double a = 0.5 * (lo + hi);
    a -= characteristic(a, l1, l2, dd) / characteristic_slope(a, l1, l2, dd);
    return CharacteristicRoot{a, std::abs(characteristic(a, l1, l2, dd))};
}

std::pair<double, double> fifo_ghat0(const IntersectionParams& p, FifoApprox approx) {
    require_delta_s_zero(p);
    if (fifo_convergence_margin(p) <= 0.0)
        throw UnstableRegime("first-in-first-out delay diverges at these rates");
    double l1 = p.lambda1, l2 = p.lambda2, dd = p.delta_d;
    double lam = p.lambda_total();
    if (dd == 0.0)  // no interaction: all mass sits at zero delay
        return {l1 / lam, l2 / lam};
    double a = solve_characteristic_root(p).value;
    double y = std::exp(-lam * dd);
    double out[2];
    if (approx == FifoApprox::Approx1) {
        // Closure matching the law's global renewal condition.
        int k = 0;
        for (auto [li, ls] : {std::pair{l1, l2}, std::pair{l2, l1}}) {
            double yi = std::exp(-li * dd);
            double num = a * li * y *
                         ((li - a) * li * (y * y - 1.0) + (a - lam) * yi * (ls + li * y));
            double den = lam * lam *
                         (a * a * y * (y - yi) * (1.0 - yi) + a * (a - lam) * yi +
                          (a - li) * lam * y * y * (yi - 1.0) +
                          (2.0 * a - lam) * lam * y * yi * (1.0 - yi) +
                          (a - lam) * li * y * yi * yi + li * ls * yi +
                          li * li * y * y * yi - a * li * y * y);
            out[k++] = num / den;
        }
    } else {
        // Closure matching the local density balance at the crossing gap.
        double den = 1.0 - std::exp((lam - 2.0 * a) * dd);
        out[0] = a * (l2 + (l1 - a) * std::exp(l1 * dd)) / (lam * l2 * den);
        out[1] = a * (l1 + (l2 - a) * std::exp(l2 * dd)) / (lam * l1 * den);
    }
    return {out[0], out[1]};
}

SteadyStateDistribution fifo_lane_distribution(const IntersectionParams& p, int lane,
                                               FifoApprox approx) {
    require_delta_s_zero(p);
    if (lane != 1 && lane != 2)
        throw std::invalid_argument("lane must be 1 or 2");
    double lam = p.lambda_total();
    double li = lane == 1 ? p.lambda1 : p.lambda2;
    double ls = lane == 1 ? p.lambda2 : p.lambda1;
    double mass = li / lam;
    SteadyStateDistribution out;
    if (p.delta_d == 0.0) {
        out.atoms.push_back(Atom{0.0, mass});
        return out;
    }
    auto [g1, g2] = fifo_ghat0(p, approx);
    double gi = lane == 1 ? g1 : g2;
    double a = solve_characteristic_root(p).value;
    double dd = p.delta_d;
    double gi_dd = gi * std::exp(ls * dd);  // sub-CDF just below the gap
    out.atoms.push_back(Atom{0.0, gi});
    out.segments.push_back(Segment{0.0, dd, {DensityTerm{gi * ls, ls}}});
    // Tail relaxes exponentially at the characteristic rate toward full mass.
    double tail_amp = -a * (mass - gi_dd) * std::exp(-a * dd);
    out.segments.push_back(Segment{dd, kInf, {DensityTerm{tail_amp, a}}});
    return out;
}

SteadyStateDistribution fifo_vehicle_delay(const IntersectionParams& p,
                                           FifoApprox approx) {
    SteadyStateDistribution g1 = fifo_lane_distribution(p, 1, approx);
    SteadyStateDistribution g2 = fifo_lane_distribution(p, 2, approx);
    SteadyStateDistribution out;
    out.atoms.push_back(Atom{0.0, g1.atoms[0].weight + g2.atoms[0].weight});
    for (std::size_t s = 0; s < g1.segments.size(); ++s) {
        Segment seg = g1.segments[s];
        for (const DensityTerm& dt : g2.segments[s].terms) seg.terms.push_back(dt);
        out.segments.push_back(std::move(seg));
    }
    return out;
}

FoConstants fo_constants(const IntersectionParams& p, FoSolution solution) {
    require_delta_s_zero(p);
    if (fo_convergence_margin(p) <= 0.0)
        throw UnstableRegime("flexible-order delay diverges at these rates");
    double l1 = p.lambda1, l2 = p.lambda2, dd = p.delta_d;
    double lam = p.lambda_total();
    double y = std::exp(-lam * dd);
    double y1 = std::exp(-l1 * dd);
    double y2 = std::exp(-l2 * dd);
    FoConstants c;
    if (solution == FoSolution::LaneShare) {
        c.m1 = l1 / lam;
        c.m2 = l2 / lam;
        double cs[2];
        int k = 0;
        for (auto [li, ls, yi, ys] :
             {std::tuple{l1, l2, y1, y2}, std::tuple{l2, l1, y2, y1}}) {
            double num = li * ls * (li * y * y + li * ys + ls * y - li * y * y * ys);
            double den = lam * lam * (1.0 + y * yi + y * ys - y - y * y);
            cs[k++] = num / den;
        }
        c.c1 = cs[0];
        c.c2 = cs[1];
        c.g1_zero = c.c1 / l2;
        c.g2_zero = c.c2 / l1;
        // Atom weights at the crossing gap, from the coupled boundary equations:
        //   g_i(dd) = (l_i/lam) * (M_i* - A_i* - g_i*(dd) * y)
        double a1 = c.g1_zero + (c.c1 / l1) * (1.0 - y1);
        double a2 = c.g2_zero + (c.c2 / l2) * (1.0 - y2);
        double k1 = (l1 / lam) * (c.m2 - a2);
        double k2 = (l2 / lam) * (c.m1 - a1);
        double det = 1.0 - (l1 / lam) * (l2 / lam) * y * y;
        c.g1_dd = (k1 - (l1 / lam) * y * k2) / det;
        c.g2_dd = (k2 - (l2 / lam) * y * k1) / det;
        c.i1 = c.g1_zero + (c.c1 / l1) * (1.0 - y1) + c.g1_dd * y;
        c.i2 = c.g2_zero + (c.c2 / l2) * (1.0 - y2) + c.g2_dd * y;
    } else {
        // Point-mass flow balance.  The atom at delta_d in branch i is fed by
        // arrivals from the other lane that slot in ahead of a standing
        // branch-i state, so D_i = (l_i*/lam)(M_i - I_i).  Together with the
        // atom-at-zero flow A_i = (l_i/lam)(I_i + y I_i*), the interior
        // density c_i = l_i* A_i, and the transform identity
        // I_i = A_i (lam - l_i* y_i)/l_i + D_i y, the masses solve to
        //   M_i = [l_i y_i + l_i* y (y_i - 1)] / den,  M_1 + M_2 = 1.
        double den = l1 * y1 + l2 * y2 + y * (l1 * y2 + l2 * y1) - lam * y;
        double m[2] = {(l1 * y1 + l2 * y * (y1 - 1.0)) / den,
                       (l2 * y2 + l1 * y * (y2 - 1.0)) / den};
        double A[2], D[2], I[2], ci[2];
        int k = 0;
        for (auto [li, lo, yi, yo] :
             {std::tuple{l1, l2, y1, y2}, std::tuple{l2, l1, y2, y1}}) {
            double mi = m[k];
            A[k] = mi * (li + lo * y) /
                   ((lam + lo * y) / yo - (lo / li) * (lam - lo * yi));
            D[k] = mi - A[k] / yo;
            I[k] = mi - (lam / lo) * D[k];
            ci[k] = lo * A[k];
            ++k;
        }
        c.m1 = m[0];
        c.m2 = m[1];
        c.c1 = ci[0];
        c.c2 = ci[1];
        c.g1_zero = A[0];
        c.g2_zero = A[1];
        c.g1_dd = D[0];
        c.g2_dd = D[1];
        c.i1 = I[0];
        c.i2 = I[1];
    }
    return c;
}

SteadyStateDistribution fo_lane_distribution(const IntersectionParams& p, int lane,
                                             FoSolution solution) {
    if (lane != 1 && lane != 2)
        throw std::invalid_argument("lane must be 1 or 2");
    FoConstants c = fo_constants(p, solution);
    double dd = p.delta_d;
    double ci = lane == 1 ? c.c1 : c.c2;
    double ls = lane == 1 ? p.lambda2 : p.lambda1;
    SteadyStateDistribution out;
    out.atoms.push_back(Atom{0.0, lane == 1 ? c.g1_zero : c.g2_zero});
    if (dd > 0.0) {
        out.segments.push_back(Segment{0.0, dd, {DensityTerm{ci, ls}}});
        out.atoms.push_back(Atom{dd, lane == 1 ? c.g1_dd : c.g2_dd});
    }
    return out;
}

SteadyStateDistribution fo_vehicle_delay(const IntersectionParams& p,
                                         FoSolution solution) {
    FoConstants c = fo_constants(p, solution);
    double l1 = p.lambda1, l2 = p.lambda2, dd = p.delta_d;
    double lam = p.lambda_total();
    SteadyStateDistribution out;
    out.atoms.push_back(Atom{0.0, c.g1_zero + c.g2_zero});
    if (dd == 0.0) return out;
    double y = std::exp(-lam * dd);
    double y1 = std::exp(-l1 * dd);
    double y2 = std::exp(-l2 * dd);
    double b1 = c.c2 / (l2 * y1);  // weight of the lane-1 echo term
    double b2 = c.c1 / (l1 * y2);  // weight of the lane-2 echo term
    double drain;                  // coefficient of the exp(-lam t) term
    if (solution == FoSolution::LaneShare) {
        drain = 2.0 * l1 * l2 / lam - lam * b1 - lam * b2;
    } else {
        // Same per-event delay functional (served-lane drift, overtake
        // slot-in, and push of a standing lane), evaluated on the
        // flow-balanced law.  The exp(+lam t) coefficient cancels because
        // sum_i l_i*(M_i - I_i) is symmetric under the lane swap.
        drain = l2 * (c.g1_dd - (c.c1 / l1) * (y1 / y)) +
                l1 * (c.g2_dd - (c.c2 / l2) * (y2 / y));
    }
    Segment seg{0.0, dd, {}};
    seg.terms.push_back(DensityTerm{c.c2, l1});
    seg.terms.push_back(DensityTerm{c.c1, l2});
    seg.terms.push_back(DensityTerm{drain, -lam});
    seg.terms.push_back(DensityTerm{l1 * b1, -l1});
    seg.terms.push_back(DensityTerm{l2 * b2, -l2});
    out.segments.push_back(std::move(seg));
    return out;
}

}  // namespace crossflow
