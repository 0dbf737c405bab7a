#pragma once

#include <stdexcept>
#include <vector>

#include "params.hpp"

namespace crossflow {

// Point mass of a steady-state delay law.
struct Atom {
    double location = 0;
    double weight = 0;
};

// Density contribution amp * exp(rate * t) on a segment.
struct DensityTerm {
    double amp = 0;
    double rate = 0;
};

// Piecewise-exponential density over [lo, hi); hi may be +infinity.
struct Segment {
    double lo = 0;
    double hi = 0;
    std::vector<DensityTerm> terms;
};

// Mixed distribution: atoms plus piecewise-exponential density.
struct SteadyStateDistribution {
    std::vector<Atom> atoms;
    std::vector<Segment> segments;

    double cdf(double t) const;       // P(X <= t)
    double cdf_left(double t) const;  // P(X < t)
    double total_mass() const;
    double mean() const;
    double atom_mass(double location) const;
};

struct CharacteristicRoot {
    double value = 0;     // the unique negative root
    double residual = 0;  // |h(value)| after polish
};

struct NoNegativeRoot : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnstableRegime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedDeltaS : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Boundary-condition closure for the first-in-first-out tail law.
enum class FifoApprox { Approx1, Approx2 };

// Closure for the flexible-order steady state at delta_s = 0.  LaneShare
// imposes dominance masses m_i = lambda_i/lambda; FlowBalance instead
// balances the point-mass flows of the transition map (push events feed the
// atom at delta_d of the pushed lane's branch) and lets the masses emerge
// from the solve.  The two coincide when lambda1 == lambda2; event-driven
// simulation reproduces FlowBalance.
enum class FoSolution { LaneShare, FlowBalance };

// Lane-law constants for the flexible-order policy at delta_s = 0.
struct FoConstants {
    double c1 = 0, c2 = 0;          // interior density scale per lane
    double g1_zero = 0, g2_zero = 0;  // sub-CDF at 0+ per lane
    double g1_dd = 0, g2_dd = 0;      // sub-CDF jump weight at delta_d
    double m1 = 0, m2 = 0;            // lane dominance masses
    double i1 = 0, i2 = 0;            // exp(-lambda t) transform of each lane law
};

// Stability margins: positive means the delay process has a steady state.
double fifo_convergence_margin(const IntersectionParams& p);
double fo_convergence_margin(const IntersectionParams& p);

// Largest total rate with a first-in-first-out steady state at fixed
// ratio r = lambda1/lambda2 and delta_s = 0.
double fifo_critical_density(double ratio, double delta_d);

// exp(lambda * t) integrated against (t - delta_d) weighting:
//   E(lambda) = (1 + exp(delta_d*lambda) * (delta_d*lambda - 1)) / lambda
// with the lambda -> 0 limit lambda*delta_d^2/2 series for tiny |lambda|.
// Accepts negative lambda.
double e_lambda(double lambda, double delta_d);

// Unique negative root of
//   h(a) = (a - lambda1)(a - lambda2) - lambda1*lambda2*exp(-2*a*delta_d).
// Brackets in [-10*lambda, -1e-12] (expanding left if needed), bisects to
// width 1e-14, then polishes with one Newton step.  Throws NoNegativeRoot
// when the stability margin is not positive.
CharacteristicRoot solve_characteristic_root(const IntersectionParams& p);

// Lane sub-CDF values at 0+ under the chosen closure, delta_s = 0 only.
// Returned pair is (g1_hat(0), g2_hat(0)).
std::pair<double, double> fifo_ghat0(const IntersectionParams& p,
                                     FifoApprox approx);

// Sub-distribution of lane i's delay (mass lambda_i/lambda), delta_s = 0.
SteadyStateDistribution fifo_lane_distribution(const IntersectionParams& p,
                                               int lane, FifoApprox approx);

// Vehicle delay law: mixture of the lane laws with an atom at zero.
SteadyStateDistribution fifo_vehicle_delay(const IntersectionParams& p,
                                           FifoApprox approx);

FoConstants fo_constants(const IntersectionParams& p,
                         FoSolution solution = FoSolution::LaneShare);

// Sub-distribution of lane i's delay on the event it dominates the other
// lane (mass m_i), delta_s = 0.  Support is [0, delta_d] with atoms at
// both ends.
SteadyStateDistribution fo_lane_distribution(
    const IntersectionParams& p, int lane,
    FoSolution solution = FoSolution::LaneShare);

// Vehicle delay law for flexible order, delta_s = 0; support [0, delta_d].
SteadyStateDistribution fo_vehicle_delay(
    const IntersectionParams& p,
    FoSolution solution = FoSolution::LaneShare);

}  // namespace crossflow
