#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fairlab/bias_models.hpp"
#include "fairlab/distribution.hpp"
#include "fairlab/error.hpp"
#include "fairlab/lft.hpp"
#include "fairlab/recovery.hpp"
#include "fairlab/solver.hpp"

namespace fairlab {

struct BiasBounds {
    double beta_p = 1.0;  // lower bound on every beta_p_i
    double beta_n = 1.0;  // lower bound on every beta_n_i
    double nu = 0.0;      // upper bound on every nu_i, nu < 1/2

    void validate() const {
        if (!(beta_p > 0.0 && beta_p <= 1.0) || !(beta_n > 0.0 && beta_n <= 1.0))
            fail(ErrorCode::param_out_of_range, "beta bounds must lie in (0,1]");
        if (!(nu >= 0.0 && nu < 0.5))
            fail(ErrorCode::param_out_of_range, "nu bound must lie in [0, 1/2)");
    }
};

/// Per-step bias parameters plus the bounds they must respect.
struct BiasSchedule {
    std::vector<BlumStanglBias> steps;
    BiasBounds bounds;

    static BiasSchedule uniform(const BlumStanglBias& step, int t) {
        BiasSchedule s;
        s.steps.assign(static_cast<std::size_t>(t), step);
        s.bounds = {step.beta_p, step.beta_n, step.nu};
        return s;
    }

    void validate() const {
        if (steps.empty())
            fail(ErrorCode::invalid_argument, "schedule has no steps");
        bounds.validate();
        for (const auto& s : steps) {
            s.validate();
            if (s.beta_p < bounds.beta_p - 1e-12 || s.beta_n < bounds.beta_n - 1e-12 ||
                s.nu > bounds.nu + 1e-12)
                fail(ErrorCode::param_out_of_range,
                     "schedule step violates the declared bounds");
        }
    }
};

/// Composed group-0 transform eta -> eta / (R eta + S) after the whole
/// schedule; S > 0 and the map is order-preserving.
struct ComposedTransform {
    double r = 0.0;
    double s = 1.0;

    LinearFractionalTransform to_lft() const { return {1.0, 0.0, r, s}; }
    double operator()(double eta) const { return eta / (r * eta + s); }
};

/// R_t = sum_{i=1..t} ((1-c_i)/(1-nu_i)) prod_{j=i+1..t} (c_j/(1-nu_j)),
/// S_t = prod_{i=1..t} (c_i/(1-nu_i)), with the empty trailing product = 1.
inline ComposedTransform compose(const BiasSchedule& schedule) {
    schedule.validate();
    const std::size_t t = schedule.steps.size();
    std::vector<double> factor(t);  // c_i / (1 - nu_i)
    for (std::size_t i = 0; i < t; ++i) {
        const auto& step = schedule.steps[i];
        if (step.nu >= 1.0)
            fail(ErrorCode::divide_by_zero, "nu = 1 makes the transform singular");
        factor[i] = step.c() / (1.0 - step.nu);
    }
    std::vector<double> suffix(t + 1, 1.0);  // prod_{j>i} factor_j
    for (std::size_t i = t; i-- > 0;) suffix[i] = suffix[i + 1] * factor[i];

    ComposedTransform out;
    out.s = suffix[0];
    out.r = 0.0;
    for (std::size_t i = 0; i < t; ++i) {
        const auto& step = schedule.steps[i];
        out.r += ((1.0 - step.c()) / (1.0 - step.nu)) * suffix[i + 1];
    }
    return out;
}

/// Infinite-horizon verdict for a uniform schedule (same parameters at every
/// step). With beta_n < 1 recovery is impossible in the limit; with
/// beta_n = 1 the report carries the necessary double inequality on
/// nu beta_p / (1 - beta_p (1 - nu)).
struct InfiniteHorizonReport {
    bool impossible = false;
    std::string reason;
    bool trivial_no_bias = false;
    double middle_term = std::numeric_limits<double>::quiet_NaN();
    RecoveryReport conditions;
};

inline InfiniteHorizonReport check_infinite_horizon(double r, double delta,
                                                    double beta_p, double beta_n,
                                                    double nu) {
    if (!(r > 0.0 && r < 1.0))
        fail(ErrorCode::param_out_of_range, "r must lie in (0,1)");
    if (!(delta > 0.0 && delta < 0.5))
        fail(ErrorCode::param_out_of_range, "delta must lie in (0, 1/2)");
    if (!(beta_p > 0.0 && beta_p <= 1.0) || !(beta_n > 0.0 && beta_n <= 1.0))
        fail(ErrorCode::param_out_of_range, "beta parameters must lie in (0,1]");
    if (!(nu >= 0.0 && nu < 1.0))
        fail(ErrorCode::param_out_of_range, "nu must lie in [0,1)");

    InfiniteHorizonReport out;
    if (beta_n < 1.0) {
        out.impossible = true;
        out.reason = "beta_n < 1 drives eta(x,0) to 0 as t grows";
        out.conditions.verdict = Verdict::no;
        out.conditions.margin = beta_n - 1.0;
        return out;
    }
    if (beta_p * (1.0 - nu) == 1.0) {
        // beta_p = 1 and nu = 0: the schedule applies no bias at all.
        out.trivial_no_bias = true;
        out.conditions.verdict = Verdict::yes;
        out.conditions.margin = std::numeric_limits<double>::infinity();
        return out;
    }
    const double middle = nu * beta_p / (1.0 - beta_p * (1.0 - nu));
    const double lower = 1.0 - (1.0 - 2.0 * delta) / ((1.0 - delta) * r);
    const double upper = 1.0 + (1.0 - 2.0 * delta) / (delta * r);
    out.middle_term = middle;
    out.conditions.condition_values = {{"above_lower", middle - lower},
                                       {"below_upper", upper - middle}};
    out.conditions.satisfied = {middle > lower, middle < upper};
    out.conditions.verdict = recovery_detail::strict_verdict(
        {middle - lower, upper - middle}, kBoundaryBand, &out.conditions.margin);
    return out;
}

namespace time_varying_detail {

// (1 - x^t) / (1 - x) with the product's (1 - beta_p) factor in mind: the
// callers zero the whole term when beta_p (1 - nu) = 1, where beta_p = 1
// makes the factor vanish.
inline double geometric_ratio(double x, int t) {
    if (x == 1.0) return static_cast<double>(t);
    return (1.0 - std::pow(x, t)) / (1.0 - x);
}

inline double bounded_product_term(double beta_p, double nu, int t) {
    if (1.0 - beta_p == 0.0) return 0.0;
    const double x = beta_p * (1.0 - nu);
    return std::pow(x, t) * (1.0 - beta_p) * geometric_ratio(x, t);
}

} // namespace time_varying_detail

/// Necessary conditions of the bounded finite-horizon theorem:
/// N1: (1-2d)(1-r)/((1-d)r) - d/(1-d) > 1/bn^t - 2 bp^t (1-nu)^t
/// N2: (1-2d)(1-r)/(dr) > (1-nu)^t bp^t (1-bp) (1-bp^t(1-nu)^t)/(1-bp(1-nu))
///                         - bn^t/d - 2
inline RecoveryReport check_finite_horizon_eo(double r, double delta,
                                              const BiasBounds& bounds, int t) {
    if (!(r > 0.0 && r < 1.0))
        fail(ErrorCode::param_out_of_range, "r must lie in (0,1)");
    if (!(delta > 0.0 && delta < 0.5))
        fail(ErrorCode::param_out_of_range, "delta must lie in (0, 1/2)");
    if (t < 1) fail(ErrorCode::param_out_of_range, "horizon must be at least 1");
    bounds.validate();

    const double bp = bounds.beta_p, bn = bounds.beta_n, nu = bounds.nu;
    const double lhs1 = (1.0 - 2.0 * delta) * (1.0 - r) / ((1.0 - delta) * r) -
                        delta / (1.0 - delta);
    const double rhs1 =
        1.0 / std::pow(bn, t) - 2.0 * std::pow(bp * (1.0 - nu), t);
    const double lhs2 = (1.0 - 2.0 * delta) * (1.0 - r) / (delta * r);
    const double rhs2 = time_varying_detail::bounded_product_term(bp, nu, t) -
                        std::pow(bn, t) / delta - 2.0;

    RecoveryReport rep;
    rep.condition_values = {{"N1", lhs1 - rhs1}, {"N2", lhs2 - rhs2}};
    rep.satisfied = {lhs1 > rhs1, lhs2 > rhs2};
    rep.verdict = recovery_detail::strict_verdict({lhs1 - rhs1, lhs2 - rhs2},
                                                  kBoundaryBand, &rep.margin);
    return rep;
}

/// Demographic-parity analogue of the bounded finite-horizon conditions.
inline RecoveryReport check_finite_horizon_dp(double delta,
                                              const BiasBounds& bounds, int t) {
    if (!(delta > 0.0 && delta < 0.5))
        fail(ErrorCode::param_out_of_range, "delta must lie in (0, 1/2)");
    if (t < 1) fail(ErrorCode::param_out_of_range, "horizon must be at least 1");
    bounds.validate();

    const double bp = bounds.beta_p, bn = bounds.beta_n, nu = bounds.nu;
    const double x = bp * (1.0 - nu);
    const double ratio =
        bp == 1.0 ? 0.0
                  : (bp - 1.0) * time_varying_detail::geometric_ratio(x, t);
    const double bn_t = std::pow(bn, t);
    const double decay = std::pow(x, t);

    const double f1 = (1.0 - 3.0 * delta) * ratio - 2.0 * delta -
                      (1.0 - delta) * ((1.0 - bn_t) / bn_t - 2.0 * decay);
    const double f2 = 1.0 +
                      delta * (ratio - 2.0 / bn_t -
                               (2.0 * delta - 1.0) * (1.0 - bn_t) / bn_t) -
                      2.0 * (delta - 1.0);

    RecoveryReport rep;
    rep.condition_values = {{"DP1", f1}, {"DP2", f2}};
    rep.satisfied = {f1 > 0.0, f2 > 0.0};
    rep.verdict =
        recovery_detail::strict_verdict({f1, f2}, kBoundaryBand, &rep.margin);
    return rep;
}

struct HorizonBound {
    double k_d = 0.0;
    double bound = 0.0;  // log K_D / log(1/beta_n)
    int t_max = 0;       // largest integer strictly below the bound
};

/// K_D = (1-2d)(1-r)/((1-d)r) - d/(1-d) + 2; the first finite-horizon
/// condition can hold only while t < log K_D / log(1/beta_n).
inline HorizonBound max_recovery_horizon(double r, double delta, double beta_n) {
    if (!(r > 0.0 && r < 1.0))
        fail(ErrorCode::param_out_of_range, "r must lie in (0,1)");
    if (!(delta > 0.0 && delta < 0.5))
        fail(ErrorCode::param_out_of_range, "delta must lie in (0, 1/2)");
    if (!(beta_n > 0.0 && beta_n <= 1.0))
        fail(ErrorCode::param_out_of_range, "beta_n must lie in (0,1]");
    if (beta_n == 1.0)
        fail(ErrorCode::unbounded, "beta_n = 1 puts no bound on the horizon");

    HorizonBound out;
    out.k_d = (1.0 - 2.0 * delta) * (1.0 - r) / ((1.0 - delta) * r) -
              delta / (1.0 - delta) + 2.0;
    if (out.k_d <= 1.0) {
        out.bound = 0.0;
        out.t_max = 0;
        return out;
    }
    out.bound = std::log(out.k_d) / std::log(1.0 / beta_n);
    const double floor = std::floor(out.bound);
    out.t_max = static_cast<int>(floor == out.bound ? floor - 1.0 : floor);
    if (out.t_max < 0) out.t_max = 0;
    return out;
}

/// One step of the sequential bias pipeline.
struct PipelineStep {
    int t = 0;
    bool recovered = false;
    std::optional<bool> n1;
    std::optional<bool> n2;
    double n1_value = std::numeric_limits<double>::quiet_NaN();
    double n2_value = std::numeric_limits<double>::quiet_NaN();
};

struct PipelineResult {
    std::vector<PipelineStep> steps;
    std::vector<DiscreteJointDistribution> distributions;  // after each step
};

/// Applies the schedule step by step, solving the constrained problem after
/// every application and comparing against the Bayes classifier of the input
/// distribution. When the input's eta values stay clear of 1/2 the effective
/// noise level (largest distance of eta from {0,1}) feeds the per-step
/// necessary-condition columns; otherwise those stay empty.
inline PipelineResult run_pipeline(const DiscreteJointDistribution& dist,
                                   const BiasSchedule& schedule,
                                   Constraint constraint) {
    schedule.validate();
    if (constraint == Constraint::none)
        fail(ErrorCode::invalid_argument, "pipeline needs a fairness constraint");

    double delta = 0.0;
    for (const auto& atom : dist.atoms())
        delta = std::max(delta, std::min(atom.eta(), 1.0 - atom.eta()));
    const bool theorem_applicable = delta > 0.0 && delta < 0.5 - 1e-12;
    const double r = dist.group_fraction();

    const auto h_star = bayes_optimal(dist);
    const auto policy = constraint == Constraint::demographic_parity
                            ? MarginalPolicy::preserve_marginal
                            : MarginalPolicy::survival;

    PipelineResult out;
    DiscreteJointDistribution current = dist;
    for (std::size_t i = 0; i < schedule.steps.size(); ++i) {
        current = apply_bias(current, BiasModel(schedule.steps[i]), policy);
        const auto sol = solve_fair(current, constraint);

        PipelineStep step;
        step.t = static_cast<int>(i) + 1;
        step.recovered = sol.decisions.equals(h_star, 1e-9);
        if (theorem_applicable) {
            const auto rep =
                constraint == Constraint::equal_opportunity
                    ? check_finite_horizon_eo(r, delta, schedule.bounds, step.t)
                    : check_finite_horizon_dp(delta, schedule.bounds, step.t);
            step.n1 = rep.satisfied[0];
            step.n2 = rep.satisfied[1];
            step.n1_value = rep.condition_values[0].second;
            step.n2_value = rep.condition_values[1].second;
        }
        out.steps.push_back(step);
        out.distributions.push_back(current);
    }
    return out;
}

} // namespace fairlab
