#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fairlab/distribution.hpp"
#include "fairlab/error.hpp"

namespace fairlab {

enum class Constraint { none, equal_opportunity, demographic_parity };

inline const char* constraint_name(Constraint c) {
    switch (c) {
        case Constraint::none: return "none";
        case Constraint::equal_opportunity: return "eo";
        case Constraint::demographic_parity: return "dp";
    }
    return "?";
}

/// Per-group threshold rule on eta with randomization exactly at the
/// threshold: accept with probability 1 above t_a, with boundary_accept[a]
/// at eta == t_a, and 0 below. +inf encodes an all-reject group.
struct GroupThresholdClassifier {
    double t[2] = {0.5, 0.5};
    double boundary_accept[2] = {1.0, 1.0};

    double accept_prob(double eta, int a) const {
        if (eta > t[a]) return 1.0;
        if (eta == t[a]) return boundary_accept[a];
        return 0.0;
    }

    ClassifierTable to_table(const DiscreteJointDistribution& dist) const {
        std::vector<ClassifierTable::Decision> dec;
        dec.reserve(dist.size());
        for (const auto& atom : dist.atoms())
            dec.push_back({atom.x, atom.a, accept_prob(atom.eta(), atom.a)});
        return ClassifierTable(std::move(dec));
    }
};

/// Output of solve_fair: the optimal multiplier, the threshold rule, its
/// materialized decision table on the solved distribution, the achieved
/// constraint gap and the accuracy.
struct LambdaSolution {
    double lambda_star = 0.0;
    GroupThresholdClassifier classifier;
    ClassifierTable decisions;
    double achieved_gap = 0.0;
    double accuracy = 0.0;
};

inline constexpr double kFairnessGapTol = 1e-10;
inline constexpr double kLambdaBracket = 10.0;
inline constexpr double kLambdaBracketMax = 1e3;
inline constexpr int kBisectionSteps = 200;

namespace detail {

struct SolveContext {
    const DiscreteJointDistribution* dist;
    Constraint constraint;
    double denom[2];  // P(Y=1, A=a) for EO, P(A=a) for DP

    static double sigma(int a) { return a == 0 ? 1.0 : -1.0; }

    // Fairness-adjusted score whose sign decides acceptance at a given lambda:
    // EO: (2 + sigma_a lambda / P(Y=1,A=a)) eta - 1
    // DP: 2 eta - 1 + sigma_a lambda / P(A=a)
    double score(const Atom& atom, double lambda) const {
        const double eta = atom.eta();
        const double shift =
            lambda == 0.0 ? 0.0 : sigma(atom.a) * lambda / denom[atom.a];
        if (constraint == Constraint::equal_opportunity)
            return (2.0 + shift) * eta - 1.0;
        return 2.0 * eta - 1.0 + shift;
    }

    // Lambda at which this atom's score crosses zero, if any.
    std::optional<double> breakpoint(const Atom& atom) const {
        const double eta = atom.eta();
        if (constraint == Constraint::equal_opportunity) {
            if (eta <= 0.0) return std::nullopt;
            return sigma(atom.a) * denom[atom.a] * (1.0 / eta - 2.0);
        }
        return sigma(atom.a) * denom[atom.a] * (1.0 - 2.0 * eta);
    }

    // Contribution of fully accepting this atom to its group's constrained rate.
    double rate_weight(const Atom& atom) const {
        if (constraint == Constraint::equal_opportunity)
            return atom.p1 / denom[atom.a];
        return atom.mass() / denom[atom.a];
    }

    void decisions_at(double lambda, std::vector<char>& out) const {
        const auto& atoms = dist->atoms();
        out.resize(atoms.size());
        for (std::size_t i = 0; i < atoms.size(); ++i)
            out[i] = score(atoms[i], lambda) >= 0.0 ? 1 : 0;
    }

    double gap_of(const std::vector<double>& accept) const {
        const auto& atoms = dist->atoms();
        double rate[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < atoms.size(); ++i)
            rate[atoms[i].a] += accept[i] * rate_weight(atoms[i]);
        return rate[0] - rate[1];
    }

    double gap_at(double lambda, std::vector<char>& scratch) const {
        decisions_at(lambda, scratch);
        const auto& atoms = dist->atoms();
        double rate[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (scratch[i]) rate[atoms[i].a] += rate_weight(atoms[i]);
        return rate[0] - rate[1];
    }

    double accuracy_of(const std::vector<double>& accept) const {
        const auto& atoms = dist->atoms();
        double acc = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i)
            acc += accept[i] * atoms[i].p1 + (1.0 - accept[i]) * atoms[i].p0;
        return acc;
    }
};

inline LambdaSolution finalize(const SolveContext& ctx, double lambda,
                               const std::vector<double>& accept,
                               const double* boundary_eta,
                               const double* boundary_mix) {
    const auto& dist = *ctx.dist;
    LambdaSolution sol;
    sol.lambda_star = lambda;
    sol.achieved_gap =
        ctx.constraint == Constraint::none ? 0.0 : std::abs(ctx.gap_of(accept));
    sol.accuracy = ctx.accuracy_of(accept);

    for (int a : {0, 1}) {
        if (boundary_eta[a] >= 0.0) {
            sol.classifier.t[a] = boundary_eta[a];
            sol.classifier.boundary_accept[a] = boundary_mix[a];
            continue;
        }
        // No boundary atom in this group: recover the analytic threshold.
        const double shift =
            lambda == 0.0 ? 0.0 : SolveContext::sigma(a) * lambda / ctx.denom[a];
        if (ctx.constraint != Constraint::demographic_parity) {
            const double w = 2.0 + shift;
            sol.classifier.t[a] = w > 0.0 ? 1.0 / w
                                          : std::numeric_limits<double>::infinity();
        } else {
            sol.classifier.t[a] = 0.5 * (1.0 - shift);
        }
        sol.classifier.boundary_accept[a] = 1.0;
    }

    std::vector<ClassifierTable::Decision> dec;
    dec.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i)
        dec.push_back({dist.atoms()[i].x, dist.atoms()[i].a, accept[i]});
    sol.decisions = ClassifierTable(std::move(dec));

    if (ctx.constraint != Constraint::none && sol.achieved_gap > kFairnessGapTol)
        fail(ErrorCode::infeasible,
             "solver left a residual fairness gap of " +
                 std::to_string(sol.achieved_gap));
    return sol;
}

} // namespace detail

/// Maximum-accuracy classifier among group-threshold rules with boundary
/// randomization satisfying the constraint exactly. The optimal multiplier is
/// located by bisection on the signed constraint gap, which is nondecreasing
/// in lambda; the gap's jump across zero is closed by randomizing the atoms
/// whose score changes sign there.
inline LambdaSolution solve_fair(const DiscreteJointDistribution& dist,
                                 Constraint constraint) {
    detail::SolveContext ctx{&dist, constraint, {0.0, 0.0}};
    for (int a : {0, 1})
        ctx.denom[a] = constraint == Constraint::demographic_parity
                           ? dist.group_mass(a)
                           : dist.positive_mass(a);

    if (constraint == Constraint::equal_opportunity)
        for (int a : {0, 1})
            if (!dist.has_positives(a))
                fail(ErrorCode::undefined_constraint,
                     "equal opportunity undefined: group " + std::to_string(a) +
                         " has no positive mass");

    const std::size_t n = dist.size();
    const double no_boundary[2] = {-1.0, -1.0};
    const double full_mix[2] = {1.0, 1.0};

    std::vector<char> dec0;
    std::vector<double> accept(n);

    // Unconstrained optimum; also the lambda = 0 point of the dual family.
    const double g0 = constraint == Constraint::none ? 0.0 : ctx.gap_at(0.0, dec0);
    if (constraint == Constraint::none || std::abs(g0) <= kFairnessGapTol) {
        if (constraint == Constraint::none) ctx.decisions_at(0.0, dec0);
        for (std::size_t i = 0; i < n; ++i) accept[i] = dec0[i];
        return detail::finalize(ctx, 0.0, accept, no_boundary, full_mix);
    }

    // Bracket a sign change of the gap around lambda = 0.
    double lo, hi, g_lo, g_hi;
    std::vector<char> scratch;
    if (g0 > 0.0) {
        hi = 0.0;
        g_hi = g0;
        double width = kLambdaBracket;
        for (;;) {
            lo = -width;
            g_lo = ctx.gap_at(lo, scratch);
            if (g_lo <= 0.0) break;
            width *= 10.0;
            if (width > kLambdaBracketMax)
                fail(ErrorCode::infeasible,
                     "no lambda in [-1e3, 0] brackets a zero constraint gap");
        }
    } else {
        lo = 0.0;
        g_lo = g0;
        double width = kLambdaBracket;
        for (;;) {
            hi = width;
            g_hi = ctx.gap_at(hi, scratch);
            if (g_hi >= 0.0) break;
            width *= 10.0;
            if (width > kLambdaBracketMax)
                fail(ErrorCode::infeasible,
                     "no lambda in [0, 1e3] brackets a zero constraint gap");
        }
    }
    if (g_lo == 0.0 || g_hi == 0.0) {
        const double at = g_lo == 0.0 ? lo : hi;
        ctx.decisions_at(at, dec0);
        for (std::size_t i = 0; i < n; ++i) accept[i] = dec0[i];
        return detail::finalize(ctx, at, accept, no_boundary, full_mix);
    }

    for (int iter = 0; iter < kBisectionSteps; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double g = ctx.gap_at(mid, scratch);
        if (g == 0.0) {
            for (std::size_t i = 0; i < n; ++i) accept[i] = scratch[i];
            return detail::finalize(ctx, mid, accept, no_boundary, full_mix);
        }
        if (g > 0.0) {
            hi = mid;
            g_hi = g;
        } else {
            lo = mid;
            g_lo = g;
        }
    }

    // Atoms that flip across the final bracket are the ones whose score
    // crosses zero at the jump; group-0 flips enter, group-1 flips leave.
    std::vector<char> dec_lo, dec_hi;
    ctx.decisions_at(lo, dec_lo);
    ctx.decisions_at(hi, dec_hi);

    double boundary_eta[2] = {-1.0, -1.0};
    double cap[2] = {0.0, 0.0};  // gap increase available per group
    double lambda_hat = 0.5 * (lo + hi);
    bool any_flip = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (dec_lo[i] == dec_hi[i]) continue;
        any_flip = true;
        const auto& atom = dist.atoms()[i];
        cap[atom.a] += ctx.rate_weight(atom);
        boundary_eta[atom.a] = atom.eta();
        if (auto bp = ctx.breakpoint(atom)) lambda_hat = *bp;
    }

    if (!any_flip) {
        // The bracket closed on a flat whose gap is zero up to rounding.
        for (std::size_t i = 0; i < n; ++i) accept[i] = dec_lo[i];
        return detail::finalize(ctx, lambda_hat, accept, no_boundary, full_mix);
    }

    // Base occupancy at the jump: group-0 flips rejected, group-1 flips
    // accepted, i.e. the decisions just left of the jump. Raising the group-0
    // mix m0 or lowering the group-1 mix m1 raises the gap from g_lo.
    //   gap(m0, m1) = g_lo + m0 * cap[0] + (1 - m1) * cap[1]
    double m0 = 0.0, m1 = 1.0;
    double needed = -g_lo;
    if (cap[1] > 0.0) {
        const double take = std::min(needed, cap[1]);
        m1 = 1.0 - take / cap[1];
        needed -= take;
    }
    if (needed > 0.0) {
        if (cap[0] <= 0.0)
            fail(ErrorCode::infeasible, "constraint gap cannot be closed at the jump");
        m0 = std::min(1.0, needed / cap[0]);
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (dec_lo[i] == dec_hi[i]) {
            accept[i] = dec_lo[i];
        } else {
            accept[i] = dist.atoms()[i].a == 0 ? m0 : m1;
        }
    }
    const double mix[2] = {m0, m1};
    return detail::finalize(ctx, lambda_hat, accept, boundary_eta, mix);
}

} // namespace fairlab
