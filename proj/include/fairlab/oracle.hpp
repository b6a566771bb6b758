#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fairlab/distribution.hpp"
#include "fairlab/error.hpp"
#include "fairlab/solver.hpp"

namespace fairlab {

/// Ground-truth search result: the best constrained accuracy and every
/// classifier attaining it within 1e-12.
struct OracleResult {
    double best_accuracy = -1.0;
    std::vector<ClassifierTable> arg_best;
    double constraint_gap_used = 0.0;

    bool found() const { return best_accuracy >= 0.0; }
};

inline constexpr std::size_t kDeterministicEnumerationCap = 20;

namespace oracle_detail {

struct AtomView {
    int a;
    double eta;
    double p0, p1, mass;
    double rate_w;  // contribution of acceptance to the group's rate
};

inline std::vector<AtomView> make_views(const DiscreteJointDistribution& dist,
                                        Constraint constraint) {
    if (constraint == Constraint::equal_opportunity)
        for (int a : {0, 1})
            if (!dist.has_positives(a))
                fail(ErrorCode::undefined_constraint,
                     "equal opportunity undefined: group " + std::to_string(a) +
                         " has no positive mass");
    std::vector<AtomView> views;
    views.reserve(dist.size());
    for (const auto& atom : dist.atoms()) {
        AtomView v{atom.a, atom.eta(), atom.p0, atom.p1, atom.mass(), 0.0};
        if (constraint == Constraint::equal_opportunity)
            v.rate_w = atom.p1 / dist.positive_mass(atom.a);
        else if (constraint == Constraint::demographic_parity)
            v.rate_w = atom.mass() / dist.group_mass(atom.a);
        views.push_back(v);
    }
    return views;
}

inline ClassifierTable table_from_accept(const DiscreteJointDistribution& dist,
                                         const std::vector<double>& accept) {
    std::vector<ClassifierTable::Decision> dec;
    dec.reserve(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i)
        dec.push_back({dist.atoms()[i].x, dist.atoms()[i].a, accept[i]});
    return ClassifierTable(std::move(dec));
}

} // namespace oracle_detail

/// Exhaustive scan over all 2^n deterministic tables on the support; keeps the
/// maximizers whose constraint gap is at most tol.
inline OracleResult enumerate_deterministic(const DiscreteJointDistribution& dist,
                                            Constraint constraint,
                                            double tol = 1e-6) {
    const std::size_t n = dist.size();
    if (n > kDeterministicEnumerationCap)
        fail(ErrorCode::too_large,
             "support size " + std::to_string(n) + " exceeds the 2^20 cap");
    const auto views = oracle_detail::make_views(dist, constraint);

    OracleResult out;
    out.constraint_gap_used = constraint == Constraint::none ? 0.0 : tol;
    std::vector<std::uint32_t> best_masks;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double acc = 0.0, rate0 = 0.0, rate1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                acc += views[i].p1;
                (views[i].a == 0 ? rate0 : rate1) += views[i].rate_w;
            } else {
                acc += views[i].p0;
            }
        }
        if (constraint != Constraint::none && std::abs(rate0 - rate1) > tol)
            continue;
        if (acc > out.best_accuracy + 1e-12) {
            out.best_accuracy = acc;
            best_masks.assign(1, mask);
        } else if (acc >= out.best_accuracy - 1e-12) {
            best_masks.push_back(mask);
        }
    }
    for (auto mask : best_masks) {
        std::vector<double> accept(n);
        for (std::size_t i = 0; i < n; ++i) accept[i] = (mask >> i) & 1u;
        out.arg_best.push_back(oracle_detail::table_from_accept(dist, accept));
    }
    return out;
}

/// Scans every pair of group thresholds drawn from the per-group eta grid,
/// solving for the mixing weights at the two threshold atoms that satisfy the
/// constraint exactly; returns the accuracy-maximal feasible combinations.
/// Acceptance is strict above the threshold, weighted at it, zero below.
inline OracleResult enumerate_thresholds(const DiscreteJointDistribution& dist,
                                         Constraint constraint,
                                         double tol = 1e-10) {
    const auto views = oracle_detail::make_views(dist, constraint);
    const std::size_t n = views.size();

    std::vector<double> grid[2];
    for (const auto& v : views) grid[v.a].push_back(v.eta);
    for (int a : {0, 1}) {
        std::sort(grid[a].begin(), grid[a].end());
        grid[a].erase(std::unique(grid[a].begin(), grid[a].end()), grid[a].end());
    }

    OracleResult out;
    out.constraint_gap_used = constraint == Constraint::none ? 0.0 : tol;
    std::vector<std::pair<std::array<double, 2>, std::array<double, 2>>> best_params;

    auto consider = [&](double t0, double t1, double m0, double m1) {
        double acc = 0.0, gap = 0.0;
        for (const auto& v : views) {
            const double t = v.a == 0 ? t0 : t1;
            const double m = v.a == 0 ? m0 : m1;
            double accept;
            if (v.eta > t)
                accept = 1.0;
            else if (v.eta == t)
                accept = m;
            else
                accept = 0.0;
            acc += accept * v.p1 + (1.0 - accept) * v.p0;
            gap += (v.a == 0 ? 1.0 : -1.0) * accept * v.rate_w;
        }
        if (constraint != Constraint::none && std::abs(gap) > tol) return;
        if (acc > out.best_accuracy + 1e-12) {
            out.best_accuracy = acc;
            best_params.assign(1, {{t0, t1}, {m0, m1}});
        } else if (acc >= out.best_accuracy - 1e-12) {
            best_params.push_back({{t0, t1}, {m0, m1}});
        }
    };

    for (double t0 : grid[0]) {
        for (double t1 : grid[1]) {
            // Rates split into a fixed part (above threshold) and a part
            // linear in the mixing weights at the threshold atoms.
            double above[2] = {0.0, 0.0}, at[2] = {0.0, 0.0};
            for (const auto& v : views) {
                const double t = v.a == 0 ? t0 : t1;
                if (v.eta > t)
                    above[v.a] += v.rate_w;
                else if (v.eta == t)
                    at[v.a] += v.rate_w;
            }
            if (constraint == Constraint::none) {
                for (double m0 : {0.0, 1.0})
                    for (double m1 : {0.0, 1.0}) consider(t0, t1, m0, m1);
                continue;
            }
            // Solve above0 + m0*at0 = above1 + m1*at1 on the unit square; the
            // objective is linear, so optima sit at segment endpoints.
            for (double m0 : {0.0, 1.0}) {
                if (at[1] > 0.0) {
                    const double m1 = (above[0] + m0 * at[0] - above[1]) / at[1];
                    if (m1 >= -1e-12 && m1 <= 1.0 + 1e-12)
                        consider(t0, t1, m0, std::clamp(m1, 0.0, 1.0));
                } else if (std::abs(above[0] + m0 * at[0] - above[1]) <= tol) {
                    for (double m1 : {0.0, 1.0}) consider(t0, t1, m0, m1);
                }
            }
            for (double m1 : {0.0, 1.0}) {
                if (at[0] > 0.0) {
                    const double m0 = (above[1] + m1 * at[1] - above[0]) / at[0];
                    if (m0 >= -1e-12 && m0 <= 1.0 + 1e-12)
                        consider(t0, t1, std::clamp(m0, 0.0, 1.0), m1);
                }
            }
        }
    }

    std::vector<std::vector<double>> seen;
    for (const auto& [ts, ms] : best_params) {
        std::vector<double> accept(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& v = views[i];
            const double t = v.a == 0 ? ts[0] : ts[1];
            const double m = v.a == 0 ? ms[0] : ms[1];
            accept[i] = v.eta > t ? 1.0 : (v.eta == t ? m : 0.0);
        }
        bool duplicate = false;
        for (const auto& prev : seen) {
            bool same = true;
            for (std::size_t i = 0; i < n && same; ++i)
                same = std::abs(prev[i] - accept[i]) <= 1e-12;
            if (same) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        seen.push_back(accept);
        out.arg_best.push_back(oracle_detail::table_from_accept(dist, accept));
    }
    return out;
}

} // namespace fairlab
