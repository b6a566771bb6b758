#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "fairlab/bias_models.hpp"
#include "fairlab/distribution.hpp"
#include "fairlab/error.hpp"
#include "fairlab/lft.hpp"
#include "fairlab/recovery.hpp"
#include "fairlab/solver.hpp"

namespace fairlab {

/// A pair of near-identity transforms, one per group.
struct BoxTransform {
    LinearFractionalTransform group[2];
};

/// The eps-robustness perturbation box: per group S = 1, |R| <= eps,
/// |Q| <= eps, P in [1-eps, 1+eps], with PS - QR >= 0. Every member is
/// order-preserving.
struct RobustnessBox {
    double epsilon = 0.0;

    bool contains(const LinearFractionalTransform& t) const {
        return t.s == 1.0 && std::abs(t.r) <= epsilon && std::abs(t.q) <= epsilon &&
               t.p >= 1.0 - epsilon && t.p <= 1.0 + epsilon &&
               t.p * t.s - t.q * t.r >= 0.0;
    }

    /// All 3^6 coefficient-extreme combinations (each of P, Q, R per group at
    /// its low, middle and high value), minus any violating PS - QR >= 0.
    std::vector<BoxTransform> corners() const {
        const double pv[3] = {1.0 - epsilon, 1.0, 1.0 + epsilon};
        const double qv[3] = {-epsilon, 0.0, epsilon};
        std::vector<LinearFractionalTransform> singles;
        for (double p : pv)
            for (double q : qv)
                for (double r : qv) {
                    LinearFractionalTransform t{p, q, r, 1.0};
                    if (contains(t)) singles.push_back(t);
                }
        std::vector<BoxTransform> out;
        out.reserve(singles.size() * singles.size());
        for (const auto& t0 : singles)
            for (const auto& t1 : singles) out.push_back({{t0, t1}});
        return out;
    }

    std::vector<BoxTransform> sample(std::size_t count, std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        std::vector<BoxTransform> out;
        out.reserve(count);
        while (out.size() < count) {
            BoxTransform bt;
            bool ok = true;
            for (int a : {0, 1}) {
                LinearFractionalTransform t{1.0 + epsilon * unit(rng),
                                            epsilon * unit(rng),
                                            epsilon * unit(rng), 1.0};
                if (!contains(t)) {
                    ok = false;
                    break;
                }
                bt.group[a] = t;
            }
            if (ok) out.push_back(bt);
        }
        return out;
    }
};

struct FiniteHypothesisClass {
    std::vector<ClassifierTable> members;

    void validate(const DiscreteJointDistribution& dist) const {
        if (members.empty())
            fail(ErrorCode::invalid_argument, "hypothesis class is empty");
        for (const auto& h : members)
            for (const auto& atom : dist.atoms()) h.accept_at(atom.x, atom.a);
    }
};

/// Sampled verdict: sound for refutation, incomplete for proof.
struct SampledRobustnessVerdict {
    bool pass = false;
    std::size_t transforms_checked = 0;
    std::optional<BoxTransform> violating_transform;
    std::optional<std::size_t> violating_member;
    std::size_t eta_out_of_range_atoms = 0;  // definition-edge diagnostic
    std::size_t tied_transforms = 0;         // perturbed argmax ties (not violations)
    std::size_t optimum_index = 0;
};

namespace robustness_detail {

inline void require_equal_base_rates(const DiscreteJointDistribution& dist) {
    if (std::abs(dist.base_rate(0) - dist.base_rate(1)) > 1e-9)
        fail(ErrorCode::param_out_of_range,
             "robustness checks assume equal base rates q0 = q1");
}

inline std::size_t unique_argmax(const std::vector<double>& scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (i != best && scores[i] >= scores[best] - 1e-12)
            fail(ErrorCode::tied_optimum,
                 "accuracy maximizer in the hypothesis class is not unique");
    return best;
}

} // namespace robustness_detail

/// Perturbs eta through box transforms (feature masses fixed), recomputes the
/// accuracy argmax over the class for each, and reports PASS when the
/// unperturbed optimum survives every sampled transform. All coefficient
/// corners are always included on top of `samples` seeded interior draws.
inline SampledRobustnessVerdict check_eps_robust(const DiscreteJointDistribution& dist,
                                                 const FiniteHypothesisClass& hypotheses,
                                                 double epsilon, std::size_t samples,
                                                 std::uint64_t seed) {
    if (epsilon < 0.0)
        fail(ErrorCode::param_out_of_range, "epsilon must be nonnegative");
    hypotheses.validate(dist);
    robustness_detail::require_equal_base_rates(dist);

    const auto& members = hypotheses.members;
    const std::size_t n = dist.size();
    std::vector<std::vector<double>> accept(members.size(), std::vector<double>(n));
    for (std::size_t m = 0; m < members.size(); ++m)
        for (std::size_t i = 0; i < n; ++i)
            accept[m][i] =
                members[m].accept_at(dist.atoms()[i].x, dist.atoms()[i].a);

    std::vector<double> base_acc(members.size(), 0.0);
    for (std::size_t m = 0; m < members.size(); ++m)
        for (std::size_t i = 0; i < n; ++i) {
            const auto& atom = dist.atoms()[i];
            base_acc[m] += accept[m][i] * atom.p1 + (1.0 - accept[m][i]) * atom.p0;
        }
    const std::size_t star = robustness_detail::unique_argmax(base_acc);

    RobustnessBox box{epsilon};
    auto transforms = box.corners();
    if (samples > 0) {
        auto extra = box.sample(samples, seed);
        transforms.insert(transforms.end(), extra.begin(), extra.end());
    }

    SampledRobustnessVerdict verdict;
    verdict.optimum_index = star;
    std::vector<double> eta_p(n);
    for (const auto& bt : transforms) {
        ++verdict.transforms_checked;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& atom = dist.atoms()[i];
            eta_p[i] = bt.group[atom.a](atom.eta());
            if (eta_p[i] < 0.0 || eta_p[i] > 1.0) ++verdict.eta_out_of_range_atoms;
        }
        double star_acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& atom = dist.atoms()[i];
            star_acc += atom.mass() * (accept[star][i] * eta_p[i] +
                                       (1.0 - accept[star][i]) * (1.0 - eta_p[i]));
        }
        bool tied = false;
        for (std::size_t m = 0; m < members.size(); ++m) {
            if (m == star) continue;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& atom = dist.atoms()[i];
                acc += atom.mass() * (accept[m][i] * eta_p[i] +
                                      (1.0 - accept[m][i]) * (1.0 - eta_p[i]));
            }
            if (acc > star_acc) {
                verdict.pass = false;
                verdict.violating_transform = bt;
                verdict.violating_member = m;
                return verdict;
            }
            if (acc == star_acc) tied = true;
        }
        if (tied) ++verdict.tied_transforms;
    }
    verdict.pass = true;
    return verdict;
}

struct RobustEndToEndReport {
    RecoveryReport theory;
    bool empirical = false;
    std::size_t fair_members = 0;
    bool multiple_optima = false;
    bool lagrangian_scan_agrees = true;
    std::size_t winner_index = 0;
};

/// Recovers the accuracy-optimal fair member from the biased distribution by
/// filtered enumeration (members equal-opportunity fair on the biased table
/// within 1e-9, maximal biased accuracy), cross-checked by a Lagrangian scan,
/// and compares it against the unbiased optimum.
inline RobustEndToEndReport verify_robust_end_to_end(
    const DiscreteJointDistribution& dist, const FiniteHypothesisClass& hypotheses,
    double epsilon, const BlumStanglBias& bias) {
    hypotheses.validate(dist);
    robustness_detail::require_equal_base_rates(dist);
    const auto& members = hypotheses.members;

    std::vector<double> base_acc(members.size());
    for (std::size_t m = 0; m < members.size(); ++m)
        base_acc[m] = evaluate(dist, members[m]).accuracy;
    const std::size_t star = robustness_detail::unique_argmax(base_acc);
    if (std::abs(evaluate(dist, members[star]).tpr_gap()) > 1e-9)
        fail(ErrorCode::not_applicable,
             "the optimal member is not equal-opportunity fair on the original "
             "distribution");

    RobustEndToEndReport out;
    out.theory = check_robust_recovery(dist.group_fraction(), bias.nu, epsilon,
                                       bias.beta_p, bias.beta_n);

    const auto biased = apply_bias(dist, BiasModel(bias), MarginalPolicy::survival);
    std::vector<double> biased_acc(members.size());
    std::vector<double> biased_gap(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
        const auto rates = evaluate(biased, members[m]);
        biased_acc[m] = rates.accuracy;
        biased_gap[m] = rates.tpr_gap();
    }

    double best = -1.0;
    std::size_t winner = members.size();
    for (std::size_t m = 0; m < members.size(); ++m) {
        if (std::abs(biased_gap[m]) > 1e-9) continue;
        ++out.fair_members;
        if (biased_acc[m] > best + 1e-12) {
            best = biased_acc[m];
            winner = m;
            out.multiple_optima = false;
        } else if (biased_acc[m] >= best - 1e-12) {
            out.multiple_optima = true;
        }
    }
    if (winner == members.size())
        fail(ErrorCode::no_fair_member,
             "no member satisfies equal opportunity on the biased distribution");

    // Cross-check: scan the Lagrangian argmax over a multiplier grid and keep
    // the best fair member it ever selects.
    double scan_best = -1.0;
    for (int step = -2000; step <= 2000; ++step) {
        const double lambda = step * (10.0 / 2000.0);
        std::size_t arg = 0;
        double val = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < members.size(); ++m) {
            const double v = biased_acc[m] + lambda * biased_gap[m];
            if (v > val) {
                val = v;
                arg = m;
            }
        }
        if (std::abs(biased_gap[arg]) <= 1e-9 && biased_acc[arg] > scan_best)
            scan_best = biased_acc[arg];
    }
    out.lagrangian_scan_agrees = std::abs(scan_best - best) <= 1e-9;

    out.winner_index = winner;
    out.empirical = members[winner].equals(members[star], 1e-9) &&
                    !out.multiple_optima;
    return out;
}

} // namespace fairlab
