#pragma once

#include <cmath>
#include <map>
#include <string>

#include "fairlab/bias_models.hpp"
#include "fairlab/distribution.hpp"
#include "fairlab/error.hpp"
#include "fairlab/recovery.hpp"
#include "fairlab/solver.hpp"

namespace fairlab {

enum class RejectAction { zero = 0, one = 1, abstain = 2 };

/// Three-way rule paying penalty delta for abstention: predict 0 when
/// eta <= delta, abstain on eta in (delta, 1-delta), predict 1 when
/// eta >= 1-delta.
struct RejectClassifier {
    double penalty = 0.0;
    std::map<std::pair<std::string, int>, RejectAction> decisions;
    double rejection_mass = 0.0;

    RejectAction at(const std::string& x, int a) const {
        auto it = decisions.find({x, a});
        if (it == decisions.end())
            fail(ErrorCode::undefined_point, "reject rule undefined at (" + x +
                                                 "," + std::to_string(a) + ")");
        return it->second;
    }

    /// Objective value P(wrong, not abstained) + penalty * P(abstained).
    double objective(const DiscreteJointDistribution& dist) const {
        double total = 0.0;
        for (const auto& atom : dist.atoms()) {
            switch (at(atom.x, atom.a)) {
                case RejectAction::zero: total += atom.p1; break;
                case RejectAction::one: total += atom.p0; break;
                case RejectAction::abstain: total += penalty * atom.mass(); break;
            }
        }
        return total;
    }
};

inline RejectClassifier optimal_reject(const DiscreteJointDistribution& dist,
                                       double delta) {
    if (!(delta >= 0.0 && delta < 0.5))
        fail(ErrorCode::param_out_of_range, "rejection penalty must lie in [0, 1/2)");
    RejectClassifier out;
    out.penalty = delta;
    for (const auto& atom : dist.atoms()) {
        const double eta = atom.eta();
        RejectAction action;
        if (eta <= delta)
            action = RejectAction::zero;
        else if (eta >= 1.0 - delta)
            action = RejectAction::one;
        else {
            action = RejectAction::abstain;
            out.rejection_mass += atom.mass();
        }
        out.decisions[{atom.x, atom.a}] = action;
    }
    return out;
}

/// Recovery of the reject-option rule through fair classification on the
/// biased distribution: the theory verdict reuses the equal-opportunity
/// recovery conditions with the rejection penalty in place of the noise
/// level; the empirical verdict requires the solved classifier to agree with
/// the reject rule on every non-abstained atom.
struct RejectRecoveryReport {
    RecoveryReport theory;
    bool empirical = false;
    double rejection_mass = 0.0;
    double disagreement_mass = 0.0;  // abstained atoms always count as disagreeing
    LambdaSolution solution;
};

inline RejectRecoveryReport check_reject_recovery(const DiscreteJointDistribution& dist,
                                                  double delta,
                                                  const BlumStanglBias& bias) {
    const auto rej = optimal_reject(dist, delta);

    // Precondition: the reject rule satisfies equal opportunity on the
    // non-rejected part, P(h=1 | Y=1, A=a) counting abstentions as 0.
    double tp[2] = {0.0, 0.0};
    for (const auto& atom : dist.atoms())
        if (rej.at(atom.x, atom.a) == RejectAction::one) tp[atom.a] += atom.p1;
    for (int a : {0, 1})
        if (!dist.has_positives(a))
            fail(ErrorCode::not_applicable,
                 "group " + std::to_string(a) + " has no positive mass");
    const double gap =
        tp[0] / dist.positive_mass(0) - tp[1] / dist.positive_mass(1);
    if (std::abs(gap) > 1e-9)
        fail(ErrorCode::not_applicable,
             "reject rule is not equal-opportunity fair on the non-rejected part "
             "(gap " + std::to_string(gap) + ")");

    RejectRecoveryReport out;
    out.rejection_mass = rej.rejection_mass;
    // delta == 0 makes the condition expressions trivial (1-2*0 terms) but the
    // strict-parameter check requires delta > 0; clamp into the open interval.
    const double theory_delta = std::max(delta, 1e-12);
    out.theory = check_eo_recovery(dist.group_fraction(), dist.base_rate(0),
                                   theory_delta, bias.beta_p, bias.beta_n, bias.nu);

    const auto biased = apply_bias(dist, BiasModel(bias), MarginalPolicy::survival);
    out.solution = solve_fair(biased, Constraint::equal_opportunity);

    bool agree = true;
    double disagreement = 0.0;
    for (const auto& atom : dist.atoms()) {
        const auto action = rej.at(atom.x, atom.a);
        const double accept = out.solution.decisions.accept_at(atom.x, atom.a);
        if (action == RejectAction::abstain) {
            disagreement += atom.mass();
            continue;
        }
        const double want = action == RejectAction::one ? 1.0 : 0.0;
        if (std::abs(accept - want) > 1e-9) {
            agree = false;
            disagreement += atom.mass();
        }
    }
    out.empirical = agree;
    out.disagreement_mass = disagreement;
    return out;
}

} // namespace fairlab
