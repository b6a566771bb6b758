#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fairlab/distribution.hpp"
#include "fairlab/error.hpp"
#include "fairlab/lft.hpp"

namespace fairlab {

/// Under-representation plus label bias on the underprivileged group: points
/// with (A=0, Y=1) survive with probability beta_p, points with (A=0, Y=0)
/// with probability beta_n, and surviving (A=0, Y=1) labels flip to 0 with
/// probability nu. Group 1 is untouched.
struct BlumStanglBias {
    double beta_p = 1.0;
    double beta_n = 1.0;
    double nu = 0.0;

    double c() const { return beta_n / beta_p; }

    void validate() const {
        if (!(beta_p > 0.0 && beta_p <= 1.0))
            fail(ErrorCode::param_out_of_range, "beta_p must lie in (0,1]");
        if (!(beta_n > 0.0 && beta_n <= 1.0))
            fail(ErrorCode::param_out_of_range, "beta_n must lie in (0,1]");
        if (!(nu >= 0.0 && nu < 1.0))
            fail(ErrorCode::param_out_of_range, "nu must lie in [0,1)");
    }
};

/// Group-dependent label flips: eps1[a] = P(Y~=0 | Y=1, A=a),
/// eps0[a] = P(Y~=1 | Y=0, A=a).
struct LabelFlipBias {
    double eps1[2] = {0.0, 0.0};
    double eps0[2] = {0.0, 0.0};

    void validate() const {
        for (int a : {0, 1}) {
            if (eps1[a] < 0.0 || eps0[a] < 0.0 || eps1[a] + eps0[a] >= 1.0)
                fail(ErrorCode::param_out_of_range,
                     "need 0 <= eps1 + eps0 < 1 in group " + std::to_string(a));
        }
    }
};

/// Group-dependent prior probability shift: class-conditional feature laws are
/// preserved while the base rate moves to the given target per group.
struct PriorShiftBias {
    double target_base_rate[2] = {0.5, 0.5};

    void validate() const {
        for (int a : {0, 1})
            if (!(target_base_rate[a] > 0.0 && target_base_rate[a] < 1.0))
                fail(ErrorCode::param_out_of_range,
                     "target base rate must lie in (0,1)");
    }

    /// alpha_a = P(Y~=0|A=a) P(Y=1|A=a) / (P(Y~=1|A=a) P(Y=0|A=a)).
    double alpha(int a, double source_base_rate) const {
        if (!(source_base_rate > 0.0 && source_base_rate < 1.0))
            fail(ErrorCode::param_out_of_range,
                 "prior shift needs a source base rate in (0,1)");
        return (1.0 - target_base_rate[a]) * source_base_rate /
               (target_base_rate[a] * (1.0 - source_base_rate));
    }
};

using BiasModel = std::variant<BlumStanglBias, LabelFlipBias, PriorShiftBias>;

inline LinearFractionalTransform to_lft(const BlumStanglBias& m, int a) {
    m.validate();
    if (a == 1) return LinearFractionalTransform::identity();
    const double c = m.c();
    return {1.0 - m.nu, 0.0, 1.0 - c, c};
}

inline LinearFractionalTransform to_lft(const LabelFlipBias& m, int a) {
    m.validate();
    return {1.0 - m.eps1[a] - m.eps0[a], m.eps0[a], 0.0, 1.0};
}

inline LinearFractionalTransform to_lft(const PriorShiftBias& m, int a,
                                        double source_base_rate) {
    m.validate();
    const double alpha = m.alpha(a, source_base_rate);
    return {1.0, 0.0, 1.0 - alpha, alpha};
}

inline LinearFractionalTransform to_lft(const BiasModel& model, int a,
                                        const DiscreteJointDistribution* dist = nullptr) {
    if (const auto* bs = std::get_if<BlumStanglBias>(&model)) return to_lft(*bs, a);
    if (const auto* lf = std::get_if<LabelFlipBias>(&model)) return to_lft(*lf, a);
    const auto& ps = std::get<PriorShiftBias>(model);
    if (dist == nullptr)
        fail(ErrorCode::invalid_argument,
             "prior shift transform needs the source distribution");
    return to_lft(ps, a, dist->base_rate(a));
}

/// How apply_bias treats the feature marginal of the biased distribution.
///
/// `survival` is the literal generative process: surviving mass is kept and
/// the result renormalized globally (the Blum-Stangl case reweights the
/// underprivileged group's feature marginal). `preserve_marginal` keeps every
/// (x,a) mass and only moves the label conditional through the model's
/// transform; this is the reading under which group marginals and positivity
/// rates are unchanged, which the demographic-parity analysis relies on.
/// The two coincide for the label-flip and prior-shift models.
enum class MarginalPolicy { survival, preserve_marginal };

namespace detail {

inline void check_eta_transform(const DiscreteJointDistribution& before,
                                const DiscreteJointDistribution& after,
                                const BiasModel& model) {
    for (std::size_t i = 0; i < before.atoms().size(); ++i) {
        const auto& src = before.atoms()[i];
        const auto& dst = after.atoms()[i];
        const double expected = to_lft(model, src.a, &before)(src.eta());
        if (std::abs(dst.eta() - expected) > 1e-12)
            throw std::logic_error("biased eta deviates from its linear fractional image");
    }
}

} // namespace detail

/// Survival normalizer Z = (1-r) + sum_x [beta_p p(x,0,1) + beta_n p(x,0,0)].
inline double survival_normalizer(const DiscreteJointDistribution& dist,
                                  const BlumStanglBias& m) {
    double z = 1.0 - dist.group_fraction();
    for (const auto& atom : dist.atoms())
        if (atom.a == 0) z += m.beta_p * atom.p1 + m.beta_n * atom.p0;
    return z;
}

inline DiscreteJointDistribution apply_bias(
    const DiscreteJointDistribution& dist, const BiasModel& model,
    MarginalPolicy policy = MarginalPolicy::survival) {
    std::vector<Atom> atoms;
    atoms.reserve(dist.size());
    if (const auto* bs = std::get_if<BlumStanglBias>(&model)) {
        bs->validate();
        for (const auto& atom : dist.atoms()) {
            Atom out = atom;
            if (atom.a == 0) {
                if (policy == MarginalPolicy::survival) {
                    out.p1 = bs->beta_p * (1.0 - bs->nu) * atom.p1;
                    out.p0 = bs->beta_n * atom.p0 + bs->beta_p * bs->nu * atom.p1;
                } else {
                    const double eta = to_lft(*bs, 0)(atom.eta());
                    out.p1 = atom.mass() * eta;
                    out.p0 = atom.mass() * (1.0 - eta);
                }
            }
            atoms.push_back(out);
        }
    } else if (const auto* lf = std::get_if<LabelFlipBias>(&model)) {
        lf->validate();
        for (const auto& atom : dist.atoms()) {
            Atom out = atom;
            out.p1 = (1.0 - lf->eps1[atom.a]) * atom.p1 + lf->eps0[atom.a] * atom.p0;
            out.p0 = lf->eps1[atom.a] * atom.p1 + (1.0 - lf->eps0[atom.a]) * atom.p0;
            atoms.push_back(out);
        }
    } else {
        const auto& ps = std::get<PriorShiftBias>(model);
        ps.validate();
        double scale1[2], scale0[2];
        for (int a : {0, 1}) {
            const double q = dist.base_rate(a);
            if (!(q > 0.0 && q < 1.0))
                fail(ErrorCode::param_out_of_range,
                     "prior shift needs both labels present in group " +
                         std::to_string(a));
            scale1[a] = ps.target_base_rate[a] / q;
            scale0[a] = (1.0 - ps.target_base_rate[a]) / (1.0 - q);
        }
        for (const auto& atom : dist.atoms()) {
            Atom out = atom;
            out.p1 = scale1[atom.a] * atom.p1;
            out.p0 = scale0[atom.a] * atom.p0;
            atoms.push_back(out);
        }
    }
    for (int a : {0, 1}) {
        double mass = 0.0;
        for (const auto& atom : atoms)
            if (atom.a == a) mass += atom.mass();
        if (mass <= 1e-15)
            fail(ErrorCode::degenerate_output,
                 "group " + std::to_string(a) + " lost all mass");
    }
    DiscreteJointDistribution out(std::move(atoms));
    detail::check_eta_transform(dist, out, model);
    return out;
}

/// Both sides of the biased-rate mixing identities
///   TPR~_a = P(Y=1|Y~=1,A=a) TPR_a + P(Y=0|Y~=1,A=a) FPR_a
///   TNR~_a = P(Y=0|Y~=0,A=a) TNR_a + P(Y=1|Y~=0,A=a) FNR_a
/// evaluated exactly on the transformed joint table.
struct RateIdentityReport {
    std::optional<double> tpr_lhs[2], tpr_rhs[2];
    std::optional<double> tnr_lhs[2], tnr_rhs[2];
    double max_discrepancy = 0.0;
};

inline RateIdentityReport biased_rate_identity(const DiscreteJointDistribution& dist,
                                               const BiasModel& model,
                                               const ClassifierTable& h) {
    if (std::holds_alternative<PriorShiftBias>(model))
        fail(ErrorCode::unsupported_model,
             "prior shift has no pointwise label coupling");

    // Within-group joint masses m[y][ytilde] of (Y, Y~), unnormalized.
    auto coupling = [&](int a, double m[2][2]) {
        const double pos = dist.positive_mass(a);
        const double neg = dist.group_mass(a) - pos;
        if (const auto* bs = std::get_if<BlumStanglBias>(&model)) {
            if (a == 0) {
                m[1][1] = bs->beta_p * (1.0 - bs->nu) * pos;
                m[1][0] = bs->beta_p * bs->nu * pos;
                m[0][0] = bs->beta_n * neg;
                m[0][1] = 0.0;
            } else {
                m[1][1] = pos;
                m[1][0] = 0.0;
                m[0][0] = neg;
                m[0][1] = 0.0;
            }
        } else {
            const auto& lf = std::get<LabelFlipBias>(model);
            m[1][1] = (1.0 - lf.eps1[a]) * pos;
            m[1][0] = lf.eps1[a] * pos;
            m[0][1] = lf.eps0[a] * neg;
            m[0][0] = (1.0 - lf.eps0[a]) * neg;
        }
    };

    const auto biased = apply_bias(dist, model, MarginalPolicy::survival);
    const auto before = evaluate(dist, h);
    const auto after = evaluate(biased, h);

    RateIdentityReport rep;
    for (int a : {0, 1}) {
        double m[2][2];
        coupling(a, m);
        const double pos_t = m[1][1] + m[0][1];
        const double neg_t = m[1][0] + m[0][0];
        if (pos_t > 0.0 && before.tpr[a] && before.fpr[a]) {
            rep.tpr_lhs[a] = after.tpr[a];
            rep.tpr_rhs[a] = (m[1][1] / pos_t) * *before.tpr[a] +
                             (m[0][1] / pos_t) * *before.fpr[a];
        }
        if (neg_t > 0.0 && before.tnr[a] && before.fnr[a]) {
            rep.tnr_lhs[a] = after.tnr[a];
            rep.tnr_rhs[a] = (m[0][0] / neg_t) * *before.tnr[a] +
                             (m[1][0] / neg_t) * *before.fnr[a];
        }
        if (rep.tpr_lhs[a] && rep.tpr_rhs[a])
            rep.max_discrepancy = std::max(
                rep.max_discrepancy, std::abs(*rep.tpr_lhs[a] - *rep.tpr_rhs[a]));
        if (rep.tnr_lhs[a] && rep.tnr_rhs[a])
            rep.max_discrepancy = std::max(
                rep.max_discrepancy, std::abs(*rep.tnr_lhs[a] - *rep.tnr_rhs[a]));
    }
    return rep;
}

/// True iff every supplied classifier is EO-fair on the original distribution
/// exactly when it is EO-fair on the biased one (gaps compared at tol).
inline bool eo_feasible_set_equal(const DiscreteJointDistribution& dist,
                                  const BlumStanglBias& model,
                                  const std::vector<ClassifierTable>& classifiers,
                                  double tol = 1e-9) {
    const auto biased = apply_bias(dist, BiasModel(model), MarginalPolicy::survival);
    for (const auto& h : classifiers) {
        const bool fair_before = std::abs(evaluate(dist, h).tpr_gap()) <= tol;
        const bool fair_after = std::abs(evaluate(biased, h).tpr_gap()) <= tol;
        if (fair_before != fair_after) return false;
    }
    return true;
}

} // namespace fairlab
