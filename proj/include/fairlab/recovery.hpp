#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fairlab/bias_models.hpp"
#include "fairlab/distribution.hpp"
#include "fairlab/error.hpp"
#include "fairlab/solver.hpp"
#include "fairlab/stylized.hpp"

namespace fairlab {

inline constexpr double kBoundaryBand = 1e-9;

enum class Verdict { yes, no, indeterminate };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::yes: return "true";
        case Verdict::no: return "false";
        case Verdict::indeterminate: return "indeterminate";
    }
    return "?";
}

/// Evaluated recovery-condition set: one named value per inequality, strict
/// satisfaction flags, the combined verdict, the feasible multiplier interval
/// (nonempty exactly when the verdict holds, for the interval theorems) and
/// the distance to the nearest violation.
struct RecoveryReport {
    std::vector<std::pair<std::string, double>> condition_values;
    std::vector<bool> satisfied;
    Verdict verdict = Verdict::no;
    std::optional<std::pair<double, double>> lambda_interval;
    double margin = 0.0;

    bool holds() const { return verdict == Verdict::yes; }
};

namespace recovery_detail {

inline void check_common_params(double r, double q, double delta, double beta_p,
                                double beta_n, double nu) {
    if (!(r > 0.0 && r < 1.0))
        fail(ErrorCode::param_out_of_range, "r must lie in (0,1)");
    if (!(q > 0.0 && q < 1.0))
        fail(ErrorCode::param_out_of_range, "q must lie in (0,1)");
    if (!(delta > 0.0 && delta < 0.5))
        fail(ErrorCode::param_out_of_range, "delta must lie in (0, 1/2)");
    if (!(beta_p > 0.0 && beta_p <= 1.0))
        fail(ErrorCode::param_out_of_range, "beta_p must lie in (0,1]");
    if (!(beta_n > 0.0 && beta_n <= 1.0))
        fail(ErrorCode::param_out_of_range, "beta_n must lie in (0,1]");
    if (!(nu >= 0.0 && nu < 1.0))
        fail(ErrorCode::param_out_of_range, "nu must lie in [0,1)");
}

inline Verdict strict_verdict(const std::vector<double>& values, double band,
                              double* margin) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values) m = std::min(m, v);
    *margin = m;
    if (std::abs(m) < band) return Verdict::indeterminate;
    return m > 0.0 ? Verdict::yes : Verdict::no;
}

} // namespace recovery_detail

/// Equal-opportunity recovery conditions on a stylized noisy distribution:
/// C1 = (1-r)(1-2d) + r((1-d) bp (1-2nu) - d bn) > 0
/// C2 = (1-r)(1-2d) + r((1-d) bn - d bp (1-2nu)) > 0
/// Also reports the feasible multiplier window (unnormalized convention).
inline RecoveryReport check_eo_recovery(double r, double q, double delta,
                                        double beta_p, double beta_n, double nu) {
    recovery_detail::check_common_params(r, q, delta, beta_p, beta_n, nu);
    const double c1 = (1.0 - r) * (1.0 - 2.0 * delta) +
                      r * ((1.0 - delta) * beta_p * (1.0 - 2.0 * nu) - delta * beta_n);
    const double c2 = (1.0 - r) * (1.0 - 2.0 * delta) +
                      r * ((1.0 - delta) * beta_n - delta * beta_p * (1.0 - 2.0 * nu));

    RecoveryReport rep;
    rep.condition_values = {{"C1", c1}, {"C2", c2}};
    rep.satisfied = {c1 > 0.0, c2 > 0.0};
    rep.verdict = recovery_detail::strict_verdict({c1, c2}, kBoundaryBand, &rep.margin);

    const double c = beta_n / beta_p;
    const double lo1 = -(1.0 - 2.0 * delta) * (1.0 - r) * q / delta;
    const double hi1 = (1.0 - 2.0 * delta) * (1.0 - r) * q / (1.0 - delta);
    const double lo0 =
        beta_n * r * q * (delta / (1.0 - delta) - (1.0 - 2.0 * nu) / c);
    const double hi0 =
        beta_n * r * q * ((1.0 - delta) / delta - (1.0 - 2.0 * nu) / c);
    const double lo = std::max(lo0, lo1);
    const double hi = std::min(hi0, hi1);
    if (lo < hi) rep.lambda_interval = {lo, hi};
    return rep;
}

/// Demographic-parity analogue:
/// D1 = bp (1-d)(1-2d-2r(nu-d)) + d bn (1-2d-2r(1-d)) > 0
/// D2 = bp d (1-2r(1-nu)-2d(1-r)) + (1-d) bn (1-2d(1-r)) > 0
inline RecoveryReport check_dp_recovery(double r, double q, double delta,
                                        double beta_p, double beta_n, double nu) {
    recovery_detail::check_common_params(r, q, delta, beta_p, beta_n, nu);
    const double d1 =
        beta_p * (1.0 - delta) * (1.0 - 2.0 * delta - 2.0 * r * (nu - delta)) +
        delta * beta_n * (1.0 - 2.0 * delta - 2.0 * r * (1.0 - delta));
    const double d2 =
        beta_p * delta * (1.0 - 2.0 * r * (1.0 - nu) - 2.0 * delta * (1.0 - r)) +
        (1.0 - delta) * beta_n * (1.0 - 2.0 * delta * (1.0 - r));

    RecoveryReport rep;
    rep.condition_values = {{"D1", d1}, {"D2", d2}};
    rep.satisfied = {d1 > 0.0, d2 > 0.0};
    rep.verdict = recovery_detail::strict_verdict({d1, d2}, kBoundaryBand, &rep.margin);

    const double c = beta_n / beta_p;
    const double lo1 = (2.0 * delta - 1.0) * (1.0 - r);
    const double hi1 = (1.0 - 2.0 * delta) * (1.0 - r);
    const double lo0 =
        r * (1.0 - 2.0 * (1.0 - delta) * (1.0 - nu) / (c + (1.0 - c) * (1.0 - delta)));
    const double hi0 =
        r * (1.0 - 2.0 * delta * (1.0 - nu) / (delta * (1.0 - c) + c));
    const double lo = std::max(lo0, lo1);
    const double hi = std::min(hi0, hi1);
    if (lo < hi) rep.lambda_interval = {lo, hi};
    return rep;
}

/// Parameters of a stylized build, bundled for end-to-end checks.
struct StylizedParams {
    int features_per_group = 4;
    double r = 0.25;
    double q = 0.5;
    NoiseSpec noise = NoiseSpec::iid(0.3);
};

/// Closed-form verdict paired with the verdict of the full pipeline
/// (build, bias, solve, compare atom-wise against the Bayes classifier).
struct VerdictPair {
    RecoveryReport theory;
    bool empirical = false;
    bool boundary = false;  // theory margin inside the indeterminate band
    LambdaSolution solution;
    bool eta_lemma_consistent = true;
    double rescaled_lambda = 0.0;  // solver lambda in the unnormalized convention
};

namespace recovery_detail {

/// Thresholds of the solved classifier mapped back through the group
/// transforms onto the original eta scale; +-inf when the group is constant.
inline double threshold_on_eta(const GroupThresholdClassifier& g, int a,
                               const BiasModel& model,
                               const DiscreteJointDistribution& original) {
    const double t = g.t[a];
    if (!std::isfinite(t)) return t;
    const auto lft = to_lft(model, a, &original);
    const double den = -lft.r * t + lft.p;
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return lft.inverse(t);
}

} // namespace recovery_detail

/// Runs the full pipeline for a stylized distribution and one Blum-Stangl
/// bias: theory verdict from the closed form, empirical verdict from
/// atom-wise comparison of the constrained optimum on the biased distribution
/// against the Bayes classifier of the original one.
///
/// Equal-opportunity solves use the survival-renormalized biased table; the
/// demographic-parity analysis requires the marginal-preserving form (group
/// marginals and positivity rates unchanged), so DP solves use that.
inline VerdictPair verify_end_to_end(const StylizedParams& params,
                                     const BlumStanglBias& bias,
                                     Constraint constraint) {
    if (constraint == Constraint::none)
        fail(ErrorCode::invalid_argument, "end-to-end check needs a constraint");
    const auto built = build_stylized(params.features_per_group, params.r,
                                      params.q, params.noise);
    const auto& dist = built.dist;
    const double delta = built.spec.delta_cap;
    const auto h_star = bayes_optimal(dist);

    VerdictPair out;
    out.theory = constraint == Constraint::equal_opportunity
                     ? check_eo_recovery(params.r, params.q, delta, bias.beta_p,
                                         bias.beta_n, bias.nu)
                     : check_dp_recovery(params.r, params.q, delta, bias.beta_p,
                                         bias.beta_n, bias.nu);
    out.boundary = out.theory.verdict == Verdict::indeterminate;

    const auto policy = constraint == Constraint::demographic_parity
                            ? MarginalPolicy::preserve_marginal
                            : MarginalPolicy::survival;
    const auto biased = apply_bias(dist, BiasModel(bias), policy);
    out.solution = solve_fair(biased, constraint);
    out.empirical = out.solution.decisions.equals(h_star, 1e-9);

    // Multiplier in the paper's unnormalized convention: the survival solve
    // rescales by the normalizer Z, the marginal-preserving solve keeps mass.
    const double z = policy == MarginalPolicy::survival
                         ? survival_normalizer(dist, bias)
                         : 1.0;
    out.rescaled_lambda = out.solution.lambda_star * z;

    // Threshold lemma: both thresholds strictly inside (delta, 1-delta) on
    // the original eta scale force the classifier to coincide with h*.
    const double t0 = recovery_detail::threshold_on_eta(out.solution.classifier, 0,
                                                        BiasModel(bias), dist);
    const double t1 = recovery_detail::threshold_on_eta(out.solution.classifier, 1,
                                                        BiasModel(bias), dist);
    if (t0 > delta && t0 < 1.0 - delta && t1 > delta && t1 < 1.0 - delta) {
        const bool deterministic_match = out.solution.decisions.equals(h_star, 1e-9);
        out.eta_lemma_consistent = deterministic_match;
    }
    return out;
}

/// One cell of a recovery-region sweep.
struct RegionCell {
    double beta_p = 0.0;
    double beta_n = 0.0;
    double cond1 = 0.0;
    double cond2 = 0.0;
    Verdict theory = Verdict::no;
    std::optional<bool> empirical;
    std::optional<bool> agree;
};

enum class RegionTheorem { eo, dp, robust };

struct SweepRequest {
    RegionTheorem theorem = RegionTheorem::eo;
    double r = 0.25;
    double nu = 0.05;
    double delta = 0.45;    // eo / dp
    double epsilon = 0.05;  // robust
    int grid_n = 101;
    bool with_empirical = false;
    StylizedParams stylized;  // used when with_empirical is set
};

/// Robust-recovery conditions: the gate (1-e) bn <= bp <= (1+e) bn together
/// with the two non-strict inequalities
///   E1 = r((1-nu) bp - (1-e) bn) + e (1-r) >= 0
///   E2 = r((1+e) bn - (1-nu) bp) + e (1-r) >= 0.
/// Condition values are ordered E1, E2, gate-low, gate-high; the verdict is
/// the conjunction of all four (non-strict, so no indeterminate band).
inline RecoveryReport check_robust_recovery(double r, double nu, double epsilon,
                                            double beta_p, double beta_n) {
    if (!(r > 0.0 && r < 1.0))
        fail(ErrorCode::param_out_of_range, "r must lie in (0,1)");
    if (!(nu >= 0.0 && nu < 1.0))
        fail(ErrorCode::param_out_of_range, "nu must lie in [0,1)");
    if (epsilon < 0.0)
        fail(ErrorCode::param_out_of_range, "epsilon must be nonnegative");
    if (!(beta_p > 0.0 && beta_p <= 1.0) || !(beta_n > 0.0 && beta_n <= 1.0))
        fail(ErrorCode::param_out_of_range, "beta parameters must lie in (0,1]");

    const double e1 = r * ((1.0 - nu) * beta_p - (1.0 - epsilon) * beta_n) +
                      epsilon * (1.0 - r);
    const double e2 = r * ((1.0 + epsilon) * beta_n - (1.0 - nu) * beta_p) +
                      epsilon * (1.0 - r);
    const double gate_low = beta_p - (1.0 - epsilon) * beta_n;
    const double gate_high = (1.0 + epsilon) * beta_n - beta_p;

    RecoveryReport rep;
    rep.condition_values = {
        {"E1", e1}, {"E2", e2}, {"gate_low", gate_low}, {"gate_high", gate_high}};
    rep.satisfied = {e1 >= 0.0, e2 >= 0.0, gate_low >= 0.0, gate_high >= 0.0};
    rep.margin = std::min(std::min(e1, e2), std::min(gate_low, gate_high));
    bool all = true;
    for (bool s : rep.satisfied) all = all && s;
    rep.verdict = all ? Verdict::yes : Verdict::no;
    return rep;
}

/// Row-major grid over beta_p, beta_n in (0,1]: cell (i,j) carries
/// beta_p = (i+1)/n, beta_n = (j+1)/n.
inline std::vector<RegionCell> sweep_region(const SweepRequest& req) {
    if (req.grid_n < 2)
        fail(ErrorCode::param_out_of_range, "grid must have at least two cells");
    std::vector<RegionCell> cells;
    cells.reserve(static_cast<std::size_t>(req.grid_n) * req.grid_n);
    for (int i = 1; i <= req.grid_n; ++i) {
        for (int j = 1; j <= req.grid_n; ++j) {
            RegionCell cell;
            cell.beta_p = static_cast<double>(i) / req.grid_n;
            cell.beta_n = static_cast<double>(j) / req.grid_n;
            RecoveryReport rep;
            switch (req.theorem) {
                case RegionTheorem::eo:
                    rep = check_eo_recovery(req.r, req.stylized.q, req.delta,
                                            cell.beta_p, cell.beta_n, req.nu);
                    break;
                case RegionTheorem::dp:
                    rep = check_dp_recovery(req.r, req.stylized.q, req.delta,
                                            cell.beta_p, cell.beta_n, req.nu);
                    break;
                case RegionTheorem::robust:
                    rep = check_robust_recovery(req.r, req.nu, req.epsilon,
                                                cell.beta_p, cell.beta_n);
                    break;
            }
            cell.cond1 = rep.condition_values[0].second;
            cell.cond2 = rep.condition_values[1].second;
            if (req.theorem == RegionTheorem::robust) {
                // The plotted region is cut by the two inequalities alone;
                // (non-strict, so no indeterminate band).
                cell.theory = (cell.cond1 >= 0.0 && cell.cond2 >= 0.0)
                                  ? Verdict::yes
                                  : Verdict::no;
            } else {
                cell.theory = rep.verdict;
            }
            if (req.with_empirical && req.theorem != RegionTheorem::robust) {
                BlumStanglBias bias{cell.beta_p, cell.beta_n, req.nu};
                StylizedParams p = req.stylized;
                p.r = req.r;
                p.noise = NoiseSpec::iid(req.delta);
                const auto pair =
                    verify_end_to_end(p, bias,
                                      req.theorem == RegionTheorem::eo
                                          ? Constraint::equal_opportunity
                                          : Constraint::demographic_parity);
                cell.empirical = pair.empirical;
                if (cell.theory != Verdict::indeterminate)
                    cell.agree = (cell.theory == Verdict::yes) == pair.empirical;
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

} // namespace fairlab
