#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "fairlab/distribution.hpp"
#include "fairlab/error.hpp"

namespace fairlab {

inline constexpr double kBaseRateTol = 1e-9;

/// Bounded label noise around a deterministic base classifier.
struct MassartSpec {
    ClassifierTable base_classifier;
    double delta_cap = 0.0;                              // delta < 1/2
    std::map<std::pair<std::string, int>, double> delta_table;  // (x,a) -> delta(x,a)
    double target_base_rate = 0.0;                       // q

    double delta_at(const std::string& x, int a) const {
        auto it = delta_table.find({x, a});
        if (it == delta_table.end())
            fail(ErrorCode::undefined_point, "no noise level for (" + x + "," +
                                                 std::to_string(a) + ")");
        return it->second;
    }
};

/// Label-noise request for build_stylized. An i.i.d. spec uses one constant
/// delta; a Massart spec caps pointwise levels at delta and takes either a
/// per-feature pattern (mirrored across both groups) or a full (x,a) table.
struct NoiseSpec {
    enum class Kind { iid, massart };

    Kind kind = Kind::iid;
    double delta = 0.0;  // the constant level (iid) or the cap (massart)
    std::vector<double> feature_deltas;                       // pattern mode
    std::map<std::pair<std::string, int>, double> delta_table;  // table mode

    static NoiseSpec iid(double delta) {
        NoiseSpec s;
        s.kind = Kind::iid;
        s.delta = delta;
        return s;
    }

    static NoiseSpec massart_pattern(double cap, std::vector<double> per_feature) {
        NoiseSpec s;
        s.kind = Kind::massart;
        s.delta = cap;
        s.feature_deltas = std::move(per_feature);
        return s;
    }

    static NoiseSpec massart_table(double cap,
                                   std::map<std::pair<std::string, int>, double> table) {
        NoiseSpec s;
        s.kind = Kind::massart;
        s.delta = cap;
        s.delta_table = std::move(table);
        return s;
    }
};

struct StylizedDistribution {
    DiscreteJointDistribution dist;
    MassartSpec spec;
};

/// Builds the stylized noisy distribution: features x0..x{k-1} per group with
/// uniform within-group masses (group 0 carries mass r), a base classifier h
/// accepting the same leading features in both groups, and labels equal to
/// h(x,a) with probability 1 - delta(x,a).
///
/// The base classifier has equal group positivity rates by construction. The
/// induced base rates must equal q in both groups within 1e-9, and the Bayes
/// classifier of the result (= h) must satisfy equal opportunity.
inline StylizedDistribution build_stylized(int features_per_group, double r,
                                           double q, const NoiseSpec& noise) {
    if (features_per_group < 1)
        fail(ErrorCode::param_out_of_range, "need at least one feature per group");
    if (!(r > 0.0 && r < 1.0))
        fail(ErrorCode::param_out_of_range, "r must lie in (0,1)");
    if (!(q > 0.0 && q < 1.0))
        fail(ErrorCode::param_out_of_range, "q must lie in (0,1)");
    if (!(noise.delta >= 0.0 && noise.delta < 0.5))
        fail(ErrorCode::delta_out_of_range, "delta must lie in [0, 1/2)");

    const int k = features_per_group;
    std::vector<std::string> feature_ids(k);
    for (int i = 0; i < k; ++i) feature_ids[i] = "x" + std::to_string(i);

    // Accepted-feature count: from q for iid noise, half the support otherwise.
    int accepted = 0;
    if (noise.kind == NoiseSpec::Kind::iid) {
        if (noise.delta == 0.5)
            fail(ErrorCode::delta_out_of_range, "iid delta must be < 1/2");
        const double positivity = (q - noise.delta) / (1.0 - 2.0 * noise.delta);
        const double count = positivity * k;
        if (std::abs(count - std::round(count)) > 1e-9 || count < 0.5 ||
            count > k - 0.5)
            fail(ErrorCode::base_rate_mismatch,
                 "q is not realizable with equal positivity on " +
                     std::to_string(k) + " uniform features");
        accepted = static_cast<int>(std::llround(count));
    } else {
        accepted = k / 2;
        if (accepted == 0 || accepted == k)
            fail(ErrorCode::param_out_of_range,
                 "massart build needs at least two features per group");
    }

    MassartSpec spec;
    spec.delta_cap = noise.delta;
    spec.target_base_rate = q;
    std::vector<ClassifierTable::Decision> base;
    for (int a : {0, 1})
        for (int i = 0; i < k; ++i) {
            base.push_back({feature_ids[i], a, i < accepted ? 1.0 : 0.0});
            double d = noise.delta;
            if (noise.kind == NoiseSpec::Kind::massart) {
                if (!noise.feature_deltas.empty()) {
                    if (static_cast<int>(noise.feature_deltas.size()) != k)
                        fail(ErrorCode::invalid_argument,
                             "feature delta pattern length differs from feature count");
                    d = noise.feature_deltas[i];
                } else {
                    auto it = noise.delta_table.find({feature_ids[i], a});
                    if (it == noise.delta_table.end())
                        fail(ErrorCode::undefined_point,
                             "delta table misses (" + feature_ids[i] + "," +
                                 std::to_string(a) + ")");
                    d = it->second;
                }
            }
            if (d < 0.0 || d > noise.delta + 1e-15)
                fail(ErrorCode::delta_out_of_range,
                     "delta(x,a) must lie in [0, cap] at " + feature_ids[i]);
            spec.delta_table[{feature_ids[i], a}] = d;
        }
    spec.base_classifier = ClassifierTable(std::move(base));

    std::vector<Atom> atoms;
    double pos_rate[2] = {0.0, 0.0};  // induced q_a
    double tpr_num[2] = {0.0, 0.0};
    for (int a : {0, 1}) {
        const double group = a == 0 ? r : 1.0 - r;
        for (int i = 0; i < k; ++i) {
            const double mass = group / k;
            const double d = spec.delta_table[{feature_ids[i], a}];
            const bool h1 = i < accepted;
            const double eta = h1 ? 1.0 - d : d;
            atoms.push_back({feature_ids[i], a, mass * (1.0 - eta), mass * eta});
            pos_rate[a] += eta / k;
            if (h1) tpr_num[a] += eta / k;
        }
    }
    for (int a : {0, 1})
        if (std::abs(pos_rate[a] - q) > kBaseRateTol)
            fail(ErrorCode::base_rate_mismatch,
                 "noise table induces base rate " + std::to_string(pos_rate[a]) +
                     " in group " + std::to_string(a) + ", expected q");
    if (std::abs(tpr_num[0] / pos_rate[0] - tpr_num[1] / pos_rate[1]) > kBaseRateTol)
        fail(ErrorCode::base_rate_mismatch,
             "noise table breaks equal opportunity of the base classifier");

    return {DiscreteJointDistribution(std::move(atoms)), std::move(spec)};
}

} // namespace fairlab
