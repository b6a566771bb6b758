#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairlab/error.hpp"

namespace fairlab {

inline constexpr double kNormalizationTol = 1e-9;

/// One raw entry of a joint probability table.
struct MassPoint {
    std::string x;
    int a = 0;   // group, 0 or 1
    int y = 0;   // label, 0 or 1
    double p = 0.0;
};

/// One support point (x, a) with its label masses.
struct Atom {
    std::string x;
    int a = 0;
    double p0 = 0.0;  // P(X=x, A=a, Y=0)
    double p1 = 0.0;  // P(X=x, A=a, Y=1)

    double mass() const { return p0 + p1; }
    double eta() const { return p1 / (p0 + p1); }
};

struct ValidationIssue {
    ErrorCode code;
    std::string detail;
};

struct ValidationReport {
    bool ok = false;
    double total_mass = 0.0;
    double normalization_error = 0.0;
    double group_mass[2] = {0.0, 0.0};
    std::optional<double> base_rate[2];
    std::vector<std::pair<std::string, double>> eta_table;  // keyed "x|a"
    std::vector<ValidationIssue> issues;
};

/// Exact finite joint distribution over X x {0,1} x {0,1}, stored as a mass
/// table. Immutable after construction; input masses are validated to sum to
/// one within 1e-9 and then renormalized exactly.
class DiscreteJointDistribution {
public:
    static ValidationReport validate(const std::vector<MassPoint>& points) {
        ValidationReport rep;
        std::map<std::pair<int, std::string>, Atom> table;
        std::map<std::pair<std::string, int>, int> seen;  // (x,a) -> y bitmask
        for (const auto& pt : points) {
            if (pt.a != 0 && pt.a != 1) {
                rep.issues.push_back({ErrorCode::invalid_argument,
                                      "group must be 0 or 1 at x=" + pt.x});
                continue;
            }
            if (pt.y != 0 && pt.y != 1) {
                rep.issues.push_back({ErrorCode::invalid_argument,
                                      "label must be 0 or 1 at x=" + pt.x});
                continue;
            }
            if (pt.p < 0.0) {
                rep.issues.push_back({ErrorCode::negative_mass,
                                      "negative mass at (" + pt.x + "," +
                                          std::to_string(pt.a) + "," +
                                          std::to_string(pt.y) + ")"});
            }
            auto& bit = seen[{pt.x, pt.a}];
            if (bit & (1 << pt.y)) {
                rep.issues.push_back({ErrorCode::invalid_argument,
                                      "duplicate point (" + pt.x + "," +
                                          std::to_string(pt.a) + "," +
                                          std::to_string(pt.y) + ")"});
            }
            bit |= 1 << pt.y;
            auto& atom = table[{pt.a, pt.x}];
            atom.x = pt.x;
            atom.a = pt.a;
            (pt.y == 0 ? atom.p0 : atom.p1) += pt.p;
            rep.total_mass += pt.p;
            rep.group_mass[pt.a] += pt.p;
        }
        rep.normalization_error = std::abs(rep.total_mass - 1.0);
        if (rep.normalization_error > kNormalizationTol)
            rep.issues.push_back({ErrorCode::not_normalized,
                                  "total mass " + std::to_string(rep.total_mass)});
        for (int a : {0, 1}) {
            if (rep.group_mass[a] <= 0.0)
                rep.issues.push_back({ErrorCode::missing_group,
                                      "group " + std::to_string(a) + " has no mass"});
        }
        double pos[2] = {0.0, 0.0};
        for (const auto& [key, atom] : table) {
            if (atom.mass() > 0.0)
                rep.eta_table.emplace_back(atom.x + "|" + std::to_string(atom.a),
                                           atom.eta());
            pos[atom.a] += atom.p1;
        }
        for (int a : {0, 1})
            if (rep.group_mass[a] > 0.0)
                rep.base_rate[a] = pos[a] / rep.group_mass[a];
        rep.ok = rep.issues.empty();
        return rep;
    }

    static DiscreteJointDistribution from_points(const std::vector<MassPoint>& points) {
        const auto rep = validate(points);
        if (!rep.ok)
            fail(rep.issues.front().code, rep.issues.front().detail);
        std::map<std::pair<int, std::string>, Atom> table;
        for (const auto& pt : points) {
            auto& atom = table[{pt.a, pt.x}];
            atom.x = pt.x;
            atom.a = pt.a;
            (pt.y == 0 ? atom.p0 : atom.p1) += pt.p;
        }
        std::vector<Atom> atoms;
        atoms.reserve(table.size());
        for (auto& [key, atom] : table)
            if (atom.mass() > 0.0) atoms.push_back(atom);
        return DiscreteJointDistribution(std::move(atoms));
    }

    /// Atoms must already be distinct (x,a) pairs with nonnegative masses.
    /// Renormalizes so the total mass is exactly one.
    explicit DiscreteJointDistribution(std::vector<Atom> atoms)
        : atoms_(std::move(atoms)) {
        std::sort(atoms_.begin(), atoms_.end(), [](const Atom& l, const Atom& r) {
            return std::tie(l.a, l.x) < std::tie(r.a, r.x);
        });
        double total = 0.0;
        for (const auto& atom : atoms_) {
            if (atom.p0 < 0.0 || atom.p1 < 0.0)
                fail(ErrorCode::negative_mass, "negative mass at " + atom.x);
            total += atom.mass();
        }
        if (total <= 0.0) fail(ErrorCode::not_normalized, "zero total mass");
        for (auto& atom : atoms_) {
            atom.p0 /= total;
            atom.p1 /= total;
        }
        for (int a : {0, 1}) {
            group_mass_[a] = 0.0;
            positive_mass_[a] = 0.0;
        }
        for (const auto& atom : atoms_) {
            group_mass_[atom.a] += atom.mass();
            positive_mass_[atom.a] += atom.p1;
        }
        for (int a : {0, 1})
            if (group_mass_[a] <= 0.0)
                fail(ErrorCode::missing_group,
                     "group " + std::to_string(a) + " has no mass");
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }

    double group_mass(int a) const { return group_mass_[a]; }
    double positive_mass(int a) const { return positive_mass_[a]; }  // P(Y=1, A=a)
    double group_fraction() const { return group_mass_[0]; }         // r = P(A=0)

    /// q_a = P(Y=1 | A=a).
    double base_rate(int a) const { return positive_mass_[a] / group_mass_[a]; }

    bool has_positives(int a) const { return positive_mass_[a] > 0.0; }
    bool has_negatives(int a) const {
        return group_mass_[a] - positive_mass_[a] > 0.0;
    }

    int find(const std::string& x, int a) const {
        Atom probe;
        probe.x = x;
        probe.a = a;
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), probe,
                                   [](const Atom& l, const Atom& r) {
                                       return std::tie(l.a, l.x) < std::tie(r.a, r.x);
                                   });
        if (it == atoms_.end() || it->a != a || it->x != x) return -1;
        return static_cast<int>(it - atoms_.begin());
    }

    bool same_support(const DiscreteJointDistribution& other) const {
        if (atoms_.size() != other.atoms_.size()) return false;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (atoms_[i].a != other.atoms_[i].a || atoms_[i].x != other.atoms_[i].x)
                return false;
        return true;
    }

private:
    std::vector<Atom> atoms_;
    double group_mass_[2] = {0.0, 0.0};
    double positive_mass_[2] = {0.0, 0.0};
};

/// Group-aware (possibly randomized) classifier as an explicit table of
/// acceptance probabilities per support point.
class ClassifierTable {
public:
    struct Decision {
        std::string x;
        int a = 0;
        double accept = 0.0;  // acceptance probability in [0,1]
    };

    ClassifierTable() = default;

    explicit ClassifierTable(std::vector<Decision> decisions)
        : decisions_(std::move(decisions)) {
        std::sort(decisions_.begin(), decisions_.end(),
                  [](const Decision& l, const Decision& r) {
                      return std::tie(l.a, l.x) < std::tie(r.a, r.x);
                  });
        for (const auto& d : decisions_)
            if (d.accept < 0.0 || d.accept > 1.0)
                fail(ErrorCode::invalid_argument,
                     "acceptance probability outside [0,1] at " + d.x);
    }

    const std::vector<Decision>& decisions() const { return decisions_; }

    std::optional<double> find(const std::string& x, int a) const {
        Decision probe;
        probe.x = x;
        probe.a = a;
        auto it = std::lower_bound(decisions_.begin(), decisions_.end(), probe,
                                   [](const Decision& l, const Decision& r) {
                                       return std::tie(l.a, l.x) < std::tie(r.a, r.x);
                                   });
        if (it == decisions_.end() || it->a != a || it->x != x) return std::nullopt;
        return it->accept;
    }

    double accept_at(const std::string& x, int a) const {
        auto v = find(x, a);
        if (!v)
            fail(ErrorCode::undefined_point,
                 "classifier undefined at (" + x + "," + std::to_string(a) + ")");
        return *v;
    }

    bool deterministic(double tol = 0.0) const {
        for (const auto& d : decisions_)
            if (std::min(d.accept, 1.0 - d.accept) > tol) return false;
        return true;
    }

    /// Atom-wise equality of decisions, acceptance probabilities compared
    /// at the given tolerance. Supports must coincide.
    bool equals(const ClassifierTable& other, double tol = 1e-9) const {
        if (decisions_.size() != other.decisions_.size()) return false;
        for (std::size_t i = 0; i < decisions_.size(); ++i) {
            const auto& l = decisions_[i];
            const auto& r = other.decisions_[i];
            if (l.a != r.a || l.x != r.x) return false;
            if (std::abs(l.accept - r.accept) > tol) return false;
        }
        return true;
    }

private:
    std::vector<Decision> decisions_;
};

/// Exact population confusion rates. TPR/FNR are absent for a group with no
/// positive mass, TNR/FPR for a group with no negative mass.
struct ConfusionRates {
    std::optional<double> tpr[2];
    std::optional<double> fnr[2];
    std::optional<double> tnr[2];
    std::optional<double> fpr[2];
    double pr[2] = {0.0, 0.0};  // P(h=1 | A=a)
    double accuracy = 0.0;

    double tpr_gap() const {
        if (!tpr[0] || !tpr[1])
            fail(ErrorCode::undefined_rate, "TPR undefined for a group");
        return *tpr[0] - *tpr[1];
    }
    double pr_gap() const { return pr[0] - pr[1]; }
};

inline ConfusionRates evaluate(const DiscreteJointDistribution& dist,
                               const ClassifierTable& h) {
    double tp[2] = {0, 0}, fp[2] = {0, 0};
    double accept_mass[2] = {0, 0};
    double correct = 0.0;
    for (const auto& atom : dist.atoms()) {
        const double accept = h.accept_at(atom.x, atom.a);
        tp[atom.a] += accept * atom.p1;
        fp[atom.a] += accept * atom.p0;
        accept_mass[atom.a] += accept * atom.mass();
        correct += accept * atom.p1 + (1.0 - accept) * atom.p0;
    }
    ConfusionRates out;
    for (int a : {0, 1}) {
        const double pos = dist.positive_mass(a);
        const double neg = dist.group_mass(a) - pos;
        if (pos > 0.0) {
            out.tpr[a] = tp[a] / pos;
            out.fnr[a] = 1.0 - *out.tpr[a];
        }
        if (neg > 0.0) {
            out.fpr[a] = fp[a] / neg;
            out.tnr[a] = 1.0 - *out.fpr[a];
        }
        out.pr[a] = accept_mass[a] / dist.group_mass(a);
    }
    out.accuracy = correct;
    return out;
}

/// h*(x,a) = 1{eta(x,a) >= 1/2}; ties at exactly 1/2 accept.
inline ClassifierTable bayes_optimal(const DiscreteJointDistribution& dist) {
    std::vector<ClassifierTable::Decision> dec;
    dec.reserve(dist.size());
    for (const auto& atom : dist.atoms())
        dec.push_back({atom.x, atom.a, atom.eta() >= 0.5 ? 1.0 : 0.0});
    return ClassifierTable(std::move(dec));
}

} // namespace fairlab
