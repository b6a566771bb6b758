#pragma once

#include <random>
#include <string>
#include <vector>

#include "fairlab/distribution.hpp"

namespace fairlab::testing {

/// The four-point table used across the suites: uniform (x,a) masses 1/4,
/// eta = 0.9, 0.1 in group 0 and 0.8, 0.2 in group 1; both base rates 1/2.
inline DiscreteJointDistribution d4() {
    std::vector<Atom> atoms{
        {"x1", 0, 0.25 * 0.1, 0.25 * 0.9},
        {"x2", 0, 0.25 * 0.9, 0.25 * 0.1},
        {"x1", 1, 0.25 * 0.2, 0.25 * 0.8},
        {"x2", 1, 0.25 * 0.8, 0.25 * 0.2},
    };
    return DiscreteJointDistribution(std::move(atoms));
}

/// Group-symmetric variant of d4 (eta 0.9, 0.1 in both groups), so the Bayes
/// classifier is fair for both constraint families.
inline DiscreteJointDistribution d4_symmetric(double r = 0.5, double eta_hi = 0.9) {
    std::vector<Atom> atoms;
    for (int a : {0, 1}) {
        const double g = a == 0 ? r : 1.0 - r;
        atoms.push_back({"x1", a, 0.5 * g * (1 - eta_hi), 0.5 * g * eta_hi});
        atoms.push_back({"x2", a, 0.5 * g * eta_hi, 0.5 * g * (1 - eta_hi)});
    }
    return DiscreteJointDistribution(std::move(atoms));
}

/// Random distribution with both labels present in both groups.
inline DiscreteJointDistribution random_distribution(std::mt19937_64& rng,
                                                     int atoms_per_group) {
    std::uniform_real_distribution<double> mass(0.05, 1.0);
    std::uniform_real_distribution<double> eta(0.02, 0.98);
    std::vector<Atom> atoms;
    for (int a : {0, 1})
        for (int i = 0; i < atoms_per_group; ++i) {
            const double m = mass(rng);
            const double e = eta(rng);
            atoms.push_back(
                {"x" + std::to_string(i), a, m * (1.0 - e), m * e});
        }
    return DiscreteJointDistribution(std::move(atoms));
}

inline ClassifierTable random_deterministic(std::mt19937_64& rng,
                                            const DiscreteJointDistribution& dist) {
    std::bernoulli_distribution coin(0.5);
    std::vector<ClassifierTable::Decision> dec;
    for (const auto& atom : dist.atoms())
        dec.push_back({atom.x, atom.a, coin(rng) ? 1.0 : 0.0});
    return ClassifierTable(std::move(dec));
}

/// All 2^n deterministic tables on the support (n must stay small).
inline std::vector<ClassifierTable> all_deterministic(
    const DiscreteJointDistribution& dist) {
    const std::size_t n = dist.size();
    std::vector<ClassifierTable> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<ClassifierTable::Decision> dec;
        for (std::size_t i = 0; i < n; ++i)
            dec.push_back({dist.atoms()[i].x, dist.atoms()[i].a,
                           (mask >> i) & 1u ? 1.0 : 0.0});
        out.emplace_back(std::move(dec));
    }
    return out;
}

} // namespace fairlab::testing
