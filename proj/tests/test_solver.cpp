#include <catch_amalgamated.hpp>

#include <random>

#include "fairlab/bias_models.hpp"
#include "fairlab/oracle.hpp"
#include "fairlab/solver.hpp"
#include "fairlab/stylized.hpp"
#include "helpers.hpp"

using namespace fairlab;
using fairlab::testing::d4;
using Catch::Approx;

TEST_CASE("constraint NONE reduces to the Bayes classifier") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 5);
        const auto sol = solve_fair(dist, Constraint::none);
        REQUIRE(sol.lambda_star == 0.0);
        REQUIRE(sol.decisions.equals(bayes_optimal(dist), 0.0));
    }
}

TEST_CASE("an already-fair optimum returns lambda zero") {
    const auto built = build_stylized(4, 0.25, 0.5, NoiseSpec::iid(0.3));
    const auto sol = solve_fair(built.dist, Constraint::equal_opportunity);
    REQUIRE(sol.lambda_star == 0.0);
    REQUIRE(sol.achieved_gap <= 1e-12);
    REQUIRE(sol.decisions.equals(bayes_optimal(built.dist), 0.0));
}

TEST_CASE("EO solve on d4 matches the threshold-enumeration oracle") {
    const auto dist = d4();
    const auto sol = solve_fair(dist, Constraint::equal_opportunity);
    REQUIRE(sol.achieved_gap <= kFairnessGapTol);
    const auto oracle = enumerate_thresholds(dist, Constraint::equal_opportunity);
    REQUIRE(sol.accuracy == Approx(oracle.best_accuracy).margin(1e-9));
    // d4's Bayes classifier has gap 0.1, so some accuracy must be spent.
    REQUIRE(sol.accuracy < 0.85);
}

TEST_CASE("DP solve on d4 matches the threshold-enumeration oracle") {
    const auto dist = d4();
    const auto sol = solve_fair(dist, Constraint::demographic_parity);
    REQUIRE(sol.achieved_gap <= kFairnessGapTol);
    const auto oracle = enumerate_thresholds(dist, Constraint::demographic_parity);
    REQUIRE(sol.accuracy == Approx(oracle.best_accuracy).margin(1e-9));
}

TEST_CASE("solver matches the oracle on random distributions") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 30; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 4);
        for (auto constraint :
             {Constraint::equal_opportunity, Constraint::demographic_parity}) {
            const auto sol = solve_fair(dist, constraint);
            REQUIRE(sol.achieved_gap <= kFairnessGapTol);
            const auto oracle = enumerate_thresholds(dist, constraint);
            REQUIRE(sol.accuracy == Approx(oracle.best_accuracy).margin(1e-9));
        }
    }
}

TEST_CASE("signed EO gap is nondecreasing along the multiplier grid") {
    const auto dist = d4();
    const double pos[2] = {dist.positive_mass(0), dist.positive_mass(1)};
    double previous = -2.0;
    for (int i = -40; i <= 40; ++i) {
        const double lambda = i * 0.25;
        std::vector<ClassifierTable::Decision> dec;
        for (const auto& atom : dist.atoms()) {
            const double w = 2.0 + (atom.a == 0 ? 1.0 : -1.0) * lambda / pos[atom.a];
            dec.push_back({atom.x, atom.a, w * atom.eta() - 1.0 >= 0.0 ? 1.0 : 0.0});
        }
        const double gap = evaluate(dist, ClassifierTable(dec)).tpr_gap();
        REQUIRE(gap >= previous - 1e-12);
        previous = gap;
    }
}

TEST_CASE("solved decisions are monotone in eta within each group") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 5);
        const auto biased =
            apply_bias(dist, BiasModel(BlumStanglBias{0.4, 0.8, 0.1}));
        const auto sol = solve_fair(biased, Constraint::equal_opportunity);
        for (int a : {0, 1}) {
            // Sort group atoms by eta; acceptance must be 0..mix..1 ordered.
            std::vector<std::pair<double, double>> entries;
            for (const auto& atom : biased.atoms())
                if (atom.a == a)
                    entries.push_back(
                        {atom.eta(), sol.decisions.accept_at(atom.x, atom.a)});
            std::sort(entries.begin(), entries.end());
            for (std::size_t i = 1; i < entries.size(); ++i)
                REQUIRE(entries[i].second >= entries[i - 1].second - 1e-12);
        }
    }
}

TEST_CASE("threshold summary agrees with the decision table") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 5);
        for (auto constraint :
             {Constraint::equal_opportunity, Constraint::demographic_parity}) {
            const auto sol = solve_fair(dist, constraint);
            for (const auto& atom : dist.atoms()) {
                const double from_rule =
                    sol.classifier.accept_prob(atom.eta(), atom.a);
                const double from_table = sol.decisions.accept_at(atom.x, atom.a);
                REQUIRE(from_rule == Approx(from_table).margin(1e-12));
            }
        }
    }
}

TEST_CASE("EO is undefined when a group has no positives") {
    std::vector<Atom> atoms{{"x1", 0, 0.2, 0.3}, {"x1", 1, 0.5, 0.0}};
    DiscreteJointDistribution dist(std::move(atoms));
    REQUIRE_THROWS_AS(solve_fair(dist, Constraint::equal_opportunity), Error);
    // DP stays solvable.
    const auto sol = solve_fair(dist, Constraint::demographic_parity);
    REQUIRE(sol.achieved_gap <= kFairnessGapTol);
}

TEST_CASE("boundary randomization uses at most one mixing atom per group") {
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 5);
        const auto sol = solve_fair(dist, Constraint::equal_opportunity);
        for (int a : {0, 1}) {
            int mixed = 0;
            double mixed_eta = -1.0;
            for (const auto& atom : dist.atoms()) {
                if (atom.a != a) continue;
                const double accept = sol.decisions.accept_at(atom.x, atom.a);
                if (accept > 1e-12 && accept < 1.0 - 1e-12) {
                    ++mixed;
                    mixed_eta = atom.eta();
                }
            }
            // Several atoms may share the threshold eta value; they must then
            // share the same acceptance probability, which the table encodes.
            if (mixed > 1) {
                for (const auto& atom : dist.atoms())
                    if (atom.a == a && atom.eta() == mixed_eta)
                        REQUIRE(sol.decisions.accept_at(atom.x, atom.a) ==
                                Approx(sol.classifier.boundary_accept[a]));
            }
        }
    }
}

TEST_CASE("accuracy never exceeds the unconstrained optimum") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 5);
        const double best = evaluate(dist, bayes_optimal(dist)).accuracy;
        for (auto constraint :
             {Constraint::equal_opportunity, Constraint::demographic_parity})
            REQUIRE(solve_fair(dist, constraint).accuracy <= best + 1e-12);
    }
}
