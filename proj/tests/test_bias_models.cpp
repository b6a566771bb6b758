#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "fairlab/bias_models.hpp"
#include "fairlab/lft.hpp"
#include "helpers.hpp"

using namespace fairlab;
using fairlab::testing::d4;
using Catch::Approx;

TEST_CASE("blum-stangl transform coefficients") {
    BlumStanglBias bias{0.5, 0.25, 0.1};  // c = 0.5
    const auto t0 = to_lft(bias, 0);
    REQUIRE(t0.p == Approx(0.9));
    REQUIRE(t0.q == 0.0);
    REQUIRE(t0.r == Approx(0.5));
    REQUIRE(t0.s == Approx(0.5));
    REQUIRE(t0(0.7) == Approx(0.63 / 0.85).margin(1e-12));

    const auto t1 = to_lft(bias, 1);
    REQUIRE(t1(0.7) == 0.7);

    // beta_p = beta_n, nu = 0 is the identity.
    const auto id = to_lft(BlumStanglBias{0.8, 0.8, 0.0}, 0);
    REQUIRE(id.p == 1.0);
    REQUIRE(id.q == 0.0);
    REQUIRE(id.r == 0.0);
    REQUIRE(id.s == 1.0);
}

TEST_CASE("label flip transform is the two-component mixture") {
    LabelFlipBias bias;
    bias.eps1[0] = 0.2;
    bias.eps0[0] = 0.1;
    const auto t = to_lft(bias, 0);
    REQUIRE(t(0.4) == Approx(0.7 * 0.4 + 0.1).margin(1e-15));
    // Mixture oracle: P(Y~=1) = (1-eps1) eta + eps0 (1-eta).
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double eta = unit(rng);
        REQUIRE(t(eta) == Approx(0.8 * eta + 0.1 * (1 - eta)).margin(1e-12));
    }
}

TEST_CASE("prior shift transform matches the Bayes-rule oracle") {
    // alpha = 2 corresponds to, e.g., q = 0.5 shifted to q~ = 1/3.
    PriorShiftBias bias;
    bias.target_base_rate[0] = 1.0 / 3.0;
    bias.target_base_rate[1] = 0.5;
    REQUIRE(bias.alpha(0, 0.5) == Approx(2.0).margin(1e-12));
    const auto t = to_lft(bias, 0, 0.5);
    REQUIRE(t(0.5) == Approx(1.0 / 3.0).margin(1e-12));

    // Oracle: the shifted posterior with prior odds scaled by 1/alpha.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    for (int i = 0; i < 100; ++i) {
        const double eta = unit(rng);
        const double odds = eta / (1 - eta) / 2.0;
        REQUIRE(t(eta) == Approx(odds / (1 + odds)).margin(1e-12));
    }
}

TEST_CASE("order preservation conditions") {
    REQUIRE(is_order_preserving(LinearFractionalTransform::identity()));
    REQUIRE_FALSE(is_order_preserving({1, 0, 0, -1}));
    // Blum-Stangl with c = 0.5, nu = 0.1: S = 0.5, R+S = 1, PS-QR = 0.45.
    const auto t = to_lft(BlumStanglBias{1.0, 0.5, 0.1}, 0);
    REQUIRE(is_order_preserving(t));
    REQUIRE(t.p * t.s - t.q * t.r == Approx(0.45));

    // Cross-check by sorting random eta pairs before and after the map.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double a = unit(rng), b = unit(rng);
        REQUIRE((a <= b) == (t(a) <= t(b)));
    }
}

TEST_CASE("all model transforms are order preserving for random parameters") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        BlumStanglBias bs{0.01 + 0.99 * unit(rng), 0.01 + 0.99 * unit(rng),
                          0.99 * unit(rng)};
        LabelFlipBias lf;
        for (int a : {0, 1}) {
            lf.eps1[a] = 0.5 * unit(rng);
            lf.eps0[a] = std::min(0.5 * unit(rng), 0.99 - lf.eps1[a]);
        }
        PriorShiftBias ps;
        ps.target_base_rate[0] = 0.02 + 0.96 * unit(rng);
        ps.target_base_rate[1] = 0.02 + 0.96 * unit(rng);
        const double q = 0.02 + 0.96 * unit(rng);
        for (int a : {0, 1}) {
            REQUIRE(is_order_preserving(to_lft(bs, a)));
            REQUIRE(is_order_preserving(to_lft(lf, a)));
            REQUIRE(is_order_preserving(to_lft(ps, a, q)));
        }
    }
}

TEST_CASE("identity parameters leave the distribution unchanged") {
    const auto dist = d4();
    const auto same_bs =
        apply_bias(dist, BiasModel(BlumStanglBias{1.0, 1.0, 0.0}));
    const auto same_lf = apply_bias(dist, BiasModel(LabelFlipBias{}));
    for (std::size_t i = 0; i < dist.size(); ++i) {
        REQUIRE(same_bs.atoms()[i].p0 == Approx(dist.atoms()[i].p0).margin(1e-15));
        REQUIRE(same_bs.atoms()[i].p1 == Approx(dist.atoms()[i].p1).margin(1e-15));
        REQUIRE(same_lf.atoms()[i].p0 == Approx(dist.atoms()[i].p0).margin(1e-15));
        REQUIRE(same_lf.atoms()[i].p1 == Approx(dist.atoms()[i].p1).margin(1e-15));
    }
}

TEST_CASE("biased eta equals the transform image atom-wise") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 4);
        BiasModel model;
        switch (trial % 3) {
            case 0:
                model = BlumStanglBias{0.05 + 0.95 * unit(rng),
                                       0.05 + 0.95 * unit(rng), 0.9 * unit(rng)};
                break;
            case 1: {
                LabelFlipBias lf;
                for (int a : {0, 1}) {
                    lf.eps1[a] = 0.4 * unit(rng);
                    lf.eps0[a] = 0.4 * unit(rng);
                }
                model = lf;
                break;
            }
            default: {
                PriorShiftBias ps;
                ps.target_base_rate[0] = 0.1 + 0.8 * unit(rng);
                ps.target_base_rate[1] = 0.1 + 0.8 * unit(rng);
                model = ps;
                break;
            }
        }
        // apply_bias checks the transform identity internally to 1e-12; also
        // verify the output is a valid distribution.
        const auto biased = apply_bias(dist, model);
        double total = 0.0;
        for (const auto& atom : biased.atoms()) {
            REQUIRE(atom.p0 >= 0.0);
            REQUIRE(atom.p1 >= 0.0);
            total += atom.mass();
        }
        REQUIRE(total == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("survival bias matches a simulation of survive-then-flip") {
    // beta_p = 0.5, beta_n = 0.25, nu = 0.1 on an atom with eta = 0.7.
    std::vector<Atom> atoms{{"x1", 0, 0.3 * 0.3, 0.3 * 0.7},
                            {"x2", 0, 0.2 * 0.8, 0.2 * 0.2},
                            {"x1", 1, 0.5 * 0.5, 0.5 * 0.5}};
    const DiscreteJointDistribution dist(std::move(atoms));
    const BlumStanglBias bias{0.5, 0.25, 0.1};
    const auto biased = apply_bias(dist, BiasModel(bias));
    REQUIRE(biased.atoms()[biased.find("x1", 0)].eta() ==
            Approx(0.63 / 0.85).margin(1e-12));

    std::mt19937_64 rng(20240117);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = 1'000'000;
    long kept1 = 0, kept_total = 0;
    for (int i = 0; i < n; ++i) {
        // Sample a point of the atom (x1, 0), then survive and flip.
        const bool y = unit(rng) < 0.7;
        const double survive_p = y ? bias.beta_p : bias.beta_n;
        if (unit(rng) >= survive_p) continue;
        bool label = y;
        if (y && unit(rng) < bias.nu) label = false;
        ++kept_total;
        kept1 += label ? 1 : 0;
    }
    const double estimate = static_cast<double>(kept1) / kept_total;
    const double expected = 0.63 / 0.85;
    const double stderr3 =
        3.0 * std::sqrt(expected * (1 - expected) / kept_total);
    REQUIRE(std::abs(estimate - expected) < stderr3);
}

TEST_CASE("pure subsampling leaves within-group conditionals unchanged") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 4);
        const auto biased =
            apply_bias(dist, BiasModel(BlumStanglBias{0.6, 0.6, 0.0}));
        for (std::size_t i = 0; i < dist.size(); ++i) {
            const auto& before = dist.atoms()[i];
            const auto& after = biased.atoms()[i];
            if (before.a != 0) continue;
            REQUIRE(after.eta() == Approx(before.eta()).margin(1e-12));
            REQUIRE(after.mass() / biased.group_mass(0) ==
                    Approx(before.mass() / dist.group_mass(0)).margin(1e-12));
        }
    }
}

TEST_CASE("marginal-preserving bias keeps feature masses") {
    const auto dist = d4();
    const BlumStanglBias bias{0.3, 0.9, 0.2};
    const auto biased =
        apply_bias(dist, BiasModel(bias), MarginalPolicy::preserve_marginal);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        REQUIRE(biased.atoms()[i].mass() ==
                Approx(dist.atoms()[i].mass()).margin(1e-15));
        const double expected = to_lft(bias, dist.atoms()[i].a)(dist.atoms()[i].eta());
        REQUIRE(biased.atoms()[i].eta() == Approx(expected).margin(1e-12));
    }
}

TEST_CASE("survival normalizer matches the direct sum") {
    const auto dist = d4();
    const BlumStanglBias bias{0.5, 0.25, 0.1};
    const double z = survival_normalizer(dist, bias);
    // Group 0 carries q = 1/2 of its half mass in positives.
    REQUIRE(z == Approx(0.5 + 0.5 * (0.5 * 0.25 + 0.25 * 0.25)).margin(1e-12));
}

TEST_CASE("mixing identity holds exactly for label flips") {
    std::mt19937_64 rng(29);
    LabelFlipBias flip;
    flip.eps1[0] = 0.2;
    flip.eps0[0] = 0.1;
    flip.eps1[1] = 0.05;
    flip.eps0[1] = 0.3;
    for (int trial = 0; trial < 50; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 4);
        const auto h = fairlab::testing::random_deterministic(rng, dist);
        const auto rep = biased_rate_identity(dist, BiasModel(flip), h);
        REQUIRE(rep.max_discrepancy < 1e-12);
    }
    // No flips: rates unchanged.
    const auto rep = biased_rate_identity(d4(), BiasModel(LabelFlipBias{}),
                                          bayes_optimal(d4()));
    REQUIRE(*rep.tpr_lhs[0] == Approx(*rep.tpr_rhs[0]).margin(1e-15));
    REQUIRE(rep.max_discrepancy < 1e-15);
}

TEST_CASE("blum-stangl leaves true positive rates unchanged") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto dist = fairlab::testing::random_distribution(rng, 4);
        const auto h = fairlab::testing::random_deterministic(rng, dist);
        BlumStanglBias bias{0.05 + 0.9 * (trial % 7) / 7.0,
                            0.1 + 0.9 * (trial % 5) / 5.0, 0.08 * (trial % 6)};
        const auto biased = apply_bias(dist, BiasModel(bias));
        const auto before = evaluate(dist, h);
        const auto after = evaluate(biased, h);
        for (int a : {0, 1})
            REQUIRE(std::abs(*after.tpr[a] - *before.tpr[a]) < 1e-12);
        const auto rep = biased_rate_identity(dist, BiasModel(bias), h);
        REQUIRE(rep.max_discrepancy < 1e-12);
    }
}

TEST_CASE("prior shift has no pointwise coupling for the identity report") {
    PriorShiftBias ps;
    REQUIRE_THROWS_AS(biased_rate_identity(d4(), BiasModel(ps), bayes_optimal(d4())),
                      Error);
}

TEST_CASE("EO-feasible sets coincide on original and biased distributions") {
    const auto dist = d4();
    const BlumStanglBias bias{0.3, 0.9, 0.4};
    std::mt19937_64 rng(37);
    std::vector<ClassifierTable> classifiers;
    for (int i = 0; i < 100; ++i)
        classifiers.push_back(fairlab::testing::random_deterministic(rng, dist));
    // Constant classifiers are EO-fair on both sides.
    std::vector<ClassifierTable::Decision> ones;
    for (const auto& atom : dist.atoms()) ones.push_back({atom.x, atom.a, 1.0});
    classifiers.emplace_back(ones);
    REQUIRE(eo_feasible_set_equal(dist, bias, classifiers));

    // A known-gap classifier keeps its exact gap under the bias.
    const auto h = bayes_optimal(dist);  // gap 0.1 on d4
    const auto biased = apply_bias(dist, BiasModel(bias));
    REQUIRE(evaluate(dist, h).tpr_gap() == Approx(0.1).margin(1e-12));
    REQUIRE(evaluate(biased, h).tpr_gap() == Approx(0.1).margin(1e-12));
}

TEST_CASE("model validation rejects out-of-range parameters") {
    REQUIRE_THROWS_AS(to_lft(BlumStanglBias{0.0, 0.5, 0.1}, 0), Error);
    REQUIRE_THROWS_AS(to_lft(BlumStanglBias{0.5, 0.5, 1.0}, 0), Error);
    LabelFlipBias lf;
    lf.eps1[0] = 0.6;
    lf.eps0[0] = 0.5;
    REQUIRE_THROWS_AS(to_lft(lf, 0), Error);
    PriorShiftBias ps;
    ps.target_base_rate[0] = 0.0;
    REQUIRE_THROWS_AS(to_lft(ps, 0, 0.5), Error);
}
