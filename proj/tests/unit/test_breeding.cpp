#include <doctest.h>

#include <cmath>
#include <map>

#include "legp/breeding.hpp"
#include "legp/simulate.hpp"
#include "oracles.hpp"

using namespace legp;

namespace {

breed::SelectionInput random_input(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng) {
    breed::SelectionInput input;
    input.eblups = oracles::random_matrix(n, k, rng);
    input.densities = (oracles::random_matrix(n, k, rng).array().tanh() + 1.0) / 2.0;
    input.kernel_weights = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    return input;
}

}  // namespace

TEST_SUITE_BEGIN("breeding_tools");

TEST_CASE("jannink index") {
    SUBCASE("single region substitutions") {
        breed::SelectionInput input;
        input.eblups = Eigen::MatrixXd::Constant(1, 1, 1.0);
        input.densities = Eigen::MatrixXd::Constant(1, 1, 1.0);
        input.kernel_weights = Eigen::VectorXd::Ones(1);
        CHECK(breed::jannink_index(input)(0) == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("zero density removes the down-weighting") {
        std::mt19937_64 rng(307);
        auto input = random_input(4, 3, rng);
        input.densities.setZero();
        const Eigen::VectorXd index = breed::jannink_index(input);
        for (int i = 0; i < 4; ++i) {
            CHECK(index(i) == doctest::Approx(input.eblups.row(i).sum()).epsilon(1e-12));
        }
    }
    SUBCASE("random input matches the double-loop oracle") {
        std::mt19937_64 rng(311);
        const auto input = random_input(5, 3, rng);
        const Eigen::VectorXd index = breed::jannink_index(input);
        for (int i = 0; i < 5; ++i) {
            double expected = 0.0;
            for (int j = 0; j < 3; ++j) {
                expected += input.eblups(i, j) / (1.0 + std::sqrt(input.densities(i, j)));
            }
            CHECK(index(i) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("monotone in EBLUPs, antitone in density for positive EBLUPs") {
        std::mt19937_64 rng(313);
        auto input = random_input(3, 2, rng);
        input.eblups = input.eblups.cwiseAbs();
        const Eigen::VectorXd base = breed::jannink_index(input);
        auto bumped = input;
        bumped.eblups(1, 0) += 0.1;
        CHECK(breed::jannink_index(bumped)(1) > base(1));
        auto denser = input;
        denser.densities(1, 0) = std::min(1.0, denser.densities(1, 0) + 0.2);
        CHECK(breed::jannink_index(denser)(1) < base(1));
    }
}

TEST_CASE("preference index") {
    SUBCASE("best EBLUP with zero density attains the sample maximum") {
        std::mt19937_64 rng(317);
        auto input = random_input(6, 3, rng);
        // individual 0: top EBLUP and zero density everywhere
        for (int j = 0; j < 3; ++j) {
            input.eblups(0, j) = input.eblups.col(j).maxCoeff() + 1.0;
            input.densities(0, j) = 0.0;
        }
        const Eigen::VectorXd index = breed::preference_index(input);
        int argmax = 0;
        index.maxCoeff(&argmax);
        CHECK(argmax == 0);
    }
    SUBCASE("four individuals, two regions, hand computation") {
        breed::SelectionInput input;
        input.eblups.resize(4, 2);
        input.eblups << 1.0, 0.2, 0.5, 0.8, -0.3, 0.4, 0.9, -0.1;
        input.densities.resize(4, 2);
        input.densities << 0.2, 0.9, 0.5, 0.1, 0.8, 0.3, 0.4, 0.6;
        input.kernel_weights = Eigen::Vector2d(0.6, 0.4);
        input.h1 = 1.3;
        input.h2 = 0.7;
        const Eigen::VectorXd index = breed::preference_index(input);
        // independent scalar evaluation
        const double two_pi = 2.0 * std::acos(-1.0);
        for (int i = 0; i < 4; ++i) {
            double expected = 0.0;
            for (int j = 0; j < 2; ++j) {
                double mean_g = 0.0, mean_p = 0.0;
                for (int r = 0; r < 4; ++r) {
                    mean_g += input.eblups(r, j) / 4.0;
                    mean_p += input.densities(r, j) / 4.0;
                }
                double var_g = 0.0, var_p = 0.0;
                for (int r = 0; r < 4; ++r) {
                    var_g += (input.eblups(r, j) - mean_g) * (input.eblups(r, j) - mean_g) / 3.0;
                    var_p += (input.densities(r, j) - mean_p) * (input.densities(r, j) - mean_p) / 3.0;
                }
                double best = input.eblups(0, j);
                for (int r = 1; r < 4; ++r) {
                    best = std::max(best, input.eblups(r, j));
                }
                const double pref =
                    input.kernel_weights(j) /
                    (two_pi * input.h1 * std::sqrt(var_g) * input.h2 * std::sqrt(var_p));
                const double dg = input.eblups(i, j) - best;
                const double expo = dg * dg / (input.h1 * input.h1 * var_g) +
                                    input.densities(i, j) * input.densities(i, j) /
                                        (input.h2 * input.h2 * var_p);
                expected += pref * std::exp(-0.5 * expo);
            }
            CHECK(index(i) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("large h2 converges to the density-free ranking") {
        std::mt19937_64 rng(331);
        auto input = random_input(40, 4, rng);
        input.h2 = 1e6;
        const Eigen::VectorXd with_density = breed::preference_index(input, true);
        const Eigen::VectorXd without = breed::preference_index(input, false);
        CHECK(oracles::kendall_tau(with_density, without) > 0.95);
    }
    SUBCASE("ranking is invariant to rescaling all weights") {
        std::mt19937_64 rng(337);
        auto input = random_input(15, 3, rng);
        const Eigen::VectorXd base = breed::preference_index(input);
        input.kernel_weights *= 5.0;  // no longer sums to 1, still valid weights vector
        const Eigen::VectorXd scaled = breed::preference_index(input);
        CHECK(oracles::kendall_tau(base, scaled) == doctest::Approx(1.0));
    }
    SUBCASE("all regions skipped is an error") {
        breed::SelectionInput input;
        input.eblups = Eigen::MatrixXd::Constant(3, 1, 1.0);   // zero variance
        input.densities = Eigen::MatrixXd::Constant(3, 1, 0.5);
        input.kernel_weights = Eigen::VectorXd::Ones(1);
        CHECK_THROWS_AS(breed::preference_index(input), numeric_error);
    }
}

TEST_CASE("cross distribution") {
    SUBCASE("identical parents are degenerate") {
        Eigen::VectorXd g(3);
        g << 0.5, -1.0, 2.0;
        const auto cross = breed::cross_distribution(g, g, 100, 1);
        CHECK(cross.exact);
        CHECK(cross.mean == doctest::Approx(g.sum()).epsilon(1e-14));
        CHECK(cross.variance == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(cross.q05 == cross.q95);
    }
    SUBCASE("two regions: exact support {0,1,2} with probabilities {1/4,1/2,1/4}") {
        Eigen::VectorXd g1(2), g2(2);
        g1 << 1.0, 0.0;
        g2 << 0.0, 1.0;
        const auto cross = breed::cross_distribution(g1, g2, 10, 2);
        REQUIRE(cross.exact);
        REQUIRE(cross.pmf.size() == 3);
        CHECK(cross.pmf[0].first == 0.0);
        CHECK(cross.pmf[0].second == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(cross.pmf[1].first == 1.0);
        CHECK(cross.pmf[1].second == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(cross.pmf[2].first == 2.0);
        CHECK(cross.pmf[2].second == doctest::Approx(0.25).epsilon(1e-14));

        // forced Monte-Carlo agrees within 3-sigma binomial bounds at n = 1e5
        const int n = 100000;
        const auto mc = breed::cross_distribution(g1, g2, n, 3, breed::CrossMode::MonteCarlo);
        REQUIRE(!mc.exact);
        std::map<double, int> counts;
        for (Eigen::Index i = 0; i < mc.samples.size(); ++i) {
            counts[mc.samples(i)]++;
        }
        for (const auto& [value, prob] : cross.pmf) {
            const double freq = counts[value] / static_cast<double>(n);
            const double sd = std::sqrt(prob * (1.0 - prob) / n);
            CHECK(std::abs(freq - prob) <= 3.0 * sd);
        }
    }
    SUBCASE("Monte-Carlo mean approaches the parental midpoint") {
        std::mt19937_64 rng(347);
        const Eigen::VectorXd g1 = oracles::random_vector(25, rng);
        const Eigen::VectorXd g2 = oracles::random_vector(25, rng);
        const int n = 20000;
        const auto mc = breed::cross_distribution(g1, g2, n, 5, breed::CrossMode::MonteCarlo);
        const double expected = (g1.sum() + g2.sum()) / 2.0;
        CHECK(std::abs(mc.mean - expected) <= 4.0 * std::sqrt(mc.variance / n));
    }
    SUBCASE("swapping parents leaves the law unchanged") {
        std::mt19937_64 rng(349);
        const Eigen::VectorXd g1 = oracles::random_vector(6, rng);
        const Eigen::VectorXd g2 = oracles::random_vector(6, rng);
        const auto ab = breed::cross_distribution(g1, g2, 10, 7);
        const auto ba = breed::cross_distribution(g2, g1, 10, 7);
        REQUIRE(ab.exact);
        REQUIRE(ab.pmf.size() == ba.pmf.size());
        for (std::size_t i = 0; i < ab.pmf.size(); ++i) {
            CHECK(ab.pmf[i].first == doctest::Approx(ba.pmf[i].first).epsilon(1e-12));
            CHECK(ab.pmf[i].second == doctest::Approx(ba.pmf[i].second).epsilon(1e-12));
        }
    }
    SUBCASE("deterministic given the seed") {
        Eigen::VectorXd g1 = Eigen::VectorXd::LinSpaced(25, -1.0, 1.0);
        Eigen::VectorXd g2 = -g1;
        const auto a = breed::cross_distribution(g1, g2, 5000, 11, breed::CrossMode::MonteCarlo);
        const auto b = breed::cross_distribution(g1, g2, 5000, 11, breed::CrossMode::MonteCarlo);
        CHECK(a.samples == b.samples);
    }
    SUBCASE("auto mode switches to Monte Carlo above the enumeration bound") {
        Eigen::VectorXd g1 = Eigen::VectorXd::Ones(25);
        Eigen::VectorXd g2 = Eigen::VectorXd::Zero(25);
        const auto cross = breed::cross_distribution(g1, g2, 500, 13);
        CHECK(!cross.exact);
        CHECK(cross.samples.size() == 500);
    }
}

TEST_CASE("region density") {
    SUBCASE("carrier of the major allele at frequency 0.9") {
        data::MarkerPanel panel;
        panel.markers.resize(10, 2);
        panel.markers.col(0).setConstant(1.0);
        panel.markers.col(1).setConstant(1.0);
        panel.markers(9, 0) = -1.0;  // one minor-allele carrier
        panel.markers(9, 1) = -1.0;
        panel.line_ids.resize(10);
        panel.map.chromosome_count = 1;
        panel.map.entries = {{"m1", 1, 0.0}, {"m2", 1, 1.0}};
        data::Region region;
        region.id = "r";
        region.marker_indices = {0, 1};
        const Eigen::VectorXd density = breed::region_density(panel, region);
        CHECK(density(0) == doctest::Approx(0.9).epsilon(1e-12));
        CHECK(density(9) == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("monomorphic region gives 1 and warns") {
        data::MarkerPanel panel;
        panel.markers = Eigen::MatrixXd::Constant(5, 1, -1.0);
        panel.line_ids.resize(5);
        panel.map.chromosome_count = 1;
        panel.map.entries = {{"m1", 1, 0.0}};
        data::Region region;
        region.id = "mono";
        region.marker_indices = {0};
        Warnings warnings;
        const Eigen::VectorXd density = breed::region_density(panel, region, &warnings);
        CHECK((density.array() == 1.0).all());
        CHECK(!warnings.empty());
    }
    SUBCASE("random panel matches the counting oracle") {
        sim::SimConfig cfg;
        cfg.n_chromosomes = 1;
        cfg.markers_per_chromosome = 12;
        cfg.n_individuals = 30;
        cfg.n_qtl_per_chromosome = 2;
        cfg.seed = 51;
        const auto simulated = sim::simulate_population(cfg);
        data::Region region;
        region.id = "all";
        region.marker_indices.resize(12);
        std::iota(region.marker_indices.begin(), region.marker_indices.end(), 0);
        const Eigen::VectorXd density = breed::region_density(simulated.panel, region);
        for (int i = 0; i < 30; ++i) {
            double total = 0.0;
            for (int m = 0; m < 12; ++m) {
                int plus = 0;
                for (int r = 0; r < 30; ++r) {
                    plus += simulated.panel.markers(r, m) > 0 ? 1 : 0;
                }
                const double freq = plus / 30.0;
                total += simulated.panel.markers(i, m) > 0 ? freq : 1.0 - freq;
            }
            CHECK(density(i) == doctest::Approx(total / 12.0).epsilon(1e-12));
        }
        CHECK(density.minCoeff() >= 0.0);
        CHECK(density.maxCoeff() <= 1.0);
    }
}

TEST_SUITE_END();
