#include <doctest.h>

#include <cmath>
#include <set>

#include "legp/simulate.hpp"
#include "oracles.hpp"

using namespace legp;

TEST_SUITE_BEGIN("sim_oracle");

TEST_CASE("zero generations leaves the founders") {
    sim::SimConfig cfg;
    cfg.n_chromosomes = 2;
    cfg.markers_per_chromosome = 15;
    cfg.n_individuals = 10;
    cfg.n_qtl_per_chromosome = 3;
    cfg.n_generations = 0;
    cfg.seed = 1;
    const auto simulated = sim::simulate_population(cfg);
    for (Eigen::Index i = 0; i < simulated.panel.line_count(); ++i) {
        const double first = simulated.panel.markers(i, 0);
        CHECK((first == 1.0 || first == -1.0));
        // each founder is constant across every marker
        CHECK((simulated.panel.markers.row(i).array() == first).all());
    }
}

TEST_CASE("scaled example protocol lands near the target heritability") {
    sim::SimConfig cfg;  // defaults: 7 chromosomes, 100 markers, 20 QTL, h2 = 0.75
    cfg.n_individuals = 300;
    cfg.seed = 4242;
    const auto simulated = sim::simulate_population(cfg);
    CHECK(simulated.truth.realized_h2 > 0.65);
    CHECK(simulated.truth.realized_h2 < 0.85);
    CHECK(simulated.truth.qtl.size() == 7 * 20);
    CHECK(simulated.panel.marker_count() == 700);
}

TEST_CASE("fixed seed reproduces the population bit for bit") {
    sim::SimConfig cfg;
    cfg.n_chromosomes = 3;
    cfg.markers_per_chromosome = 20;
    cfg.n_individuals = 40;
    cfg.n_qtl_per_chromosome = 4;
    cfg.seed = 999;
    const auto a = sim::simulate_population(cfg);
    const auto b = sim::simulate_population(cfg);
    CHECK(a.panel.markers == b.panel.markers);
    CHECK(a.phenotype.values == b.phenotype.values);
    CHECK(a.truth.genetic_values == b.truth.genetic_values);
}

TEST_CASE("genetic values equal the marker-effect product exactly") {
    sim::SimConfig cfg;
    cfg.n_chromosomes = 3;
    cfg.markers_per_chromosome = 25;
    cfg.n_individuals = 50;
    cfg.n_qtl_per_chromosome = 5;
    cfg.seed = 77;
    const auto simulated = sim::simulate_population(cfg);
    Eigen::VectorXd rebuilt = Eigen::VectorXd::Zero(50);
    for (const auto& qtl : simulated.truth.qtl) {
        REQUIRE(qtl.marker_index >= 0);
        rebuilt += qtl.effect * simulated.panel.markers.col(qtl.marker_index);
    }
    CHECK((rebuilt - simulated.truth.genetic_values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("drift keeps most allele frequencies interior") {
    int interior = 0, total = 0;
    for (const std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
        sim::SimConfig cfg;
        cfg.n_chromosomes = 3;
        cfg.markers_per_chromosome = 40;
        cfg.n_individuals = 250;
        cfg.n_qtl_per_chromosome = 5;
        cfg.seed = seed;
        const auto simulated = sim::simulate_population(cfg);
        for (Eigen::Index m = 0; m < simulated.panel.marker_count(); ++m) {
            const double mean = simulated.panel.markers.col(m).mean();
            interior += (mean > -1.0 && mean < 1.0) ? 1 : 0;
            ++total;
        }
    }
    CHECK(static_cast<double>(interior) / total >= 0.95);
}

TEST_CASE("marker correlation decays with map distance") {
    sim::SimConfig cfg;
    cfg.n_chromosomes = 2;
    cfg.markers_per_chromosome = 60;
    cfg.n_individuals = 300;
    cfg.n_qtl_per_chromosome = 5;
    cfg.seed = 271828;
    const auto simulated = sim::simulate_population(cfg);
    double near = 0.0, far = 0.0;
    int near_n = 0, far_n = 0;
    for (int ch = 0; ch < 2; ++ch) {
        const int base = ch * 60;
        for (int m = 0; m < 50; ++m) {
            const Eigen::VectorXd a = simulated.panel.markers.col(base + m);
            near += std::abs(oracles::pearson(a, simulated.panel.markers.col(base + m + 1)));
            ++near_n;
            if (m + 30 < 60) {
                far += std::abs(oracles::pearson(a, simulated.panel.markers.col(base + m + 30)));
                ++far_n;
            }
        }
    }
    CHECK(near / near_n > far / far_n);
}

TEST_CASE("train/test split") {
    const auto [train, test] = sim::train_test_split(1000, 0.75, 5);
    CHECK(train.size() == 750);
    CHECK(test.size() == 250);
    std::set<int> all(train.begin(), train.end());
    all.insert(test.begin(), test.end());
    CHECK(all.size() == 1000);

    const auto [train2, test2] = sim::train_test_split(1000, 0.75, 5);
    CHECK(train == train2);
    CHECK(test == test2);

    CHECK_THROWS_AS(sim::train_test_split(3, 0.01, 1), validation_error);
}

TEST_CASE("hide_qtl removes causal columns from the panel") {
    sim::SimConfig cfg;
    cfg.n_chromosomes = 2;
    cfg.markers_per_chromosome = 20;
    cfg.n_individuals = 30;
    cfg.n_qtl_per_chromosome = 4;
    cfg.seed = 31;
    cfg.hide_qtl = true;
    const auto simulated = sim::simulate_population(cfg);
    CHECK(simulated.panel.marker_count() == 2 * 20 - 2 * 4);
    for (const auto& qtl : simulated.truth.qtl) {
        CHECK(qtl.marker_index == -1);
    }
}

TEST_CASE("subset_lines keeps rows aligned") {
    sim::SimConfig cfg;
    cfg.n_chromosomes = 2;
    cfg.markers_per_chromosome = 10;
    cfg.n_individuals = 20;
    cfg.n_qtl_per_chromosome = 2;
    cfg.seed = 37;
    const auto simulated = sim::simulate_population(cfg);
    const std::vector<int> keep{3, 7, 11};
    const auto subset = sim::subset_lines(simulated.panel, simulated.phenotype, keep);
    CHECK(subset.panel.line_count() == 3);
    CHECK(subset.phenotype.n() == 3);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        CHECK(subset.panel.markers.row(static_cast<Eigen::Index>(i)) ==
              simulated.panel.markers.row(keep[i]));
        CHECK(subset.phenotype.values(static_cast<Eigen::Index>(i)) ==
              simulated.phenotype.values(keep[i]));
    }
}

TEST_SUITE_END();
