#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "legp/genomic_data.hpp"

namespace legp::sim {

/// Two-founder random-mating population simulator producing fully homozygous
/// (double-haploid-like) lines, Poisson crossover recombination, additive QTL
/// at marker positions, and residual noise tuned to a target heritability.
struct SimConfig {
    int n_chromosomes = 7;
    double chrom_length_cm = 100.0;  // 1 Morgan
    int markers_per_chromosome = 100;
    int n_qtl_per_chromosome = 20;
    std::vector<int> qtl_per_chromosome;  // optional per-chromosome override
    int n_generations = 20;
    int n_individuals = 300;
    double target_h2 = 0.75;
    std::uint64_t seed = 1;
    bool hide_qtl = false;  // drop QTL marker columns from the returned panel

    void validate() const;
};

struct QtlRecord {
    int chromosome = 0;
    double position_cm = 0.0;
    int marker_index = -1;  // column in the returned panel; -1 when hidden
    std::string marker_id;
    double effect = 0.0;
};

struct SimTruth {
    std::vector<QtlRecord> qtl;
    Eigen::VectorXd genetic_values;  // per line
    double realized_h2 = 0.0;        // var(genetic) / var(phenotype), sample
};

struct Simulated {
    data::MarkerPanel panel;
    data::Phenotype phenotype;
    SimTruth truth;
};

Simulated simulate_population(const SimConfig& config);

/// Disjoint reproducible split of line indices; fraction rounds to the
/// nearest count with both sides non-empty.
std::pair<std::vector<int>, std::vector<int>> train_test_split(Eigen::Index n_lines,
                                                               double train_fraction,
                                                               std::uint64_t seed);

/// Materializes a line subset of panel + phenotype (observations follow lines).
Simulated subset_lines(const data::MarkerPanel& panel, const data::Phenotype& phenotype,
                       const std::vector<int>& line_indices);

void write_truth(const std::filesystem::path& path, const SimTruth& truth);

}  // namespace legp::sim
