#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "legp/common.hpp"
#include "legp/genomic_data.hpp"

namespace legp::breed {

/// Per-individual region EBLUPs and allele densities for selection indices.
struct SelectionInput {
    Eigen::MatrixXd eblups;          // N x k
    Eigen::MatrixXd densities;       // N x k, values in [0, 1]
    Eigen::VectorXd kernel_weights;  // k
    double h1 = 1.0;                 // short-term gain preference
    double h2 = 1.0;                 // long-term (rare allele) preference

    void validate() const;
};

/// c_i = sum_j g_ji / (1 + sqrt(p_ji)): rare-allele carriers keep more of
/// their predicted value.
Eigen::VectorXd jannink_index(const SelectionInput& input);

/// Gaussian-preference index around the best EBLUP per region and low allele
/// density. Regions with zero EBLUP or density variance are skipped with a
/// warning; `include_density` = false drops the density term from the
/// exponent (EBLUP-only ranking).
Eigen::VectorXd preference_index(const SelectionInput& input, bool include_density = true,
                                 Warnings* warnings = nullptr);

enum class CrossMode { Auto, MonteCarlo, Exhaustive };

/// Distribution of progeny breeding values for a cross of two fully
/// homozygous parents: each region is inherited intact from either parent
/// independently with equal chance.
struct CrossDistribution {
    std::pair<std::string, std::string> parent_ids;
    bool exact = false;
    Eigen::VectorXd samples;               // Monte-Carlo draws (empty in exact mode)
    std::vector<std::pair<double, double>> pmf;  // exact mode: (value, probability)
    double mean = 0.0;
    double variance = 0.0;
    double q05 = 0.0, q50 = 0.0, q95 = 0.0;
};

/// Exhaustive enumeration is used automatically when k <= 20 and 2^k <= 1e6;
/// Monte-Carlo draws n_samples progeny otherwise (or when forced).
CrossDistribution cross_distribution(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                                     int n_samples, std::uint64_t seed,
                                     CrossMode mode = CrossMode::Auto);

/// Mean, over the region's markers, of the training-population frequency of
/// the allele carried by each individual (higher = more common alleles).
/// Monomorphic regions give 1 for everyone.
Eigen::VectorXd region_density(const data::MarkerPanel& panel, const data::Region& region,
                               Warnings* warnings = nullptr);

void write_selection_report(const std::filesystem::path& path,
                            const std::vector<std::string>& line_ids,
                            const Eigen::VectorXd& jannink, const Eigen::VectorXd& preference);

void write_cross_report(const std::filesystem::path& path, const CrossDistribution& cross);

}  // namespace legp::breed
