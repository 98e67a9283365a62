#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "legp/common.hpp"

namespace legp::data {

/// Genotype coding of the marker matrix. ZeroOneTwo input is shifted by -1
/// on load so the in-memory matrix is always centered at zero per genotype.
enum class Coding { MinusOneZeroOne, ZeroOneTwo };

struct MapEntry {
    std::string marker_id;
    int chromosome = 0;  // 1-based; sentinel chromosome c+1 holds unmapped markers
    double position_cm = 0.0;
};

/// Genetic map aligned column-by-column with MarkerPanel::markers.
/// Entries are sorted (chromosome, position, input order) on load.
struct GeneticMap {
    std::vector<MapEntry> entries;
    int chromosome_count = 0;  // real chromosomes; unmapped live on chromosome_count + 1

    int sentinel_chromosome() const { return chromosome_count + 1; }
    bool is_unmapped(int column) const {
        return entries[static_cast<std::size_t>(column)].chromosome == sentinel_chromosome();
    }
};

/// Coded marker matrix (q lines x p markers) plus its genetic map.
struct MarkerPanel {
    std::vector<std::string> line_ids;
    Eigen::MatrixXd markers;  // q x p, column order == map order
    GeneticMap map;
    Coding coding = Coding::MinusOneZeroOne;
    int imputed_cells = 0;
    Warnings warnings;

    Eigen::Index line_count() const { return markers.rows(); }
    Eigen::Index marker_count() const { return markers.cols(); }
    int line_index_of(const std::string& line_id) const;  // -1 when absent
};

/// Phenotype records with an observation-to-line incidence map.
/// fixed_effects always carries an intercept as its first column.
struct Phenotype {
    Eigen::VectorXd values;          // n
    std::vector<int> line_index;     // n entries, each a row of MarkerPanel
    Eigen::MatrixXd fixed_effects;   // n x pf, column 0 = intercept

    Eigen::Index n() const { return values.size(); }
    /// Fixed-effect columns excluding the intercept.
    Eigen::MatrixXd covariates() const;
};

/// Contiguous (for map-based partitions) set of marker columns.
struct Region {
    std::string id;
    std::optional<int> chromosome;   // nullopt when the region spans chromosomes
    std::vector<int> marker_indices; // sorted column indices

    int size() const { return static_cast<int>(marker_indices.size()); }
};

/// Nested genome partition: children of any node split its markers exactly.
struct RegionTree {
    Region region;
    int level = 1;
    std::vector<RegionTree> children;

    int depth() const;
    /// Nodes in breadth-first order (root first).
    std::vector<const RegionTree*> breadth_first() const;
    std::vector<const Region*> leaves() const;
};

MarkerPanel load_marker_panel(const std::filesystem::path& markers_path,
                              const std::filesystem::path& map_path,
                              Coding coding);

/// Reads `line_id, value, [fixed-effect columns...]`; every observation must
/// name a line present in the panel.
Phenotype load_phenotype(const std::filesystem::path& path, const MarkerPanel& panel);

/// Level 1 = whole genome, level 2 = chromosomes, deeper levels split each
/// region into `splits_per_level` contiguous intervals of roughly equal
/// centimorgan span (boundary markers go to the left region). Unmapped
/// markers are excluded from the tree.
RegionTree partition_genome(const MarkerPanel& panel, int levels, int splits_per_level,
                            Warnings* warnings = nullptr);

/// Column subset of the marker matrix, in map order.
Eigen::MatrixXd region_markers(const MarkerPanel& panel, const Region& region);

/// Region holding every panel column not in `region` (unmapped included).
/// Throws validation_error when the complement is empty.
Region complement_region(const MarkerPanel& panel, const Region& region);

/// Whole-genome region over all panel columns (unmapped included).
Region whole_genome_region(const MarkerPanel& panel);

/// Subtracts column means.
Eigen::MatrixXd centered_columns(const Eigen::MatrixXd& m);

/// Scores (q x count) of the leading principal components of the
/// column-centered marker matrix; columns are orthogonal.
Eigen::MatrixXd marker_principal_components(const MarkerPanel& panel, int count);

void write_marker_panel(const std::filesystem::path& markers_path,
                        const std::filesystem::path& map_path,
                        const MarkerPanel& panel);
void write_phenotype(const std::filesystem::path& path, const MarkerPanel& panel,
                     const Phenotype& phenotype);

}  // namespace legp::data
