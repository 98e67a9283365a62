#include "legp/genomic_data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "legp/table.hpp"

namespace legp::data {

namespace {

struct CodingRange {
    double lo, hi, shift;
};

CodingRange coding_range(Coding coding) {
    switch (coding) {
        case Coding::MinusOneZeroOne:
            return {-1.0, 1.0, 0.0};
        case Coding::ZeroOneTwo:
            return {0.0, 2.0, -1.0};
    }
    throw validation_error("unknown coding");
}

}  // namespace

int MarkerPanel::line_index_of(const std::string& line_id) const {
    for (std::size_t i = 0; i < line_ids.size(); ++i) {
        if (line_ids[i] == line_id) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

Eigen::MatrixXd Phenotype::covariates() const {
    if (fixed_effects.cols() <= 1) {
        return Eigen::MatrixXd(values.size(), 0);
    }
    return fixed_effects.rightCols(fixed_effects.cols() - 1);
}

MarkerPanel load_marker_panel(const std::filesystem::path& markers_path,
                              const std::filesystem::path& map_path,
                              Coding coding) {
    const io::Table marker_table = io::read_table(markers_path);
    const io::Table map_table = io::read_table(map_path);

    if (marker_table.header.size() < 2) {
        throw validation_error("marker file needs a line-id column and at least one marker: " +
                               markers_path.string());
    }
    const std::size_t p_raw = marker_table.header.size() - 1;
    std::vector<std::string> marker_ids(marker_table.header.begin() + 1, marker_table.header.end());
    {
        std::set<std::string> seen;
        for (const auto& id : marker_ids) {
            if (!seen.insert(id).second) {
                throw validation_error("duplicate marker id in marker file: " + id);
            }
        }
    }

    MarkerPanel panel;
    panel.coding = coding;
    const std::size_t q = marker_table.rows.size();
    if (q == 0) {
        throw validation_error("marker file has no data rows: " + markers_path.string());
    }
    panel.line_ids.reserve(q);

    // Raw cells with NaN marking missing values.
    Eigen::MatrixXd raw(q, p_raw);
    for (std::size_t r = 0; r < q; ++r) {
        const auto& row = marker_table.rows[r];
        if (row.size() != p_raw + 1) {
            throw validation_error("marker row " + std::to_string(r + 2) + " has " +
                                   std::to_string(row.size()) + " cells, header implies " +
                                   std::to_string(p_raw + 1));
        }
        panel.line_ids.push_back(row[0]);
        for (std::size_t c = 0; c < p_raw; ++c) {
            const std::string& cell = row[c + 1];
            raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                cell.empty() ? std::numeric_limits<double>::quiet_NaN()
                             : io::parse_double(cell, "marker " + marker_ids[c] + ", line " + row[0]);
        }
    }
    {
        std::set<std::string> seen;
        for (const auto& id : panel.line_ids) {
            if (!seen.insert(id).second) {
                throw validation_error("duplicate line id in marker file: " + id);
            }
        }
    }

    // Map lookup: marker_id -> (chromosome, position).
    if (map_table.header.size() < 3) {
        throw validation_error("map file needs columns marker_id, chromosome, position_cM");
    }
    std::unordered_map<std::string, std::pair<int, double>> map_lookup;
    int chromosome_count = 0;
    for (std::size_t r = 0; r < map_table.rows.size(); ++r) {
        const auto& row = map_table.rows[r];
        if (row.size() < 3) {
            throw validation_error("map row " + std::to_string(r + 2) + " has fewer than 3 columns");
        }
        const int chrom = static_cast<int>(io::parse_double(row[1], "map chromosome for " + row[0]));
        const double pos = io::parse_double(row[2], "map position for " + row[0]);
        if (chrom < 1) {
            throw validation_error("chromosome must be >= 1 for marker " + row[0]);
        }
        if (pos < 0) {
            throw validation_error("position_cM must be >= 0 for marker " + row[0]);
        }
        if (!map_lookup.emplace(row[0], std::make_pair(chrom, pos)).second) {
            throw validation_error("duplicate marker id in map file: " + row[0]);
        }
        chromosome_count = std::max(chromosome_count, chrom);
    }

    // Column order: mapped markers sorted by (chromosome, position, input order),
    // then unmapped markers (sentinel chromosome) in input order.
    struct ColKey {
        int chrom;
        double pos;
        std::size_t input;
    };
    std::vector<ColKey> keys(p_raw);
    const int sentinel = chromosome_count + 1;
    for (std::size_t c = 0; c < p_raw; ++c) {
        auto it = map_lookup.find(marker_ids[c]);
        if (it == map_lookup.end()) {
            keys[c] = {sentinel, static_cast<double>(c), c};
            panel.warnings.push_back("marker " + marker_ids[c] +
                                     " not in map; assigned to chromosome " + std::to_string(sentinel));
        } else {
            keys[c] = {it->second.first, it->second.second, c};
        }
    }
    std::vector<std::size_t> order(p_raw);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a].chrom != keys[b].chrom) return keys[a].chrom < keys[b].chrom;
        if (keys[a].pos != keys[b].pos) return keys[a].pos < keys[b].pos;
        return keys[a].input < keys[b].input;
    });

    panel.markers.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p_raw));
    panel.map.chromosome_count = chromosome_count;
    panel.map.entries.reserve(p_raw);
    const CodingRange range = coding_range(coding);
    for (std::size_t out = 0; out < p_raw; ++out) {
        const std::size_t c = order[out];
        Eigen::VectorXd col = raw.col(static_cast<Eigen::Index>(c));
        double sum = 0.0;
        int observed = 0;
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (!std::isnan(col(i))) {
                sum += col(i);
                ++observed;
            }
        }
        if (observed == 0) {
            throw validation_error("marker " + marker_ids[c] + " has no observed genotypes");
        }
        const double mean = sum / observed;
        for (Eigen::Index i = 0; i < col.size(); ++i) {
            if (std::isnan(col(i))) {
                col(i) = mean;
                ++panel.imputed_cells;
            }
            if (col(i) < range.lo || col(i) > range.hi) {
                throw validation_error("marker " + marker_ids[c] + " value " + std::to_string(col(i)) +
                                       " outside coding range [" + std::to_string(range.lo) + ", " +
                                       std::to_string(range.hi) + "]");
            }
        }
        panel.markers.col(static_cast<Eigen::Index>(out)) = col.array() + range.shift;
        panel.map.entries.push_back({marker_ids[c], keys[c].chrom,
                                     keys[c].chrom == sentinel ? 0.0 : keys[c].pos});
    }
    return panel;
}

Phenotype load_phenotype(const std::filesystem::path& path, const MarkerPanel& panel) {
    const io::Table table = io::read_table(path);
    if (table.header.size() < 2) {
        throw validation_error("phenotype file needs columns line_id, value");
    }
    std::unordered_map<std::string, int> line_lookup;
    for (std::size_t i = 0; i < panel.line_ids.size(); ++i) {
        line_lookup[panel.line_ids[i]] = static_cast<int>(i);
    }
    const std::size_t n = table.rows.size();
    if (n == 0) {
        throw validation_error("phenotype file has no data rows: " + path.string());
    }
    const std::size_t n_cov = table.header.size() - 2;
    Phenotype phen;
    phen.values.resize(static_cast<Eigen::Index>(n));
    phen.line_index.resize(n);
    phen.fixed_effects = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(1 + n_cov));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            throw validation_error("phenotype row " + std::to_string(r + 2) + " has " +
                                   std::to_string(row.size()) + " cells, header implies " +
                                   std::to_string(table.header.size()));
        }
        auto it = line_lookup.find(row[0]);
        if (it == line_lookup.end()) {
            throw validation_error("phenotype line " + row[0] + " not present in marker panel");
        }
        phen.line_index[r] = it->second;
        phen.values(static_cast<Eigen::Index>(r)) = io::parse_double(row[1], "phenotype of " + row[0]);
        for (std::size_t c = 0; c < n_cov; ++c) {
            phen.fixed_effects(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c + 1)) =
                io::parse_double(row[c + 2], table.header[c + 2] + " of " + row[0]);
        }
    }
    return phen;
}

int RegionTree::depth() const {
    int d = 1;
    for (const auto& child : children) {
        d = std::max(d, 1 + child.depth());
    }
    return d;
}

std::vector<const RegionTree*> RegionTree::breadth_first() const {
    std::vector<const RegionTree*> out;
    out.push_back(this);
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (const auto& child : out[i]->children) {
            out.push_back(&child);
        }
    }
    return out;
}

std::vector<const Region*> RegionTree::leaves() const {
    std::vector<const Region*> out;
    for (const RegionTree* node : breadth_first()) {
        if (node->children.empty()) {
            out.push_back(&node->region);
        }
    }
    return out;
}

namespace {

/// Splits a map-contiguous region into `splits` buckets of equal cM span.
/// Boundary markers go left; empty buckets are merged away with a warning.
std::vector<Region> split_region(const MarkerPanel& panel, const Region& parent, int splits,
                                 Warnings* warnings) {
    const auto& entries = panel.map.entries;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int idx : parent.marker_indices) {
        lo = std::min(lo, entries[static_cast<std::size_t>(idx)].position_cm);
        hi = std::max(hi, entries[static_cast<std::size_t>(idx)].position_cm);
    }
    const double span = hi - lo;
    std::vector<std::vector<int>> buckets(static_cast<std::size_t>(splits));
    for (int idx : parent.marker_indices) {
        const double pos = entries[static_cast<std::size_t>(idx)].position_cm;
        int bucket = splits - 1;
        for (int t = 0; t < splits - 1; ++t) {
            const double boundary = lo + span * (t + 1) / splits;
            if (pos <= boundary) {
                bucket = t;
                break;
            }
        }
        buckets[static_cast<std::size_t>(bucket)].push_back(idx);
    }
    std::vector<Region> out;
    int child_number = 0;
    for (auto& bucket : buckets) {
        if (bucket.empty()) {
            warn(warnings, "empty split in region " + parent.id + " merged with neighbor");
            continue;
        }
        ++child_number;
        Region child;
        child.id = parent.id + "." + std::to_string(child_number);
        child.chromosome = parent.chromosome;
        child.marker_indices = std::move(bucket);
        out.push_back(std::move(child));
    }
    return out;
}

}  // namespace

RegionTree partition_genome(const MarkerPanel& panel, int levels, int splits_per_level,
                            Warnings* warnings) {
    if (levels < 1) {
        throw validation_error("levels must be >= 1");
    }
    if (levels >= 3 && splits_per_level < 2) {
        throw validation_error("splits_per_level must be >= 2");
    }
    std::vector<int> mapped;
    for (Eigen::Index c = 0; c < panel.marker_count(); ++c) {
        if (!panel.map.is_unmapped(static_cast<int>(c))) {
            mapped.push_back(static_cast<int>(c));
        }
    }
    if (mapped.empty()) {
        throw validation_error("panel has no mapped markers; cannot partition");
    }

    RegionTree root;
    root.region.id = "genome";
    root.region.chromosome = std::nullopt;
    root.region.marker_indices = mapped;
    root.level = 1;
    if (levels == 1) {
        return root;
    }

    // Level 2: chromosomes, in map order.
    std::vector<std::pair<int, std::vector<int>>> by_chrom;
    for (int idx : mapped) {
        const int chrom = panel.map.entries[static_cast<std::size_t>(idx)].chromosome;
        if (by_chrom.empty() || by_chrom.back().first != chrom) {
            by_chrom.emplace_back(chrom, std::vector<int>{});
        }
        by_chrom.back().second.push_back(idx);
    }
    for (auto& [chrom, indices] : by_chrom) {
        RegionTree node;
        node.region.id = "chr" + std::to_string(chrom);
        node.region.chromosome = chrom;
        node.region.marker_indices = std::move(indices);
        node.level = 2;
        root.children.push_back(std::move(node));
    }

    // Deeper levels: equal-cM splits of each current leaf.
    for (int level = 3; level <= levels; ++level) {
        std::vector<RegionTree*> frontier;
        std::vector<RegionTree*> stack{&root};
        while (!stack.empty()) {
            RegionTree* node = stack.back();
            stack.pop_back();
            if (node->children.empty() && node->level == level - 1) {
                frontier.push_back(node);
            }
            for (auto& child : node->children) {
                stack.push_back(&child);
            }
        }
        for (RegionTree* node : frontier) {
            for (Region& child_region : split_region(panel, node->region, splits_per_level, warnings)) {
                RegionTree child;
                child.region = std::move(child_region);
                child.level = level;
                node->children.push_back(std::move(child));
            }
        }
    }
    return root;
}

Eigen::MatrixXd region_markers(const MarkerPanel& panel, const Region& region) {
    if (region.marker_indices.empty()) {
        throw validation_error("region " + region.id + " has no markers");
    }
    Eigen::MatrixXd out(panel.line_count(), static_cast<Eigen::Index>(region.marker_indices.size()));
    for (std::size_t c = 0; c < region.marker_indices.size(); ++c) {
        const int idx = region.marker_indices[c];
        if (idx < 0 || idx >= panel.marker_count()) {
            throw validation_error("region " + region.id + " references invalid marker column " +
                                   std::to_string(idx));
        }
        out.col(static_cast<Eigen::Index>(c)) = panel.markers.col(idx);
    }
    return out;
}

Region complement_region(const MarkerPanel& panel, const Region& region) {
    std::vector<bool> in_region(static_cast<std::size_t>(panel.marker_count()), false);
    for (int idx : region.marker_indices) {
        in_region[static_cast<std::size_t>(idx)] = true;
    }
    Region out;
    out.id = region.id + "~complement";
    out.chromosome = std::nullopt;
    for (Eigen::Index c = 0; c < panel.marker_count(); ++c) {
        if (!in_region[static_cast<std::size_t>(c)]) {
            out.marker_indices.push_back(static_cast<int>(c));
        }
    }
    if (out.marker_indices.empty()) {
        throw validation_error("complement of region " + region.id + " is empty");
    }
    return out;
}

Region whole_genome_region(const MarkerPanel& panel) {
    Region out;
    out.id = "genome";
    out.chromosome = std::nullopt;
    out.marker_indices.resize(static_cast<std::size_t>(panel.marker_count()));
    std::iota(out.marker_indices.begin(), out.marker_indices.end(), 0);
    return out;
}

Eigen::MatrixXd centered_columns(const Eigen::MatrixXd& m) {
    return m.rowwise() - m.colwise().mean();
}

Eigen::MatrixXd marker_principal_components(const MarkerPanel& panel, int count) {
    if (count == 0) {
        return Eigen::MatrixXd(panel.line_count(), 0);
    }
    if (count < 0) {
        throw validation_error("pc count must be >= 0");
    }
    const Eigen::MatrixXd centered = centered_columns(panel.markers);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const int rank_cap = static_cast<int>(std::min(panel.line_count(), panel.marker_count()));
    if (count > rank_cap) {
        throw validation_error("pc count exceeds matrix rank bound");
    }
    return svd.matrixU().leftCols(count) * svd.singularValues().head(count).asDiagonal();
}

void write_marker_panel(const std::filesystem::path& markers_path,
                        const std::filesystem::path& map_path,
                        const MarkerPanel& panel) {
    io::Table markers;
    markers.header.push_back("line_id");
    for (const auto& entry : panel.map.entries) {
        markers.header.push_back(entry.marker_id);
    }
    // Stored values are always MinusOneZeroOne coded; undo the load-time shift
    // when the declared coding is ZeroOneTwo.
    const double shift = panel.coding == Coding::ZeroOneTwo ? 1.0 : 0.0;
    for (Eigen::Index r = 0; r < panel.line_count(); ++r) {
        std::vector<std::string> row;
        row.push_back(panel.line_ids[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < panel.marker_count(); ++c) {
            row.push_back(io::format_double(panel.markers(r, c) + shift));
        }
        markers.rows.push_back(std::move(row));
    }
    io::write_table(markers_path, markers);

    io::Table map;
    map.header = {"marker_id", "chromosome", "position_cM"};
    for (Eigen::Index c = 0; c < panel.marker_count(); ++c) {
        if (panel.map.is_unmapped(static_cast<int>(c))) {
            continue;  // unmapped markers regain sentinel status on reload
        }
        const auto& entry = panel.map.entries[static_cast<std::size_t>(c)];
        map.rows.push_back({entry.marker_id, std::to_string(entry.chromosome),
                            io::format_double(entry.position_cm)});
    }
    io::write_table(map_path, map);
}

void write_phenotype(const std::filesystem::path& path, const MarkerPanel& panel,
                     const Phenotype& phenotype) {
    io::Table table;
    table.header = {"line_id", "value"};
    const Eigen::MatrixXd cov = phenotype.covariates();
    for (Eigen::Index c = 0; c < cov.cols(); ++c) {
        table.header.push_back("cov" + std::to_string(c + 1));
    }
    for (Eigen::Index r = 0; r < phenotype.n(); ++r) {
        std::vector<std::string> row;
        row.push_back(panel.line_ids[static_cast<std::size_t>(phenotype.line_index[static_cast<std::size_t>(r)])]);
        row.push_back(io::format_double(phenotype.values(r)));
        for (Eigen::Index c = 0; c < cov.cols(); ++c) {
            row.push_back(io::format_double(cov(r, c)));
        }
        table.rows.push_back(std::move(row));
    }
    io::write_table(path, table);
}

}  // namespace legp::data
