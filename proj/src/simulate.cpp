#include "legp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "legp/table.hpp"

namespace legp::sim {

namespace {

double sample_variance(const Eigen::VectorXd& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

/// One meiosis across a chromosome of homozygous parents: Poisson crossover
/// count (rate = length in Morgans, Haldane mapping, no interference),
/// uniform crossover positions, random starting strand.
std::vector<std::uint8_t> recombine(const std::vector<std::uint8_t>& hap1,
                                    const std::vector<std::uint8_t>& hap2,
                                    const std::vector<double>& positions, double length_cm,
                                    std::mt19937_64& rng) {
    std::poisson_distribution<int> n_crossovers(length_cm / 100.0);
    std::uniform_real_distribution<double> uniform(0.0, length_cm);
    std::vector<double> cuts(static_cast<std::size_t>(n_crossovers(rng)));
    for (double& cut : cuts) {
        cut = uniform(rng);
    }
    std::sort(cuts.begin(), cuts.end());
    bool on_first = (rng() & 1ULL) != 0;
    std::vector<std::uint8_t> child(hap1.size());
    std::size_t cut_idx = 0;
    for (std::size_t m = 0; m < positions.size(); ++m) {
        while (cut_idx < cuts.size() && cuts[cut_idx] <= positions[m]) {
            on_first = !on_first;
            ++cut_idx;
        }
        child[m] = on_first ? hap1[m] : hap2[m];
    }
    return child;
}

}  // namespace

void SimConfig::validate() const {
    if (n_chromosomes < 1 || markers_per_chromosome < 1 || n_individuals < 2 ||
        chrom_length_cm <= 0.0 || n_generations < 0) {
        throw validation_error("simulation config has non-positive dimensions");
    }
    if (target_h2 <= 0.0 || target_h2 >= 1.0) {
        throw validation_error("target_h2 must lie in (0, 1)");
    }
    std::vector<int> qtl = qtl_per_chromosome;
    if (qtl.empty()) {
        qtl.assign(static_cast<std::size_t>(n_chromosomes), n_qtl_per_chromosome);
    }
    if (static_cast<int>(qtl.size()) != n_chromosomes) {
        throw validation_error("qtl_per_chromosome length must equal n_chromosomes");
    }
    int total = 0;
    for (int q : qtl) {
        if (q < 0 || q > markers_per_chromosome) {
            throw validation_error("QTL count per chromosome must lie in [0, markers]");
        }
        total += q;
    }
    if (total == 0) {
        throw validation_error("simulation needs at least one QTL");
    }
}

Simulated simulate_population(const SimConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const int c = config.n_chromosomes;
    const int m_per = config.markers_per_chromosome;
    const int n = config.n_individuals;
    const int p = c * m_per;

    // Equally spaced marker positions per chromosome.
    std::vector<double> chrom_positions(static_cast<std::size_t>(m_per));
    for (int m = 0; m < m_per; ++m) {
        chrom_positions[static_cast<std::size_t>(m)] =
            m_per == 1 ? config.chrom_length_cm / 2.0
                       : config.chrom_length_cm * m / (m_per - 1);
    }

    // Population of homozygous lines: one haplotype per chromosome each.
    using Genome = std::vector<std::vector<std::uint8_t>>;
    std::vector<Genome> population(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Genome g(static_cast<std::size_t>(c));
        const std::uint8_t allele = static_cast<std::uint8_t>(i % 2);  // founder A or B
        for (int ch = 0; ch < c; ++ch) {
            g[static_cast<std::size_t>(ch)].assign(static_cast<std::size_t>(m_per), allele);
        }
        population[static_cast<std::size_t>(i)] = std::move(g);
    }

    // Random pairing, two offspring per pairing, constant population size.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int gen = 0; gen < config.n_generations; ++gen) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Genome> next(static_cast<std::size_t>(n));
        for (int slot = 0; slot < n; ++slot) {
            const int a = order[static_cast<std::size_t>((slot / 2 * 2) % n)];
            const int b = order[static_cast<std::size_t>((slot / 2 * 2 + 1) % n)];
            Genome child(static_cast<std::size_t>(c));
            for (int ch = 0; ch < c; ++ch) {
                child[static_cast<std::size_t>(ch)] =
                    recombine(population[static_cast<std::size_t>(a)][static_cast<std::size_t>(ch)],
                              population[static_cast<std::size_t>(b)][static_cast<std::size_t>(ch)],
                              chrom_positions, config.chrom_length_cm, rng);
            }
            next[static_cast<std::size_t>(slot)] = std::move(child);
        }
        population = std::move(next);
    }

    // Coded marker matrix: allele 0 -> -1, allele 1 -> +1.
    Eigen::MatrixXd markers(n, p);
    for (int i = 0; i < n; ++i) {
        for (int ch = 0; ch < c; ++ch) {
            for (int m = 0; m < m_per; ++m) {
                markers(i, ch * m_per + m) =
                    population[static_cast<std::size_t>(i)][static_cast<std::size_t>(ch)]
                              [static_cast<std::size_t>(m)] != 0
                        ? 1.0
                        : -1.0;
            }
        }
    }

    // QTL columns and standard-normal additive effects.
    std::vector<int> qtl_counts = config.qtl_per_chromosome;
    if (qtl_counts.empty()) {
        qtl_counts.assign(static_cast<std::size_t>(c), config.n_qtl_per_chromosome);
    }
    std::normal_distribution<double> std_normal(0.0, 1.0);
    std::vector<QtlRecord> qtl;
    Eigen::VectorXd genetic = Eigen::VectorXd::Zero(n);
    for (int ch = 0; ch < c; ++ch) {
        std::vector<int> cols(static_cast<std::size_t>(m_per));
        std::iota(cols.begin(), cols.end(), ch * m_per);
        std::shuffle(cols.begin(), cols.end(), rng);
        cols.resize(static_cast<std::size_t>(qtl_counts[static_cast<std::size_t>(ch)]));
        std::sort(cols.begin(), cols.end());
        for (int col : cols) {
            QtlRecord record;
            record.chromosome = ch + 1;
            record.position_cm = chrom_positions[static_cast<std::size_t>(col - ch * m_per)];
            record.marker_index = col;
            record.effect = std_normal(rng);
            genetic += record.effect * markers.col(col);
            qtl.push_back(std::move(record));
        }
    }

    // Residual variance set from the realized genetic variance so the sample
    // heritability lands near the target.
    const double var_g = sample_variance(genetic);
    if (var_g <= 0.0) {
        throw numeric_error("simulated genetic values are constant; increase diversity");
    }
    const double sigma_e = std::sqrt(var_g * (1.0 - config.target_h2) / config.target_h2);
    Eigen::VectorXd noise(n);
    for (int i = 0; i < n; ++i) {
        noise(i) = sigma_e * std_normal(rng);
    }
    const Eigen::VectorXd y = genetic + noise;

    // Assemble panel (optionally hiding QTL columns), map, phenotype, truth.
    std::set<int> hidden;
    if (config.hide_qtl) {
        for (const auto& record : qtl) {
            hidden.insert(record.marker_index);
        }
        if (static_cast<int>(hidden.size()) >= p) {
            throw validation_error("hide_qtl would remove every marker");
        }
    }
    Simulated out;
    out.panel.coding = data::Coding::MinusOneZeroOne;
    const int p_kept = p - static_cast<int>(hidden.size());
    out.panel.markers.resize(n, p_kept);
    out.panel.map.chromosome_count = c;
    std::vector<int> new_index(static_cast<std::size_t>(p), -1);
    int kept = 0;
    for (int col = 0; col < p; ++col) {
        if (hidden.count(col) != 0) {
            continue;
        }
        const int ch = col / m_per;
        const int m = col % m_per;
        out.panel.markers.col(kept) = markers.col(col);
        out.panel.map.entries.push_back({"m" + std::to_string(ch + 1) + "_" + std::to_string(m + 1),
                                         ch + 1, chrom_positions[static_cast<std::size_t>(m)]});
        new_index[static_cast<std::size_t>(col)] = kept;
        ++kept;
    }
    out.panel.line_ids.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.panel.line_ids.push_back("line" + std::to_string(i + 1));
    }

    out.phenotype.values = y;
    out.phenotype.line_index.resize(static_cast<std::size_t>(n));
    std::iota(out.phenotype.line_index.begin(), out.phenotype.line_index.end(), 0);
    out.phenotype.fixed_effects = Eigen::MatrixXd::Ones(n, 1);

    out.truth.qtl = std::move(qtl);
    for (auto& record : out.truth.qtl) {
        record.marker_id = "m" + std::to_string(record.chromosome) + "_" +
                           std::to_string(record.marker_index % m_per + 1);
        record.marker_index = new_index[static_cast<std::size_t>(record.marker_index)];
    }
    out.truth.genetic_values = genetic;
    out.truth.realized_h2 = var_g / sample_variance(y);
    return out;
}

std::pair<std::vector<int>, std::vector<int>> train_test_split(Eigen::Index n_lines,
                                                               double train_fraction,
                                                               std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw validation_error("train fraction must lie in (0, 1)");
    }
    const auto n_train =
        static_cast<Eigen::Index>(std::llround(train_fraction * static_cast<double>(n_lines)));
    if (n_train < 1 || n_train >= n_lines) {
        throw validation_error("degenerate train/test split");
    }
    std::vector<int> order(static_cast<std::size_t>(n_lines));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> train(order.begin(), order.begin() + n_train);
    std::vector<int> test(order.begin() + n_train, order.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

Simulated subset_lines(const data::MarkerPanel& panel, const data::Phenotype& phenotype,
                       const std::vector<int>& line_indices) {
    Simulated out;
    out.panel.coding = panel.coding;
    out.panel.map = panel.map;
    out.panel.markers.resize(static_cast<Eigen::Index>(line_indices.size()), panel.marker_count());
    std::vector<int> new_line(static_cast<std::size_t>(panel.line_count()), -1);
    for (std::size_t i = 0; i < line_indices.size(); ++i) {
        const int idx = line_indices[i];
        if (idx < 0 || idx >= panel.line_count()) {
            throw validation_error("line index out of range in subset");
        }
        out.panel.markers.row(static_cast<Eigen::Index>(i)) = panel.markers.row(idx);
        out.panel.line_ids.push_back(panel.line_ids[static_cast<std::size_t>(idx)]);
        new_line[static_cast<std::size_t>(idx)] = static_cast<int>(i);
    }
    std::vector<Eigen::Index> kept_obs;
    for (Eigen::Index i = 0; i < phenotype.n(); ++i) {
        if (new_line[static_cast<std::size_t>(phenotype.line_index[static_cast<std::size_t>(i)])] >= 0) {
            kept_obs.push_back(i);
        }
    }
    out.phenotype.values.resize(static_cast<Eigen::Index>(kept_obs.size()));
    out.phenotype.fixed_effects.resize(static_cast<Eigen::Index>(kept_obs.size()),
                                       phenotype.fixed_effects.cols());
    out.phenotype.line_index.resize(kept_obs.size());
    for (std::size_t i = 0; i < kept_obs.size(); ++i) {
        const Eigen::Index src = kept_obs[i];
        out.phenotype.values(static_cast<Eigen::Index>(i)) = phenotype.values(src);
        out.phenotype.fixed_effects.row(static_cast<Eigen::Index>(i)) =
            phenotype.fixed_effects.row(src);
        out.phenotype.line_index[i] =
            new_line[static_cast<std::size_t>(phenotype.line_index[static_cast<std::size_t>(src)])];
    }
    return out;
}

void write_truth(const std::filesystem::path& path, const SimTruth& truth) {
    io::Table table;
    table.header = {"chromosome", "cM", "marker_id", "effect"};
    for (const auto& record : truth.qtl) {
        table.rows.push_back({std::to_string(record.chromosome),
                              io::format_double(record.position_cm), record.marker_id,
                              io::format_double(record.effect)});
    }
    io::write_table(path, table);
}

}  // namespace legp::sim
