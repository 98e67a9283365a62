#include "legp/breeding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "legp/table.hpp"

namespace legp::breed {

namespace {

constexpr double kTwoPi = 6.283185307179586;

double sample_variance(const Eigen::VectorXd& v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double mean = v.mean();
    return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

/// Type-1 empirical quantile: smallest value with CDF >= prob.
double pmf_quantile(const std::vector<std::pair<double, double>>& pmf, double prob) {
    double cumulative = 0.0;
    for (const auto& [value, p] : pmf) {
        cumulative += p;
        if (cumulative >= prob - 1e-15) {
            return value;
        }
    }
    return pmf.back().first;
}

double sample_quantile(Eigen::VectorXd sorted, double prob) {
    const auto n = sorted.size();
    const auto idx = static_cast<Eigen::Index>(
        std::min<double>(std::ceil(prob * static_cast<double>(n)) - 1, static_cast<double>(n - 1)));
    return sorted(std::max<Eigen::Index>(idx, 0));
}

}  // namespace

void SelectionInput::validate() const {
    if (eblups.rows() != densities.rows() || eblups.cols() != densities.cols()) {
        throw validation_error("EBLUP and density dimensions differ");
    }
    if (kernel_weights.size() != eblups.cols()) {
        throw validation_error("kernel weight count does not match regions");
    }
    if (densities.size() > 0 && (densities.minCoeff() < 0.0 || densities.maxCoeff() > 1.0)) {
        throw validation_error("densities must lie in [0, 1]");
    }
    if (h1 <= 0.0 || h2 <= 0.0) {
        throw validation_error("h1 and h2 must be positive");
    }
}

Eigen::VectorXd jannink_index(const SelectionInput& input) {
    input.validate();
    const Eigen::Index n = input.eblups.rows();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < input.eblups.cols(); ++j) {
            out(i) += input.eblups(i, j) / (1.0 + std::sqrt(input.densities(i, j)));
        }
    }
    return out;
}

Eigen::VectorXd preference_index(const SelectionInput& input, bool include_density,
                                 Warnings* warnings) {
    input.validate();
    const Eigen::Index n = input.eblups.rows();
    const Eigen::Index k = input.eblups.cols();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    int used = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        const double var_g = sample_variance(input.eblups.col(j));
        const double var_p = sample_variance(input.densities.col(j));
        if (var_g <= 0.0 || var_p <= 0.0) {
            warn(warnings, "region " + std::to_string(j) +
                               " skipped in preference index (zero variance)");
            continue;
        }
        ++used;
        const double sd_g = std::sqrt(var_g);
        const double sd_p = std::sqrt(var_p);
        const double g_best = input.eblups.col(j).maxCoeff();
        const double prefactor =
            input.kernel_weights(j) / (kTwoPi * input.h1 * sd_g * input.h2 * sd_p);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dg = input.eblups(i, j) - g_best;
            double exponent = dg * dg / (input.h1 * input.h1 * var_g);
            if (include_density) {
                const double dp = input.densities(i, j);
                exponent += dp * dp / (input.h2 * input.h2 * var_p);
            }
            out(i) += prefactor * std::exp(-0.5 * exponent);
        }
    }
    if (used == 0) {
        throw numeric_error("preference index undefined: every region was skipped");
    }
    return out;
}

CrossDistribution cross_distribution(const Eigen::VectorXd& g1, const Eigen::VectorXd& g2,
                                     int n_samples, std::uint64_t seed, CrossMode mode) {
    if (g1.size() != g2.size()) {
        throw validation_error("parent EBLUP vectors differ in length");
    }
    if (g1.size() == 0) {
        throw validation_error("cross needs at least one region");
    }
    if (n_samples < 1) {
        throw validation_error("n_samples must be >= 1");
    }
    const auto k = static_cast<int>(g1.size());
    const bool exhaustive_feasible = k <= 20 && (1ULL << k) <= 1000000ULL;
    bool exact = mode == CrossMode::Exhaustive || (mode == CrossMode::Auto && exhaustive_feasible);
    if (mode == CrossMode::Exhaustive && !exhaustive_feasible) {
        throw validation_error("exhaustive cross enumeration infeasible for this k");
    }

    CrossDistribution out;
    out.exact = exact;
    if (exact) {
        const std::uint64_t count = 1ULL << k;
        const double prob = 1.0 / static_cast<double>(count);
        std::map<double, double> pmf;
        for (std::uint64_t mask = 0; mask < count; ++mask) {
            double value = 0.0;
            for (int j = 0; j < k; ++j) {
                value += (mask >> j) & 1ULL ? g1(j) : g2(j);
            }
            pmf[value] += prob;
        }
        out.pmf.assign(pmf.begin(), pmf.end());
        double mean = 0.0, second = 0.0;
        for (const auto& [value, p] : out.pmf) {
            mean += value * p;
            second += value * value * p;
        }
        out.mean = mean;
        out.variance = std::max(0.0, second - mean * mean);
        out.q05 = pmf_quantile(out.pmf, 0.05);
        out.q50 = pmf_quantile(out.pmf, 0.50);
        out.q95 = pmf_quantile(out.pmf, 0.95);
    } else {
        std::mt19937_64 rng(seed);
        out.samples.resize(n_samples);
        for (int s = 0; s < n_samples; ++s) {
            double value = 0.0;
            for (int j = 0; j < k; ++j) {
                value += (rng() & 1ULL) ? g1(j) : g2(j);
            }
            out.samples(s) = value;
        }
        out.mean = out.samples.mean();
        out.variance = sample_variance(out.samples);
        Eigen::VectorXd sorted = out.samples;
        std::sort(sorted.data(), sorted.data() + sorted.size());
        out.q05 = sample_quantile(sorted, 0.05);
        out.q50 = sample_quantile(sorted, 0.50);
        out.q95 = sample_quantile(sorted, 0.95);
    }
    return out;
}

Eigen::VectorXd region_density(const data::MarkerPanel& panel, const data::Region& region,
                               Warnings* warnings) {
    const Eigen::MatrixXd markers = data::region_markers(panel, region);
    const Eigen::Index n = markers.rows();
    const Eigen::Index m = markers.cols();
    // Carriage of the "plus" allele on [0,1] per cell; the carried-allele
    // frequency a*f + (1-a)*(1-f) is orientation invariant.
    const Eigen::MatrixXd carriage = (markers.array() + 1.0) / 2.0;
    const Eigen::RowVectorXd freq = carriage.colwise().mean();
    bool monomorphic = true;
    for (Eigen::Index j = 0; j < m && monomorphic; ++j) {
        monomorphic = freq(j) == 0.0 || freq(j) == 1.0;
    }
    if (monomorphic) {
        warn(warnings, "region " + region.id + " is monomorphic; densities are 1");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double total = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double a = carriage(i, j);
            total += a * freq(j) + (1.0 - a) * (1.0 - freq(j));
        }
        out(i) = total / static_cast<double>(m);
    }
    return out;
}

void write_selection_report(const std::filesystem::path& path,
                            const std::vector<std::string>& line_ids,
                            const Eigen::VectorXd& jannink, const Eigen::VectorXd& preference) {
    std::vector<int> order(static_cast<std::size_t>(preference.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return preference(a) > preference(b); });
    std::vector<int> rank(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i) + 1;
    }
    io::Table table;
    table.header = {"line_id", "jannink_index", "preference_index", "rank"};
    for (Eigen::Index i = 0; i < preference.size(); ++i) {
        table.rows.push_back({line_ids[static_cast<std::size_t>(i)], io::format_double(jannink(i)),
                              io::format_double(preference(i)),
                              std::to_string(rank[static_cast<std::size_t>(i)])});
    }
    io::write_table(path, table);
}

void write_cross_report(const std::filesystem::path& path, const CrossDistribution& cross) {
    io::Table table;
    table.header = {"parent_a", "parent_b", "mean", "var", "q05", "q50", "q95"};
    table.rows.push_back({cross.parent_ids.first, cross.parent_ids.second,
                          io::format_double(cross.mean), io::format_double(cross.variance),
                          io::format_double(cross.q05), io::format_double(cross.q50),
                          io::format_double(cross.q95)});
    io::write_table(path, table);
}

}  // namespace legp::breed
