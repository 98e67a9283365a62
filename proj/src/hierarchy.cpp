#include "legp/hierarchy.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "legp/parallel.hpp"
#include "legp/table.hpp"

namespace legp::hier {

namespace {

using json = nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct TestedNode {
    LrtResult lrt;
    double marginal_h2 = kNan;
};

/// Fits null and alternative consistently (same jittered kernels) so the
/// statistic can never go negative beyond optimizer noise.
TestedNode run_lrt(const data::Phenotype& phenotype, const kernel::KernelMatrix& region_kernel,
                   const kernel::KernelMatrix* background, spmm::Method method,
                   const spmm::FitOptions& options) {
    spmm::FitOptions opts = options;
    opts.method = method;

    double null_value;
    spmm::FitResult alt;
    if (background == nullptr) {
        spmm::MixedModelSpec null_spec;
        null_spec.phenotype = phenotype;
        null_value = spmm::profile_objective(null_spec, Eigen::VectorXd(0), method);
        alt = spmm::fit_single(phenotype, region_kernel, opts);
    } else {
        const spmm::FitResult null_fit = spmm::fit_single(phenotype, *background, opts);
        null_value = method == spmm::Method::REML ? null_fit.reml_loglik : null_fit.loglik;
        Eigen::VectorXd init(2);
        init << 0.0, null_fit.lambda(0);
        alt = spmm::fit_joint(phenotype, {region_kernel, *background}, opts, init);
    }
    const double alt_value = method == spmm::Method::REML ? alt.reml_loglik : alt.loglik;
    if (alt_value < null_value - 1e-6) {
        throw numeric_error("variance LRT nesting violated: alternative fit below the null");
    }

    TestedNode out;
    out.lrt.method = method;
    std::tie(out.lrt.w0, out.lrt.w1) = mixture_weights(method);
    out.lrt.statistic = std::max(0.0, alt_value - null_value);
    out.lrt.p_value = mixture_p_value(out.lrt.statistic, out.lrt.w0, out.lrt.w1);
    out.marginal_h2 = alt.heritabilities(0);
    return out;
}

/// Fit driving the threshold walk: marginal h2 of the node's region.
double marginal_h2_of(const data::Phenotype& phenotype, const kernel::KernelMatrix& region_kernel,
                      const kernel::KernelMatrix* background, spmm::Method method,
                      const spmm::FitOptions& options) {
    spmm::FitOptions opts = options;
    opts.method = method;
    if (background == nullptr) {
        return spmm::fit_single(phenotype, region_kernel, opts).heritabilities(0);
    }
    return spmm::fit_marginal(phenotype, region_kernel, *background, opts).heritabilities(0);
}

/// Shared Meinshausen walk; `test` returns (decision driver evaluated) per node.
template <typename TestFn>
HierarchyReport walk_tree(const data::RegionTree& tree, const TestFn& test, int threads) {
    const std::vector<const data::RegionTree*> nodes = tree.breadth_first();
    std::map<const data::RegionTree*, std::size_t> index_of;
    HierarchyReport report;
    report.nodes.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        index_of[nodes[i]] = i;
        report.nodes[i].region_id = nodes[i]->region.id;
        report.nodes[i].level = nodes[i]->level;
        report.nodes[i].n_markers = nodes[i]->region.size();
        report.nodes[i].decision = Decision::NotTested;
        report.nodes[i].lrt.statistic = kNan;
        report.nodes[i].lrt.p_value = kNan;
    }

    std::vector<const data::RegionTree*> frontier{&tree};
    while (!frontier.empty()) {
        std::vector<const data::RegionTree*> next;
        parallel_for(static_cast<int>(frontier.size()), threads, [&](int i) {
            const data::RegionTree* node = frontier[static_cast<std::size_t>(i)];
            test(*node, report.nodes[index_of.at(node)]);
        });
        for (const data::RegionTree* node : frontier) {
            if (report.nodes[index_of.at(node)].decision == Decision::Rejected) {
                for (const auto& child : node->children) {
                    next.push_back(&child);
                }
            }
        }
        frontier = std::move(next);
    }
    return report;
}

}  // namespace

std::pair<double, double> mixture_weights(spmm::Method method) {
    return method == spmm::Method::REML ? std::make_pair(0.5, 0.5) : std::make_pair(0.65, 0.35);
}

double mixture_p_value(double statistic, double w0, double w1) {
    if (statistic <= 0.0) {
        return std::min(1.0, w0 + w1);  // point mass at zero plus the full chi2 tail
    }
    const boost::math::chi_squared chi2(1.0);
    return w1 * boost::math::cdf(boost::math::complement(chi2, statistic));
}

LrtResult lrt_variance(const data::Phenotype& phenotype, const kernel::KernelMatrix& region_kernel,
                       const kernel::KernelMatrix* background, spmm::Method method,
                       const spmm::FitOptions& options) {
    return run_lrt(phenotype, region_kernel, background, method, options).lrt;
}

std::string to_string(Decision d) {
    switch (d) {
        case Decision::Rejected: return "rejected";
        case Decision::Accepted: return "accepted";
        case Decision::NotTested: return "not_tested";
    }
    return "unknown";
}

HierarchyReport hierarchical_scan(const data::RegionTree& tree, const data::MarkerPanel& panel,
                                  const data::Phenotype& phenotype, const KernelBuilder& builder,
                                  double alpha, spmm::Method method,
                                  const spmm::FitOptions& options, int threads) {
    if (alpha <= 0.0 || alpha >= 1.0) {
        throw validation_error("alpha must lie in (0, 1)");
    }
    const double root_markers = static_cast<double>(tree.region.size());
    auto test = [&](const data::RegionTree& node, HierarchyNode& row) {
        const kernel::KernelMatrix region_kernel = builder(node.region);
        std::optional<kernel::KernelMatrix> background;
        if (node.level > 1) {
            background = builder(data::complement_region(panel, node.region));
        }
        const TestedNode tested = run_lrt(phenotype, region_kernel,
                                          background ? &*background : nullptr, method, options);
        row.lrt = tested.lrt;
        row.marginal_h2 = tested.marginal_h2;
        row.alpha_h = alpha * static_cast<double>(node.region.size()) / root_markers;
        row.decision = tested.lrt.p_value <= row.alpha_h ? Decision::Rejected : Decision::Accepted;
    };
    HierarchyReport report = walk_tree(tree, test, threads);
    report.alpha = alpha;
    report.procedure = "meinshausen";
    return report;
}

HierarchyReport threshold_scan(const data::RegionTree& tree, const data::MarkerPanel& panel,
                               const data::Phenotype& phenotype, const KernelBuilder& builder,
                               double h2_floor, spmm::Method method,
                               const spmm::FitOptions& options, int threads) {
    if (h2_floor < 0.0 || h2_floor > 1.0) {
        throw validation_error("h2_floor must lie in [0, 1]");
    }
    auto test = [&](const data::RegionTree& node, HierarchyNode& row) {
        const kernel::KernelMatrix region_kernel = builder(node.region);
        std::optional<kernel::KernelMatrix> background;
        if (node.level > 1) {
            background = builder(data::complement_region(panel, node.region));
        }
        row.marginal_h2 = marginal_h2_of(phenotype, region_kernel,
                                         background ? &*background : nullptr, method, options);
        row.decision = row.marginal_h2 >= h2_floor ? Decision::Rejected : Decision::Accepted;
    };
    HierarchyReport report = walk_tree(tree, test, threads);
    report.alpha = h2_floor;
    report.procedure = "threshold";
    return report;
}

void write_hierarchy_report(const std::filesystem::path& path, const HierarchyReport& report) {
    io::Table table;
    table.header = {"region_id", "level", "n_markers", "alpha_H", "statistic", "p_value", "decision"};
    for (const auto& node : report.nodes) {
        table.rows.push_back({node.region_id, std::to_string(node.level),
                              std::to_string(node.n_markers), io::format_double(node.alpha_h),
                              io::format_double(node.lrt.statistic),
                              io::format_double(node.lrt.p_value), to_string(node.decision)});
    }
    io::write_table(path, table);
}

namespace {

json tree_to_json(const data::RegionTree& node, const data::RegionTree* root) {
    json j;
    j["id"] = node.region.id;
    j["level"] = node.level;
    if (node.region.chromosome.has_value()) {
        j["chromosome"] = *node.region.chromosome;
    }
    j["n_markers"] = node.region.size();
    j["marker_indices"] = node.region.marker_indices;
    j["children"] = json::array();
    for (const auto& child : node.children) {
        j["children"].push_back(tree_to_json(child, root));
    }
    return j;
}

}  // namespace

void write_region_tree(const std::filesystem::path& path, const data::RegionTree& tree) {
    std::ofstream out(path);
    if (!out) {
        throw validation_error("cannot write tree file: " + path.string());
    }
    out << tree_to_json(tree, &tree).dump(2) << "\n";
}

}  // namespace legp::hier
