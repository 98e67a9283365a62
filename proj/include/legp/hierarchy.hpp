#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "legp/genomic_data.hpp"
#include "legp/kernel.hpp"
#include "legp/spmm.hpp"

namespace legp::hier {

/// Likelihood-ratio test of one variance component against its boundary null.
/// The statistic is on the twice-log-likelihood scale (clamped at zero); the
/// p-value comes from a two-point chi-square mixture: weight w0 on the point
/// mass at zero and w1 on chi-square(1).
struct LrtResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double w0 = 0.5;
    double w1 = 0.5;
    spmm::Method method = spmm::Method::REML;
};

/// Mixture weights: (0.5, 0.5) for REML, (0.65, 0.35) for ML.
std::pair<double, double> mixture_weights(spmm::Method method);

double mixture_p_value(double statistic, double w0, double w1);

/// Region-kernel LRT. Without a background kernel this tests the single
/// variance component of Model (1); with one, both hypotheses include the
/// background component (marginal test of the region).
LrtResult lrt_variance(const data::Phenotype& phenotype, const kernel::KernelMatrix& region_kernel,
                       const kernel::KernelMatrix* background, spmm::Method method,
                       const spmm::FitOptions& options = {});

enum class Decision { Rejected, Accepted, NotTested };

std::string to_string(Decision d);

struct HierarchyNode {
    std::string region_id;
    int level = 1;
    int n_markers = 0;
    double alpha_h = std::numeric_limits<double>::quiet_NaN();
    LrtResult lrt;  // statistic/p are NaN for NotTested nodes and threshold walks
    double marginal_h2 = std::numeric_limits<double>::quiet_NaN();
    Decision decision = Decision::NotTested;
};

struct HierarchyReport {
    std::vector<HierarchyNode> nodes;  // breadth-first order over the tree
    double alpha = 0.0;
    std::string procedure;  // "meinshausen" or "threshold"
};

using KernelBuilder = std::function<kernel::KernelMatrix(const data::Region&)>;

/// Meinshausen walk: the root is tested at alpha, children of a rejected node
/// are tested at alpha * |H| / |H0| (marker counts), and the walk stops at the
/// first acceptance along each path. Sub-root nodes are tested marginally
/// against the kernel of their complement markers.
HierarchyReport hierarchical_scan(const data::RegionTree& tree, const data::MarkerPanel& panel,
                                  const data::Phenotype& phenotype, const KernelBuilder& builder,
                                  double alpha, spmm::Method method,
                                  const spmm::FitOptions& options = {}, int threads = 1);

/// Same walk with decision = (marginal h2 >= h2_floor); no p-values.
HierarchyReport threshold_scan(const data::RegionTree& tree, const data::MarkerPanel& panel,
                               const data::Phenotype& phenotype, const KernelBuilder& builder,
                               double h2_floor, spmm::Method method,
                               const spmm::FitOptions& options = {}, int threads = 1);

void write_hierarchy_report(const std::filesystem::path& path, const HierarchyReport& report);

/// Machine-readable nested tree structure (JSON).
void write_region_tree(const std::filesystem::path& path, const data::RegionTree& tree);

}  // namespace legp::hier
