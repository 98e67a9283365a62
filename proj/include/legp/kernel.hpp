#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "legp/common.hpp"
#include "legp/genomic_data.hpp"

namespace legp::kernel {

enum class KernelFunction { Linear, Polynomial, Gaussian };

std::string to_string(KernelFunction f);
KernelFunction kernel_function_from_string(const std::string& name);

/// How a kernel was built; enough to evaluate the same kernel between
/// new lines and the training lines.
struct Provenance {
    KernelFunction function = KernelFunction::Linear;
    double c = 0.0;       // polynomial offset
    int d = 1;            // polynomial degree
    double h = 0.0;       // resolved gaussian bandwidth
    std::string source;   // region id or "scan@<marker_id>"
};

/// Symmetric PSD relationship matrix over lines.
struct KernelMatrix {
    Eigen::MatrixXd values;  // q x q
    Provenance provenance;
    bool normalized = false;
    double normalization_factor = 1.0;  // divisor applied to reach mean diagonal 1

    Eigen::Index size() const { return values.rows(); }
    double symmetry_error() const;
    double min_eigenvalue() const;
};

enum class WeightMethod { Heritability, Marginal, PerKernel, QiuR2, QiuMSE, Alignment, Fixed };

/// Non-negative kernel weights summing to one.
struct KernelWeights {
    Eigen::VectorXd weights;
    WeightMethod method = WeightMethod::Fixed;

    void validate() const;  // throws validation_error on violation
};

struct KernelOptions {
    bool normalize = false;  // rescale so the diagonal mean is exactly 1
};

/// K = A A' / m. Warns when all rows are identical (rank 0 after centering).
KernelMatrix linear_kernel(const Eigen::MatrixXd& A, const KernelOptions& options = {},
                           Warnings* warnings = nullptr);

/// K_ij = (x_i'x_j / m + c)^d, d >= 1.
KernelMatrix polynomial_kernel(const Eigen::MatrixXd& A, double c, int d,
                               const KernelOptions& options = {});

/// K_ij = exp(-|x_i - x_j|^2 / h); h = nullopt resolves to the median of
/// nonzero pairwise squared distances. The diagonal is exactly 1.
KernelMatrix gaussian_kernel(const Eigen::MatrixXd& A, std::optional<double> h = std::nullopt,
                             const KernelOptions& options = {});

/// Median of nonzero pairwise squared distances; throws when all are zero.
double median_squared_distance(const Eigen::MatrixXd& A);

KernelMatrix combine_kernels(const std::vector<KernelMatrix>& kernels, const KernelWeights& weights);

KernelMatrix hadamard(const KernelMatrix& k1, const KernelMatrix& k2);

/// Frobenius cosine <K1,K2>_F / sqrt(<K1,K1>_F <K2,K2>_F).
double kernel_alignment(const KernelMatrix& k1, const KernelMatrix& k2);

/// eta_m = A(K_m, yy') / sum_h A(K_h, yy').
KernelWeights alignment_weights(const std::vector<KernelMatrix>& kernels, const Eigen::VectorXd& y);

enum class QiuKind { R2, MSE };

/// R2: eta_m = r2_m / sum r2.  MSE: eta_m = (sum M - M_m) / ((p-1) sum M);
/// the printed form with (1-p) is negative for p >= 2, so (p-1) is used.
KernelWeights qiu_weights(const Eigen::VectorXd& scores, QiuKind kind);

/// Local kernel centered at a marker: columns of M are weighted by
/// sqrt(s), where s_l = exp(-dist_cM^2 / bandwidth) within the center's
/// chromosome and 0 elsewhere, then fed to the kernel function
/// (polynomial uses degree 2 with c = 0; gaussian uses the median
/// bandwidth of the weighted rows).
KernelMatrix kernel_scan(const data::MarkerPanel& panel, int center_marker, double bandwidth,
                         KernelFunction function, const KernelOptions& options = {},
                         Warnings* warnings = nullptr);

struct Edge {
    int a, b;      // line indices, a < b
    double value;  // surviving off-diagonal entry
};

/// Hard-thresholds off-diagonal entries below `threshold` to zero, repairs
/// positive definiteness with the minimal ridge keeping eigenvalues >= 1e-8,
/// and returns the surviving off-diagonal pairs.
std::pair<KernelMatrix, std::vector<Edge>> shrink_kernel(const KernelMatrix& kernel,
                                                         double threshold);

/// Kernel rows between new lines and training lines under the training
/// kernel's provenance (same scaling and normalization divisor).
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& A_new, const Eigen::MatrixXd& A_train,
                             const Provenance& provenance, double normalization_factor);

void write_kernel(const std::filesystem::path& path, const KernelMatrix& kernel,
                  const std::vector<std::string>& line_ids);
void write_edges(const std::filesystem::path& path, const std::vector<Edge>& edges,
                 const std::vector<std::string>& line_ids);

}  // namespace legp::kernel
