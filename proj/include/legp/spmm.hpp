#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "legp/common.hpp"
#include "legp/genomic_data.hpp"
#include "legp/kernel.hpp"

namespace legp::spmm {

enum class Method { ML, REML };
enum class Structure { Joint, Marginal, PerKernel };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct FitOptions {
    Method method = Method::REML;
    double log_lambda_min = -8.0;   // natural-log search window for each ratio
    double log_lambda_max = 8.0;
    int grid_points = 33;           // coarse bracketing grid before Brent refinement
    double rel_tol = 1e-8;          // joint-fit relative objective change
    int max_sweeps = 200;
    double jitter = 1e-8;           // times mean kernel diagonal, added before decomposition
};

/// One fitted mixed model. `loglik` and `reml_loglik` are on the twice-log
/// scale of the likelihood and restricted likelihood with their additive
/// constants dropped, so only differences are meaningful.
struct FitResult {
    Eigen::VectorXd sigma_g2;        // per-kernel genetic variance components
    double sigma_e2 = 0.0;
    Eigen::VectorXd lambda;          // sigma_g2 / sigma_e2
    Eigen::VectorXd beta;
    Eigen::MatrixXd eblups;          // q x k, column j = g_hat for kernel j
    std::vector<Eigen::VectorXd> dual_weights;  // d_j with g_hat_j = K_j d_j
    double loglik = 0.0;
    double reml_loglik = 0.0;
    Method method = Method::REML;
    Eigen::VectorXd heritabilities;  // structure-specific h2 per kernel
    int sweeps = 0;
    bool converged = true;
    Warnings warnings;
};

/// Likelihood-evaluation bundle: phenotype plus kernels over its lines.
struct MixedModelSpec {
    data::Phenotype phenotype;
    std::vector<kernel::KernelMatrix> kernels;
    Structure structure = Structure::Joint;
};

/// Twice the log-likelihood (dropped constant) at explicit parameters:
/// -n log s2e - log|V| - r'V^{-1}r / s2e with V = I + sum_j lambda_j Z K_j Z'.
double loglik(const MixedModelSpec& spec, const Eigen::VectorXd& beta, double sigma_e2,
              const Eigen::VectorXd& lambda);

/// Twice the restricted log-likelihood (dropped constant) with the GLS
/// estimate of beta substituted; includes the -log|X'V^{-1}X| term.
double reml_loglik(const MixedModelSpec& spec, double sigma_e2, const Eigen::VectorXd& lambda);

/// Profiled objective at a ratio vector: beta and sigma_e2 maximized out.
/// This is the function the fitters maximize over lambda.
double profile_objective(const MixedModelSpec& spec, const Eigen::VectorXd& lambda, Method method);

FitResult fit_single(const data::Phenotype& phenotype, const kernel::KernelMatrix& kernel,
                     const FitOptions& options = {});

FitResult fit_joint(const data::Phenotype& phenotype,
                    const std::vector<kernel::KernelMatrix>& kernels,
                    const FitOptions& options = {},
                    const std::optional<Eigen::VectorXd>& initial_lambda = std::nullopt);

/// Two-kernel joint fit of a target region kernel against the kernel of all
/// remaining markers; heritabilities use the marginal denominator.
FitResult fit_marginal(const data::Phenotype& phenotype, const kernel::KernelMatrix& target,
                       const kernel::KernelMatrix& background, const FitOptions& options = {});

/// Independent single-kernel fits. When pc_scores has columns, they are
/// appended to the fixed effects of every fit (population-structure control).
std::vector<FitResult> fit_per_kernel(const data::Phenotype& phenotype,
                                      const std::vector<kernel::KernelMatrix>& kernels,
                                      const FitOptions& options = {},
                                      const Eigen::MatrixXd* pc_scores = nullptr);

/// eta_m = h2_m / sum_h h2_h over per-kernel fits.
kernel::KernelWeights heritability_weights(const std::vector<FitResult>& fits);

/// X_new beta + sum_j C_j d_j, where C_j is the cross-kernel between new and
/// training lines for kernel j.
Eigen::VectorXd predict(const FitResult& fit, const std::vector<Eigen::MatrixXd>& cross_kernels,
                        const Eigen::MatrixXd& x_new);

void write_fit_report(const std::filesystem::path& path, const FitResult& fit,
                      const std::vector<std::string>& kernel_ids);
void write_eblups(const std::filesystem::path& path, const Eigen::MatrixXd& eblups,
                  const std::vector<std::string>& line_ids,
                  const std::vector<std::string>& kernel_ids);

}  // namespace legp::spmm
