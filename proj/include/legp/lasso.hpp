#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "legp/common.hpp"

namespace legp::lasso {

/// Design bundle for the EBLUP post-processing model: standardized EBLUP
/// columns (penalized) plus raw fixed-effect covariates (never penalized).
struct DesignBundle {
    Eigen::MatrixXd G;                    // n x k, standardized (mean 0, unit variance)
    Eigen::MatrixXd X;                    // n x p, raw covariates, no intercept column
    std::vector<std::string> column_ids;  // ids of kept EBLUP columns
    Eigen::VectorXd g_mean, g_scale;      // per kept column
    std::vector<std::string> dropped;     // constant EBLUP columns removed
    Warnings warnings;

    Eigen::Index n() const { return G.rows(); }
    Eigen::Index k() const { return G.cols(); }
};

DesignBundle assemble_design(const Eigen::MatrixXd& eblups, const Eigen::MatrixXd& fixed,
                             const std::vector<std::string>& column_ids);

/// Final sparse predictor: intercept + alpha on EBLUP columns + beta on
/// covariates. Alphas are stored on both the standardized scale (used by the
/// penalty) and the raw EBLUP scale (used for prediction).
struct CombinedModel {
    double intercept = 0.0;
    Eigen::VectorXd alpha;       // raw-scale coefficients on EBLUP columns
    Eigen::VectorXd alpha_std;   // standardized-scale coefficients
    Eigen::VectorXd beta;        // covariate coefficients
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<int> active_set;          // indices with alpha != 0
    std::vector<std::string> column_ids;  // aligned with alpha
    double objective = 0.0;               // rss + l1 + l2 penalty at the solution
    int sweeps = 0;
};

/// Cyclic coordinate descent on
///   sum (y - b0 - G a - X b)^2 + lambda1 |a|_1 + lambda2 |a|_2^2,
/// intercept and covariates unpenalized, fixed cyclic column order.
CombinedModel fit_lasso(const DesignBundle& bundle, const Eigen::VectorXd& y, double lambda1,
                        double lambda2, const CombinedModel* warm_start = nullptr);

struct CombinedPrediction {
    Eigen::VectorXd full;       // intercept + G alpha + X beta
    Eigen::VectorXd genotypic;  // G alpha
};

CombinedPrediction predict_combined(const CombinedModel& model, const Eigen::MatrixXd& eblups,
                                    const Eigen::MatrixXd& fixed);

/// Smallest lambda1 making every alpha zero (given covariates fitted alone).
double lambda_max(const DesignBundle& bundle, const Eigen::VectorXd& y);

struct PathPoint {
    double lambda1 = 0.0;
    double cv_mse = 0.0;
    double cv_se = 0.0;
    int nonzero = 0;
};

struct PathReport {
    std::vector<PathPoint> points;  // decreasing lambda1
    double chosen_lambda1 = 0.0;
    double lambda2 = 0.0;
};

/// Geometric lambda1 grid from lambda_max down by 1e-3, k-fold cross
/// validation with warm starts, minimum-mean-squared-error selection
/// (ties resolved toward the sparser end).
PathReport lambda_path(const DesignBundle& bundle, const Eigen::VectorXd& y, int n_lambda,
                       int cv_folds, double lambda2, std::uint64_t seed, int threads = 1);

void write_model(const std::filesystem::path& path, const CombinedModel& model);
CombinedModel read_model(const std::filesystem::path& path);

void write_importance(const std::filesystem::path& path, const CombinedModel& model,
                      const std::vector<int>& levels);

}  // namespace legp::lasso
