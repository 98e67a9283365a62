#pragma once

// Test-side oracles, independent of the library implementation: naive dense
// likelihood evaluation via explicit inverse/determinant, grid + golden
// section likelihood maximizer, brute-force kernels, small statistics.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "legp/genomic_data.hpp"

namespace oracles {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                                     double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            out(i, j) = normal(rng);
        }
    }
    return out;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
    return random_matrix(n, 1, rng, scale).col(0);
}

/// PSD kernel from random marker-like data, scaled by 1/m.
inline Eigen::MatrixXd random_psd(Eigen::Index q, Eigen::Index m, std::mt19937_64& rng) {
    const Eigen::MatrixXd a = random_matrix(q, m, rng);
    return (a * a.transpose()) / static_cast<double>(m);
}

inline legp::data::Phenotype make_phenotype(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    legp::data::Phenotype phen;
    phen.values = y;
    phen.fixed_effects = x;
    phen.line_index.resize(static_cast<std::size_t>(y.size()));
    for (std::size_t i = 0; i < phen.line_index.size(); ++i) {
        phen.line_index[i] = static_cast<int>(i);
    }
    return phen;
}

inline legp::data::Phenotype make_phenotype(const Eigen::VectorXd& y) {
    return make_phenotype(y, Eigen::MatrixXd::Ones(y.size(), 1));
}

/// Naive twice-log-likelihood via explicit inverse and determinant.
inline double naive_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& beta, double sigma_e2,
                           const std::vector<Eigen::MatrixXd>& kernels,
                           const Eigen::VectorXd& lambda) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t j = 0; j < kernels.size(); ++j) {
        v += lambda(static_cast<Eigen::Index>(j)) * kernels[j];
    }
    const Eigen::VectorXd r = y - x * beta;
    const Eigen::MatrixXd vinv = v.inverse();
    return -static_cast<double>(n) * std::log(sigma_e2) - std::log(v.determinant()) -
           r.dot(vinv * r) / sigma_e2;
}

/// Naive twice-restricted-log-likelihood with GLS beta substituted.
inline double naive_reml(const Eigen::VectorXd& y, const Eigen::MatrixXd& x, double sigma_e2,
                         const std::vector<Eigen::MatrixXd>& kernels,
                         const Eigen::VectorXd& lambda) {
    const Eigen::Index n = y.size();
    const Eigen::Index p = x.cols();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t j = 0; j < kernels.size(); ++j) {
        v += lambda(static_cast<Eigen::Index>(j)) * kernels[j];
    }
    const Eigen::MatrixXd vinv = v.inverse();
    const Eigen::MatrixXd xtvix = x.transpose() * vinv * x;
    const Eigen::VectorXd beta = xtvix.inverse() * (x.transpose() * (vinv * y));
    const Eigen::VectorXd r = y - x * beta;
    return -static_cast<double>(n - p) * std::log(sigma_e2) - std::log(v.determinant()) -
           std::log(xtvix.determinant()) - r.dot(vinv * r) / sigma_e2;
}

/// Profiled restricted likelihood at a single ratio (sigma_e2 maximized out).
inline double naive_profiled_reml(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                  const Eigen::MatrixXd& kernel, double lambda) {
    const Eigen::Index n = y.size();
    const Eigen::Index p = x.cols();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n) + lambda * kernel;
    const Eigen::MatrixXd vinv = v.inverse();
    const Eigen::MatrixXd xtvix = x.transpose() * vinv * x;
    const Eigen::VectorXd beta = xtvix.inverse() * (x.transpose() * (vinv * y));
    const Eigen::VectorXd r = y - x * beta;
    const double rss = r.dot(vinv * r);
    const double dof = static_cast<double>(n - p);
    const double sigma = rss / dof;
    return -dof * std::log(sigma) - std::log(v.determinant()) - std::log(xtvix.determinant()) - dof;
}

struct GridOptimum {
    double lambda = 0.0;
    double objective = 0.0;
};

/// Brute-force restricted-likelihood maximizer: dense grid on the natural
/// log scale refined by golden-section search, with the boundary lambda = 0
/// as an explicit candidate.
inline GridOptimum grid_golden_reml(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& kernel) {
    auto objective = [&](double lambda) { return naive_profiled_reml(y, x, kernel, lambda); };
    const double at_zero = objective(0.0);
    double best_t = -8.0;
    double best_obj = -std::numeric_limits<double>::infinity();
    const double step = 0.1;
    for (double t = -8.0; t <= 8.0 + 1e-12; t += step) {
        const double obj = objective(std::exp(t));
        if (obj > best_obj) {
            best_obj = obj;
            best_t = t;
        }
    }
    double lo = std::max(-8.0, best_t - step);
    double hi = std::min(8.0, best_t + step);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - phi * (hi - lo);
    double d = lo + phi * (hi - lo);
    double fc = objective(std::exp(c));
    double fd = objective(std::exp(d));
    while (hi - lo > 1e-12) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = objective(std::exp(c));
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = objective(std::exp(d));
        }
    }
    const double t_star = (lo + hi) / 2.0;
    const double interior = objective(std::exp(t_star));
    GridOptimum out;
    if (at_zero + 1e-12 >= interior) {
        out.lambda = 0.0;
        out.objective = at_zero;
    } else {
        out.lambda = std::exp(t_star);
        out.objective = interior;
    }
    return out;
}

/// Kendall rank correlation (tau-a), O(N^2) pair comparison.
inline double kendall_tau(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::Index n = a.size();
    long concordant = 0;
    long discordant = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double prod = (a(i) - a(j)) * (b(i) - b(j));
            if (prod > 0) {
                ++concordant;
            } else if (prod < 0) {
                ++discordant;
            }
        }
    }
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return static_cast<double>(concordant - discordant) / pairs;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd ac = a.array() - a.mean();
    const Eigen::ArrayXd bc = b.array() - b.mean();
    return (ac * bc).sum() / std::sqrt(ac.square().sum() * bc.square().sum());
}

}  // namespace oracles
