#include "legp/spmm.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <fstream>
#include <limits>

#include "legp/table.hpp"

namespace legp::spmm {

namespace {

constexpr double kRssFloor = 1e-300;

/// H = Z K Z' for the observation-to-line incidence, with ridge `jitter`
/// (already scaled by the mean diagonal) added to K first.
Eigen::MatrixXd expand_incidence(const Eigen::MatrixXd& K, const std::vector<int>& line_index,
                                 double jitter) {
    const auto n = static_cast<Eigen::Index>(line_index.size());
    Eigen::MatrixXd H(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) {
            double v = K(line_index[static_cast<std::size_t>(a)], line_index[static_cast<std::size_t>(b)]);
            if (line_index[static_cast<std::size_t>(a)] == line_index[static_cast<std::size_t>(b)]) {
                v += jitter;
            }
            H(a, b) = v;
            H(b, a) = v;
        }
    }
    return H;
}

Eigen::VectorXd incidence_transpose_apply(const std::vector<int>& line_index, Eigen::Index q,
                                          const Eigen::VectorXd& v) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(q);
    for (std::size_t i = 0; i < line_index.size(); ++i) {
        out(line_index[i]) += v(static_cast<Eigen::Index>(i));
    }
    return out;
}

void check_full_rank(const Eigen::MatrixXd& X) {
    if (X.cols() == 0) {
        throw validation_error("fixed-effect matrix has no columns; an intercept is required");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        const auto perm = qr.colsPermutation().indices();
        std::string collinear;
        for (Eigen::Index i = qr.rank(); i < X.cols(); ++i) {
            if (!collinear.empty()) {
                collinear += ", ";
            }
            collinear += std::to_string(perm(i));
        }
        throw validation_error("fixed-effect matrix is rank deficient; collinear columns: " + collinear);
    }
}

double scaled_jitter(const kernel::KernelMatrix& K, double jitter) {
    return jitter * std::max(K.values.diagonal().mean(), 0.0);
}

struct GeneralEval {
    double logdet_v = 0.0;
    double logdet_xtvix = 0.0;
    Eigen::VectorXd beta;
    double rss = 0.0;           // (y - X beta)' V^-1 (y - X beta)
    Eigen::VectorXd vinv_r;     // V^-1 (y - X beta)
};

/// Dense evaluation at a ratio vector via one Cholesky of V = I + sum l_j H_j.
GeneralEval evaluate_general(const std::vector<Eigen::MatrixXd>& H, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& y, const Eigen::VectorXd& lambda) {
    const Eigen::Index n = y.size();
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t j = 0; j < H.size(); ++j) {
        const double l = lambda(static_cast<Eigen::Index>(j));
        if (l != 0.0) {
            V += l * H[j];
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success) {
        throw numeric_error("covariance matrix V is not positive definite");
    }
    GeneralEval out;
    out.logdet_v = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const Eigen::MatrixXd Xw = llt.matrixL().solve(X);
    const Eigen::VectorXd yw = llt.matrixL().solve(y);
    const Eigen::MatrixXd A = Xw.transpose() * Xw;
    Eigen::LDLT<Eigen::MatrixXd> aldlt(A);
    out.beta = aldlt.solve(Xw.transpose() * yw);
    out.logdet_xtvix = aldlt.vectorD().array().log().sum();
    const Eigen::VectorXd rw = yw - Xw * out.beta;
    out.rss = rw.squaredNorm();
    out.vinv_r = llt.matrixU().solve(rw);
    return out;
}

double profiled_value(const GeneralEval& ev, Eigen::Index n, Eigen::Index p, Method method) {
    if (ev.rss < kRssFloor) {
        throw numeric_error("residual sum of squares is zero; phenotype lies in the fixed-effect span");
    }
    if (method == Method::ML) {
        const double dof = static_cast<double>(n);
        return -dof * std::log(ev.rss / dof) - ev.logdet_v - dof;
    }
    const double dof = static_cast<double>(n - p);
    return -dof * std::log(ev.rss / dof) - ev.logdet_v - ev.logdet_xtvix - dof;
}

std::vector<Eigen::MatrixXd> build_h_list(const data::Phenotype& phenotype,
                                          const std::vector<kernel::KernelMatrix>& kernels,
                                          double jitter) {
    std::vector<Eigen::MatrixXd> H;
    H.reserve(kernels.size());
    for (const auto& K : kernels) {
        if (K.size() == 0) {
            throw validation_error("empty kernel matrix");
        }
        for (int line : phenotype.line_index) {
            if (line < 0 || line >= K.size()) {
                throw validation_error("phenotype observation maps outside kernel dimension");
            }
        }
        H.push_back(expand_incidence(K.values, phenotype.line_index, scaled_jitter(K, jitter)));
    }
    return H;
}

/// Spectral evaluator for one variance ratio: decomposes H once, then each
/// profiled-likelihood evaluation is O(n p^2).
class SingleRatioSolver {
public:
    SingleRatioSolver(const Eigen::MatrixXd& H, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double logdet_offset)
        : n_(y.size()), p_(X.cols()), logdet_offset_(logdet_offset) {
        check_full_rank(X);
        if (n_ < p_ + 2) {
            throw validation_error("need at least p + 2 observations");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(H);
        if (eigen.info() != Eigen::Success) {
            throw numeric_error("eigendecomposition of the relationship matrix failed");
        }
        d_ = eigen.eigenvalues().cwiseMax(0.0);
        U_ = eigen.eigenvectors();
        Xt_ = U_.transpose() * X;
        yt_ = U_.transpose() * y;
    }

    struct Eval {
        double objective = -std::numeric_limits<double>::infinity();
        double sigma_e2 = 0.0;
        double rss = 0.0;
        Eigen::VectorXd beta;
    };

    Eval evaluate(double lambda, Method method) const {
        const Eigen::ArrayXd denom = 1.0 + lambda * d_.array();
        const Eigen::ArrayXd w = denom.inverse();
        Eigen::MatrixXd A(p_, p_);
        Eigen::VectorXd b(p_);
        const Eigen::MatrixXd Xw = Xt_.array().colwise() * w.sqrt();
        const Eigen::VectorXd yw = (yt_.array() * w.sqrt()).matrix();
        A.noalias() = Xw.transpose() * Xw;
        b.noalias() = Xw.transpose() * yw;
        Eigen::LDLT<Eigen::MatrixXd> aldlt(A);
        Eval out;
        out.beta = aldlt.solve(b);
        out.rss = (yw - Xw * out.beta).squaredNorm();
        if (out.rss < kRssFloor) {
            throw numeric_error("residual sum of squares is zero; phenotype lies in the fixed-effect span");
        }
        const double logdet_v = denom.log().sum() + logdet_offset_;
        if (method == Method::ML) {
            const double dof = static_cast<double>(n_);
            out.sigma_e2 = out.rss / dof;
            out.objective = -dof * std::log(out.sigma_e2) - logdet_v - dof;
        } else {
            const double dof = static_cast<double>(n_ - p_);
            out.sigma_e2 = out.rss / dof;
            out.objective = -dof * std::log(out.sigma_e2) - logdet_v -
                            aldlt.vectorD().array().log().sum() - dof;
        }
        return out;
    }

    struct Optimum {
        double lambda = 0.0;
        Eval eval;
    };

    /// Boundary-aware 1-D maximization: coarse bracketing grid on the natural
    /// log scale, Brent refinement, then comparison against lambda = 0.
    Optimum maximize(Method method, const FitOptions& options) const {
        const Eval at_zero = evaluate(0.0, method);
        const int grid_n = std::max(options.grid_points, 5);
        const double t_lo = options.log_lambda_min;
        const double t_hi = options.log_lambda_max;
        double best_t = t_lo;
        double best_obj = -std::numeric_limits<double>::infinity();
        const double step = (t_hi - t_lo) / (grid_n - 1);
        for (int i = 0; i < grid_n; ++i) {
            const double t = t_lo + step * i;
            const double obj = evaluate(std::exp(t), method).objective;
            if (obj > best_obj) {
                best_obj = obj;
                best_t = t;
            }
        }
        const double lo = std::max(t_lo, best_t - step);
        const double hi = std::min(t_hi, best_t + step);
        auto negated = [&](double t) { return -evaluate(std::exp(t), method).objective; };
        std::uintmax_t iterations = 200;
        const auto [t_star, neg_obj] =
            boost::math::tools::brent_find_minima(negated, lo, hi, 52, iterations);
        Optimum out;
        if (at_zero.objective + 1e-12 >= -neg_obj) {
            out.lambda = 0.0;
            out.eval = at_zero;
        } else {
            out.lambda = std::exp(t_star);
            out.eval = evaluate(out.lambda, method);
        }
        return out;
    }

    /// V^-1 (y - X beta) in the original (unrotated) frame.
    Eigen::VectorXd vinv_residual(double lambda, const Eigen::VectorXd& beta) const {
        const Eigen::ArrayXd w = (1.0 + lambda * d_.array()).inverse();
        const Eigen::VectorXd rt = yt_ - Xt_ * beta;
        return U_ * (rt.array() * w).matrix();
    }

private:
    Eigen::Index n_, p_;
    double logdet_offset_;
    Eigen::VectorXd d_;
    Eigen::MatrixXd U_, Xt_;
    Eigen::VectorXd yt_;
};

/// Fills variance components, EBLUPs, duals, both likelihood values and the
/// structure-specific heritabilities for a converged ratio vector.
FitResult finalize_fit(const data::Phenotype& phenotype,
                       const std::vector<kernel::KernelMatrix>& kernels,
                       const std::vector<Eigen::MatrixXd>& H, const Eigen::VectorXd& lambda,
                       Method method) {
    const Eigen::Index n = phenotype.n();
    const Eigen::Index p = phenotype.fixed_effects.cols();
    const auto k = static_cast<Eigen::Index>(kernels.size());
    const GeneralEval ev = evaluate_general(H, phenotype.fixed_effects, phenotype.values, lambda);

    FitResult fit;
    fit.method = method;
    fit.lambda = lambda;
    fit.beta = ev.beta;
    fit.sigma_e2 = method == Method::ML ? ev.rss / static_cast<double>(n)
                                        : ev.rss / static_cast<double>(n - p);
    fit.sigma_g2 = lambda * fit.sigma_e2;

    const double dof_ml = static_cast<double>(n);
    const double dof_reml = static_cast<double>(n - p);
    const double sigma_ml = ev.rss / dof_ml;
    const double sigma_reml = ev.rss / dof_reml;
    fit.loglik = -dof_ml * std::log(sigma_ml) - ev.logdet_v - dof_ml;
    fit.reml_loglik = -dof_reml * std::log(sigma_reml) - ev.logdet_v - ev.logdet_xtvix - dof_reml;

    const Eigen::Index q = kernels.front().size();
    fit.eblups.resize(q, k);
    fit.dual_weights.resize(static_cast<std::size_t>(k));
    const Eigen::VectorXd zt_vinv_r = incidence_transpose_apply(phenotype.line_index, q, ev.vinv_r);
    for (Eigen::Index j = 0; j < k; ++j) {
        Eigen::VectorXd dual = lambda(j) * zt_vinv_r;
        fit.eblups.col(j) = kernels[static_cast<std::size_t>(j)].values * dual;
        fit.dual_weights[static_cast<std::size_t>(j)] = std::move(dual);
    }

    const double total = fit.sigma_g2.sum() + fit.sigma_e2;
    fit.heritabilities = fit.sigma_g2 / total;
    return fit;
}

}  // namespace

std::string to_string(Method m) {
    return m == Method::ML ? "ml" : "reml";
}

Method method_from_string(const std::string& name) {
    if (name == "ml") return Method::ML;
    if (name == "reml") return Method::REML;
    throw validation_error("unknown fit method: " + name);
}

double loglik(const MixedModelSpec& spec, const Eigen::VectorXd& beta, double sigma_e2,
              const Eigen::VectorXd& lambda) {
    if (sigma_e2 <= 0.0) {
        throw validation_error("sigma_e2 must be positive");
    }
    if (lambda.size() != static_cast<Eigen::Index>(spec.kernels.size())) {
        throw validation_error("lambda length must match kernel count");
    }
    if (lambda.size() > 0 && lambda.minCoeff() < 0.0) {
        throw validation_error("lambda must be non-negative");
    }
    const std::vector<Eigen::MatrixXd> H = build_h_list(spec.phenotype, spec.kernels, 0.0);
    const Eigen::Index n = spec.phenotype.n();
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t j = 0; j < H.size(); ++j) {
        V += lambda(static_cast<Eigen::Index>(j)) * H[j];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(V);
    if (llt.info() != Eigen::Success) {
        throw numeric_error("covariance matrix V is not positive definite");
    }
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const Eigen::VectorXd r = spec.phenotype.values - spec.phenotype.fixed_effects * beta;
    const double quad = r.dot(llt.solve(r));
    return -static_cast<double>(n) * std::log(sigma_e2) - logdet - quad / sigma_e2;
}

double reml_loglik(const MixedModelSpec& spec, double sigma_e2, const Eigen::VectorXd& lambda) {
    if (sigma_e2 <= 0.0) {
        throw validation_error("sigma_e2 must be positive");
    }
    if (lambda.size() != static_cast<Eigen::Index>(spec.kernels.size())) {
        throw validation_error("lambda length must match kernel count");
    }
    if (lambda.size() > 0 && lambda.minCoeff() < 0.0) {
        throw validation_error("lambda must be non-negative");
    }
    check_full_rank(spec.phenotype.fixed_effects);
    const std::vector<Eigen::MatrixXd> H = build_h_list(spec.phenotype, spec.kernels, 0.0);
    const GeneralEval ev =
        evaluate_general(H, spec.phenotype.fixed_effects, spec.phenotype.values, lambda);
    const double dof = static_cast<double>(spec.phenotype.n() - spec.phenotype.fixed_effects.cols());
    return -dof * std::log(sigma_e2) - ev.logdet_v - ev.logdet_xtvix - ev.rss / sigma_e2;
}

double profile_objective(const MixedModelSpec& spec, const Eigen::VectorXd& lambda, Method method) {
    if (lambda.size() != static_cast<Eigen::Index>(spec.kernels.size())) {
        throw validation_error("lambda length must match kernel count");
    }
    check_full_rank(spec.phenotype.fixed_effects);
    const std::vector<Eigen::MatrixXd> H = build_h_list(spec.phenotype, spec.kernels, 0.0);
    const GeneralEval ev =
        evaluate_general(H, spec.phenotype.fixed_effects, spec.phenotype.values, lambda);
    return profiled_value(ev, spec.phenotype.n(), spec.phenotype.fixed_effects.cols(), method);
}

FitResult fit_single(const data::Phenotype& phenotype, const kernel::KernelMatrix& kernel,
                     const FitOptions& options) {
    const std::vector<Eigen::MatrixXd> H = build_h_list(phenotype, {kernel}, options.jitter);
    SingleRatioSolver solver(H[0], phenotype.fixed_effects, phenotype.values, 0.0);
    const auto opt = solver.maximize(options.method, options);
    Eigen::VectorXd lambda(1);
    lambda(0) = opt.lambda;
    FitResult fit = finalize_fit(phenotype, {kernel}, H, lambda, options.method);
    fit.sweeps = 1;
    return fit;
}

FitResult fit_joint(const data::Phenotype& phenotype,
                    const std::vector<kernel::KernelMatrix>& kernels, const FitOptions& options,
                    const std::optional<Eigen::VectorXd>& initial_lambda) {
    const auto k = static_cast<Eigen::Index>(kernels.size());
    if (k < 1) {
        throw validation_error("fit_joint needs at least one kernel");
    }
    check_full_rank(phenotype.fixed_effects);
    const std::vector<Eigen::MatrixXd> H = build_h_list(phenotype, kernels, options.jitter);
    const Eigen::Index n = phenotype.n();

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
    if (initial_lambda.has_value()) {
        if (initial_lambda->size() != k) {
            throw validation_error("initial lambda length must match kernel count");
        }
        lambda = initial_lambda->cwiseMax(0.0);
    }

    Warnings warnings;
    if (static_cast<double>(k) > static_cast<double>(n) / 2.0) {
        warnings.push_back("kernel count exceeds n/2; the per-kernel structure is more stable");
    }

    double previous = -std::numeric_limits<double>::infinity();
    double current = -std::numeric_limits<double>::infinity();
    int sweeps = 0;
    bool converged = false;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        sweeps = sweep;
        for (Eigen::Index j = 0; j < k; ++j) {
            bool others_zero = true;
            for (Eigen::Index l = 0; l < k && others_zero; ++l) {
                others_zero = (l == j) || lambda(l) == 0.0;
            }
            double candidate_obj;
            double candidate_lambda;
            if (others_zero) {
                SingleRatioSolver solver(H[static_cast<std::size_t>(j)], phenotype.fixed_effects,
                                         phenotype.values, 0.0);
                const auto opt = solver.maximize(options.method, options);
                candidate_lambda = opt.lambda;
                candidate_obj = opt.eval.objective;
            } else {
                Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
                for (Eigen::Index l = 0; l < k; ++l) {
                    if (l != j && lambda(l) != 0.0) {
                        B += lambda(l) * H[static_cast<std::size_t>(l)];
                    }
                }
                Eigen::LLT<Eigen::MatrixXd> llt(B);
                if (llt.info() != Eigen::Success) {
                    throw numeric_error("background covariance is not positive definite");
                }
                const double logdet_b = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
                const Eigen::MatrixXd T = llt.matrixL().solve(H[static_cast<std::size_t>(j)]);
                Eigen::MatrixXd Hw = llt.matrixL().solve(T.transpose());
                Hw = ((Hw + Hw.transpose()) / 2.0).eval();
                const Eigen::MatrixXd Xw = llt.matrixL().solve(phenotype.fixed_effects);
                const Eigen::VectorXd yw = llt.matrixL().solve(phenotype.values);
                SingleRatioSolver solver(Hw, Xw, yw, logdet_b);
                const auto opt = solver.maximize(options.method, options);
                // Keep the sweep monotone: never move to a worse coordinate value.
                const double at_current = solver.evaluate(lambda(j), options.method).objective;
                if (opt.eval.objective >= at_current) {
                    candidate_lambda = opt.lambda;
                    candidate_obj = opt.eval.objective;
                } else {
                    candidate_lambda = lambda(j);
                    candidate_obj = at_current;
                }
            }
            lambda(j) = candidate_lambda;
            current = candidate_obj;
        }
        if (sweep > 1 && std::abs(current - previous) <= options.rel_tol * (1.0 + std::abs(current))) {
            converged = true;
            break;
        }
        previous = current;
    }

    FitResult fit = finalize_fit(phenotype, kernels, H, lambda, options.method);
    fit.sweeps = sweeps;
    fit.converged = converged || k == 1;
    if (!fit.converged) {
        warnings.push_back("coordinate sweeps hit the iteration cap before the objective settled");
    }
    fit.warnings = std::move(warnings);
    return fit;
}

FitResult fit_marginal(const data::Phenotype& phenotype, const kernel::KernelMatrix& target,
                       const kernel::KernelMatrix& background, const FitOptions& options) {
    FitResult fit = fit_joint(phenotype, {target, background}, options);
    // Two-kernel joint shares are exactly the marginal heritabilities
    // sigma_j / (sigma_j + sigma_{-j} + sigma_e).
    return fit;
}

std::vector<FitResult> fit_per_kernel(const data::Phenotype& phenotype,
                                      const std::vector<kernel::KernelMatrix>& kernels,
                                      const FitOptions& options, const Eigen::MatrixXd* pc_scores) {
    data::Phenotype augmented = phenotype;
    if (pc_scores != nullptr && pc_scores->cols() > 0) {
        const Eigen::Index extra = pc_scores->cols();
        if (extra >= phenotype.n() - phenotype.fixed_effects.cols()) {
            throw validation_error("pc count must be smaller than n - p");
        }
        Eigen::MatrixXd X(phenotype.n(), phenotype.fixed_effects.cols() + extra);
        X.leftCols(phenotype.fixed_effects.cols()) = phenotype.fixed_effects;
        for (Eigen::Index i = 0; i < phenotype.n(); ++i) {
            X.row(i).tail(extra) = pc_scores->row(phenotype.line_index[static_cast<std::size_t>(i)]);
        }
        augmented.fixed_effects = std::move(X);
    }
    std::vector<FitResult> fits;
    fits.reserve(kernels.size());
    for (const auto& K : kernels) {
        fits.push_back(fit_single(augmented, K, options));
    }
    return fits;
}

kernel::KernelWeights heritability_weights(const std::vector<FitResult>& fits) {
    if (fits.empty()) {
        throw validation_error("heritability_weights needs at least one fit");
    }
    Eigen::VectorXd h2(static_cast<Eigen::Index>(fits.size()));
    for (std::size_t i = 0; i < fits.size(); ++i) {
        h2(static_cast<Eigen::Index>(i)) = fits[i].heritabilities(0);
    }
    const double total = h2.sum();
    if (total <= 0.0) {
        throw numeric_error("no genetic signal: all heritabilities are zero");
    }
    kernel::KernelWeights out;
    out.weights = h2 / total;
    out.method = kernel::WeightMethod::Heritability;
    return out;
}

Eigen::VectorXd predict(const FitResult& fit, const std::vector<Eigen::MatrixXd>& cross_kernels,
                        const Eigen::MatrixXd& x_new) {
    if (cross_kernels.size() != fit.dual_weights.size()) {
        throw validation_error("cross-kernel count does not match fitted kernels");
    }
    if (x_new.cols() != fit.beta.size()) {
        throw validation_error("fixed-effect column mismatch in predict");
    }
    Eigen::VectorXd out = x_new * fit.beta;
    for (std::size_t j = 0; j < cross_kernels.size(); ++j) {
        if (cross_kernels[j].cols() != fit.dual_weights[j].size()) {
            throw validation_error("cross-kernel dimension mismatch in predict");
        }
        out += cross_kernels[j] * fit.dual_weights[j];
    }
    return out;
}

void write_fit_report(const std::filesystem::path& path, const FitResult& fit,
                      const std::vector<std::string>& kernel_ids) {
    std::ofstream out(path);
    if (!out) {
        throw validation_error("cannot write fit report: " + path.string());
    }
    out << "method " << to_string(fit.method) << "\n";
    out << "sigma_e2 " << io::format_double(fit.sigma_e2) << "\n";
    out << "loglik " << io::format_double(fit.loglik) << "\n";
    out << "reml_loglik " << io::format_double(fit.reml_loglik) << "\n";
    out << "converged " << (fit.converged ? 1 : 0) << "\n";
    out << "sweeps " << fit.sweeps << "\n";
    for (Eigen::Index j = 0; j < fit.sigma_g2.size(); ++j) {
        const std::string& id = kernel_ids[static_cast<std::size_t>(j)];
        out << "kernel." << id << ".sigma_g2 " << io::format_double(fit.sigma_g2(j)) << "\n";
        out << "kernel." << id << ".lambda " << io::format_double(fit.lambda(j)) << "\n";
        out << "kernel." << id << ".h2 " << io::format_double(fit.heritabilities(j)) << "\n";
    }
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
        out << "beta." << j << " " << io::format_double(fit.beta(j)) << "\n";
    }
    for (const auto& w : fit.warnings) {
        out << "warning " << w << "\n";
    }
}

void write_eblups(const std::filesystem::path& path, const Eigen::MatrixXd& eblups,
                  const std::vector<std::string>& line_ids,
                  const std::vector<std::string>& kernel_ids) {
    io::Table table;
    table.header.push_back("line_id");
    for (const auto& id : kernel_ids) {
        table.header.push_back(id);
    }
    for (Eigen::Index r = 0; r < eblups.rows(); ++r) {
        std::vector<std::string> row;
        row.push_back(line_ids[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < eblups.cols(); ++c) {
            row.push_back(io::format_double(eblups(r, c)));
        }
        table.rows.push_back(std::move(row));
    }
    io::write_table(path, table);
}

}  // namespace legp::spmm
