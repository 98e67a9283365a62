#include "legp/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "legp/parallel.hpp"
#include "legp/table.hpp"

namespace legp::lasso {

namespace {

constexpr double kCoefTol = 1e-9;
constexpr int kMaxSweeps = 100000;

double soft_threshold(double z, double gamma) {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

/// Least-squares fit of intercept + covariates alone (all alphas zero).
void fit_unpenalized_only(const DesignBundle& bundle, const Eigen::VectorXd& y, double& intercept,
                          Eigen::VectorXd& beta) {
    const Eigen::Index n = bundle.n();
    Eigen::MatrixXd Xfull(n, 1 + bundle.X.cols());
    Xfull.col(0).setOnes();
    if (bundle.X.cols() > 0) {
        Xfull.rightCols(bundle.X.cols()) = bundle.X;
    }
    const Eigen::VectorXd sol = (Xfull.transpose() * Xfull).ldlt().solve(Xfull.transpose() * y);
    intercept = sol(0);
    beta = sol.tail(bundle.X.cols());
}

}  // namespace

DesignBundle assemble_design(const Eigen::MatrixXd& eblups, const Eigen::MatrixXd& fixed,
                             const std::vector<std::string>& column_ids) {
    if (fixed.rows() != eblups.rows()) {
        throw validation_error("EBLUP and fixed-effect row counts differ");
    }
    if (static_cast<Eigen::Index>(column_ids.size()) != eblups.cols()) {
        throw validation_error("column id count does not match EBLUP columns");
    }
    const Eigen::Index n = eblups.rows();
    if (n < 2) {
        throw validation_error("need at least two rows to standardize EBLUP columns");
    }
    DesignBundle bundle;
    bundle.X = fixed;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index c = 0; c < eblups.cols(); ++c) {
        const double mean = eblups.col(c).mean();
        const double var = (eblups.col(c).array() - mean).square().sum() / static_cast<double>(n - 1);
        if (var <= 0.0) {
            bundle.dropped.push_back(column_ids[static_cast<std::size_t>(c)]);
            bundle.warnings.push_back("EBLUP column " + column_ids[static_cast<std::size_t>(c)] +
                                      " is constant; dropped");
            continue;
        }
        kept.push_back(c);
    }
    bundle.G.resize(n, static_cast<Eigen::Index>(kept.size()));
    bundle.g_mean.resize(static_cast<Eigen::Index>(kept.size()));
    bundle.g_scale.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const Eigen::Index c = kept[i];
        const double mean = eblups.col(c).mean();
        const double sd = std::sqrt((eblups.col(c).array() - mean).square().sum() /
                                    static_cast<double>(n - 1));
        bundle.G.col(static_cast<Eigen::Index>(i)) = (eblups.col(c).array() - mean) / sd;
        bundle.g_mean(static_cast<Eigen::Index>(i)) = mean;
        bundle.g_scale(static_cast<Eigen::Index>(i)) = sd;
        bundle.column_ids.push_back(column_ids[static_cast<std::size_t>(c)]);
    }
    return bundle;
}

CombinedModel fit_lasso(const DesignBundle& bundle, const Eigen::VectorXd& y, double lambda1,
                        double lambda2, const CombinedModel* warm_start) {
    if (lambda1 < 0.0 || lambda2 < 0.0) {
        throw validation_error("lasso penalties must be >= 0");
    }
    if (y.size() != bundle.n()) {
        throw validation_error("response length does not match design rows");
    }
    const Eigen::Index k = bundle.k();
    const Eigen::Index p = bundle.X.cols();

    double b0 = 0.0;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(k);
    if (warm_start != nullptr && warm_start->alpha_std.size() == k && warm_start->beta.size() == p) {
        alpha = warm_start->alpha_std;
        beta = warm_start->beta;
        // stored intercepts are raw-scale; shift back to the standardized frame
        b0 = warm_start->intercept +
             (alpha.array() * bundle.g_mean.array() / bundle.g_scale.array()).sum();
    }

    Eigen::VectorXd residual = y - bundle.G * alpha - bundle.X * beta;
    residual.array() -= b0;

    const Eigen::VectorXd g_gram = bundle.G.colwise().squaredNorm();
    const Eigen::VectorXd x_gram = bundle.X.colwise().squaredNorm();

    auto objective_value = [&]() {
        return residual.squaredNorm() + lambda1 * alpha.cwiseAbs().sum() +
               lambda2 * alpha.squaredNorm();
    };

    double previous_objective = objective_value();
    int sweeps = 0;
    for (;;) {
        if (++sweeps > kMaxSweeps) {
            throw numeric_error("lasso coordinate descent did not converge");
        }
        double max_delta = 0.0;
        {  // intercept
            const double delta = residual.mean();
            b0 += delta;
            residual.array() -= delta;
            max_delta = std::max(max_delta, std::abs(delta));
        }
        for (Eigen::Index j = 0; j < p; ++j) {  // unpenalized covariates
            if (x_gram(j) == 0.0) {
                continue;
            }
            const double delta = bundle.X.col(j).dot(residual) / x_gram(j);
            beta(j) += delta;
            residual -= delta * bundle.X.col(j);
            max_delta = std::max(max_delta, std::abs(delta));
        }
        for (Eigen::Index j = 0; j < k; ++j) {  // penalized EBLUP columns
            if (g_gram(j) + lambda2 <= 0.0) {
                continue;
            }
            const double z = bundle.G.col(j).dot(residual) + alpha(j) * g_gram(j);
            const double updated = soft_threshold(z, lambda1 / 2.0) / (g_gram(j) + lambda2);
            const double delta = updated - alpha(j);
            if (delta != 0.0) {
                alpha(j) = updated;
                residual -= delta * bundle.G.col(j);
            }
            max_delta = std::max(max_delta, std::abs(delta));
        }
        const double obj = objective_value();
        if (obj > previous_objective + 1e-8 * (1.0 + std::abs(previous_objective))) {
            throw numeric_error("lasso objective increased during a sweep");
        }
        previous_objective = obj;
        if (max_delta < kCoefTol) {
            break;
        }
    }

    CombinedModel model;
    model.lambda1 = lambda1;
    model.lambda2 = lambda2;
    model.alpha_std = alpha;
    model.beta = beta;
    model.column_ids = bundle.column_ids;
    model.alpha = (alpha.array() / bundle.g_scale.array()).matrix();
    model.intercept = b0 - (alpha.array() * bundle.g_mean.array() / bundle.g_scale.array()).sum();
    for (Eigen::Index j = 0; j < k; ++j) {
        if (alpha(j) != 0.0) {
            model.active_set.push_back(static_cast<int>(j));
        }
    }
    model.objective = previous_objective;
    model.sweeps = sweeps;
    return model;
}

CombinedPrediction predict_combined(const CombinedModel& model, const Eigen::MatrixXd& eblups,
                                    const Eigen::MatrixXd& fixed) {
    if (eblups.cols() != model.alpha.size()) {
        throw validation_error("EBLUP column count does not match model");
    }
    if (fixed.cols() != model.beta.size()) {
        throw validation_error("covariate column count does not match model");
    }
    if (fixed.rows() != eblups.rows()) {
        throw validation_error("EBLUP and covariate row counts differ");
    }
    CombinedPrediction out;
    out.genotypic = eblups * model.alpha;
    out.full = out.genotypic + fixed * model.beta;
    out.full.array() += model.intercept;
    return out;
}

double lambda_max(const DesignBundle& bundle, const Eigen::VectorXd& y) {
    double intercept = 0.0;
    Eigen::VectorXd beta;
    fit_unpenalized_only(bundle, y, intercept, beta);
    Eigen::VectorXd residual = y - bundle.X * beta;
    residual.array() -= intercept;
    double max_corr = 0.0;
    for (Eigen::Index j = 0; j < bundle.k(); ++j) {
        max_corr = std::max(max_corr, std::abs(bundle.G.col(j).dot(residual)));
    }
    return 2.0 * max_corr;
}

PathReport lambda_path(const DesignBundle& bundle, const Eigen::VectorXd& y, int n_lambda,
                       int cv_folds, double lambda2, std::uint64_t seed, int threads) {
    if (n_lambda < 2) {
        throw validation_error("n_lambda must be >= 2");
    }
    if (cv_folds < 2) {
        throw validation_error("cv_folds must be >= 2");
    }
    const Eigen::Index n = bundle.n();
    if (n < cv_folds) {
        throw validation_error("fewer rows than cross-validation folds");
    }

    const double lmax = std::max(lambda_max(bundle, y), 1e-12);
    Eigen::VectorXd grid(n_lambda);
    const double ratio = std::pow(1e-3, 1.0 / (n_lambda - 1));
    for (int i = 0; i < n_lambda; ++i) {
        grid(i) = lmax * std::pow(ratio, i);
    }

    // Deterministic fold assignment: shuffled row order, round robin.
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        fold_of[static_cast<std::size_t>(rows[i])] = static_cast<int>(i) % cv_folds;
    }

    // Per fold: squared errors on the held-out rows along the whole path.
    Eigen::MatrixXd fold_mse = Eigen::MatrixXd::Zero(cv_folds, n_lambda);
    parallel_for(cv_folds, threads, [&](int fold) {
        std::vector<Eigen::Index> train, held;
        for (Eigen::Index i = 0; i < n; ++i) {
            (fold_of[static_cast<std::size_t>(i)] == fold ? held : train).push_back(i);
        }
        DesignBundle sub;
        sub.G.resize(static_cast<Eigen::Index>(train.size()), bundle.k());
        sub.X.resize(static_cast<Eigen::Index>(train.size()), bundle.X.cols());
        Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            sub.G.row(static_cast<Eigen::Index>(i)) = bundle.G.row(train[i]);
            sub.X.row(static_cast<Eigen::Index>(i)) = bundle.X.row(train[i]);
            y_train(static_cast<Eigen::Index>(i)) = y(train[i]);
        }
        sub.column_ids = bundle.column_ids;
        sub.g_mean = Eigen::VectorXd::Zero(bundle.k());
        sub.g_scale = Eigen::VectorXd::Ones(bundle.k());
        CombinedModel warm;
        bool have_warm = false;
        for (int i = 0; i < n_lambda; ++i) {
            const CombinedModel model =
                fit_lasso(sub, y_train, grid(i), lambda2, have_warm ? &warm : nullptr);
            warm = model;
            have_warm = true;
            double err = 0.0;
            for (Eigen::Index row : held) {
                double pred = model.intercept + bundle.G.row(row).dot(model.alpha_std) +
                              bundle.X.row(row).dot(model.beta);
                const double diff = y(row) - pred;
                err += diff * diff;
            }
            fold_mse(fold, i) = err / static_cast<double>(held.size());
        }
    });

    PathReport report;
    report.lambda2 = lambda2;
    report.points.resize(static_cast<std::size_t>(n_lambda));
    int best = 0;
    // Nonzero counts come from a full-data path with warm starts.
    CombinedModel warm;
    bool have_warm = false;
    for (int i = 0; i < n_lambda; ++i) {
        PathPoint& pt = report.points[static_cast<std::size_t>(i)];
        pt.lambda1 = grid(i);
        pt.cv_mse = fold_mse.col(i).mean();
        const double sd = std::sqrt((fold_mse.col(i).array() - pt.cv_mse).square().sum() /
                                    std::max(1, cv_folds - 1));
        pt.cv_se = sd / std::sqrt(static_cast<double>(cv_folds));
        const CombinedModel model = fit_lasso(bundle, y, grid(i), lambda2, have_warm ? &warm : nullptr);
        warm = model;
        have_warm = true;
        pt.nonzero = static_cast<int>(model.active_set.size());
        if (pt.cv_mse < report.points[static_cast<std::size_t>(best)].cv_mse) {
            best = i;
        }
    }
    report.chosen_lambda1 = grid(best);
    return report;
}

void write_model(const std::filesystem::path& path, const CombinedModel& model) {
    std::ofstream out(path);
    if (!out) {
        throw validation_error("cannot write model file: " + path.string());
    }
    out << "intercept " << io::format_double_exact(model.intercept) << "\n";
    out << "lambda1 " << io::format_double_exact(model.lambda1) << "\n";
    out << "lambda2 " << io::format_double_exact(model.lambda2) << "\n";
    out << "k " << model.alpha.size() << "\n";
    out << "p " << model.beta.size() << "\n";
    for (Eigen::Index j = 0; j < model.alpha.size(); ++j) {
        out << "alpha." << model.column_ids[static_cast<std::size_t>(j)] << " "
            << io::format_double_exact(model.alpha(j)) << " "
            << io::format_double_exact(model.alpha_std(j)) << "\n";
    }
    for (Eigen::Index j = 0; j < model.beta.size(); ++j) {
        out << "beta." << j << " " << io::format_double_exact(model.beta(j)) << "\n";
    }
}

CombinedModel read_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw validation_error("cannot read model file: " + path.string());
    }
    CombinedModel model;
    std::string key;
    std::vector<double> alphas, alpha_stds, betas;
    while (in >> key) {
        if (key == "intercept") {
            in >> model.intercept;
        } else if (key == "lambda1") {
            in >> model.lambda1;
        } else if (key == "lambda2") {
            in >> model.lambda2;
        } else if (key == "k" || key == "p") {
            long dummy;
            in >> dummy;
        } else if (key.rfind("alpha.", 0) == 0) {
            double a, as;
            in >> a >> as;
            alphas.push_back(a);
            alpha_stds.push_back(as);
            model.column_ids.push_back(key.substr(6));
        } else if (key.rfind("beta.", 0) == 0) {
            double b;
            in >> b;
            betas.push_back(b);
        } else {
            throw validation_error("unknown key in model file: " + key);
        }
    }
    model.alpha = Eigen::Map<Eigen::VectorXd>(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
    model.alpha_std =
        Eigen::Map<Eigen::VectorXd>(alpha_stds.data(), static_cast<Eigen::Index>(alpha_stds.size()));
    model.beta = Eigen::Map<Eigen::VectorXd>(betas.data(), static_cast<Eigen::Index>(betas.size()));
    for (Eigen::Index j = 0; j < model.alpha.size(); ++j) {
        if (model.alpha(j) != 0.0) {
            model.active_set.push_back(static_cast<int>(j));
        }
    }
    return model;
}

void write_importance(const std::filesystem::path& path, const CombinedModel& model,
                      const std::vector<int>& levels) {
    io::Table table;
    table.header = {"region_id", "level", "mean_abs_alpha", "selection_frequency"};
    for (Eigen::Index j = 0; j < model.alpha_std.size(); ++j) {
        table.rows.push_back({model.column_ids[static_cast<std::size_t>(j)],
                              std::to_string(levels[static_cast<std::size_t>(j)]),
                              io::format_double(std::abs(model.alpha_std(j))),
                              io::format_double(model.alpha_std(j) != 0.0 ? 1.0 : 0.0)});
    }
    io::write_table(path, table);
}

}  // namespace legp::lasso
