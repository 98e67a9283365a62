// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cstdio>
#include <map>
#include <random>
#include <vector>

#include "legp/breeding.hpp"
#include "legp/hierarchy.hpp"
#include "legp/kernel.hpp"
#include "legp/lasso.hpp"
#include "legp/parallel.hpp"
#include "legp/simulate.hpp"
#include "legp/spmm.hpp"
#include "oracles.hpp"

using namespace legp;

namespace {

constexpr int kThreads = 2;

struct Outcome {
    bool pass = false;
    std::string detail;
};

kernel::KernelMatrix wrap(const Eigen::MatrixXd& values) {
    kernel::KernelMatrix k;
    k.values = values;
    return k;
}

kernel::KernelMatrix centered_linear(const Eigen::MatrixXd& markers) {
    return kernel::linear_kernel(data::centered_columns(markers), {.normalize = true});
}

// --- 1. heritability recovery -------------------------------------------

Outcome heritability_recovery() {
    const auto start = std::chrono::steady_clock::now();
    const int reps = 30;
    std::vector<double> h2(reps);
    parallel_for(reps, kThreads, [&](int rep) {
        sim::SimConfig cfg;  // 7 chromosomes x 100 markers, 20 QTL each, h2 = 0.75
        cfg.n_individuals = 300;
        cfg.seed = 100 + static_cast<std::uint64_t>(rep);
        const auto simulated = sim::simulate_population(cfg);
        const auto fit = spmm::fit_single(simulated.phenotype,
                                          centered_linear(simulated.panel.markers), {});
        h2[static_cast<std::size_t>(rep)] = fit.heritabilities(0);
    });
    double mean = 0.0;
    for (double v : h2) {
        mean += v / reps;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Outcome out;
    out.pass = std::abs(mean - 0.75) <= 0.10 && seconds < 300.0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "mean h2 = %.4f (target 0.75 +/- 0.10), %.1f s (< 300 s)",
                  mean, seconds);
    out.detail = buf;
    return out;
}

// --- 2. REML optimizer vs grid + golden-section oracle --------------------

Outcome reml_oracle_equivalence() {
    std::mt19937_64 rng(7001);
    double worst_dl = 0.0, worst_dobj = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::Index n = 20 + (rep * 3) % 31;  // up to 50
        const Eigen::MatrixXd k = oracles::random_psd(n, n + 10, rng);
        Eigen::LLT<Eigen::MatrixXd> llt(k + 1e-12 * Eigen::MatrixXd::Identity(n, n));
        const double signal = (rep % 4) * 0.7;
        const Eigen::VectorXd genetic = llt.matrixL() * oracles::random_vector(n, rng);
        const Eigen::VectorXd y = signal * genetic + oracles::random_vector(n, rng) +
                                  Eigen::VectorXd::Constant(n, 0.5);
        const auto phen = oracles::make_phenotype(y);
        const auto fit = spmm::fit_single(phen, wrap(k), {});
        const auto oracle = oracles::grid_golden_reml(y, phen.fixed_effects, k);
        worst_dl = std::max(worst_dl, std::abs(fit.lambda(0) - oracle.lambda));
        const double fit_obj =
            oracles::naive_profiled_reml(y, phen.fixed_effects, k, fit.lambda(0));
        worst_dobj = std::max(worst_dobj, std::abs(fit_obj - oracle.objective));
    }
    Outcome out;
    out.pass = worst_dl <= 1e-3 && worst_dobj <= 1e-6;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |dlambda| = %.2e (<= 1e-3), max |dobj| = %.2e (<= 1e-6)",
                  worst_dl, worst_dobj);
    out.detail = buf;
    return out;
}

// --- 3. fast-path likelihoods vs naive dense evaluation -------------------

Outcome likelihood_agreement() {
    std::mt19937_64 rng(7003);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::Index n = 15 + (rep * 7) % 36;  // up to 50
        const int n_kernels = 1 + rep % 3;
        Eigen::MatrixXd x(n, 2);
        x.col(0).setOnes();
        x.col(1) = oracles::random_vector(n, rng);
        const Eigen::VectorXd y = oracles::random_vector(n, rng, 1.5);
        std::vector<Eigen::MatrixXd> kernels;
        spmm::MixedModelSpec spec;
        spec.phenotype = oracles::make_phenotype(y, x);
        Eigen::VectorXd lambda(n_kernels);
        for (int j = 0; j < n_kernels; ++j) {
            kernels.push_back(oracles::random_psd(n, n + 5, rng));
            spec.kernels.push_back(wrap(kernels.back()));
            lambda(j) = 0.3 + 0.9 * j;
        }
        Eigen::VectorXd beta(2);
        beta << 0.2, -0.4;
        const double sigma = 1.1;
        worst = std::max(worst, std::abs(spmm::loglik(spec, beta, sigma, lambda) -
                                         oracles::naive_loglik(y, x, beta, sigma, kernels, lambda)));
        worst = std::max(worst, std::abs(spmm::reml_loglik(spec, sigma, lambda) -
                                         oracles::naive_reml(y, x, sigma, kernels, lambda)));
    }
    Outcome out;
    out.pass = worst <= 1e-8;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "max |difference| = %.2e (<= 1e-8)", worst);
    out.detail = buf;
    return out;
}

// --- 4. null calibration of the variance LRT ------------------------------

Outcome null_calibration() {
    sim::SimConfig cfg;
    cfg.n_chromosomes = 7;
    cfg.markers_per_chromosome = 30;
    cfg.n_individuals = 120;
    cfg.n_qtl_per_chromosome = 3;
    cfg.seed = 9001;
    const auto simulated = sim::simulate_population(cfg);
    const auto k = centered_linear(simulated.panel.markers);

    const int reps = 500;
    std::vector<int> rejected(reps, 0);
    parallel_for(reps, kThreads, [&](int rep) {
        std::mt19937_64 rng(20000 + static_cast<std::uint64_t>(rep));
        auto phen = simulated.phenotype;
        phen.values = oracles::random_vector(simulated.panel.line_count(), rng);
        const auto lrt = hier::lrt_variance(phen, k, nullptr, spmm::Method::REML);
        rejected[static_cast<std::size_t>(rep)] = lrt.p_value <= 0.05 ? 1 : 0;
    });
    int total = 0;
    for (int r : rejected) {
        total += r;
    }
    const double rate = static_cast<double>(total) / reps;
    Outcome out;
    out.pass = rate >= 0.02 && rate <= 0.08;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "empirical rejection rate = %.3f (in [0.02, 0.08])", rate);
    out.detail = buf;
    return out;
}

// --- 5. hierarchical region discovery -------------------------------------

Outcome region_discovery() {
    const int reps = 30;
    std::vector<int> success(reps, 0);
    parallel_for(reps, kThreads, [&](int rep) {
        sim::SimConfig cfg;
        cfg.n_chromosomes = 7;
        cfg.markers_per_chromosome = 30;
        cfg.n_individuals = 200;
        cfg.qtl_per_chromosome = {20, 0, 0, 0, 0, 0, 0};
        cfg.seed = 30000 + static_cast<std::uint64_t>(rep);
        const auto simulated = sim::simulate_population(cfg);
        const auto tree = data::partition_genome(simulated.panel, 2, 2);
        const hier::KernelBuilder builder = [&](const data::Region& region) {
            return centered_linear(data::region_markers(simulated.panel, region));
        };
        const auto report = hier::hierarchical_scan(tree, simulated.panel, simulated.phenotype,
                                                    builder, 0.05, spmm::Method::REML, {}, 1);
        bool chr1_rejected = false;
        int quiet_others = 0;
        for (const auto& node : report.nodes) {
            if (node.level != 2) {
                continue;
            }
            if (node.region_id == "chr1") {
                chr1_rejected = node.decision == hier::Decision::Rejected;
            } else if (node.decision == hier::Decision::Accepted ||
                       node.decision == hier::Decision::NotTested) {
                ++quiet_others;
            }
        }
        success[static_cast<std::size_t>(rep)] = (chr1_rejected && quiet_others >= 3) ? 1 : 0;
    });
    int total = 0;
    for (int s : success) {
        total += s;
    }
    Outcome out;
    out.pass = total >= 24;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d/30 replicates localized the signal (need >= 24)", total);
    out.detail = buf;
    return out;
}

// --- 6. prediction ordering ------------------------------------------------

struct PredictionMeans {
    double linear = 0.0;
    double multi = 0.0;
    double significant = 0.0;
};

Outcome prediction_ordering() {
    const int reps = 30;
    std::vector<PredictionMeans> results(reps);
    parallel_for(reps, kThreads, [&](int rep) {
        sim::SimConfig cfg;
        cfg.n_chromosomes = 7;
        cfg.markers_per_chromosome = 30;
        cfg.n_individuals = 320;
        cfg.n_qtl_per_chromosome = 4;
        cfg.seed = 40000 + static_cast<std::uint64_t>(rep);
        const auto simulated = sim::simulate_population(cfg);
        const auto [train_idx, test_idx] =
            sim::train_test_split(simulated.panel.line_count(), 0.75,
                                  50000 + static_cast<std::uint64_t>(rep));
        const auto train = sim::subset_lines(simulated.panel, simulated.phenotype, train_idx);
        const auto test = sim::subset_lines(simulated.panel, simulated.phenotype, test_idx);
        const Eigen::MatrixXd x_test = Eigen::MatrixXd::Ones(test.panel.line_count(), 1);

        // (a) single whole-genome linear kernel
        {
            const Eigen::RowVectorXd means = train.panel.markers.colwise().mean();
            const Eigen::MatrixXd a_train = train.panel.markers.rowwise() - means;
            const Eigen::MatrixXd a_test = test.panel.markers.rowwise() - means;
            const auto k = kernel::linear_kernel(a_train, {.normalize = true});
            const auto fit = spmm::fit_single(train.phenotype, k, {});
            const Eigen::MatrixXd cross =
                kernel::cross_kernel(a_test, a_train, k.provenance, k.normalization_factor);
            const Eigen::VectorXd pred = spmm::predict(fit, {cross}, x_test);
            results[static_cast<std::size_t>(rep)].linear =
                oracles::pearson(pred, test.phenotype.values);
        }

        // shared region machinery for (b) and (c)
        const auto tree = data::partition_genome(train.panel, 2, 2);
        const auto nodes = tree.breadth_first();
        auto lasso_model_corr = [&](const std::vector<const data::RegionTree*>& kept) {
            const auto n_regions = static_cast<Eigen::Index>(kept.size());
            Eigen::MatrixXd g_train(train.panel.line_count(), n_regions);
            Eigen::MatrixXd g_test(test.panel.line_count(), n_regions);
            std::vector<std::string> ids;
            for (Eigen::Index j = 0; j < n_regions; ++j) {
                const auto& region = kept[static_cast<std::size_t>(j)]->region;
                ids.push_back(region.id);
                const Eigen::MatrixXd cols_train = data::region_markers(train.panel, region);
                const Eigen::MatrixXd cols_test = data::region_markers(test.panel, region);
                const Eigen::RowVectorXd means = cols_train.colwise().mean();
                const Eigen::MatrixXd a_train = cols_train.rowwise() - means;
                const Eigen::MatrixXd a_test = cols_test.rowwise() - means;
                const auto k = kernel::linear_kernel(a_train, {.normalize = true});
                const auto fit = spmm::fit_single(train.phenotype, k, {});
                g_train.col(j) = fit.eblups.col(0);
                const Eigen::MatrixXd cross =
                    kernel::cross_kernel(a_test, a_train, k.provenance, k.normalization_factor);
                g_test.col(j) = cross * fit.dual_weights[0];
            }
            const auto bundle = lasso::assemble_design(
                g_train, Eigen::MatrixXd(train.panel.line_count(), 0), ids);
            const auto path = lasso::lambda_path(bundle, train.phenotype.values, 25, 5, 0.0,
                                                 60000 + static_cast<std::uint64_t>(rep), 1);
            const auto model =
                lasso::fit_lasso(bundle, train.phenotype.values, path.chosen_lambda1, 0.0);
            // align test columns with the bundle's kept columns
            Eigen::MatrixXd g_test_kept(test.panel.line_count(),
                                        static_cast<Eigen::Index>(bundle.column_ids.size()));
            for (std::size_t c = 0; c < bundle.column_ids.size(); ++c) {
                for (std::size_t j = 0; j < ids.size(); ++j) {
                    if (ids[j] == bundle.column_ids[c]) {
                        g_test_kept.col(static_cast<Eigen::Index>(c)) =
                            g_test.col(static_cast<Eigen::Index>(j));
                        break;
                    }
                }
            }
            const auto pred = lasso::predict_combined(model, g_test_kept,
                                                      Eigen::MatrixXd(test.panel.line_count(), 0));
            return oracles::pearson(pred.full, test.phenotype.values);
        };

        // (b) multi-kernel lasso over all tree nodes
        results[static_cast<std::size_t>(rep)].multi = lasso_model_corr(nodes);

        // (c) significant regions only (keep-rejecting walk on the training set)
        const hier::KernelBuilder builder = [&](const data::Region& region) {
            return centered_linear(data::region_markers(train.panel, region));
        };
        const auto report = hier::hierarchical_scan(tree, train.panel, train.phenotype, builder,
                                                    0.05, spmm::Method::REML, {}, 1);
        std::vector<const data::RegionTree*> significant;
        for (std::size_t i = 0; i < report.nodes.size(); ++i) {
            if (report.nodes[i].decision == hier::Decision::Rejected) {
                significant.push_back(nodes[i]);
            }
        }
        if (significant.empty()) {
            significant.push_back(nodes[0]);
        }
        results[static_cast<std::size_t>(rep)].significant = lasso_model_corr(significant);
    });

    PredictionMeans mean;
    for (const auto& r : results) {
        mean.linear += r.linear / reps;
        mean.multi += r.multi / reps;
        mean.significant += r.significant / reps;
    }
    Outcome out;
    const bool multi_ok = mean.multi >= mean.linear - 0.05;
    const bool significant_ok = std::abs(mean.multi - mean.significant) <= 0.05;
    out.pass = multi_ok && significant_ok;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "mean r: linear %.3f, multi-kernel lasso %.3f (>= linear - 0.05), "
                  "significant-only %.3f (within 0.05 of multi)",
                  mean.linear, mean.multi, mean.significant);
    out.detail = buf;
    return out;
}

// --- 7. lasso KKT and least-squares oracle ---------------------------------

Outcome lasso_kkt() {
    std::mt19937_64 rng(7007);
    double worst_kkt = 0.0;
    double worst_ls = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Index n = 30 + rep;
        const Eigen::Index k = 4 + rep % 3;
        const Eigen::MatrixXd eblups = oracles::random_matrix(n, k, rng);
        std::vector<std::string> ids;
        for (Eigen::Index j = 0; j < k; ++j) {
            ids.push_back("r" + std::to_string(j));
        }
        const auto bundle = lasso::assemble_design(eblups, Eigen::MatrixXd(n, 0), ids);
        const Eigen::VectorXd y =
            bundle.G.col(0) * 1.5 + oracles::random_vector(n, rng, 0.7);
        for (const double lambda1 : {0.0, 1.0, 8.0}) {
            const auto model = lasso::fit_lasso(bundle, y, lambda1, 0.0);
            Eigen::VectorXd residual = y - bundle.G * model.alpha_std;
            const double b0_std =
                model.intercept +
                (model.alpha_std.array() * bundle.g_mean.array() / bundle.g_scale.array()).sum();
            residual.array() -= b0_std;
            for (Eigen::Index j = 0; j < k; ++j) {
                const double grad = 2.0 * bundle.G.col(j).dot(residual);
                if (model.alpha_std(j) == 0.0) {
                    worst_kkt = std::max(worst_kkt, std::max(0.0, std::abs(grad) - lambda1));
                } else {
                    worst_kkt = std::max(
                        worst_kkt,
                        std::abs(grad - lambda1 * (model.alpha_std(j) > 0 ? 1.0 : -1.0)));
                }
            }
            if (lambda1 == 0.0) {
                Eigen::MatrixXd design(n, 1 + k);
                design.col(0).setOnes();
                design.rightCols(k) = bundle.G;
                const Eigen::VectorXd direct =
                    (design.transpose() * design).ldlt().solve(design.transpose() * y);
                worst_ls = std::max(worst_ls,
                                    (model.alpha_std - direct.tail(k)).cwiseAbs().maxCoeff());
            }
        }
    }
    Outcome out;
    out.pass = worst_kkt <= 1e-6 && worst_ls <= 1e-6;
    char buf[112];
    std::snprintf(buf, sizeof(buf), "max KKT violation = %.2e, max |ls diff| = %.2e (<= 1e-6)",
                  worst_kkt, worst_ls);
    out.detail = buf;
    return out;
}

// --- 8. cross-distribution exactness ---------------------------------------

Outcome cross_exactness() {
    std::mt19937_64 rng(7011);
    bool exact_ok = true;
    bool mc_ok = true;
    for (const int k : {2, 5, 12}) {
        const Eigen::VectorXd g1 = oracles::random_vector(k, rng);
        const Eigen::VectorXd g2 = oracles::random_vector(k, rng);
        const auto cross = breed::cross_distribution(g1, g2, 10, 1);
        if (!cross.exact) {
            exact_ok = false;
            continue;
        }
        // independent enumeration of all 2^k assortments
        std::map<double, double> pmf;
        const double prob = 1.0 / std::pow(2.0, k);
        for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
            double value = 0.0;
            for (int j = 0; j < k; ++j) {
                value += (mask >> j) & 1ULL ? g1(j) : g2(j);
            }
            pmf[value] += prob;
        }
        exact_ok = exact_ok && pmf.size() == cross.pmf.size();
        std::size_t idx = 0;
        for (const auto& [value, p] : pmf) {
            if (idx >= cross.pmf.size() || cross.pmf[idx].first != value ||
                std::abs(cross.pmf[idx].second - p) > 1e-15) {
                exact_ok = false;
                break;
            }
            ++idx;
        }

        // Monte-Carlo frequencies against enumerated probabilities within
        // 3-sigma binomial bounds at 1e5 draws. Per-cell checks need cells
        // with non-vanishing mass, so large-k support is grouped into 16
        // near-equiprobable contiguous bins first.
        const int n = 100000;
        const auto mc =
            breed::cross_distribution(g1, g2, n, 2000 + k, breed::CrossMode::MonteCarlo);
        std::vector<std::pair<double, double>> cells;  // (upper value edge, probability)
        if (pmf.size() <= 32) {
            for (const auto& [value, p] : pmf) {
                cells.emplace_back(value, p);
            }
        } else {
            const int bins = 16;
            double cumulative = 0.0;
            double bin_mass = 0.0;
            int emitted = 0;
            for (const auto& [value, p] : pmf) {
                bin_mass += p;
                cumulative += p;
                if (cumulative >= (emitted + 1.0) / bins - 1e-12) {
                    cells.emplace_back(value, bin_mass);
                    bin_mass = 0.0;
                    ++emitted;
                }
            }
            if (bin_mass > 0.0) {
                cells.emplace_back(pmf.rbegin()->first, bin_mass);
            }
        }
        std::size_t cell = 0;
        std::vector<int> counts(cells.size(), 0);
        Eigen::VectorXd sorted = mc.samples;
        std::sort(sorted.data(), sorted.data() + sorted.size());
        for (Eigen::Index i = 0; i < sorted.size(); ++i) {
            while (cell + 1 < cells.size() && sorted(i) > cells[cell].first + 1e-12) {
                ++cell;
            }
            counts[cell]++;
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double p = cells[c].second;
            const double freq = counts[c] / static_cast<double>(n);
            const double sd = std::sqrt(p * (1.0 - p) / n);
            if (std::abs(freq - p) > 3.0 * sd) {
                mc_ok = false;
            }
        }
    }
    Outcome out;
    out.pass = exact_ok && mc_ok;
    out.detail = std::string("exhaustive pmf ") + (exact_ok ? "exact" : "MISMATCH") +
                 ", Monte Carlo within 3-sigma: " + (mc_ok ? "yes" : "no");
    return out;
}

// --- 9. selection-index density limit --------------------------------------

Outcome selection_limit() {
    std::mt19937_64 rng(7013);
    breed::SelectionInput input;
    input.eblups = oracles::random_matrix(200, 6, rng);
    input.densities = (oracles::random_matrix(200, 6, rng).array().tanh() + 1.0) / 2.0;
    input.kernel_weights = Eigen::VectorXd::Constant(6, 1.0 / 6.0);
    input.h1 = 1.0;
    input.h2 = 1e6;
    const Eigen::VectorXd full = breed::preference_index(input, true);
    // density term removed, evaluated independently of the library flag
    Eigen::VectorXd reduced = Eigen::VectorXd::Zero(200);
    const double two_pi = 2.0 * std::acos(-1.0);
    for (int j = 0; j < 6; ++j) {
        const double mean_g = input.eblups.col(j).mean();
        const double var_g =
            (input.eblups.col(j).array() - mean_g).square().sum() / 199.0;
        const double mean_p = input.densities.col(j).mean();
        const double var_p =
            (input.densities.col(j).array() - mean_p).square().sum() / 199.0;
        const double best = input.eblups.col(j).maxCoeff();
        const double pref = input.kernel_weights(j) /
                            (two_pi * input.h1 * std::sqrt(var_g) * input.h2 * std::sqrt(var_p));
        for (int i = 0; i < 200; ++i) {
            const double dg = input.eblups(i, j) - best;
            reduced(i) += pref * std::exp(-0.5 * dg * dg / (input.h1 * input.h1 * var_g));
        }
    }
    const double tau = oracles::kendall_tau(full, reduced);
    Outcome out;
    out.pass = tau > 0.95;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "Kendall tau = %.4f (> 0.95)", tau);
    out.detail = buf;
    return out;
}

// --- 10. kernel property suite ----------------------------------------------

Outcome kernel_properties() {
    std::mt19937_64 rng(7017);
    bool ok = true;
    std::string why;
    for (int rep = 0; rep < 6 && ok; ++rep) {
        const Eigen::Index q = 5 + rep * 2;
        const Eigen::Index m = 8 + rep * 3;
        const Eigen::MatrixXd a = oracles::random_matrix(q, m, rng);
        const std::vector<kernel::KernelMatrix> produced = {
            kernel::linear_kernel(a),
            kernel::polynomial_kernel(a, 0.3, 2),
            kernel::polynomial_kernel(a, 0.0, 3),
            kernel::gaussian_kernel(a),
            kernel::linear_kernel(a, {.normalize = true}),
        };
        for (const auto& k : produced) {
            if (k.symmetry_error() > 1e-10) {
                ok = false;
                why = "symmetry violation";
            }
            if (k.min_eigenvalue() < -1e-8) {
                ok = false;
                why = "negative eigenvalue";
            }
        }
        if (kernel::polynomial_kernel(a, 0.0, 1).values != kernel::linear_kernel(a).values) {
            ok = false;
            why = "polynomial(c=0,d=1) != linear";
        }
        const auto gauss = kernel::gaussian_kernel(a);
        for (Eigen::Index i = 0; i < q; ++i) {
            if (gauss.values(i, i) != 1.0) {
                ok = false;
                why = "gaussian diagonal not exactly 1";
            }
        }
        // combine identities: selector and convexity, exact
        std::vector<kernel::KernelMatrix> two{produced[0], produced[1]};
        kernel::KernelWeights selector;
        selector.weights = Eigen::Vector2d(1.0, 0.0);
        if (kernel::combine_kernels(two, selector).values != produced[0].values) {
            ok = false;
            why = "selector identity";
        }
        kernel::KernelWeights convex;
        convex.weights = Eigen::Vector2d(0.5, 0.5);
        const std::vector<kernel::KernelMatrix> twin{produced[0], produced[0]};
        if (kernel::combine_kernels(twin, convex).values != produced[0].values) {
            ok = false;
            why = "convexity fixed point";
        }
    }
    Outcome out;
    out.pass = ok;
    out.detail = ok ? "symmetry, PSD floor, reduction and combination identities hold"
                    : why;
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Outcome (*run)();
    };
    const std::vector<Criterion> criteria = {
        {"heritability recovery", heritability_recovery},
        {"REML oracle equivalence", reml_oracle_equivalence},
        {"likelihood agreement", likelihood_agreement},
        {"null calibration", null_calibration},
        {"region discovery", region_discovery},
        {"prediction ordering", prediction_ordering},
        {"lasso KKT + oracle", lasso_kkt},
        {"cross-distribution exactness", cross_exactness},
        {"selection-index limit", selection_limit},
        {"kernel property suite", kernel_properties},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Outcome outcome = criteria[i].run();
        std::printf("[%s] criterion %zu: %s — %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, outcome.detail.c_str());
        std::fflush(stdout);
        failures += outcome.pass ? 0 : 1;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
