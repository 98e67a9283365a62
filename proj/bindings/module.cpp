#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "legp/breeding.hpp"
#include "legp/cli.hpp"
#include "legp/genomic_data.hpp"
#include "legp/hierarchy.hpp"
#include "legp/kernel.hpp"
#include "legp/lasso.hpp"
#include "legp/simulate.hpp"
#include "legp/spmm.hpp"

namespace py = pybind11;
using namespace legp;

namespace {

kernel::KernelMatrix wrap_kernel(const Eigen::MatrixXd& values) {
    kernel::KernelMatrix k;
    k.values = values;
    return k;
}

data::Phenotype make_phenotype(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
    if (x.rows() != y.size()) {
        throw validation_error("X row count must match y length");
    }
    data::Phenotype phen;
    phen.values = y;
    phen.fixed_effects = x;
    phen.line_index.resize(static_cast<std::size_t>(y.size()));
    for (std::size_t i = 0; i < phen.line_index.size(); ++i) {
        phen.line_index[i] = static_cast<int>(i);
    }
    return phen;
}

spmm::FitOptions options_for(const std::string& method) {
    spmm::FitOptions options;
    options.method = spmm::method_from_string(method);
    return options;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Locally epistatic genomic prediction: kernels, variance-component "
              "fits, hierarchical tests, sparse combination and breeding tools";
    m.attr("__version__") = cli::kVersion;

    py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<numeric_error>(m, "NumericError", PyExc_RuntimeError);

    // ---- kernels ---------------------------------------------------------
    m.def(
        "linear_kernel",
        [](const Eigen::MatrixXd& a, bool normalize) {
            return kernel::linear_kernel(a, {.normalize = normalize}).values;
        },
        py::arg("markers"), py::arg("normalize") = false,
        "Linear kernel A A' / m over marker rows.");
    m.def(
        "polynomial_kernel",
        [](const Eigen::MatrixXd& a, double c, int d, bool normalize) {
            return kernel::polynomial_kernel(a, c, d, {.normalize = normalize}).values;
        },
        py::arg("markers"), py::arg("c") = 0.0, py::arg("d") = 2, py::arg("normalize") = false);
    m.def(
        "gaussian_kernel",
        [](const Eigen::MatrixXd& a, std::optional<double> h, bool normalize) {
            return kernel::gaussian_kernel(a, h, {.normalize = normalize}).values;
        },
        py::arg("markers"), py::arg("h") = std::nullopt, py::arg("normalize") = false,
        "Gaussian kernel; h = None uses the median pairwise squared distance.");
    m.def("median_squared_distance", &kernel::median_squared_distance, py::arg("markers"));
    m.def(
        "combine_kernels",
        [](const std::vector<Eigen::MatrixXd>& kernels, const Eigen::VectorXd& weights) {
            std::vector<kernel::KernelMatrix> wrapped;
            wrapped.reserve(kernels.size());
            for (const auto& k : kernels) {
                wrapped.push_back(wrap_kernel(k));
            }
            kernel::KernelWeights w;
            w.weights = weights;
            return kernel::combine_kernels(wrapped, w).values;
        },
        py::arg("kernels"), py::arg("weights"));
    m.def(
        "hadamard",
        [](const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2) {
            return kernel::hadamard(wrap_kernel(k1), wrap_kernel(k2)).values;
        },
        py::arg("k1"), py::arg("k2"));
    m.def(
        "kernel_alignment",
        [](const Eigen::MatrixXd& k1, const Eigen::MatrixXd& k2) {
            return kernel::kernel_alignment(wrap_kernel(k1), wrap_kernel(k2));
        },
        py::arg("k1"), py::arg("k2"));
    m.def(
        "qiu_weights",
        [](const Eigen::VectorXd& scores, const std::string& kind) {
            const auto k = kind == "r2" ? kernel::QiuKind::R2 : kernel::QiuKind::MSE;
            return kernel::qiu_weights(scores, k).weights;
        },
        py::arg("scores"), py::arg("kind") = "r2");
    m.def(
        "shrink_kernel",
        [](const Eigen::MatrixXd& k, double threshold) {
            auto [shrunk, edges] = kernel::shrink_kernel(wrap_kernel(k), threshold);
            Eigen::MatrixXd edge_table(static_cast<Eigen::Index>(edges.size()), 3);
            for (std::size_t i = 0; i < edges.size(); ++i) {
                edge_table(static_cast<Eigen::Index>(i), 0) = edges[i].a;
                edge_table(static_cast<Eigen::Index>(i), 1) = edges[i].b;
                edge_table(static_cast<Eigen::Index>(i), 2) = edges[i].value;
            }
            return py::make_tuple(shrunk.values, edge_table);
        },
        py::arg("kernel"), py::arg("threshold"),
        "Hard-threshold off-diagonals; returns (repaired kernel, edge list).");

    // ---- mixed-model fits --------------------------------------------------
    py::class_<spmm::FitResult>(m, "FitResult")
        .def_readonly("sigma_g2", &spmm::FitResult::sigma_g2)
        .def_readonly("sigma_e2", &spmm::FitResult::sigma_e2)
        .def_readonly("lambda_", &spmm::FitResult::lambda)
        .def_readonly("beta", &spmm::FitResult::beta)
        .def_readonly("eblups", &spmm::FitResult::eblups)
        .def_readonly("loglik", &spmm::FitResult::loglik)
        .def_readonly("reml_loglik", &spmm::FitResult::reml_loglik)
        .def_readonly("heritabilities", &spmm::FitResult::heritabilities)
        .def_readonly("converged", &spmm::FitResult::converged)
        .def_readonly("warnings", &spmm::FitResult::warnings)
        .def_property_readonly("dual_weights",
                               [](const spmm::FitResult& fit) { return fit.dual_weights; })
        .def("__repr__", [](const spmm::FitResult& fit) {
            return "<FitResult k=" + std::to_string(fit.sigma_g2.size()) +
                   " sigma_e2=" + std::to_string(fit.sigma_e2) + ">";
        });

    m.def(
        "fit_single",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::MatrixXd& k,
           const std::string& method) {
            return spmm::fit_single(make_phenotype(y, x), wrap_kernel(k), options_for(method));
        },
        py::arg("y"), py::arg("X"), py::arg("kernel"), py::arg("method") = "reml",
        "REML/ML fit of one variance component via the spectral fast path.");
    m.def(
        "fit_joint",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
           const std::vector<Eigen::MatrixXd>& kernels, const std::string& method) {
            std::vector<kernel::KernelMatrix> wrapped;
            for (const auto& k : kernels) {
                wrapped.push_back(wrap_kernel(k));
            }
            return spmm::fit_joint(make_phenotype(y, x), wrapped, options_for(method));
        },
        py::arg("y"), py::arg("X"), py::arg("kernels"), py::arg("method") = "reml");
    m.def(
        "fit_marginal",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::MatrixXd& target,
           const Eigen::MatrixXd& background, const std::string& method) {
            return spmm::fit_marginal(make_phenotype(y, x), wrap_kernel(target),
                                      wrap_kernel(background), options_for(method));
        },
        py::arg("y"), py::arg("X"), py::arg("target"), py::arg("background"),
        py::arg("method") = "reml");
    m.def(
        "predict",
        [](const spmm::FitResult& fit, const std::vector<Eigen::MatrixXd>& cross_kernels,
           const Eigen::MatrixXd& x_new) { return spmm::predict(fit, cross_kernels, x_new); },
        py::arg("fit"), py::arg("cross_kernels"), py::arg("X_new"));
    m.def(
        "loglik",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
           const std::vector<Eigen::MatrixXd>& kernels, const Eigen::VectorXd& beta,
           double sigma_e2, const Eigen::VectorXd& lambda) {
            spmm::MixedModelSpec spec;
            spec.phenotype = make_phenotype(y, x);
            for (const auto& k : kernels) {
                spec.kernels.push_back(wrap_kernel(k));
            }
            return spmm::loglik(spec, beta, sigma_e2, lambda);
        },
        py::arg("y"), py::arg("X"), py::arg("kernels"), py::arg("beta"), py::arg("sigma_e2"),
        py::arg("lambda_"));
    m.def(
        "reml_loglik",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
           const std::vector<Eigen::MatrixXd>& kernels, double sigma_e2,
           const Eigen::VectorXd& lambda) {
            spmm::MixedModelSpec spec;
            spec.phenotype = make_phenotype(y, x);
            for (const auto& k : kernels) {
                spec.kernels.push_back(wrap_kernel(k));
            }
            return spmm::reml_loglik(spec, sigma_e2, lambda);
        },
        py::arg("y"), py::arg("X"), py::arg("kernels"), py::arg("sigma_e2"), py::arg("lambda_"));

    // ---- variance-component test -------------------------------------------
    py::class_<hier::LrtResult>(m, "LrtResult")
        .def_readonly("statistic", &hier::LrtResult::statistic)
        .def_readonly("p_value", &hier::LrtResult::p_value)
        .def_readonly("w0", &hier::LrtResult::w0)
        .def_readonly("w1", &hier::LrtResult::w1);
    m.def(
        "lrt_variance",
        [](const Eigen::VectorXd& y, const Eigen::MatrixXd& x, const Eigen::MatrixXd& k,
           std::optional<Eigen::MatrixXd> background, const std::string& method) {
            const auto phen = make_phenotype(y, x);
            const auto region = wrap_kernel(k);
            if (background.has_value()) {
                const auto bg = wrap_kernel(*background);
                return hier::lrt_variance(phen, region, &bg, spmm::method_from_string(method));
            }
            return hier::lrt_variance(phen, region, nullptr, spmm::method_from_string(method));
        },
        py::arg("y"), py::arg("X"), py::arg("kernel"), py::arg("background") = std::nullopt,
        py::arg("method") = "reml",
        "Boundary LRT of one variance component with a chi-square mixture null.");

    // ---- sparse combination -------------------------------------------------
    py::class_<lasso::CombinedModel>(m, "CombinedModel")
        .def_readonly("intercept", &lasso::CombinedModel::intercept)
        .def_readonly("alpha", &lasso::CombinedModel::alpha)
        .def_readonly("alpha_std", &lasso::CombinedModel::alpha_std)
        .def_readonly("beta", &lasso::CombinedModel::beta)
        .def_readonly("lambda1", &lasso::CombinedModel::lambda1)
        .def_readonly("lambda2", &lasso::CombinedModel::lambda2)
        .def_readonly("active_set", &lasso::CombinedModel::active_set);
    m.def(
        "fit_lasso",
        [](const Eigen::MatrixXd& eblups, const Eigen::MatrixXd& fixed, const Eigen::VectorXd& y,
           double lambda1, double lambda2) {
            std::vector<std::string> ids;
            for (Eigen::Index j = 0; j < eblups.cols(); ++j) {
                ids.push_back("g" + std::to_string(j));
            }
            const auto bundle = lasso::assemble_design(eblups, fixed, ids);
            return lasso::fit_lasso(bundle, y, lambda1, lambda2);
        },
        py::arg("eblups"), py::arg("fixed"), py::arg("y"), py::arg("lambda1"),
        py::arg("lambda2") = 0.0,
        "Coordinate-descent lasso/elastic-net on EBLUP columns (covariates unpenalized).");
    m.def(
        "lambda_path",
        [](const Eigen::MatrixXd& eblups, const Eigen::MatrixXd& fixed, const Eigen::VectorXd& y,
           int n_lambda, int cv_folds, double lambda2, std::uint64_t seed) {
            std::vector<std::string> ids;
            for (Eigen::Index j = 0; j < eblups.cols(); ++j) {
                ids.push_back("g" + std::to_string(j));
            }
            const auto bundle = lasso::assemble_design(eblups, fixed, ids);
            const auto report = lasso::lambda_path(bundle, y, n_lambda, cv_folds, lambda2, seed);
            py::list points;
            for (const auto& pt : report.points) {
                points.append(py::make_tuple(pt.lambda1, pt.cv_mse, pt.cv_se, pt.nonzero));
            }
            return py::make_tuple(report.chosen_lambda1, points);
        },
        py::arg("eblups"), py::arg("fixed"), py::arg("y"), py::arg("n_lambda") = 50,
        py::arg("cv_folds") = 5, py::arg("lambda2") = 0.0, py::arg("seed") = 1);
    m.def(
        "predict_combined",
        [](const lasso::CombinedModel& model, const Eigen::MatrixXd& eblups,
           const Eigen::MatrixXd& fixed) {
            const auto pred = lasso::predict_combined(model, eblups, fixed);
            return py::make_tuple(pred.full, pred.genotypic);
        },
        py::arg("model"), py::arg("eblups"), py::arg("fixed"));

    // ---- breeding tools ------------------------------------------------------
    m.def(
        "jannink_index",
        [](const Eigen::MatrixXd& eblups, const Eigen::MatrixXd& densities) {
            breed::SelectionInput input;
            input.eblups = eblups;
            input.densities = densities;
            input.kernel_weights =
                Eigen::VectorXd::Constant(eblups.cols(), 1.0 / static_cast<double>(eblups.cols()));
            return breed::jannink_index(input);
        },
        py::arg("eblups"), py::arg("densities"));
    m.def(
        "preference_index",
        [](const Eigen::MatrixXd& eblups, const Eigen::MatrixXd& densities,
           const Eigen::VectorXd& weights, double h1, double h2, bool include_density) {
            breed::SelectionInput input;
            input.eblups = eblups;
            input.densities = densities;
            input.kernel_weights = weights;
            input.h1 = h1;
            input.h2 = h2;
            return breed::preference_index(input, include_density);
        },
        py::arg("eblups"), py::arg("densities"), py::arg("weights"), py::arg("h1") = 1.0,
        py::arg("h2") = 1.0, py::arg("include_density") = true);
    m.def(
        "cross_distribution",
        [](const Eigen::VectorXd& g1, const Eigen::VectorXd& g2, int n_samples,
           std::uint64_t seed, const std::string& mode) {
            breed::CrossMode cross_mode = breed::CrossMode::Auto;
            if (mode == "monte_carlo") {
                cross_mode = breed::CrossMode::MonteCarlo;
            } else if (mode == "exhaustive") {
                cross_mode = breed::CrossMode::Exhaustive;
            } else if (mode != "auto") {
                throw validation_error("mode must be auto, monte_carlo or exhaustive");
            }
            const auto cross = breed::cross_distribution(g1, g2, n_samples, seed, cross_mode);
            py::dict out;
            out["exact"] = cross.exact;
            out["mean"] = cross.mean;
            out["variance"] = cross.variance;
            out["q05"] = cross.q05;
            out["q50"] = cross.q50;
            out["q95"] = cross.q95;
            if (cross.exact) {
                out["pmf"] = cross.pmf;
            } else {
                out["samples"] = cross.samples;
            }
            return out;
        },
        py::arg("g1"), py::arg("g2"), py::arg("n_samples") = 10000, py::arg("seed") = 1,
        py::arg("mode") = "auto",
        "Progeny breeding-value distribution under independent equal-chance "
        "region assortment between two homozygous parents.");

    // ---- simulation -----------------------------------------------------------
    m.def(
        "simulate_population",
        [](int n_chromosomes, int markers_per_chromosome, int n_individuals,
           int n_qtl_per_chromosome, int n_generations, double target_h2, std::uint64_t seed,
           double chrom_length_cm) {
            sim::SimConfig cfg;
            cfg.n_chromosomes = n_chromosomes;
            cfg.markers_per_chromosome = markers_per_chromosome;
            cfg.n_individuals = n_individuals;
            cfg.n_qtl_per_chromosome = n_qtl_per_chromosome;
            cfg.n_generations = n_generations;
            cfg.target_h2 = target_h2;
            cfg.seed = seed;
            cfg.chrom_length_cm = chrom_length_cm;
            const auto simulated = sim::simulate_population(cfg);
            py::dict out;
            out["markers"] = simulated.panel.markers;
            std::vector<int> chromosome;
            std::vector<double> position;
            std::vector<std::string> marker_id;
            for (const auto& entry : simulated.panel.map.entries) {
                chromosome.push_back(entry.chromosome);
                position.push_back(entry.position_cm);
                marker_id.push_back(entry.marker_id);
            }
            out["chromosome"] = chromosome;
            out["position_cm"] = position;
            out["marker_id"] = marker_id;
            out["phenotype"] = simulated.phenotype.values;
            out["genetic_values"] = simulated.truth.genetic_values;
            out["realized_h2"] = simulated.truth.realized_h2;
            return out;
        },
        py::arg("n_chromosomes") = 7, py::arg("markers_per_chromosome") = 100,
        py::arg("n_individuals") = 300, py::arg("n_qtl_per_chromosome") = 20,
        py::arg("n_generations") = 20, py::arg("target_h2") = 0.75, py::arg("seed") = 1,
        py::arg("chrom_length_cm") = 100.0,
        "Two-founder random-mating simulation with additive QTL at markers.");
    m.def(
        "train_test_split",
        [](Eigen::Index n_lines, double fraction, std::uint64_t seed) {
            return sim::train_test_split(n_lines, fraction, seed);
        },
        py::arg("n_lines"), py::arg("train_fraction") = 0.75, py::arg("seed") = 1);
}
