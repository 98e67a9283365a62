#include "legp/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "legp/table.hpp"

namespace legp::kernel {

namespace {

double integer_power(double base, int exponent) {
    double out = base;
    for (int i = 1; i < exponent; ++i) {
        out *= base;
    }
    return out;
}

void apply_normalization(KernelMatrix& kernel, bool normalize) {
    if (!normalize) {
        return;
    }
    const double mean_diag = kernel.values.diagonal().mean();
    if (mean_diag <= 0.0) {
        throw numeric_error("cannot normalize kernel with non-positive diagonal mean");
    }
    kernel.values /= mean_diag;
    kernel.normalization_factor = mean_diag;
    kernel.normalized = true;
}

}  // namespace

std::string to_string(KernelFunction f) {
    switch (f) {
        case KernelFunction::Linear: return "linear";
        case KernelFunction::Polynomial: return "polynomial";
        case KernelFunction::Gaussian: return "gaussian";
    }
    return "unknown";
}

KernelFunction kernel_function_from_string(const std::string& name) {
    if (name == "linear") return KernelFunction::Linear;
    if (name == "polynomial") return KernelFunction::Polynomial;
    if (name == "gaussian") return KernelFunction::Gaussian;
    throw validation_error("unknown kernel function: " + name);
}

double KernelMatrix::symmetry_error() const {
    return (values - values.transpose()).cwiseAbs().maxCoeff();
}

double KernelMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(values, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void KernelWeights::validate() const {
    if (weights.size() == 0) {
        throw validation_error("kernel weights are empty");
    }
    if (weights.minCoeff() < 0.0) {
        throw validation_error("kernel weights must be non-negative");
    }
    if (std::abs(weights.sum() - 1.0) > 1e-10) {
        throw validation_error("kernel weights must sum to one");
    }
}

KernelMatrix linear_kernel(const Eigen::MatrixXd& A, const KernelOptions& options,
                           Warnings* warnings) {
    if (A.cols() < 1) {
        throw validation_error("linear kernel needs at least one marker column");
    }
    KernelMatrix kernel;
    const Eigen::MatrixXd dots = (A * A.transpose()) / static_cast<double>(A.cols());
    kernel.values.resize(A.rows(), A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            kernel.values(i, j) = dots(i, j);
            kernel.values(j, i) = dots(i, j);
        }
    }
    kernel.provenance.function = KernelFunction::Linear;
    bool all_rows_equal = true;
    for (Eigen::Index r = 1; r < A.rows() && all_rows_equal; ++r) {
        all_rows_equal = (A.row(r) - A.row(0)).cwiseAbs().maxCoeff() == 0.0;
    }
    if (all_rows_equal && A.rows() > 1) {
        warn(warnings, "linear kernel input has identical rows (rank 0 after centering)");
    }
    apply_normalization(kernel, options.normalize);
    return kernel;
}

KernelMatrix polynomial_kernel(const Eigen::MatrixXd& A, double c, int d,
                               const KernelOptions& options) {
    if (d < 1) {
        throw validation_error("polynomial kernel degree must be >= 1");
    }
    if (A.cols() < 1) {
        throw validation_error("polynomial kernel needs at least one marker column");
    }
    const Eigen::MatrixXd dots = (A * A.transpose()) / static_cast<double>(A.cols());
    KernelMatrix kernel;
    kernel.values.resize(A.rows(), A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = integer_power(dots(i, j) + c, d);
            kernel.values(i, j) = v;
            kernel.values(j, i) = v;
        }
    }
    kernel.provenance.function = KernelFunction::Polynomial;
    kernel.provenance.c = c;
    kernel.provenance.d = d;
    apply_normalization(kernel, options.normalize);
    return kernel;
}

double median_squared_distance(const Eigen::MatrixXd& A) {
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(A.rows() * (A.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double d2 = (A.row(i) - A.row(j)).squaredNorm();
            if (d2 > 0.0) {
                dists.push_back(d2);
            }
        }
    }
    if (dists.empty()) {
        throw numeric_error("median bandwidth undefined: all pairwise distances are zero");
    }
    const std::size_t mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
    double median = dists[mid];
    if (dists.size() % 2 == 0) {
        const double lower = *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid));
        median = (median + lower) / 2.0;
    }
    return median;
}

KernelMatrix gaussian_kernel(const Eigen::MatrixXd& A, std::optional<double> h,
                             const KernelOptions& options) {
    const double bandwidth = h.has_value() ? *h : median_squared_distance(A);
    if (bandwidth <= 0.0) {
        throw validation_error("gaussian bandwidth must be positive");
    }
    KernelMatrix kernel;
    kernel.values.resize(A.rows(), A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        kernel.values(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = std::exp(-(A.row(i) - A.row(j)).squaredNorm() / bandwidth);
            kernel.values(i, j) = v;
            kernel.values(j, i) = v;
        }
    }
    kernel.provenance.function = KernelFunction::Gaussian;
    kernel.provenance.h = bandwidth;
    apply_normalization(kernel, options.normalize);
    return kernel;
}

KernelMatrix combine_kernels(const std::vector<KernelMatrix>& kernels, const KernelWeights& weights) {
    if (kernels.empty()) {
        throw validation_error("combine_kernels needs at least one kernel");
    }
    if (weights.weights.size() != static_cast<Eigen::Index>(kernels.size())) {
        throw validation_error("kernel count does not match weight count");
    }
    weights.validate();
    const Eigen::Index q = kernels.front().size();
    KernelMatrix out;
    out.values = Eigen::MatrixXd::Zero(q, q);
    for (std::size_t m = 0; m < kernels.size(); ++m) {
        if (kernels[m].size() != q) {
            throw validation_error("kernel dimension mismatch in combine_kernels");
        }
        out.values += weights.weights(static_cast<Eigen::Index>(m)) * kernels[m].values;
    }
    out.provenance.source = "combined";
    return out;
}

KernelMatrix hadamard(const KernelMatrix& k1, const KernelMatrix& k2) {
    if (k1.size() != k2.size()) {
        throw validation_error("kernel dimension mismatch in hadamard");
    }
    KernelMatrix out;
    out.values = k1.values.cwiseProduct(k2.values);
    out.provenance.source = "hadamard";
    return out;
}

double kernel_alignment(const KernelMatrix& k1, const KernelMatrix& k2) {
    if (k1.size() != k2.size()) {
        throw validation_error("kernel dimension mismatch in alignment");
    }
    const double n1 = k1.values.squaredNorm();
    const double n2 = k2.values.squaredNorm();
    if (n1 == 0.0 || n2 == 0.0) {
        throw validation_error("kernel alignment undefined for zero-norm kernel");
    }
    const double inner = (k1.values.array() * k2.values.array()).sum();
    return inner / std::sqrt(n1 * n2);
}

KernelWeights alignment_weights(const std::vector<KernelMatrix>& kernels, const Eigen::VectorXd& y) {
    if (kernels.empty()) {
        throw validation_error("alignment_weights needs at least one kernel");
    }
    KernelMatrix target;
    target.values = y * y.transpose();
    Eigen::VectorXd raw(static_cast<Eigen::Index>(kernels.size()));
    for (std::size_t m = 0; m < kernels.size(); ++m) {
        raw(static_cast<Eigen::Index>(m)) = kernel_alignment(kernels[m], target);
    }
    const double total = raw.sum();
    if (total <= 0.0) {
        throw numeric_error("alignment weights undefined: total alignment is zero");
    }
    KernelWeights out;
    out.weights = raw / total;
    out.method = WeightMethod::Alignment;
    return out;
}

KernelWeights qiu_weights(const Eigen::VectorXd& scores, QiuKind kind) {
    const Eigen::Index p = scores.size();
    if (p == 0) {
        throw validation_error("qiu_weights needs at least one score");
    }
    KernelWeights out;
    if (kind == QiuKind::R2) {
        if (scores.minCoeff() < 0.0 || scores.maxCoeff() > 1.0) {
            throw validation_error("R2 scores must lie in [0, 1]");
        }
        const double total = scores.sum();
        if (total <= 0.0) {
            throw validation_error("all R2 scores are zero");
        }
        out.weights = scores / total;
        out.method = WeightMethod::QiuR2;
    } else {
        if (p < 2) {
            throw validation_error("MSE weights need at least two kernels");
        }
        if (scores.minCoeff() <= 0.0) {
            throw validation_error("MSE scores must be positive");
        }
        const double total = scores.sum();
        out.weights = (total - scores.array()) / ((p - 1) * total);
        out.method = WeightMethod::QiuMSE;
    }
    return out;
}

KernelMatrix kernel_scan(const data::MarkerPanel& panel, int center_marker, double bandwidth,
                         KernelFunction function, const KernelOptions& options,
                         Warnings* warnings) {
    if (center_marker < 0 || center_marker >= panel.marker_count()) {
        throw validation_error("scan center marker out of range");
    }
    if (panel.map.is_unmapped(center_marker)) {
        throw validation_error("scan center marker is unmapped");
    }
    if (bandwidth <= 0.0) {
        throw validation_error("scan bandwidth must be positive");
    }
    const auto& entries = panel.map.entries;
    const auto& center = entries[static_cast<std::size_t>(center_marker)];
    Eigen::VectorXd s = Eigen::VectorXd::Zero(panel.marker_count());
    int nonzero = 0;
    for (Eigen::Index c = 0; c < panel.marker_count(); ++c) {
        const auto& entry = entries[static_cast<std::size_t>(c)];
        if (entry.chromosome != center.chromosome) {
            continue;  // block-diagonal marker similarity: zero across chromosomes
        }
        const double dist = entry.position_cm - center.position_cm;
        s(c) = std::exp(-dist * dist / bandwidth);
        if (s(c) > 0.0) {
            ++nonzero;
        }
    }
    if (nonzero <= 1) {
        warn(warnings, "scan at marker " + center.marker_id + " has a single nonzero weight");
    }
    const Eigen::MatrixXd weighted = panel.markers * s.cwiseSqrt().asDiagonal();
    KernelMatrix kernel;
    switch (function) {
        case KernelFunction::Linear:
            kernel = linear_kernel(weighted, options, warnings);
            break;
        case KernelFunction::Polynomial:
            kernel = polynomial_kernel(weighted, 0.0, 2, options);
            break;
        case KernelFunction::Gaussian:
            kernel = gaussian_kernel(weighted, std::nullopt, options);
            break;
    }
    kernel.provenance.source = "scan@" + center.marker_id;
    return kernel;
}

std::pair<KernelMatrix, std::vector<Edge>> shrink_kernel(const KernelMatrix& kernel,
                                                         double threshold) {
    if (threshold < 0.0) {
        throw validation_error("shrink threshold must be >= 0");
    }
    KernelMatrix out = kernel;
    std::vector<Edge> edges;
    const Eigen::Index q = kernel.size();
    for (Eigen::Index i = 0; i < q; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(out.values(i, j)) < threshold) {
                out.values(i, j) = 0.0;
                out.values(j, i) = 0.0;
            } else if (out.values(i, j) != 0.0) {
                edges.push_back({static_cast<int>(j), static_cast<int>(i), out.values(i, j)});
            }
        }
    }
    constexpr double kFloor = 1e-8;
    const double min_eig = out.min_eigenvalue();
    if (min_eig < kFloor) {
        out.values.diagonal().array() += kFloor - min_eig;
    }
    out.provenance.source = kernel.provenance.source + "~shrunk";
    return {std::move(out), std::move(edges)};
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& A_new, const Eigen::MatrixXd& A_train,
                             const Provenance& provenance, double normalization_factor) {
    if (A_new.cols() != A_train.cols()) {
        throw validation_error("marker column mismatch between new and training lines");
    }
    const double m = static_cast<double>(A_train.cols());
    Eigen::MatrixXd out(A_new.rows(), A_train.rows());
    switch (provenance.function) {
        case KernelFunction::Linear:
            out = (A_new * A_train.transpose()) / m;
            break;
        case KernelFunction::Polynomial:
            out = (A_new * A_train.transpose()) / m;
            out = out.unaryExpr([&](double v) { return integer_power(v + provenance.c, provenance.d); });
            break;
        case KernelFunction::Gaussian:
            for (Eigen::Index i = 0; i < A_new.rows(); ++i) {
                for (Eigen::Index j = 0; j < A_train.rows(); ++j) {
                    out(i, j) = std::exp(-(A_new.row(i) - A_train.row(j)).squaredNorm() / provenance.h);
                }
            }
            break;
    }
    return out / normalization_factor;
}

void write_kernel(const std::filesystem::path& path, const KernelMatrix& kernel,
                  const std::vector<std::string>& line_ids) {
    io::Table table;
    table.header.push_back("line_id");
    for (const auto& id : line_ids) {
        table.header.push_back(id);
    }
    for (Eigen::Index r = 0; r < kernel.size(); ++r) {
        std::vector<std::string> row;
        row.push_back(line_ids[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < kernel.size(); ++c) {
            row.push_back(io::format_double(kernel.values(r, c)));
        }
        table.rows.push_back(std::move(row));
    }
    io::write_table(path, table);
}

void write_edges(const std::filesystem::path& path, const std::vector<Edge>& edges,
                 const std::vector<std::string>& line_ids) {
    io::Table table;
    table.header = {"line_a", "line_b", "value"};
    for (const Edge& edge : edges) {
        table.rows.push_back({line_ids[static_cast<std::size_t>(edge.a)],
                              line_ids[static_cast<std::size_t>(edge.b)],
                              io::format_double(edge.value)});
    }
    io::write_table(path, table);
}

}  // namespace legp::kernel
