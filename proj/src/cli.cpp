#include "legp/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "legp/breeding.hpp"
#include "legp/hierarchy.hpp"
#include "legp/lasso.hpp"
#include "legp/parallel.hpp"
#include "legp/table.hpp"

namespace legp::cli {

namespace {

using json = nlohmann::json;

void check_keys(const json& j, const std::string& section, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw validation_error("config section '" + section + "' must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (allowed.count(key) == 0) {
            throw validation_error("unknown config key '" + key + "' in section '" + section + "'");
        }
    }
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

data::Coding coding_from_string(const std::string& name) {
    if (name == "minus_one_zero_one") return data::Coding::MinusOneZeroOne;
    if (name == "zero_one_two") return data::Coding::ZeroOneTwo;
    throw validation_error("unknown coding: " + name);
}

spmm::Structure structure_from_string(const std::string& name) {
    if (name == "joint") return spmm::Structure::Joint;
    if (name == "marginal") return spmm::Structure::Marginal;
    if (name == "per_kernel") return spmm::Structure::PerKernel;
    throw validation_error("unknown fit structure: " + name);
}

std::string structure_to_string(spmm::Structure s) {
    switch (s) {
        case spmm::Structure::Joint: return "joint";
        case spmm::Structure::Marginal: return "marginal";
        case spmm::Structure::PerKernel: return "per_kernel";
    }
    return "unknown";
}

}  // namespace

RunConfig load_config(const std::filesystem::path& config_path, const FlagOverrides& overrides) {
    RunConfig cfg;
    json root = json::object();
    std::string raw;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            throw validation_error("cannot open config file: " + config_path.string());
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        raw = buffer.str();
        try {
            root = json::parse(raw);
        } catch (const json::exception& e) {
            throw validation_error("config parse error: " + std::string(e.what()));
        }
    }
    check_keys(root, "(top level)",
               {"seed", "threads", "out", "data", "kernel", "partition", "fit", "scan", "test",
                "combine", "predict", "select", "cross", "simulate"});

    cfg.seed = root.value("seed", cfg.seed);
    cfg.threads = root.value("threads", cfg.threads);
    cfg.out = std::filesystem::path(root.value("out", cfg.out.string()));
    if (cfg.threads < 1) {
        throw validation_error("threads must be >= 1");
    }

    if (root.contains("data")) {
        const json& j = root["data"];
        check_keys(j, "data", {"markers", "map", "phenotype", "coding"});
        cfg.data_files.markers = j.value("markers", std::string{});
        cfg.data_files.map = j.value("map", std::string{});
        cfg.data_files.phenotype = j.value("phenotype", std::string{});
        cfg.data_files.coding = coding_from_string(j.value("coding", std::string{"minus_one_zero_one"}));
    }
    if (root.contains("kernel")) {
        const json& j = root["kernel"];
        check_keys(j, "kernel", {"function", "c", "d", "h", "normalize", "center"});
        cfg.kernel_cfg.function =
            kernel::kernel_function_from_string(j.value("function", std::string{"linear"}));
        cfg.kernel_cfg.c = j.value("c", cfg.kernel_cfg.c);
        cfg.kernel_cfg.d = j.value("d", cfg.kernel_cfg.d);
        if (j.contains("h")) {
            if (j["h"].is_string()) {
                if (j["h"] != "median") {
                    throw validation_error("kernel.h must be a number or \"median\"");
                }
            } else {
                cfg.kernel_cfg.h = j["h"].get<double>();
            }
        }
        cfg.kernel_cfg.normalize = j.value("normalize", cfg.kernel_cfg.normalize);
        cfg.kernel_cfg.center = j.value("center", cfg.kernel_cfg.center);
    }
    if (root.contains("partition")) {
        const json& j = root["partition"];
        check_keys(j, "partition", {"levels", "splits"});
        cfg.partition.levels = j.value("levels", cfg.partition.levels);
        cfg.partition.splits = j.value("splits", cfg.partition.splits);
    }
    if (root.contains("fit")) {
        const json& j = root["fit"];
        check_keys(j, "fit", {"method", "structure", "pc_count"});
        cfg.fit.method = spmm::method_from_string(j.value("method", std::string{"reml"}));
        cfg.fit.structure = structure_from_string(j.value("structure", std::string{"per_kernel"}));
        cfg.fit.pc_count = j.value("pc_count", cfg.fit.pc_count);
    }
    if (root.contains("scan")) {
        const json& j = root["scan"];
        check_keys(j, "scan", {"bandwidth", "stride"});
        cfg.scan.bandwidth = j.value("bandwidth", cfg.scan.bandwidth);
        cfg.scan.stride = j.value("stride", cfg.scan.stride);
    }
    if (root.contains("test")) {
        const json& j = root["test"];
        check_keys(j, "test", {"alpha", "procedure", "h2_floor"});
        cfg.test.alpha = j.value("alpha", cfg.test.alpha);
        cfg.test.procedure = j.value("procedure", cfg.test.procedure);
        cfg.test.h2_floor = j.value("h2_floor", cfg.test.h2_floor);
        if (cfg.test.alpha <= 0.0 || cfg.test.alpha >= 1.0) {
            throw validation_error("test.alpha must lie in (0, 1)");
        }
        if (cfg.test.procedure != "meinshausen" && cfg.test.procedure != "threshold") {
            throw validation_error("test.procedure must be meinshausen or threshold");
        }
    }
    if (root.contains("combine")) {
        const json& j = root["combine"];
        check_keys(j, "combine", {"n_lambda", "cv_folds", "lambda2", "regions"});
        cfg.combine.n_lambda = j.value("n_lambda", cfg.combine.n_lambda);
        cfg.combine.cv_folds = j.value("cv_folds", cfg.combine.cv_folds);
        if (j.contains("lambda2")) {
            if (j["lambda2"].is_string()) {
                if (j["lambda2"] != "auto") {
                    throw validation_error("combine.lambda2 must be a number or \"auto\"");
                }
            } else {
                cfg.combine.lambda2 = j["lambda2"].get<double>();
            }
        }
        cfg.combine.regions = j.value("regions", cfg.combine.regions);
        if (cfg.combine.regions != "all" && cfg.combine.regions != "significant") {
            throw validation_error("combine.regions must be all or significant");
        }
    }
    if (root.contains("predict")) {
        const json& j = root["predict"];
        check_keys(j, "predict", {"markers", "covariates"});
        cfg.predict.markers = j.value("markers", std::string{});
        cfg.predict.covariates = j.value("covariates", std::string{});
    }
    if (root.contains("select")) {
        const json& j = root["select"];
        check_keys(j, "select", {"h1", "h2", "include_density"});
        cfg.select.h1 = j.value("h1", cfg.select.h1);
        cfg.select.h2 = j.value("h2", cfg.select.h2);
        cfg.select.include_density = j.value("include_density", cfg.select.include_density);
    }
    if (root.contains("cross")) {
        const json& j = root["cross"];
        check_keys(j, "cross", {"parent_a", "parent_b", "n_samples", "dump_samples"});
        cfg.cross.parent_a = j.value("parent_a", cfg.cross.parent_a);
        cfg.cross.parent_b = j.value("parent_b", cfg.cross.parent_b);
        cfg.cross.n_samples = j.value("n_samples", cfg.cross.n_samples);
        cfg.cross.dump_samples = j.value("dump_samples", cfg.cross.dump_samples);
    }
    if (root.contains("simulate")) {
        const json& j = root["simulate"];
        check_keys(j, "simulate",
                   {"n_chromosomes", "chrom_length_cm", "markers_per_chromosome",
                    "n_qtl_per_chromosome", "qtl_per_chromosome", "n_generations", "n_individuals",
                    "target_h2", "hide_qtl"});
        cfg.simulate.n_chromosomes = j.value("n_chromosomes", cfg.simulate.n_chromosomes);
        cfg.simulate.chrom_length_cm = j.value("chrom_length_cm", cfg.simulate.chrom_length_cm);
        cfg.simulate.markers_per_chromosome =
            j.value("markers_per_chromosome", cfg.simulate.markers_per_chromosome);
        cfg.simulate.n_qtl_per_chromosome =
            j.value("n_qtl_per_chromosome", cfg.simulate.n_qtl_per_chromosome);
        if (j.contains("qtl_per_chromosome")) {
            cfg.simulate.qtl_per_chromosome = j["qtl_per_chromosome"].get<std::vector<int>>();
        }
        cfg.simulate.n_generations = j.value("n_generations", cfg.simulate.n_generations);
        cfg.simulate.n_individuals = j.value("n_individuals", cfg.simulate.n_individuals);
        cfg.simulate.target_h2 = j.value("target_h2", cfg.simulate.target_h2);
        cfg.simulate.hide_qtl = j.value("hide_qtl", cfg.simulate.hide_qtl);
    }

    if (overrides.seed.has_value()) cfg.seed = *overrides.seed;
    if (overrides.out.has_value()) cfg.out = *overrides.out;
    if (overrides.threads.has_value()) cfg.threads = *overrides.threads;
    cfg.simulate.seed = cfg.seed;
    std::ostringstream digest_input;
    digest_input << raw << '|' << cfg.seed << '|' << cfg.out.string() << '|' << cfg.threads;
    cfg.config_digest = hex64(fnv1a(digest_input.str()));
    return cfg;
}

kernel::KernelMatrix build_region_kernel(const data::MarkerPanel& panel,
                                         const data::Region& region,
                                         const RunConfig::Kernel& cfg) {
    Eigen::MatrixXd A = data::region_markers(panel, region);
    if (cfg.center) {
        A = data::centered_columns(A);
    }
    kernel::KernelOptions options;
    options.normalize = cfg.normalize;
    kernel::KernelMatrix out;
    switch (cfg.function) {
        case kernel::KernelFunction::Linear:
            out = kernel::linear_kernel(A, options);
            break;
        case kernel::KernelFunction::Polynomial:
            out = kernel::polynomial_kernel(A, cfg.c, cfg.d, options);
            break;
        case kernel::KernelFunction::Gaussian:
            out = kernel::gaussian_kernel(A, cfg.h, options);
            break;
    }
    out.provenance.source = region.id;
    return out;
}

namespace {

struct LoadedData {
    data::MarkerPanel panel;
    data::Phenotype phenotype;
};

LoadedData load_data(const RunConfig& cfg) {
    if (cfg.data_files.markers.empty() || cfg.data_files.map.empty() ||
        cfg.data_files.phenotype.empty()) {
        throw validation_error("data.markers, data.map and data.phenotype are required");
    }
    LoadedData out;
    out.panel = data::load_marker_panel(cfg.data_files.markers, cfg.data_files.map,
                                        cfg.data_files.coding);
    out.phenotype = data::load_phenotype(cfg.data_files.phenotype, out.panel);
    return out;
}

void write_manifest(const RunConfig& cfg, const std::string& command,
                    std::vector<std::string> outputs) {
    std::sort(outputs.begin(), outputs.end());
    json manifest;
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["seed"] = cfg.seed;
    manifest["threads"] = cfg.threads;
    manifest["config_hash"] = cfg.config_digest;
    manifest["outputs"] = outputs;
    std::ofstream out(cfg.out / "run_manifest.json");
    if (!out) {
        throw validation_error("cannot write manifest in " + cfg.out.string());
    }
    out << manifest.dump(2) << "\n";
}

struct RegionFits {
    std::vector<data::Region> regions;  // tree nodes, breadth first
    std::vector<int> levels;
    std::vector<kernel::KernelMatrix> kernels;
    std::vector<spmm::FitResult> fits;  // one per region (per_kernel / marginal); single for joint
    Eigen::MatrixXd eblups;             // q x k
    Eigen::VectorXd h2;                 // per region
    spmm::Structure structure = spmm::Structure::PerKernel;
};

/// Partition, kernel construction and region fits under the configured
/// structure. `only_regions` restricts to a subset of node ids.
RegionFits run_region_fits(const RunConfig& cfg, const LoadedData& data,
                           const data::RegionTree& tree,
                           const std::set<std::string>* only_regions = nullptr) {
    RegionFits out;
    out.structure = cfg.fit.structure;
    for (const data::RegionTree* node : tree.breadth_first()) {
        if (only_regions != nullptr && only_regions->count(node->region.id) == 0) {
            continue;
        }
        out.regions.push_back(node->region);
        out.levels.push_back(node->level);
    }
    out.kernels.resize(out.regions.size());
    parallel_for(static_cast<int>(out.regions.size()), cfg.threads, [&](int i) {
        out.kernels[static_cast<std::size_t>(i)] =
            build_region_kernel(data.panel, out.regions[static_cast<std::size_t>(i)], cfg.kernel_cfg);
    });

    spmm::FitOptions options;
    options.method = cfg.fit.method;
    const auto k = static_cast<Eigen::Index>(out.regions.size());
    const Eigen::Index q = data.panel.line_count();
    out.eblups.resize(q, k);
    out.h2.resize(k);

    if (cfg.fit.structure == spmm::Structure::Joint) {
        spmm::FitResult fit = spmm::fit_joint(data.phenotype, out.kernels, options);
        out.eblups = fit.eblups;
        out.h2 = fit.heritabilities;
        out.fits.push_back(std::move(fit));
    } else if (cfg.fit.structure == spmm::Structure::Marginal) {
        out.fits.resize(out.regions.size());
        parallel_for(static_cast<int>(out.regions.size()), cfg.threads, [&](int i) {
            const auto idx = static_cast<std::size_t>(i);
            if (out.regions[idx].size() == static_cast<int>(data.panel.marker_count())) {
                out.fits[idx] = spmm::fit_single(data.phenotype, out.kernels[idx], options);
            } else {
                const kernel::KernelMatrix background = build_region_kernel(
                    data.panel, data::complement_region(data.panel, out.regions[idx]),
                    cfg.kernel_cfg);
                out.fits[idx] =
                    spmm::fit_marginal(data.phenotype, out.kernels[idx], background, options);
            }
        });
        for (Eigen::Index j = 0; j < k; ++j) {
            out.eblups.col(j) = out.fits[static_cast<std::size_t>(j)].eblups.col(0);
            out.h2(j) = out.fits[static_cast<std::size_t>(j)].heritabilities(0);
        }
    } else {
        Eigen::MatrixXd pc_scores;
        if (cfg.fit.pc_count > 0) {
            pc_scores = data::marker_principal_components(data.panel, cfg.fit.pc_count);
        }
        out.fits.resize(out.regions.size());
        parallel_for(static_cast<int>(out.regions.size()), cfg.threads, [&](int i) {
            const auto idx = static_cast<std::size_t>(i);
            const std::vector<kernel::KernelMatrix> one{out.kernels[idx]};
            out.fits[idx] = spmm::fit_per_kernel(data.phenotype, one, options,
                                                 cfg.fit.pc_count > 0 ? &pc_scores : nullptr)
                                .front();
        });
        for (Eigen::Index j = 0; j < k; ++j) {
            out.eblups.col(j) = out.fits[static_cast<std::size_t>(j)].eblups.col(0);
            out.h2(j) = out.fits[static_cast<std::size_t>(j)].heritabilities(0);
        }
    }
    return out;
}

json provenance_to_json(const kernel::KernelMatrix& k) {
    json j;
    j["function"] = kernel::to_string(k.provenance.function);
    j["c"] = k.provenance.c;
    j["d"] = k.provenance.d;
    j["h"] = k.provenance.h;
    j["normalization_factor"] = k.normalization_factor;
    return j;
}

void write_predictor(const RunConfig& cfg, const LoadedData& data, const RegionFits& rf,
                     const std::filesystem::path& path) {
    json out;
    out["version"] = kVersion;
    out["method"] = spmm::to_string(cfg.fit.method);
    out["structure"] = structure_to_string(rf.structure);
    out["center"] = cfg.kernel_cfg.center;
    out["covariate_count"] = data.phenotype.covariates().cols();
    out["regions"] = json::array();
    for (std::size_t i = 0; i < rf.regions.size(); ++i) {
        json region;
        region["id"] = rf.regions[i].id;
        region["level"] = rf.levels[i];
        json marker_ids = json::array();
        for (int idx : rf.regions[i].marker_indices) {
            marker_ids.push_back(data.panel.map.entries[static_cast<std::size_t>(idx)].marker_id);
        }
        region["marker_ids"] = marker_ids;
        region["kernel"] = provenance_to_json(rf.kernels[i]);
        region["h2"] = rf.h2(static_cast<Eigen::Index>(i));
        const spmm::FitResult& fit =
            rf.structure == spmm::Structure::Joint ? rf.fits.front() : rf.fits[i];
        const Eigen::Index dual_col = rf.structure == spmm::Structure::Joint
                                          ? static_cast<Eigen::Index>(i)
                                          : 0;
        const Eigen::VectorXd& dual = fit.dual_weights[static_cast<std::size_t>(dual_col)];
        region["dual"] = std::vector<double>(dual.data(), dual.data() + dual.size());
        region["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
        out["regions"].push_back(std::move(region));
    }
    std::ofstream file(path);
    if (!file) {
        throw validation_error("cannot write predictor file: " + path.string());
    }
    file << out.dump(2) << "\n";
}

void write_fit_reports(const RunConfig& cfg, const LoadedData& data, const RegionFits& rf) {
    std::vector<std::string> region_ids;
    for (const auto& region : rf.regions) {
        region_ids.push_back(region.id);
    }
    std::ofstream report(cfg.out / "fit_report.txt");
    if (!report) {
        throw validation_error("cannot write fit report");
    }
    report << "method " << spmm::to_string(cfg.fit.method) << "\n";
    report << "structure " << structure_to_string(rf.structure) << "\n";
    report << "regions " << rf.regions.size() << "\n";
    const double h2_total = rf.h2.sum();
    for (std::size_t i = 0; i < rf.regions.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        const spmm::FitResult& fit =
            rf.structure == spmm::Structure::Joint ? rf.fits.front() : rf.fits[i];
        const Eigen::Index comp = rf.structure == spmm::Structure::Joint ? j : 0;
        const std::string prefix = "region." + rf.regions[i].id + ".";
        report << prefix << "level " << rf.levels[i] << "\n";
        report << prefix << "n_markers " << rf.regions[i].size() << "\n";
        report << prefix << "sigma_g2 " << io::format_double(fit.sigma_g2(comp)) << "\n";
        report << prefix << "lambda " << io::format_double(fit.lambda(comp)) << "\n";
        report << prefix << "h2 " << io::format_double(rf.h2(j)) << "\n";
        report << prefix << "sigma_e2 " << io::format_double(fit.sigma_e2) << "\n";
        report << prefix << "loglik " << io::format_double(fit.loglik) << "\n";
        report << prefix << "reml_loglik " << io::format_double(fit.reml_loglik) << "\n";
        report << prefix << "converged " << (fit.converged ? 1 : 0) << "\n";
        if (h2_total > 0.0) {
            report << prefix << "weight " << io::format_double(rf.h2(j) / h2_total) << "\n";
        }
        for (const auto& w : fit.warnings) {
            report << prefix << "warning " << w << "\n";
        }
    }
    if (h2_total <= 0.0) {
        report << "warning no genetic signal; heritability weights undefined\n";
    }
    spmm::write_eblups(cfg.out / "eblups.csv", rf.eblups, data.panel.line_ids, region_ids);
}

/// New-lines marker matrix with columns matched to `marker_ids` by header
/// name; values are coded the same way as the training panel.
std::pair<std::vector<std::string>, Eigen::MatrixXd> load_new_lines(
    const std::filesystem::path& path, const std::vector<std::string>& marker_ids,
    data::Coding coding) {
    const io::Table table = io::read_table(path);
    if (table.header.size() < 2) {
        throw validation_error("prediction marker file needs line ids and marker columns");
    }
    std::map<std::string, std::size_t> col_of;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        col_of[table.header[c]] = c;
    }
    const double shift = coding == data::Coding::ZeroOneTwo ? -1.0 : 0.0;
    Eigen::MatrixXd markers(static_cast<Eigen::Index>(table.rows.size()),
                            static_cast<Eigen::Index>(marker_ids.size()));
    std::vector<std::string> line_ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != table.header.size()) {
            throw validation_error("prediction marker row " + std::to_string(r + 2) +
                                   " does not match the header width");
        }
        line_ids.push_back(table.rows[r][0]);
        for (std::size_t m = 0; m < marker_ids.size(); ++m) {
            auto it = col_of.find(marker_ids[m]);
            if (it == col_of.end()) {
                throw validation_error("prediction file is missing marker " + marker_ids[m]);
            }
            const std::string& cell = table.rows[r][it->second];
            if (cell.empty()) {
                throw validation_error("missing genotype for line " + table.rows[r][0] +
                                       " at marker " + marker_ids[m]);
            }
            markers(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m)) =
                io::parse_double(cell, "marker " + marker_ids[m]) + shift;
        }
    }
    return {line_ids, markers};
}

/// Covariate rows for new lines, in the given line order.
Eigen::MatrixXd load_new_covariates(const std::filesystem::path& path,
                                    const std::vector<std::string>& line_ids,
                                    Eigen::Index n_covariates) {
    if (path.empty()) {
        throw validation_error("this model uses covariates; set predict.covariates");
    }
    const io::Table table = io::read_table(path);
    if (static_cast<Eigen::Index>(table.header.size()) != n_covariates + 1) {
        throw validation_error("covariate file must have line_id plus " +
                               std::to_string(n_covariates) + " columns");
    }
    std::map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        row_of[table.rows[r][0]] = r;
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(line_ids.size()), n_covariates);
    for (std::size_t i = 0; i < line_ids.size(); ++i) {
        auto it = row_of.find(line_ids[i]);
        if (it == row_of.end()) {
            throw validation_error("covariate file is missing line " + line_ids[i]);
        }
        for (Eigen::Index c = 0; c < n_covariates; ++c) {
            out(static_cast<Eigen::Index>(i), c) =
                io::parse_double(table.rows[it->second][static_cast<std::size_t>(c + 1)],
                                 "covariate of " + line_ids[i]);
        }
    }
    return out;
}

}  // namespace

void cmd_simulate(const RunConfig& config) {
    std::filesystem::create_directories(config.out);
    const sim::Simulated result = sim::simulate_population(config.simulate);
    data::write_marker_panel(config.out / "markers.csv", config.out / "map.csv", result.panel);
    data::write_phenotype(config.out / "phenotype.csv", result.panel, result.phenotype);
    sim::write_truth(config.out / "truth.csv", result.truth);
    write_manifest(config, "simulate", {"markers.csv", "map.csv", "phenotype.csv", "truth.csv"});
}

void cmd_fit(const RunConfig& config) {
    std::filesystem::create_directories(config.out);
    const LoadedData data = load_data(config);
    const data::RegionTree tree =
        data::partition_genome(data.panel, config.partition.levels, config.partition.splits);
    const RegionFits rf = run_region_fits(config, data, tree);
    write_fit_reports(config, data, rf);
    write_predictor(config, data, rf, config.out / "predictor.json");
    hier::write_region_tree(config.out / "regions.json", tree);
    write_manifest(config, "fit", {"fit_report.txt", "eblups.csv", "predictor.json", "regions.json"});
}

void cmd_scan(const RunConfig& config) {
    std::filesystem::create_directories(config.out);
    LoadedData data = load_data(config);
    if (config.scan.stride < 1) {
        throw validation_error("scan.stride must be >= 1");
    }
    if (config.kernel_cfg.center) {
        data.panel.markers = data::centered_columns(data.panel.markers);
    }
    std::vector<int> centers;
    for (Eigen::Index c = 0; c < data.panel.marker_count(); c += config.scan.stride) {
        if (!data.panel.map.is_unmapped(static_cast<int>(c))) {
            centers.push_back(static_cast<int>(c));
        }
    }
    if (centers.empty()) {
        throw validation_error("no mapped scan centers");
    }
    spmm::FitOptions options;
    options.method = config.fit.method;
    kernel::KernelOptions kopts;
    kopts.normalize = config.kernel_cfg.normalize;
    std::vector<double> local_h2(centers.size());
    parallel_for(static_cast<int>(centers.size()), config.threads, [&](int i) {
        const kernel::KernelMatrix local =
            kernel::kernel_scan(data.panel, centers[static_cast<std::size_t>(i)],
                                config.scan.bandwidth, config.kernel_cfg.function, kopts);
        local_h2[static_cast<std::size_t>(i)] =
            spmm::fit_single(data.phenotype, local, options).heritabilities(0);
    });
    io::Table track;
    track.header = {"chromosome", "cM", "marker_id", "local_h2"};
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const auto& entry = data.panel.map.entries[static_cast<std::size_t>(centers[i])];
        track.rows.push_back({std::to_string(entry.chromosome), io::format_double(entry.position_cm),
                              entry.marker_id, io::format_double(local_h2[i])});
    }
    io::write_table(config.out / "scan.csv", track);
    write_manifest(config, "scan", {"scan.csv"});
}

void cmd_test(const RunConfig& config) {
    std::filesystem::create_directories(config.out);
    const LoadedData data = load_data(config);
    const data::RegionTree tree =
        data::partition_genome(data.panel, config.partition.levels, config.partition.splits);
    const hier::KernelBuilder builder = [&](const data::Region& region) {
        return build_region_kernel(data.panel, region, config.kernel_cfg);
    };
    spmm::FitOptions options;
    options.method = config.fit.method;
    hier::HierarchyReport report;
    if (config.test.procedure == "threshold") {
        report = hier::threshold_scan(tree, data.panel, data.phenotype, builder,
                                      config.test.h2_floor, config.fit.method, options,
                                      config.threads);
    } else {
        report = hier::hierarchical_scan(tree, data.panel, data.phenotype, builder,
                                         config.test.alpha, config.fit.method, options,
                                         config.threads);
    }
    hier::write_hierarchy_report(config.out / "hierarchy_report.csv", report);
    hier::write_region_tree(config.out / "regions.json", tree);
    write_manifest(config, "test", {"hierarchy_report.csv", "regions.json"});
}

void cmd_combine(const RunConfig& config) {
    std::filesystem::create_directories(config.out);
    const LoadedData data = load_data(config);
    const data::RegionTree tree =
        data::partition_genome(data.panel, config.partition.levels, config.partition.splits);

    std::set<std::string> kept;
    bool restrict_regions = false;
    if (config.combine.regions == "significant") {
        restrict_regions = true;
        const hier::KernelBuilder builder = [&](const data::Region& region) {
            return build_region_kernel(data.panel, region, config.kernel_cfg);
        };
        spmm::FitOptions options;
        options.method = config.fit.method;
        const hier::HierarchyReport report =
            hier::hierarchical_scan(tree, data.panel, data.phenotype, builder, config.test.alpha,
                                    config.fit.method, options, config.threads);
        for (const auto& node : report.nodes) {
            if (node.decision == hier::Decision::Rejected) {
                kept.insert(node.region_id);
            }
        }
        if (kept.empty()) {
            kept.insert(tree.region.id);  // intercept-only would drop every region
        }
    }
    const RegionFits rf = run_region_fits(config, data, tree, restrict_regions ? &kept : nullptr);

    std::vector<std::string> region_ids;
    for (const auto& region : rf.regions) {
        region_ids.push_back(region.id);
    }
    // EBLUP rows follow phenotype observations.
    Eigen::MatrixXd G(data.phenotype.n(), rf.eblups.cols());
    for (Eigen::Index i = 0; i < data.phenotype.n(); ++i) {
        G.row(i) = rf.eblups.row(data.phenotype.line_index[static_cast<std::size_t>(i)]);
    }
    const lasso::DesignBundle bundle =
        lasso::assemble_design(G, data.phenotype.covariates(), region_ids);
    double lambda2 = 0.0;
    if (config.combine.lambda2.has_value()) {
        lambda2 = *config.combine.lambda2;
    } else if (bundle.k() >= bundle.n()) {
        lambda2 = 1e-3 * static_cast<double>(bundle.n() - 1);
    }
    const lasso::PathReport path =
        lasso::lambda_path(bundle, data.phenotype.values, config.combine.n_lambda,
                           config.combine.cv_folds, lambda2, config.seed, config.threads);
    const lasso::CombinedModel model =
        lasso::fit_lasso(bundle, data.phenotype.values, path.chosen_lambda1, lambda2);

    lasso::write_model(config.out / "model.txt", model);
    std::vector<int> levels;
    for (const auto& id : bundle.column_ids) {
        int level = 0;
        for (std::size_t i = 0; i < rf.regions.size(); ++i) {
            if (rf.regions[i].id == id) {
                level = rf.levels[i];
                break;
            }
        }
        levels.push_back(level);
    }
    lasso::write_importance(config.out / "importance.csv", model, levels);
    io::Table path_table;
    path_table.header = {"lambda1", "cv_mse", "cv_se", "nonzero"};
    for (const auto& pt : path.points) {
        path_table.rows.push_back({io::format_double(pt.lambda1), io::format_double(pt.cv_mse),
                                   io::format_double(pt.cv_se), std::to_string(pt.nonzero)});
    }
    io::write_table(config.out / "lambda_path.csv", path_table);
    write_predictor(config, data, rf, config.out / "predictor.json");
    write_manifest(config, "combine",
                   {"model.txt", "importance.csv", "lambda_path.csv", "predictor.json"});
}

void cmd_predict(const RunConfig& config) {
    std::filesystem::create_directories(config.out);
    const LoadedData data = load_data(config);
    if (config.predict.markers.empty()) {
        throw validation_error("predict.markers is required");
    }
    const std::filesystem::path predictor_path = config.out / "predictor.json";
    std::ifstream predictor_file(predictor_path);
    if (!predictor_file) {
        throw validation_error("no predictor.json in " + config.out.string() +
                               "; run fit or combine first");
    }
    json predictor;
    try {
        predictor_file >> predictor;
    } catch (const json::exception& e) {
        throw validation_error("predictor parse error: " + std::string(e.what()));
    }

    // Region EBLUP extensions for the new lines.
    std::vector<std::string> region_ids;
    std::vector<std::string> new_line_ids;
    Eigen::MatrixXd new_eblups;
    Eigen::MatrixXd joint_prediction;
    const bool center = predictor.value("center", true);
    const std::string structure = predictor.value("structure", std::string{"per_kernel"});
    std::vector<Eigen::VectorXd> per_region_beta;
    for (std::size_t r = 0; r < predictor["regions"].size(); ++r) {
        const json& region = predictor["regions"][r];
        region_ids.push_back(region["id"].get<std::string>());
        const auto marker_ids = region["marker_ids"].get<std::vector<std::string>>();
        auto [line_ids, markers] =
            load_new_lines(config.predict.markers, marker_ids, config.data_files.coding);
        // Training-side columns for the cross kernel.
        std::vector<int> train_cols;
        for (const auto& id : marker_ids) {
            for (std::size_t c = 0; c < data.panel.map.entries.size(); ++c) {
                if (data.panel.map.entries[c].marker_id == id) {
                    train_cols.push_back(static_cast<int>(c));
                    break;
                }
            }
        }
        if (train_cols.size() != marker_ids.size()) {
            throw validation_error("predictor references markers missing from the training panel");
        }
        Eigen::MatrixXd a_train(data.panel.line_count(), static_cast<Eigen::Index>(train_cols.size()));
        for (std::size_t c = 0; c < train_cols.size(); ++c) {
            a_train.col(static_cast<Eigen::Index>(c)) = data.panel.markers.col(train_cols[c]);
        }
        if (center) {
            const Eigen::RowVectorXd means = a_train.colwise().mean();
            a_train.rowwise() -= means;
            markers.rowwise() -= means;
        }
        kernel::Provenance prov;
        prov.function = kernel::kernel_function_from_string(region["kernel"]["function"]);
        prov.c = region["kernel"]["c"].get<double>();
        prov.d = region["kernel"]["d"].get<int>();
        prov.h = region["kernel"]["h"].get<double>();
        const double norm = region["kernel"]["normalization_factor"].get<double>();
        const Eigen::MatrixXd cross = kernel::cross_kernel(markers, a_train, prov, norm);
        const auto dual_vec = region["dual"].get<std::vector<double>>();
        const Eigen::VectorXd dual =
            Eigen::Map<const Eigen::VectorXd>(dual_vec.data(),
                                              static_cast<Eigen::Index>(dual_vec.size()));
        if (new_eblups.size() == 0) {
            new_line_ids = line_ids;
            new_eblups.resize(markers.rows(), static_cast<Eigen::Index>(predictor["regions"].size()));
        }
        new_eblups.col(static_cast<Eigen::Index>(r)) = cross * dual;
        const auto beta_vec = region["beta"].get<std::vector<double>>();
        per_region_beta.push_back(Eigen::Map<const Eigen::VectorXd>(
            beta_vec.data(), static_cast<Eigen::Index>(beta_vec.size())));
    }

    const std::filesystem::path model_path = config.out / "model.txt";
    io::Table out_table;
    out_table.header = {"line_id", "prediction", "genotypic_value"};
    if (std::filesystem::exists(model_path)) {
        const lasso::CombinedModel model = lasso::read_model(model_path);
        // Align EBLUP columns with the model's kept columns.
        Eigen::MatrixXd aligned(new_eblups.rows(), model.alpha.size());
        for (Eigen::Index j = 0; j < model.alpha.size(); ++j) {
            const auto it = std::find(region_ids.begin(), region_ids.end(),
                                      model.column_ids[static_cast<std::size_t>(j)]);
            if (it == region_ids.end()) {
                throw validation_error("model column " +
                                       model.column_ids[static_cast<std::size_t>(j)] +
                                       " missing from predictor regions");
            }
            aligned.col(j) = new_eblups.col(static_cast<Eigen::Index>(it - region_ids.begin()));
        }
        Eigen::MatrixXd covariates(aligned.rows(), 0);
        if (model.beta.size() > 0) {
            covariates = load_new_covariates(config.predict.covariates, new_line_ids,
                                             model.beta.size());
        }
        const lasso::CombinedPrediction pred = lasso::predict_combined(model, aligned, covariates);
        for (Eigen::Index i = 0; i < pred.full.size(); ++i) {
            out_table.rows.push_back({new_line_ids[static_cast<std::size_t>(i)],
                                      io::format_double(pred.full(i)),
                                      io::format_double(pred.genotypic(i))});
        }
    } else if (structure == "joint") {
        // Direct SPMM prediction: fixed effects plus the kernel extensions.
        const Eigen::VectorXd& beta = per_region_beta.front();
        Eigen::VectorXd pred = Eigen::VectorXd::Constant(new_eblups.rows(), beta(0));
        if (beta.size() > 1) {
            const Eigen::MatrixXd covariates =
                load_new_covariates(config.predict.covariates, new_line_ids, beta.size() - 1);
            pred += covariates * beta.tail(beta.size() - 1);
        }
        const Eigen::VectorXd genotypic = new_eblups.rowwise().sum();
        pred += genotypic;
        for (Eigen::Index i = 0; i < pred.size(); ++i) {
            out_table.rows.push_back({new_line_ids[static_cast<std::size_t>(i)],
                                      io::format_double(pred(i)),
                                      io::format_double(genotypic(i))});
        }
    } else {
        throw validation_error("per-kernel and marginal fits need a combined model for "
                               "prediction; run combine first");
    }
    io::write_table(config.out / "predictions.csv", out_table);
    write_manifest(config, "predict", {"predictions.csv"});
}

void cmd_select(const RunConfig& config) {
    std::filesystem::create_directories(config.out);
    const LoadedData data = load_data(config);
    const data::RegionTree tree =
        data::partition_genome(data.panel, config.partition.levels, config.partition.splits);
    // Selection uses the finest (leaf) partition: disjoint regions.
    std::set<std::string> leaf_ids;
    for (const data::Region* leaf : tree.leaves()) {
        leaf_ids.insert(leaf->id);
    }
    const RegionFits rf = run_region_fits(config, data, tree, &leaf_ids);

    breed::SelectionInput input;
    input.eblups = rf.eblups;
    input.densities.resize(data.panel.line_count(), rf.eblups.cols());
    Warnings warnings;
    for (std::size_t j = 0; j < rf.regions.size(); ++j) {
        input.densities.col(static_cast<Eigen::Index>(j)) =
            breed::region_density(data.panel, rf.regions[j], &warnings);
    }
    const double h2_total = rf.h2.sum();
    input.kernel_weights = h2_total > 0.0
                               ? Eigen::VectorXd(rf.h2 / h2_total)
                               : Eigen::VectorXd::Constant(rf.h2.size(),
                                                           1.0 / static_cast<double>(rf.h2.size()));
    input.h1 = config.select.h1;
    input.h2 = config.select.h2;
    const Eigen::VectorXd jannink = breed::jannink_index(input);
    const Eigen::VectorXd preference =
        breed::preference_index(input, config.select.include_density, &warnings);
    breed::write_selection_report(config.out / "selection_report.csv", data.panel.line_ids, jannink,
                                  preference);
    write_manifest(config, "select", {"selection_report.csv"});
}

void cmd_cross(const RunConfig& config) {
    std::filesystem::create_directories(config.out);
    const LoadedData data = load_data(config);
    if (config.cross.parent_a.empty() || config.cross.parent_b.empty()) {
        throw validation_error("cross.parent_a and cross.parent_b are required");
    }
    const int a = data.panel.line_index_of(config.cross.parent_a);
    const int b = data.panel.line_index_of(config.cross.parent_b);
    if (a < 0 || b < 0) {
        throw validation_error("cross parents must be lines in the marker panel");
    }
    const data::RegionTree tree =
        data::partition_genome(data.panel, config.partition.levels, config.partition.splits);
    std::set<std::string> leaf_ids;
    for (const data::Region* leaf : tree.leaves()) {
        leaf_ids.insert(leaf->id);
    }
    const RegionFits rf = run_region_fits(config, data, tree, &leaf_ids);
    breed::CrossDistribution cross =
        breed::cross_distribution(rf.eblups.row(a), rf.eblups.row(b), config.cross.n_samples,
                                  config.seed, breed::CrossMode::Auto);
    cross.parent_ids = {config.cross.parent_a, config.cross.parent_b};
    breed::write_cross_report(config.out / "cross_report.csv", cross);
    std::vector<std::string> outputs{"cross_report.csv"};
    if (config.cross.dump_samples) {
        io::Table dump;
        if (cross.exact) {
            dump.header = {"value", "probability"};
            for (const auto& [value, prob] : cross.pmf) {
                dump.rows.push_back({io::format_double(value), io::format_double(prob)});
            }
        } else {
            dump.header = {"value"};
            for (Eigen::Index i = 0; i < cross.samples.size(); ++i) {
                dump.rows.push_back({io::format_double(cross.samples(i))});
            }
        }
        io::write_table(config.out / "cross_samples.csv", dump);
        outputs.push_back("cross_samples.csv");
    }
    write_manifest(config, "cross", outputs);
}

void run_command(const std::string& name, const RunConfig& config) {
    if (name == "simulate") return cmd_simulate(config);
    if (name == "fit") return cmd_fit(config);
    if (name == "scan") return cmd_scan(config);
    if (name == "test") return cmd_test(config);
    if (name == "combine") return cmd_combine(config);
    if (name == "predict") return cmd_predict(config);
    if (name == "select") return cmd_select(config);
    if (name == "cross") return cmd_cross(config);
    throw validation_error("unknown command: " + name);
}

}  // namespace legp::cli
