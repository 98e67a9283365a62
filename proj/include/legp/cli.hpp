#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "legp/genomic_data.hpp"
#include "legp/kernel.hpp"
#include "legp/simulate.hpp"
#include "legp/spmm.hpp"

namespace legp::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Effective run configuration: JSON config file merged with flag overrides.
/// Config validation rejects unknown keys.
struct RunConfig {
    std::uint64_t seed = 1;
    int threads = 2;
    std::filesystem::path out = "run";
    std::string config_digest;  // hash of the config file bytes plus overrides

    struct Data {
        std::filesystem::path markers;
        std::filesystem::path map;
        std::filesystem::path phenotype;
        data::Coding coding = data::Coding::MinusOneZeroOne;
    } data_files;

    struct Kernel {
        kernel::KernelFunction function = kernel::KernelFunction::Linear;
        double c = 0.0;
        int d = 2;
        std::optional<double> h;  // nullopt = median heuristic
        bool normalize = true;
        bool center = true;
    } kernel_cfg;

    struct Partition {
        int levels = 2;
        int splits = 2;
    } partition;

    struct Fit {
        spmm::Method method = spmm::Method::REML;
        spmm::Structure structure = spmm::Structure::PerKernel;
        int pc_count = 0;
    } fit;

    struct Scan {
        double bandwidth = 5.0;
        int stride = 1;
    } scan;

    struct Test {
        double alpha = 0.05;
        std::string procedure = "meinshausen";  // or "threshold"
        double h2_floor = 0.1;
    } test;

    struct Combine {
        int n_lambda = 50;
        int cv_folds = 5;
        std::optional<double> lambda2;  // nullopt = auto (0, or ridge when k >= n)
        std::string regions = "all";    // or "significant"
    } combine;

    struct Predict {
        std::filesystem::path markers;
        std::filesystem::path covariates;  // optional
    } predict;

    struct Select {
        double h1 = 1.0;
        double h2 = 1.0;
        bool include_density = true;
    } select;

    struct Cross {
        std::string parent_a;
        std::string parent_b;
        int n_samples = 10000;
        bool dump_samples = false;
    } cross;

    sim::SimConfig simulate;
};

struct FlagOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
};

/// Parses and validates the JSON config file; path empty = all defaults.
RunConfig load_config(const std::filesystem::path& config_path, const FlagOverrides& overrides);

/// Builds the configured kernel for one region of the panel. Columns are
/// centered on the panel's means when the config asks for centering.
kernel::KernelMatrix build_region_kernel(const data::MarkerPanel& panel,
                                         const data::Region& region,
                                         const RunConfig::Kernel& cfg);

void cmd_simulate(const RunConfig& config);
void cmd_fit(const RunConfig& config);
void cmd_scan(const RunConfig& config);
void cmd_test(const RunConfig& config);
void cmd_combine(const RunConfig& config);
void cmd_predict(const RunConfig& config);
void cmd_select(const RunConfig& config);
void cmd_cross(const RunConfig& config);

/// Dispatches a subcommand name; throws validation_error for unknown names.
void run_command(const std::string& name, const RunConfig& config);

}  // namespace legp::cli
